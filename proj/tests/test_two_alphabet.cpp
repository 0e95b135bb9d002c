#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tractdyn/error.hpp"
#include "tractdyn/two_alphabet.hpp"

#include <functional>
#include <set>

using namespace tractdyn;
using oracle::Rational;
using tractdyn::fraction;

namespace {

std::vector<std::string> names(const std::string &prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(prefix + std::to_string(i));
    }
    return out;
}

TwoAlphabetModel identity_model(std::size_t n) {
    std::vector<std::size_t> id(n);
    for (std::size_t i = 0; i < n; ++i) {
        id[i] = i;
    }
    return build_model(names("s", n), names("t", n), id, id, std::vector<Rational>(n, Rational(1)));
}

// N = 2, n = k = 1, index = a + 2b for the word ab, J = first symbol, γ(ab) = b.
TwoAlphabetModel shift_model() {
    return build_model({"00", "10", "01", "11"}, {"0", "1"}, {0, 1, 0, 1}, {0, 0, 1, 1},
                       std::vector<Rational>(4, fraction(1, 2)));
}

// Lebesgue model of the three-interval example: halves of I1, I2, I3.
TwoAlphabetModel example_b_model() {
    return build_model({"I1.1", "I1.2", "I2.1", "I2.2", "I3.1", "I3.2"}, {"I1", "I2", "I3"},
                       {0, 0, 1, 1, 2, 2}, {0, 0, 1, 2, 2, 2}, std::vector<Rational>(6, fraction(1, 2)));
}

using oracle::random_model;

std::vector<std::vector<std::size_t>> path_words(const FiniteRelation &r, std::size_t length) {
    std::vector<std::vector<std::size_t>> out;
    std::function<void(std::vector<std::size_t> &)> grow = [&](std::vector<std::size_t> &w) {
        if (w.size() == length) {
            out.push_back(w);
            return;
        }
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (w.empty() || r.contains(w.back(), t)) {
                w.push_back(t);
                grow(w);
                w.pop_back();
            }
        }
    };
    std::vector<std::size_t> w;
    grow(w);
    return out;
}

} // namespace

TEST_CASE("model validation") {
    CHECK_NOTHROW(identity_model(3));
    CHECK_NOTHROW(shift_model());
    CHECK_THROWS_AS(build_model({"a", "b"}, {"s"}, {0, 0}, {0, 0}, std::vector<Rational>{fraction(1, 3), fraction(1, 3)}),
                    ValidationError);
    CHECK_THROWS_AS(build_model({"a", "b"}, {"s", "t"}, {0, 0}, {0, 1}, std::vector<Rational>{fraction(1, 2), fraction(1, 2)}),
                    ValidationError);
    CHECK_THROWS_AS(build_model({"a", "b"}, {"s"}, {0, 0}, {0, 0}, std::vector<Rational>{Rational(0), Rational(1)}),
                    ValidationError);
    CHECK_THROWS_AS(build_model({"a", "b"}, {"s"}, {0, 0}, {0, 0}, std::vector<double>{0.5, 0.4}), ValidationError);
    CHECK_NOTHROW(build_model({"a", "b"}, {"s"}, {0, 0}, {0, 0}, std::vector<double>{0.25, 0.75}));
    CHECK_THROWS_AS(build_model({"a", "b"}, {"s"}, {0, 0}, {0, 0}, std::vector<double>{0.25, 0.75}).nu_exact(0),
                    ValidationError);
}

TEST_CASE("induced relations") {
    const auto id = induced_relations(identity_model(3));
    CHECK(id.base.edges() == std::vector<Edge>{{0, 0}, {1, 1}, {2, 2}});
    CHECK(id.star.edges() == id.base.edges());

    const auto sh = induced_relations(shift_model());
    CHECK(sh.base.edges() == std::vector<Edge>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    // de Bruijn: first symbol of the successor equals the last symbol of the word
    std::set<Edge> debruijn;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            if (b % 2 == a / 2) {
                debruijn.emplace(a, b);
            }
        }
    }
    CHECK(oracle::edge_set(sh.star) == debruijn);

    SplitMix64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rm = random_model(rng);
        const auto rel = induced_relations(rm.model);
        CHECK(oracle::edge_set(rel.base) == rm.base_edges);
        CHECK(oracle::edge_set(rel.star) == rm.star_edges);
        CHECK(rel.base.has_full_domain());
        CHECK(rel.star.has_full_domain());
        // γ carries G* edges to G edges
        for (const auto &[a, b] : rel.star.edges()) {
            CHECK(rel.base.contains(rm.model.gamma(a), rm.model.gamma(b)));
        }
    }
}

TEST_CASE("induced covers") {
    const auto id = induced_covers(identity_model(2));
    CHECK(id.base.matrix().isIdentity());
    CHECK(id.star.matrix().isIdentity());

    // both halves of each unit interval map onto the same interval
    const auto a = build_model({"I1.1", "I1.2", "I2.1", "I2.2"}, {"I1", "I2"}, {0, 0, 1, 1}, {0, 0, 1, 1},
                               std::vector<Rational>(4, fraction(1, 2)));
    CHECK(induced_covers(a).base.matrix().isIdentity());
    const auto exact_a = induced_base_cover_exact(a);
    CHECK(exact_a[0][0] == 1);
    CHECK(exact_a[1][0] == 0);

    const auto b = induced_covers(example_b_model());
    CHECK(b.base.probability(1, 1) == 0.5);
    CHECK(b.base.probability(1, 2) == 0.5);
    CHECK(b.base.probability(0, 0) == 1.0);

    SplitMix64 rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rm = random_model(rng);
        const auto exact = induced_base_cover_exact(rm.model);
        for (std::size_t i = 0; i < rm.model.base_size(); ++i) {
            Rational column(0);
            for (std::size_t j = 0; j < rm.model.base_size(); ++j) {
                column += exact[j][i];
            }
            CHECK(column == 1);
        }
        // Γ* columns sum to one exactly: Σ over the fiber of γ(s₁*)
        for (std::size_t s = 0; s < rm.model.star_size(); ++s) {
            Rational column(0);
            for (std::size_t t : rm.model.fiber(rm.model.gamma(s))) {
                column += rm.model.nu_exact(t);
            }
            CHECK(column == 1);
        }
    }
}

TEST_CASE("basic set correspondence") {
    const auto id = basic_set_correspondence(identity_model(3));
    REQUIRE(id.pairs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(id.pairs[i].star_class == i);
        CHECK(id.pairs[i].terminal);
    }

    const auto sh = basic_set_correspondence(shift_model());
    REQUIRE(sh.pairs.size() == 1);
    CHECK(sh.star.classes[0] == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(sh.base.classes[0] == std::vector<std::size_t>{0, 1});
    CHECK(sh.pairs[0].terminal);

    SplitMix64 rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rm = random_model(rng);
        const auto c = basic_set_correspondence(rm.model);
        const auto base_oracle = oracle::closure_classes(c.relations.base);
        const auto star_oracle = oracle::closure_classes(c.relations.star);
        CHECK(c.base.classes == base_oracle.classes);
        CHECK(c.star.classes == star_oracle.classes);
        REQUIRE(c.pairs.size() == base_oracle.classes.size());
        REQUIRE(star_oracle.classes.size() == base_oracle.classes.size());
        std::set<std::size_t> star_used;
        for (std::size_t b = 0; b < c.pairs.size(); ++b) {
            const auto &p = c.pairs[b];
            CHECK(p.base_class == b);
            star_used.insert(p.star_class);
            std::set<std::size_t> image;
            for (std::size_t s : star_oracle.classes[p.star_class]) {
                image.insert(rm.model.gamma(s));
            }
            const auto &cls = base_oracle.classes[b];
            CHECK(image == std::set<std::size_t>(cls.begin(), cls.end()));
            CHECK(p.terminal == base_oracle.terminal[b]);
            CHECK(p.terminal == star_oracle.terminal[p.star_class]);
        }
        CHECK(star_used.size() == c.pairs.size());
    }
}

TEST_CASE("lifted stationary distributions") {
    const auto id = identity_model(2);
    const auto lifted_id = lift_stationary(id, Distribution({0.25, 0.75}));
    CHECK(lifted_id.weights() == std::vector<double>{0.25, 0.75});

    const auto sh = shift_model();
    const auto v_star = lift_stationary_exact(sh, {fraction(1, 2), fraction(1, 2)});
    for (const auto &x : v_star) {
        CHECK(x == fraction(1, 4));
    }
    // Γ* v* = v* by explicit multiplication
    const auto star = induced_relations(sh).star;
    for (std::size_t j = 0; j < 4; ++j) {
        Rational row(0);
        for (std::size_t i = 0; i < 4; ++i) {
            if (star.contains(i, j)) {
                row += sh.nu_exact(j) * v_star[i];
            }
        }
        CHECK(row == v_star[j]);
    }

    const auto b = example_b_model();
    const auto lifted_b = lift_stationary(b, Distribution::point_mass(3, 0));
    CHECK(lifted_b.weights() == std::vector<double>{0.5, 0.5, 0, 0, 0, 0});
    CHECK(stationary_residual(induced_covers(b).star, lifted_b) <= 1e-9);
    CHECK_THROWS_AS(lift_stationary(b, Distribution::point_mass(3, 1)), ValidationError);

    SplitMix64 rng(34);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rm = random_model(rng);
        const auto c = basic_set_correspondence(rm.model);
        const auto gamma = induced_base_cover_exact(rm.model);
        for (std::size_t b2 = 0; b2 < c.pairs.size(); ++b2) {
            if (!c.pairs[b2].terminal) {
                continue;
            }
            const auto v = exact_stationary_distribution(gamma, c.base.classes[b2]);
            CHECK(stationary_identity_holds(rm.model, c, b2, v));
            const auto vs = lift_stationary_exact(rm.model, v);
            for (std::size_t s = 0; s < rm.model.base_size(); ++s) {
                Rational fiber_sum(0);
                for (std::size_t t : rm.model.fiber(s)) {
                    fiber_sum += vs[t];
                }
                CHECK(fiber_sum == v[s]);
            }
            std::vector<double> vd;
            for (const auto &x : v) {
                vd.push_back(x.get_d());
            }
            const auto lifted = lift_stationary(rm.model, Distribution(vd, 1e-12));
            CHECK(stationary_residual(induced_covers(rm.model).star, lifted) <= 1e-9);
        }
    }
}

TEST_CASE("ergodic cylinder measure on K*") {
    const auto id = identity_model(2);
    const auto cid = basic_set_correspondence(id);
    const std::vector<std::size_t> constant{1, 1, 1};
    CHECK(ergodic_cylinder_measure_star(id, cid, 1, constant) == 1.0);

    const auto sh = shift_model();
    const auto csh = basic_set_correspondence(sh);
    const StarErgodicMeasure<Rational> mu(sh, csh, 0);
    const auto star = csh.relations.star;
    int legal = 0;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            const std::vector<std::size_t> w{a, b};
            if (star.contains(a, b)) {
                CHECK(mu.cylinder(w) == fraction(1, 8));
                ++legal;
            } else {
                CHECK(mu.cylinder(w) == 0);
            }
        }
    }
    CHECK(legal == 8);

    const auto b = example_b_model();
    const auto cb = basic_set_correspondence(b);
    const std::vector<std::size_t> outside{0, 0};
    CHECK(ergodic_cylinder_measure_star(b, cb, 2, outside) == 0.0);
    CHECK_THROWS_AS(StarErgodicMeasure<Rational>(b, cb, 1), ValidationError);

    // agrees with the Markov cylinder measure of (Γ*, v* on B*)
    SplitMix64 rng(35);
    for (int trial = 0; trial < 60; ++trial) {
        const auto rm = random_model(rng);
        const auto c = basic_set_correspondence(rm.model);
        const auto covers = induced_covers(rm.model);
        for (std::size_t p = 0; p < c.pairs.size(); ++p) {
            if (!c.pairs[p].terminal) {
                continue;
            }
            const StarErgodicMeasure<Rational> exact(rm.model, c, p);
            const auto vs = lift_stationary_exact(rm.model, exact.base_stationary());
            std::vector<double> initial(rm.model.star_size(), 0.0);
            for (std::size_t s : c.star.classes[c.pairs[p].star_class]) {
                initial[s] = vs[s].get_d();
            }
            const MarkovMeasureSpec spec{covers.star, Distribution(initial, 1e-12)};
            for (std::size_t len = 1; len <= 3; ++len) {
                for (const auto &w : path_words(c.relations.star, len)) {
                    CHECK(exact.cylinder(w).get_d() == doctest::Approx(cylinder_measure(spec, w)).epsilon(1e-12));
                }
            }
        }
    }
}
