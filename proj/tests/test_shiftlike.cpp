#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "tractdyn/caps.hpp"
#include "tractdyn/error.hpp"
#include "tractdyn/shiftlike.hpp"

#include <cstdlib>

using namespace tractdyn;
using namespace tractdyn::shiftlike;
using tractdyn::fraction;

namespace {

Word word(std::vector<Symbol> symbols, unsigned N = 2) { return Word(N, std::move(symbols)); }

Word random_word(SplitMix64 &rng, unsigned N, std::size_t length) {
    std::vector<Symbol> s(length);
    for (auto &x : s) {
        x = static_cast<Symbol>(rng.below(N));
    }
    return Word(N, s);
}

SlidingBlockCode random_code(SplitMix64 &rng, unsigned N, unsigned m) {
    SlidingBlockCode code{N, m, {}};
    std::uint64_t size = 1;
    for (unsigned i = 0; i < m; ++i) {
        size *= N;
    }
    for (std::uint64_t i = 0; i < size; ++i) {
        code.phi.push_back(static_cast<Symbol>(rng.below(N)));
    }
    return code;
}

const SlidingBlockCode kShift{2, 2, {0, 0, 1, 1}};
const SlidingBlockCode kIdentity{2, 1, {0, 1}};

std::vector<unsigned> as_unsigned(const Word &w) { return {w.symbols().begin(), w.symbols().end()}; }

} // namespace

TEST_CASE("words") {
    const auto w = word({0, 1, 1});
    CHECK(w.index() == 6);
    CHECK(Word::from_index(2, 3, 6) == w);
    CHECK(w.label() == "011");
    CHECK(w.prefix(2) == word({0, 1}));
    CHECK(w.drop(1) == word({1, 1}));
    CHECK(w.substr(1, 1) == word({1}));
    CHECK(word({0}) + word({1, 1}) == w);
    CHECK(Word(12, {3, 11}).label() == "3.11");
    CHECK_THROWS_AS(word({2}), ValidationError);
    CHECK_THROWS_AS(Word(1, {0}), ValidationError);
}

TEST_CASE("code validation and f") {
    CHECK_THROWS_AS(validate_code({2, 2, {0, 1, 1}}), ValidationError);
    CHECK_THROWS_AS(validate_code({2, 1, {0, 2}}), ValidationError);
    CHECK(apply_f(kShift, word({0, 1, 1, 0})) == word({1, 1, 0}));
    SplitMix64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto code = random_code(rng, 3, 1 + static_cast<unsigned>(rng.below(3)));
        const auto x = random_word(rng, 3, 12);
        CHECK(as_unsigned(apply_f(code, x)) ==
              oracle::iterate_code(3, code.m, {code.phi.begin(), code.phi.end()}, as_unsigned(x)));
    }
}

TEST_CASE("derived gamma tables") {
    const auto id = derive_gamma(kIdentity, 1);
    CHECK(id.k() == 1);
    CHECK(id.gamma() == std::vector<std::uint64_t>{0, 1, 0, 1});

    const auto sh = derive_gamma(kShift, 1);
    CHECK(sh.k() == 1);
    CHECK(sh.gamma() == std::vector<std::uint64_t>{0, 0, 1, 1});

    SplitMix64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_word(rng, 2, 10);
        CHECK(apply_g(sh, x) == x.drop(1));
    }

    CHECK(derive_gamma(random_code(rng, 2, 4), 1).k() == 3);

    // J_n ∘ f = J_n ∘ g and Ŝⁿ ∘ g = Ŝ^{n+k}
    for (int trial = 0; trial < 40; ++trial) {
        const unsigned m = 1 + static_cast<unsigned>(rng.below(3));
        const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
        const auto code = random_code(rng, 2, m);
        const auto sys = derive_gamma(code, n);
        for (int sample = 0; sample < 100; ++sample) {
            const auto x = random_word(rng, 2, n + sys.k() + m + 5);
            const auto gx = apply_g(sys, x);
            CHECK(gx.prefix(n) == apply_f(code, x).prefix(n));
            CHECK(gx.drop(n) == x.drop(n + sys.k()));
            CHECK(gx.size() == x.size() - sys.k());
        }
    }
}

TEST_CASE("gamma tables respect the cell cap") {
    CHECK_THROWS_AS(ShiftLikeSystem(2, 1, 1, {0, 1, 2, 0}), ValidationError);
    CHECK_THROWS_AS(ShiftLikeSystem(2, 1, 1, {0, 1, 0}), ValidationError);
    CHECK_THROWS_AS(derive_gamma(kShift, 30), ResourceCapError);
    setenv("TRACTABLE_DYN_CELL_CAP", "8", 1);
    CHECK(cell_cap() == 8);
    CHECK_NOTHROW(derive_gamma(kShift, 2));
    CHECK_THROWS_AS(derive_gamma(kShift, 3), ResourceCapError);
    setenv("TRACTABLE_DYN_CELL_CAP", "zero", 1);
    CHECK_THROWS_AS(cell_cap(), ValidationError);
    unsetenv("TRACTABLE_DYN_CELL_CAP");
    CHECK(cell_cap() == kDefaultCellCap);
}

TEST_CASE("apply g") {
    const ShiftLikeSystem sh(2, 1, 1, {0, 0, 1, 1});
    const ShiftLikeSystem id(2, 1, 1, {0, 1, 0, 1});
    CHECK(apply_g(sh, word({0, 1, 1, 0})) == word({1, 1, 0}));
    // γ(ab) = a drops the second symbol: g(abx) = ax
    CHECK(apply_g(id, word({0, 1, 1, 0})) == word({0, 1, 0}));
    CHECK_THROWS_AS(apply_g(sh, word({0})), ValidationError);
}

TEST_CASE("coding and decoding") {
    const ShiftLikeSystem sh(2, 1, 1, {0, 0, 1, 1});
    const auto alternating = word({0, 1, 0, 1, 0, 1, 0, 1});
    const auto coded = code_R(sh, alternating, 3);
    REQUIRE(coded.size() == 4);
    CHECK(coded[0] == word({0, 1}));
    CHECK(coded[1] == word({1, 0}));
    CHECK(coded[2] == word({0, 1}));
    CHECK(coded[3] == word({1, 0}));
    CHECK_THROWS_AS(code_R(sh, word({0, 1, 0}), 3), ValidationError);

    const ShiftLikeSystem id(2, 1, 1, {0, 1, 0, 1});
    const auto constant = code_R(kIdentity, 1, word({1, 0, 0, 1, 1, 0}), 4);
    for (const auto &w : constant) {
        CHECK(w == word({1, 0}));
    }
    CHECK(decode_H(id, constant) == word({1, 0, 0, 0, 0, 0}));

    CHECK(decode_H(sh, {word({0, 1}), word({1, 0}), word({0, 1})}) == word({0, 1, 0, 1}));
    CHECK_THROWS_AS(decode_H(sh, {word({0, 1}), word({0, 1})}), ValidationError);

    // R^g ∘ H_γ = id and consecutive codes are G* edges
    SplitMix64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
        const unsigned k = 1 + static_cast<unsigned>(rng.below(2));
        std::vector<std::uint64_t> table(std::size_t{1} << (n + k));
        for (auto &t : table) {
            t = rng.below(std::uint64_t{1} << n);
        }
        const ShiftLikeSystem sys(2, n, k, table);
        const std::size_t depth = 6;
        const auto x = random_word(rng, 2, n + k + depth * k);
        const auto r = code_R(sys, x, depth);
        for (std::size_t j = 0; j + 1 < r.size(); ++j) {
            CHECK(star_edge(sys, r[j], r[j + 1]));
        }
        const auto y = decode_H(sys, r);
        CHECK(y.prefix(n + k) == r[0]);
        CHECK(code_R(sys, y, depth) == r);
    }
}

TEST_CASE("shadowing") {
    const auto sys = derive_gamma(kShift, 2);
    SplitMix64 rng(44);
    const auto x = random_word(rng, 2, 40);
    const auto y = shadow_Q(kShift, sys, x, 10);
    CHECK(code_R(sys, y, 10) == code_R(kShift, 2, x, 10));

    const auto ident = derive_gamma(kIdentity, 1);
    const auto z = random_word(rng, 2, 12);
    CHECK(shadow_Q(kIdentity, ident, z, 5).prefix(2) == z.prefix(2));

    for (int trial = 0; trial < 20; ++trial) {
        const unsigned m = 1 + static_cast<unsigned>(rng.below(3));
        const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
        const auto code = random_code(rng, 2, m);
        const auto g = derive_gamma(code, n);
        const std::size_t depth = 50;
        const auto px = random_word(rng, 2, n + g.k() + depth * (m - 1));
        const auto py = shadow_Q(code, g, px, depth);
        // direct iteration of both maps
        Word fx = px, gy = py;
        for (std::size_t j = 0; j <= depth; ++j) {
            CHECK(fx.prefix(n + g.k()) == gy.prefix(n + g.k()));
            if (j < depth) {
                fx = apply_f(code, fx);
                gy = apply_g(g, gy);
            }
        }
    }
}

TEST_CASE("Bernoulli cylinders") {
    CHECK(bernoulli_cylinder(2, word({0, 1})) == fraction(1, 4));
    CHECK(bernoulli_cylinder(2, Word(2, {})) == 1);
    const auto w = Word(3, {2, 0});
    Rational parts(0);
    for (Symbol a = 0; a < 3; ++a) {
        parts += bernoulli_cylinder(3, w + Word(3, {a}));
    }
    CHECK(parts == bernoulli_cylinder(3, w));
}

TEST_CASE("shift-like tractability reports") {
    const auto full = tractability_report_shiftlike(ShiftLikeSystem(2, 1, 1, {0, 0, 1, 1}));
    REQUIRE(full.terminals.size() == 1);
    CHECK(full.correspondence.pairs.size() == 1);
    CHECK(full.terminals[0].stationary == std::vector<Rational>{fraction(1, 2), fraction(1, 2)});
    CHECK(full.terminals[0].stationary_identity);
    CHECK(full.model.nu_exact(0) == fraction(1, 2));
    CHECK(fraction(1, 2) * (full.terminals[0].stationary[0] + full.terminals[0].stationary[1]) == fraction(1, 2));

    const ShiftLikeSystem id_sys(2, 1, 1, {0, 1, 0, 1});
    const auto id = tractability_report_shiftlike(id_sys);
    const auto star_oracle = oracle::closure_classes(id.correspondence.relations.star);
    CHECK(id.correspondence.star.classes == star_oracle.classes);
    CHECK(star_oracle.classes == std::vector<std::vector<std::size_t>>{{0, 2}, {1, 3}});
    CHECK(id.terminals.size() == 2);

    const auto zero = tractability_report_shiftlike(ShiftLikeSystem(2, 1, 1, {0, 0, 0, 0}));
    REQUIRE(zero.terminals.size() == 1);
    CHECK(zero.correspondence.star.classes[zero.terminals[0].star_class] == std::vector<std::size_t>{0, 2});
    CHECK(zero.correspondence.star.transient == std::vector<std::size_t>{1, 3});
    CHECK(zero.terminals[0].stationary == std::vector<Rational>{Rational(1), Rational(0)});
    REQUIRE(zero.terminals[0].measure.size() == 1);
    CHECK(zero.terminals[0].measure[0].word == "0");
    CHECK(zero.terminals[0].measure[0].weight == 1);
    CHECK(zero.trac1.satisfied);
    CHECK(zero.trac4.satisfied);

    SplitMix64 rng(45);
    for (int trial = 0; trial < 100; ++trial) {
        const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
        const unsigned k = 1 + static_cast<unsigned>(rng.below(2));
        std::vector<std::uint64_t> table(std::size_t{1} << (n + k));
        for (auto &t : table) {
            t = rng.below(std::uint64_t{1} << n);
        }
        const auto report = tractability_report_shiftlike(ShiftLikeSystem(2, n, k, table));
        for (const auto &t : report.terminals) {
            CHECK(t.stationary_identity);
            Rational total(0);
            for (const auto &c : t.measure) {
                total += c.weight;
            }
            CHECK(total == 1);
        }
    }
}
