// Acceptance run: one PASS/FAIL line per criterion, with wall time against
// the stated limit. Exit status is nonzero when any criterion fails.
#include "oracles.hpp"
#include "tractdyn/markov.hpp"
#include "tractdyn/shiftlike.hpp"
#include "tractdyn/simplicial1d.hpp"
#include "tractdyn/two_alphabet.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace tractdyn;
namespace sl = tractdyn::shiftlike;
namespace sx = tractdyn::simplicial;
using tractdyn::fraction;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string failure;

    void require(bool condition, const std::string &what) {
        if (!condition && pass) {
            pass = false;
            failure = what;
        }
    }
};

int failures = 0;

void criterion(int id, const std::string &name, double limit_seconds, const std::function<void(Outcome &)> &body) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception &e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(seconds < limit_seconds, "time limit exceeded");
    if (!out.pass) {
        ++failures;
    }
    std::printf("%s  %2d  %-34s %8.3f s (limit %g s)  %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                limit_seconds, out.pass ? out.detail.c_str() : out.failure.c_str());
    std::fflush(stdout);
}

sx::IntervalComplex complex(std::vector<Rational> v) { return sx::IntervalComplex(std::move(v)); }

sx::SimplicialSystem1D example_a() {
    const auto K = complex({0, 1, 2});
    const auto Kstar = complex({0, fraction(1, 2), 1, fraction(3, 2), 2});
    const std::map<Rational, Rational> vmap{{0, 1}, {fraction(1, 2), 0}, {1, 1}, {fraction(3, 2), 2}, {2, 1}};
    return sx::build_system(K, Kstar, vmap);
}

sx::SimplicialSystem1D example_b() {
    const auto K = complex({0, 1, 2, 3});
    const auto Kstar = complex({0, fraction(1, 2), 1, fraction(3, 2), 2, fraction(5, 2), 3});
    const std::map<Rational, Rational> vmap{{0, 1}, {fraction(1, 2), 0}, {1, 1},          {fraction(3, 2), 2},
                                            {2, 3}, {fraction(5, 2), 2}, {3, 3}};
    return sx::build_system(K, Kstar, vmap);
}

Rational abs_value(const Rational &x) { return x < 0 ? Rational(-x) : x; }

/// Σ_{s*∈B*∩γ⁻¹(s₂)} v_B(J(s*)) ν(s*) == v_B(s₂) for all s₂, evaluated directly.
bool stationary_sum_identity(const TwoAlphabetModel &model, const std::vector<std::size_t> &star_class,
                             const std::vector<Rational> &v) {
    for (std::size_t s2 = 0; s2 < model.base_size(); ++s2) {
        Rational sum(0);
        for (std::size_t s : star_class) {
            if (model.gamma(s) == s2) {
                sum += v[model.J(s)] * model.nu_exact(s);
            }
        }
        if (sum != v[s2]) {
            return false;
        }
    }
    return true;
}

/// All G* words s₀…s_depth of a shift-like system, by depth-first growth.
void shiftlike_words(const sl::ShiftLikeSystem &system, std::size_t depth,
                     const std::function<void(const std::vector<sl::Word> &)> &visit) {
    const unsigned N = system.N();
    const std::size_t n = system.n(), k = system.k();
    std::vector<sl::Word> seq;
    std::uint64_t tails = 1;
    for (std::size_t i = 0; i < k; ++i) {
        tails *= N;
    }
    std::function<void()> grow = [&] {
        visit(seq);
        if (seq.size() == depth + 1) {
            return;
        }
        const auto head = sl::Word::from_index(N, n, system.gamma(seq.back().index()));
        for (std::uint64_t t = 0; t < tails; ++t) {
            seq.push_back(head + sl::Word::from_index(N, k, t));
            grow();
            seq.pop_back();
        }
    };
    for (std::uint64_t s = 0; s < system.star_count(); ++s) {
        seq.push_back(sl::Word::from_index(N, n + k, s));
        grow();
        seq.pop_back();
    }
}

sl::ShiftLikeSystem table_system(unsigned n, unsigned k, std::uint64_t code) {
    const std::size_t size = std::size_t{1} << (n + k);
    std::vector<std::uint64_t> gamma(size);
    for (std::size_t i = 0; i < size; ++i) {
        gamma[i] = (code >> (n * i)) & ((std::uint64_t{1} << n) - 1);
    }
    return sl::ShiftLikeSystem(2, n, k, gamma);
}

sl::ShiftLikeSystem random_table(SplitMix64 &rng, unsigned n, unsigned k) {
    std::vector<std::uint64_t> gamma(std::size_t{1} << (n + k));
    for (auto &g : gamma) {
        g = rng.below(std::uint64_t{1} << n);
    }
    return sl::ShiftLikeSystem(2, n, k, gamma);
}

/// Checks both conjugacy identities on every depth ≤ 6 word and prefix.
bool conjugacy_holds(const sl::ShiftLikeSystem &system, std::size_t &checked) {
    const std::size_t depth = 6;
    bool ok = true;
    shiftlike_words(system, depth, [&](const std::vector<sl::Word> &seq) {
        const std::size_t p = seq.size() - 1;
        ok = ok && sl::code_R(system, sl::decode_H(system, seq), p) == seq;
        ++checked;
    });
    const std::size_t n = system.n(), k = system.k();
    for (std::size_t p = 0; p <= depth && ok; ++p) {
        const std::size_t length = n + k + p * k;
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << length) && ok; ++x) {
            const auto prefix = sl::Word::from_index(2, length, x);
            ok = sl::decode_H(system, sl::code_R(system, prefix, p)) == prefix;
            ++checked;
        }
    }
    return ok;
}

Eigen::MatrixXd random_cover_matrix(SplitMix64 &rng, const FiniteRelation &r) {
    const long n = static_cast<long>(r.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < r.size(); ++i) {
        double total = 0.0;
        for (std::size_t j : r.successors(i)) {
            m(static_cast<long>(j), static_cast<long>(i)) = 0.1 + rng.uniform();
            total += m(static_cast<long>(j), static_cast<long>(i));
        }
        m.col(static_cast<long>(i)) /= total;
    }
    return m;
}

std::string count_text(std::size_t count, const std::string &what) {
    std::ostringstream s;
    s << count << ' ' << what;
    return s.str();
}

} // namespace

int main() {
    criterion(1, "two-interval example end to end", 1.0, [](Outcome &out) {
        const auto system = example_a();
        const auto report = sx::tractability_report_pl(system);
        out.require(report.correspondence.relations.base.edges() == std::vector<Edge>{{0, 0}, {1, 1}},
                    "G is not {(I1,I1),(I2,I2)}");
        out.require(report.terminals.size() == 2, "expected two terminal classes");
        out.require(sx::pl_eval(system, fraction(1, 4)) == fraction(1, 2), "g(1/4) != 1/2");
        out.require(report.theta == fraction(1, 2), "theta != 1/2");
        // g is |2x-1| on [0,1] and 2-|2x-3| on [1,2]
        for (long i = 0; i <= 64; ++i) {
            const Rational x = fraction(i, 32);
            const Rational expected = x <= 1 ? abs_value(2 * x - 1) : Rational(2 - abs_value(2 * x - 3));
            out.require(sx::pl_eval(system, x) == expected, "g is not the pair of tent maps");
        }
        const std::vector<sx::Interval> supports{{0, 1}, {1, 2}};
        for (std::size_t t = 0; t < report.terminals.size(); ++t) {
            const auto &term = report.terminals[t];
            out.require(term.support == std::vector<sx::Interval>{supports[t]}, "wrong support");
            out.require(term.density.size() == 1 && term.density[0].weight == 1 && term.density[0].density == 1,
                        "v_B is not identically 1");
            out.require(term.stationary_identity, "stationary identity fails");
        }
        out.detail = "G, terminals, g, theta = 1/2 and Lebesgue lambda_B exact";
    });

    criterion(2, "three-interval example end to end", 1.0, [](Outcome &out) {
        const auto report = sx::tractability_report_pl(example_b());
        const auto &base = report.correspondence.base;
        out.require(base.classes == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}}, "basic sets differ");
        out.require(base.terminal_classes() == std::vector<std::size_t>{0, 2}, "terminal sets are not {I1},{I3}");
        bool flagged = false;
        for (const auto &f : report.flags) {
            flagged = flagged || (f.kind == sx::FlagKind::VisibleButNotTerminal && f.base_class == 1);
        }
        out.require(flagged, "{I2} is not flagged");
        // decay from the exact Lebesgue cover: mass left on the transient I2 after one step
        const auto gamma = induced_base_cover_exact(report.model);
        Rational rho(0);
        for (std::size_t s = 0; s < 3; ++s) {
            rho = std::max(rho, gamma[1][s]);
        }
        out.require(rho == fraction(1, 2), "exact one-step transient mass is not 1/2");
        out.require(report.decay.n == 1 && report.decay.rho == 0.5, "decay certificate is not (1, 1/2)");
        out.detail = "classes {I1},{I2},{I3}; terminal {I1},{I3}; {I2} flagged; decay (1, 1/2)";
    });

    criterion(3, "local inverse contraction", 10.0, [](Outcome &out) {
        SplitMix64 rng(1001);
        std::size_t pairs = 0;
        for (int trial = 0; trial < 24; ++trial) {
            const auto s = oracle::random_system(rng);
            const Rational factor = 1 - sx::theta(s);
            for (int k = 0; k < 100; ++k) {
                const std::size_t e = rng.below(s.Kstar().edge_count());
                const auto target = s.K().edge(s.gamma(e));
                const auto x1 = oracle::random_rational(rng, target.lo, target.hi);
                const auto x2 = oracle::random_rational(rng, target.lo, target.hi);
                const auto d = sx::distance_K(s.K(), sx::local_inverse(s, e, x1), sx::local_inverse(s, e, x2));
                out.require(d <= factor * sx::distance_K(s.K(), x1, x2), "contraction bound violated");
                ++pairs;
            }
        }
        out.detail = count_text(pairs, "pairs on 24 systems, zero tolerance");
    });

    criterion(4, "mesh decay of refinements", 10.0, [](Outcome &out) {
        SplitMix64 rng(1002);
        std::vector<sx::SimplicialSystem1D> systems{example_a(), example_b()};
        for (int i = 0; i < 20; ++i) {
            systems.push_back(oracle::random_system(rng, 1));
        }
        std::size_t checks = 0;
        for (std::size_t i = 0; i < systems.size(); ++i) {
            for (int n = 1; n <= 10; ++n) {
                const auto r = sx::refine(systems[i], n);
                Rational bound = 2;
                for (int j = 0; j < n; ++j) {
                    bound *= 1 - sx::theta(systems[i]);
                }
                out.require(r.bound == bound, "reported bound differs from 2(1-theta)^n");
                out.require(r.mesh <= bound, "mesh exceeds 2(1-theta)^n");
                if (i == 0) {
                    out.require(r.mesh == bound, "two-interval example is not tight");
                }
                ++checks;
            }
        }
        out.detail = count_text(checks, "refinements, n <= 10; two-interval example tight");
    });

    criterion(5, "pushforward equals Lebesgue", 30.0, [](Outcome &out) {
        std::size_t cylinders = 0;
        for (const auto &system : {example_a(), example_b()}) {
            const auto nu = sx::lebesgue_distribution_data(system);
            std::vector<std::size_t> w;
            std::function<void()> grow = [&] {
                const auto cell = sx::code_H_1d(system, w);
                for (std::size_t s = 0; s < system.K().edge_count(); ++s) {
                    // μ_s⟨w⟩ = ν(s₀)ν(s₁)⋯ when J(s₀) = s, else 0
                    Rational mu(0);
                    if (system.J(w[0]) == s) {
                        mu = 1;
                        for (std::size_t t : w) {
                            mu *= nu[t];
                        }
                    }
                    const auto edge = system.K().edge(s);
                    const Rational lo = std::max(cell.lo, edge.lo), hi = std::min(cell.hi, edge.hi);
                    const Rational lambda = hi > lo ? Rational((hi - lo) / edge.length()) : Rational(0);
                    out.require(mu == lambda, "mu_s(cylinder) != lambda_s(decoded interval)");
                    ++cylinders;
                }
                if (w.size() == 7) {
                    return;
                }
                for (std::size_t t : system.fiber(system.gamma(w.back()))) {
                    w.push_back(t);
                    grow();
                    w.pop_back();
                }
            };
            for (std::size_t s0 = 0; s0 < system.Kstar().edge_count(); ++s0) {
                w = {s0};
                grow();
            }
        }
        out.detail = count_text(cylinders, "(edge, cylinder) pairs of depth <= 6, exact");
    });

    criterion(6, "shift-like conjugacy", 60.0, [](Outcome &out) {
        std::size_t checked = 0, tables = 0;
        for (std::uint64_t code = 0; code < 16; ++code) {
            out.require(conjugacy_holds(table_system(1, 1, code), checked), "conjugacy fails (n = k = 1)");
            ++tables;
        }
        SplitMix64 rng(1006);
        const std::vector<std::pair<unsigned, unsigned>> sizes{{1, 2}, {2, 1}, {2, 2}};
        for (int t = 0; t < 200; ++t) {
            const auto [n, k] = sizes[static_cast<std::size_t>(t) % sizes.size()];
            out.require(conjugacy_holds(random_table(rng, n, k), checked), "conjugacy fails");
            ++tables;
        }
        out.detail = count_text(tables, "tables, ") + count_text(checked, "words and prefixes");
    });

    criterion(7, "shadowing", 30.0, [](Outcome &out) {
        SplitMix64 rng(1007);
        std::size_t steps = 0;
        for (int c = 0; c < 100; ++c) {
            const unsigned m = 1 + static_cast<unsigned>(rng.below(3));
            const unsigned n = 1 + static_cast<unsigned>(rng.below(2));
            sl::SlidingBlockCode code{2, m, std::vector<sl::Symbol>(std::size_t{1} << m)};
            for (auto &p : code.phi) {
                p = static_cast<sl::Symbol>(rng.below(2));
            }
            const std::vector<unsigned> phi(code.phi.begin(), code.phi.end());
            const auto system = sl::derive_gamma(code, n);
            const std::size_t depth = 50, window = n + system.k();
            for (int p = 0; p < 10; ++p) {
                std::vector<unsigned> x(window + depth * (m - 1));
                for (auto &s : x) {
                    s = static_cast<unsigned>(rng.below(2));
                }
                const auto y = sl::shadow_Q(code, system, sl::Word(2, {x.begin(), x.end()}), depth);
                auto gy = y;
                for (std::size_t j = 0; j <= depth; ++j) {
                    const std::vector<unsigned> fj(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(window));
                    const std::vector<unsigned> gj(gy.symbols().begin(), gy.symbols().begin() + static_cast<std::ptrdiff_t>(window));
                    out.require(fj == gj, "J_{n+k}(f^j x) != J_{n+k}(g^j y)");
                    ++steps;
                    if (j < depth) {
                        x = oracle::iterate_code(2, m, phi, x);
                        gy = sl::apply_g(system, gy);
                    }
                }
            }
        }
        out.detail = count_text(steps, "exact word comparisons, j <= 50");
    });

    criterion(8, "stationary identities", 10.0, [](Outcome &out) {
        SplitMix64 rng(1008);
        std::size_t exact = 0, floating = 0;
        for (int t = 0; t < 60; ++t) {
            const unsigned n = 1 + static_cast<unsigned>(rng.below(2)), k = 1 + static_cast<unsigned>(rng.below(2));
            const auto report = sl::tractability_report_shiftlike(random_table(rng, n, k));
            for (const auto &term : report.terminals) {
                const auto &cls = report.correspondence.star.classes[term.star_class];
                out.require(term.stationary_identity && stationary_sum_identity(report.model, cls, term.stationary),
                            "shift-like stationary identity fails");
                ++exact;
            }
        }
        std::vector<sx::SimplicialSystem1D> systems{example_a(), example_b()};
        for (int i = 0; i < 30; ++i) {
            systems.push_back(oracle::random_system(rng));
        }
        for (const auto &system : systems) {
            const auto report = sx::tractability_report_pl(system);
            for (const auto &term : report.terminals) {
                const auto &cls = report.correspondence.star.classes[term.star_class];
                out.require(term.stationary_identity && stationary_sum_identity(report.model, cls, term.stationary),
                            "interval stationary identity fails");
                ++exact;
            }
        }
        for (int t = 0; t < 100; ++t) {
            const auto r = oracle::random_full_domain_relation(rng, 2 + rng.below(7), 0.3);
            const auto cover = validate_cover(r, random_cover_matrix(rng, r));
            const auto dec = basic_sets(r);
            for (std::size_t c : dec.terminal_classes()) {
                const auto v = stationary_distribution(cover, dec.classes[c]);
                out.require(stationary_residual(cover, v) <= 1e-12, "float stationary residual above 1e-12");
                ++floating;
            }
        }
        for (int t = 0; t < 100; ++t) {
            const auto rm = oracle::random_model(rng);
            std::vector<double> nu;
            for (std::size_t s = 0; s < rm.model.star_size(); ++s) {
                nu.push_back(rm.model.nu_exact(s).get_d());
            }
            const auto model = build_model(rm.model.star_labels(), rm.model.base_labels(), rm.model.J_map(),
                                           rm.model.gamma_map(), nu);
            const auto covers = induced_covers(model);
            const auto dec = basic_sets(covers.base.relation());
            for (std::size_t c : dec.terminal_classes()) {
                const auto v = stationary_distribution(covers.base, dec.classes[c]);
                out.require(stationary_residual(covers.base, v) <= 1e-12, "model stationary residual above 1e-12");
                const auto lifted = lift_stationary(model, v);
                out.require(stationary_residual(covers.star, lifted) <= 1e-9, "lifted residual above 1e-9");
                ++floating;
            }
        }
        out.detail = count_text(exact, "exact identities, ") + count_text(floating, "floating residual checks");
    });

    criterion(9, "oracle equivalence", 30.0, [](Outcome &out) {
        SplitMix64 rng(1009);
        for (int t = 0; t < 500; ++t) {
            const auto g = oracle::random_full_domain_relation(rng, 1 + rng.below(8), 0.1 + 0.3 * rng.uniform());
            const auto d = basic_sets(g);
            const auto o = oracle::closure_classes(g);
            out.require(d.classes == o.classes && d.terminal == o.terminal, "basic sets differ from closure oracle");
        }
        for (int t = 0; t < 200; ++t) {
            const auto rm = oracle::random_model(rng);
            const auto c = basic_set_correspondence(rm.model);
            const auto base = oracle::closure_classes(FiniteRelation(rm.model.base_labels(),
                                                                     {rm.base_edges.begin(), rm.base_edges.end()}));
            const auto star = oracle::closure_classes(FiniteRelation(rm.model.star_labels(),
                                                                     {rm.star_edges.begin(), rm.star_edges.end()}));
            out.require(c.base.classes == base.classes && c.star.classes == star.classes,
                        "correspondence classes differ from SCC oracle");
            out.require(c.pairs.size() == base.classes.size() && star.classes.size() == base.classes.size(),
                        "class counts differ");
            for (std::size_t b = 0; b < c.pairs.size() && out.pass; ++b) {
                std::set<std::size_t> image;
                for (std::size_t s : star.classes[c.pairs[b].star_class]) {
                    image.insert(rm.model.gamma(s));
                }
                out.require(image == std::set<std::size_t>(base.classes[b].begin(), base.classes[b].end()),
                            "gamma(B*) != B");
                out.require(c.pairs[b].terminal == base.terminal[b] &&
                                c.pairs[b].terminal == star.terminal[c.pairs[b].star_class],
                            "terminal flags differ");
            }
        }
        out.detail = "500 relations and 200 models agree with the closure oracle";
    });

    criterion(10, "statistical genericity", 300.0, [](Outcome &out) {
        Eigen::MatrixXd mb(3, 3);
        mb << 1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 1.0;
        const auto b = validate_cover(FiniteRelation({"I1", "I2", "I3"}, {{0, 0}, {1, 1}, {1, 2}, {2, 2}}), mb);
        const auto full_rel = FiniteRelation({"0", "1"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
        const auto full = uniform_cover(full_rel);
        const auto db = basic_sets(b.relation());
        const auto df = basic_sets(full_rel);
        int pass_b = 0, pass_f = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto pb = sample_path({b, Distribution::point_mass(3, 1)}, 10000, seed);
            pass_b += genericity_check(b, db, pb, 2).pass ? 1 : 0;
            const auto pf = sample_path({full, Distribution::uniform(2)}, 10000, seed);
            pass_f += genericity_check(full, df, pf, 3).pass ? 1 : 0;
        }
        out.require(pass_b >= 99, "three-interval cover passes in fewer than 99 seeds");
        out.require(pass_f >= 99, "full 2-shift passes in fewer than 99 seeds");

        const auto report = sx::tractability_report_pl(example_b());
        std::vector<int> pass_d(report.terminals.size(), 0);
        for (std::size_t t = 0; t < report.terminals.size(); ++t) {
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                pass_d[t] += sx::birkhoff_decoding(report, t, 10000, 40, seed).pass ? 1 : 0;
            }
            out.require(pass_d[t] >= 99, "Birkhoff decoding passes in fewer than 99 seeds");
        }
        std::ostringstream s;
        s << "seeds passing: cover " << pass_b << "/100, 2-shift " << pass_f << "/100, decoding";
        for (int p : pass_d) {
            s << ' ' << p << "/100";
        }
        out.detail = s.str();
    });

    std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return failures == 0 ? 0 : 1;
}
