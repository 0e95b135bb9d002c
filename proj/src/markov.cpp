#include "tractdyn/markov.hpp"

#include "tractdyn/error.hpp"
#include "tractdyn/prng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tractdyn {

StochasticCover validate_cover(FiniteRelation relation, Eigen::MatrixXd matrix, double tolerance) {
    const auto n = static_cast<Eigen::Index>(relation.size());
    if (matrix.rows() != n || matrix.cols() != n) {
        throw ValidationError("cover matrix is " + std::to_string(matrix.rows()) + "x" +
                              std::to_string(matrix.cols()) + ", expected " + std::to_string(n) +
                              "x" + std::to_string(n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double column_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = matrix(j, i);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw ValidationError("cover entry for " + relation.label(i) + " -> " +
                                      relation.label(j) + " is outside [0, 1]");
            }
            const bool edge = relation.contains(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (edge != (p > 0.0)) {
                throw ValidationError("cover support mismatch at " + relation.label(i) + " -> " +
                                      relation.label(j) +
                                      (edge ? ": zero probability on an edge"
                                            : ": positive probability off the relation"));
            }
            column_sum += p;
        }
        if (std::abs(column_sum - 1.0) > tolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "column " << relation.label(i) << " sums to " << column_sum;
            throw ValidationError(msg.str());
        }
    }
    return StochasticCover(std::move(relation), std::move(matrix));
}

StochasticCover uniform_cover(const FiniteRelation &relation) {
    const auto n = static_cast<Eigen::Index>(relation.size());
    Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < relation.size(); ++i) {
        const auto succ = relation.successors(i);
        if (succ.empty()) {
            throw ValidationError("uniform_cover: element '" + relation.label(i) + "' has no successor");
        }
        for (std::size_t j : succ) {
            matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                1.0 / static_cast<double>(succ.size());
        }
    }
    return validate_cover(relation, std::move(matrix));
}

Distribution::Distribution(std::vector<double> weights, double tolerance) : weights_(std::move(weights)) {
    double total = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw ValidationError("distribution has a negative or non-finite weight");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > tolerance) {
        throw ValidationError("distribution weights sum to " + std::to_string(total));
    }
}

Distribution Distribution::point_mass(std::size_t size, std::size_t at) {
    std::vector<double> w(size, 0.0);
    w.at(at) = 1.0;
    return Distribution(std::move(w));
}

Distribution Distribution::uniform(std::size_t size) {
    return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

std::vector<std::size_t> Distribution::support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) {
            out.push_back(i);
        }
    }
    return out;
}

double Distribution::mass(std::span<const std::size_t> subset) const {
    double total = 0.0;
    for (std::size_t i : subset) {
        total += weights_.at(i);
    }
    return total;
}

double stationary_residual(const StochasticCover &cover, const Distribution &v) {
    if (v.size() != cover.size()) {
        throw ValidationError("distribution size does not match the cover");
    }
    const Eigen::Map<const Eigen::VectorXd> vec(v.weights().data(), static_cast<Eigen::Index>(v.size()));
    return (cover.matrix() * vec - vec).lpNorm<Eigen::Infinity>();
}

namespace {

std::vector<char> transient_mask(const BasicSetDecomposition &decomposition, std::size_t n) {
    std::vector<char> mask(n, 0);
    for (std::size_t t : decomposition.transient) {
        mask[t] = 1;
    }
    return mask;
}

double transient_column_mass(const Eigen::MatrixXd &power, const std::vector<char> &mask,
                             Eigen::Index column) {
    double total = 0.0;
    for (Eigen::Index row = 0; row < power.rows(); ++row) {
        if (mask[static_cast<std::size_t>(row)]) {
            total += power(row, column);
        }
    }
    return total;
}

void check_class_is_terminal(const FiniteRelation &relation, std::span<const std::size_t> members) {
    if (members.empty()) {
        throw ValidationError("terminal class is empty");
    }
    std::vector<char> inside(relation.size(), 0);
    for (std::size_t x : members) {
        if (x >= relation.size()) {
            throw ValidationError("terminal class member out of range");
        }
        inside[x] = 1;
    }
    for (std::size_t x : members) {
        for (std::size_t y : relation.successors(x)) {
            if (!inside[y]) {
                throw ValidationError("class is not terminal: edge " + relation.label(x) + " -> " +
                                      relation.label(y) + " leaves it");
            }
        }
        if (relation.successors(x).empty()) {
            throw ValidationError("class member '" + relation.label(x) + "' has no successor");
        }
    }
    // Strong connectivity: everything reachable from the first member.
    std::vector<char> seen(relation.size(), 0);
    std::vector<std::size_t> stack{members.front()};
    seen[members.front()] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        for (std::size_t y : relation.successors(x)) {
            if (!seen[y]) {
                seen[y] = 1;
                ++reached;
                stack.push_back(y);
            }
        }
    }
    // A closed class whose members are all reachable from one member is
    // irreducible only if that member is also reachable back; check via the
    // inverse relation.
    const FiniteRelation back = inverse(relation);
    std::vector<char> seen_back(relation.size(), 0);
    stack.assign(1, members.front());
    seen_back[members.front()] = 1;
    std::size_t reached_back = 1;
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        for (std::size_t y : back.successors(x)) {
            if (inside[y] && !seen_back[y]) {
                seen_back[y] = 1;
                ++reached_back;
                stack.push_back(y);
            }
        }
    }
    if (reached != members.size() || reached_back != members.size()) {
        throw ValidationError("class is not strongly connected");
    }
}

} // namespace

std::vector<double> transient_mass_after(const StochasticCover &cover,
                                         const BasicSetDecomposition &decomposition, int steps) {
    const auto mask = transient_mask(decomposition, cover.size());
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(cover.matrix().rows(), cover.matrix().cols());
    for (int i = 0; i < steps; ++i) {
        power = cover.matrix() * power;
    }
    std::vector<double> out(cover.size());
    for (std::size_t s = 0; s < cover.size(); ++s) {
        out[s] = transient_column_mass(power, mask, static_cast<Eigen::Index>(s));
    }
    return out;
}

DecayCertificate transient_decay(const StochasticCover &cover,
                                 const BasicSetDecomposition &decomposition) {
    const std::size_t n = cover.size();
    if (decomposition.class_of.size() != n) {
        throw ValidationError("transient_decay: decomposition does not match the cover");
    }
    DecayCertificate cert;
    if (decomposition.transient.empty()) {
        return cert;
    }

    // Horizon: longest shortest-path distance into the terminal classes.
    const FiniteRelation back = inverse(cover.relation());
    constexpr std::size_t unreached = static_cast<std::size_t>(-1);
    std::vector<std::size_t> distance(n, unreached);
    std::vector<std::size_t> frontier;
    for (std::size_t s = 0; s < n; ++s) {
        if (!decomposition.is_transient(s)) {
            distance[s] = 0;
            frontier.push_back(s);
        }
    }
    for (std::size_t head = 0; head < frontier.size(); ++head) {
        const std::size_t x = frontier[head];
        for (std::size_t p : back.successors(x)) {
            if (distance[p] == unreached) {
                distance[p] = distance[x] + 1;
                frontier.push_back(p);
            }
        }
    }
    std::size_t horizon = 1;
    for (std::size_t d : distance) {
        if (d == unreached) {
            throw InvariantViolation("transient_decay: element cannot reach a terminal class");
        }
        horizon = std::max(horizon, d);
    }
    cert.n = static_cast<int>(horizon);

    const auto mass = transient_mass_after(cover, decomposition, cert.n);
    cert.rho = *std::max_element(mass.begin(), mass.end());
    if (!(cert.rho < 1.0)) {
        throw NumericalError("transient_decay: rho is not below 1");
    }

    for (int k = 1; k <= 5; ++k) {
        const auto mk = transient_mass_after(cover, decomposition, cert.n * k);
        const double bound = std::pow(cert.rho, k) + kAlgebraicTolerance;
        for (double m : mk) {
            if (m > bound) {
                throw InvariantViolation("transient_decay: certificate fails at k = " + std::to_string(k));
            }
        }
    }
    return cert;
}

Distribution stationary_distribution(const StochasticCover &cover,
                                     std::span<const std::size_t> terminal_class, double tolerance) {
    check_class_is_terminal(cover.relation(), terminal_class);
    const auto m = static_cast<Eigen::Index>(terminal_class.size());
    Eigen::MatrixXd block(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            block(r, c) = cover.matrix()(static_cast<Eigen::Index>(terminal_class[r]),
                                         static_cast<Eigen::Index>(terminal_class[c]));
        }
    }

    auto embed = [&](const Eigen::VectorXd &local) {
        std::vector<double> full(cover.size(), 0.0);
        for (Eigen::Index r = 0; r < m; ++r) {
            full[terminal_class[r]] = local(r);
        }
        return full;
    };
    auto residual_of = [&](const Eigen::VectorXd &local) {
        return (block * local - local).lpNorm<Eigen::Infinity>();
    };

    // (Γ_B − I) v = 0 with the last equation replaced by Σ v = 1.
    Eigen::MatrixXd system = block - Eigen::MatrixXd::Identity(m, m);
    system.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd v = lu.solve(rhs);
    for (int refine = 0; refine < 3 && residual_of(v) > tolerance; ++refine) {
        v += lu.solve(rhs - system * v);
    }

    if (!(residual_of(v) <= tolerance) || (v.array() <= 0.0).any()) {
        // Lazy-chain power iteration: (Γ_B + I)/2 shares the stationary
        // vector and is aperiodic, so it converges even for periodic blocks.
        Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
        for (int it = 0; it < 200000 && residual_of(w) > tolerance; ++it) {
            w = 0.5 * (block * w + w);
            w /= w.sum();
        }
        v = w;
    }
    v /= v.sum();
    if (!(residual_of(v) <= tolerance)) {
        throw NumericalError("stationary_distribution: residual " + std::to_string(residual_of(v)) +
                             " above tolerance");
    }
    if ((v.array() <= 0.0).any()) {
        throw NumericalError("stationary_distribution: non-positive weight on a terminal class");
    }
    return Distribution(embed(v), 1e-10);
}

std::vector<double> decompose_stationary(const StochasticCover &cover,
                                         const BasicSetDecomposition &decomposition,
                                         const Distribution &v, double tolerance) {
    if (stationary_residual(cover, v) > tolerance) {
        throw ValidationError("decompose_stationary: distribution is not stationary");
    }
    if (v.mass(decomposition.transient) > tolerance) {
        throw ValidationError("decompose_stationary: stationary distribution charges transient elements");
    }
    std::vector<double> weights;
    std::vector<double> rebuilt(cover.size(), 0.0);
    for (std::size_t c : decomposition.terminal_classes()) {
        const auto &members = decomposition.classes[c];
        const double w = v.mass(members);
        weights.push_back(w);
        const Distribution vb = stationary_distribution(cover, members);
        for (std::size_t i = 0; i < cover.size(); ++i) {
            rebuilt[i] += w * vb[i];
        }
    }
    for (std::size_t i = 0; i < cover.size(); ++i) {
        if (std::abs(rebuilt[i] - v[i]) > tolerance) {
            throw InvariantViolation("decompose_stationary: mixture does not reproduce v");
        }
    }
    return weights;
}

double cylinder_measure(const MarkovMeasureSpec &spec, std::span<const std::size_t> word) {
    if (word.empty()) {
        return 1.0;
    }
    const std::size_t n = spec.cover.size();
    if (word[0] >= n) {
        return 0.0;
    }
    double p = spec.initial[word[0]];
    for (std::size_t i = 0; i + 1 < word.size() && p > 0.0; ++i) {
        if (word[i + 1] >= n) {
            return 0.0;
        }
        p *= spec.cover.probability(word[i], word[i + 1]);
    }
    return p;
}

MarkovMeasureSpec ergodic_measure_spec(const StochasticCover &cover,
                                       const BasicSetDecomposition &decomposition,
                                       std::size_t class_index) {
    if (class_index >= decomposition.classes.size() || !decomposition.terminal[class_index]) {
        throw ValidationError("ergodic_measure_spec: class is not terminal");
    }
    return MarkovMeasureSpec{cover, stationary_distribution(cover, decomposition.classes[class_index])};
}

std::vector<std::size_t> sample_path(const MarkovMeasureSpec &spec, std::size_t length,
                                     std::uint64_t seed) {
    std::vector<std::size_t> path;
    if (length == 0) {
        return path;
    }
    path.reserve(length);
    SplitMix64 rng(seed);

    auto draw = [&rng](auto &&weights, std::size_t count, auto &&index_of) {
        const double u = rng.uniform();
        double cumulative = 0.0;
        std::size_t last_positive = index_of(0);
        for (std::size_t k = 0; k < count; ++k) {
            const double w = weights(k);
            if (w <= 0.0) {
                continue;
            }
            last_positive = index_of(k);
            cumulative += w;
            if (u < cumulative) {
                return index_of(k);
            }
        }
        return last_positive; // rounding left u above the final partial sum
    };

    const auto &init = spec.initial.weights();
    std::size_t state = draw([&](std::size_t k) { return init[k]; }, init.size(),
                             [](std::size_t k) { return k; });
    path.push_back(state);
    const auto &relation = spec.cover.relation();
    while (path.size() < length) {
        const auto succ = relation.successors(state);
        if (succ.empty()) {
            throw ValidationError("sample_path: reached an element without successors");
        }
        const std::size_t from = state;
        state = draw([&](std::size_t k) { return spec.cover.probability(from, succ[k]); }, succ.size(),
                     [&](std::size_t k) { return succ[k]; });
        path.push_back(state);
    }
    return path;
}

GenericityReport genericity_check(const StochasticCover &cover,
                                  const BasicSetDecomposition &decomposition,
                                  std::span<const std::size_t> path, int word_length_cap) {
    if (word_length_cap < 1) {
        throw ValidationError("genericity_check: word length cap must be positive");
    }
    const std::size_t k = cover.size();
    double needed = 10.0 * std::pow(static_cast<double>(k), word_length_cap);
    if (static_cast<double>(path.size()) < needed) {
        throw ValidationError("genericity_check: path length " + std::to_string(path.size()) +
                              " below 10*|K|^L = " + std::to_string(static_cast<long long>(needed)));
    }
    if (!is_path_word(cover.relation(), path)) {
        throw ValidationError("genericity_check: path leaves the relation");
    }

    GenericityReport report;
    report.path_length = path.size();
    report.word_length_cap = word_length_cap;
    report.threshold = 5.0 / std::sqrt(static_cast<double>(path.size()));

    // Terminal classes are closed, so the first terminal symbol fixes the
    // endset (the certificate of the prefix ending there).
    for (std::size_t t = 0; t < path.size(); ++t) {
        const auto cls = decomposition.class_of[path[t]];
        if (cls && decomposition.terminal[*cls]) {
            report.entered_class = cls;
            report.entry_time = t;
            break;
        }
    }
    if (!report.entered_class) {
        report.note = "path never enters a terminal class";
        return report;
    }

    const MarkovMeasureSpec measure = ergodic_measure_spec(cover, decomposition, *report.entered_class);
    std::vector<std::size_t> word;
    for (int len = 1; len <= word_length_cap; ++len) {
        const auto ulen = static_cast<std::size_t>(len);
        std::size_t word_count = 1;
        for (int i = 0; i < len; ++i) {
            word_count *= k;
        }
        std::vector<std::size_t> counts(word_count, 0);
        // Window code: symbol at offset i has weight k^(len-1-i).
        const std::size_t top = word_count / k;
        std::size_t code = 0;
        for (std::size_t t = 0; t < path.size(); ++t) {
            if (t >= ulen) {
                code -= path[t - ulen] * top;
            }
            code = code * k + path[t];
            if (t + 1 >= ulen) {
                ++counts[code];
            }
        }
        const double windows = static_cast<double>(path.size() - ulen + 1);
        word.assign(ulen, 0);
        for (std::size_t c = 0; c < word_count; ++c) {
            std::size_t rest = c;
            for (std::size_t i = ulen; i-- > 0;) {
                word[i] = rest % k;
                rest /= k;
            }
            const double expected = cylinder_measure(measure, word);
            const double observed = static_cast<double>(counts[c]) / windows;
            report.max_deviation = std::max(report.max_deviation, std::abs(observed - expected));
        }
    }
    report.pass = report.max_deviation <= report.threshold;
    return report;
}

SubshiftReport tractability_report_subshift(const StochasticCover &cover,
                                            const Distribution &positive_initial) {
    if (positive_initial.size() != cover.size()) {
        throw ValidationError("initial distribution size does not match the cover");
    }
    for (double w : positive_initial.weights()) {
        if (!(w > 0.0)) {
            throw ValidationError("background distribution must be positive on every element");
        }
    }
    const BasicSetDecomposition decomposition = basic_sets(cover.relation());
    SubshiftReport report;
    report.relation = cover.relation();
    report.transient = decomposition.transient;
    report.order = decomposition.order;
    report.terminal_classes = decomposition.terminal_classes();
    report.background = positive_initial;
    for (std::size_t c = 0; c < decomposition.classes.size(); ++c) {
        // For a subshift of finite type the visible basic sets are exactly
        // the terminal ones.
        report.classes.push_back({decomposition.classes[c], decomposition.terminal[c],
                                  decomposition.terminal[c]});
    }
    for (std::size_t c : report.terminal_classes) {
        report.stationary.push_back(stationary_distribution(cover, decomposition.classes[c]));
    }
    report.decay = transient_decay(cover, decomposition);

    const std::size_t basic = decomposition.classes.size();
    const std::size_t terminal = report.terminal_classes.size();
    report.trac1 = {true, std::to_string(basic) + " basic set(s)"};
    {
        std::ostringstream d;
        d.precision(17);
        d << terminal << " ergodic measure(s) mu_B; transient mass after " << report.decay.n
          << "k steps is at most " << report.decay.rho << "^k, so paths avoiding the terminal classes "
          << "have background measure zero";
        report.trac2 = {terminal > 0, d.str()};
    }
    report.trac3 = {true, std::to_string(terminal) + " visible basic set(s), all terminal; each mu_B is "
                                                     "supported in its own class"};
    report.trac4 = {true, "distinct basic sets are disjoint, so the supports of the mu_B are disjoint"};
    return report;
}

} // namespace tractdyn
