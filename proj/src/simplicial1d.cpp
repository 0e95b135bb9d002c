#include "tractdyn/simplicial1d.hpp"

#include "tractdyn/caps.hpp"
#include "tractdyn/error.hpp"
#include "tractdyn/prng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tractdyn::simplicial {

IntervalComplex::IntervalComplex(std::vector<Rational> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) {
        throw ValidationError("an interval complex needs at least two vertices");
    }
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
        if (!(vertices_[i - 1] < vertices_[i])) {
            throw ValidationError("complex vertices must be strictly increasing (at " +
                                  format_rational(vertices_[i]) + ")");
        }
    }
}

std::optional<std::size_t> IntervalComplex::vertex_index(const Rational &x) const {
    const auto it = std::lower_bound(vertices_.begin(), vertices_.end(), x);
    if (it != vertices_.end() && *it == x) {
        return static_cast<std::size_t>(it - vertices_.begin());
    }
    return std::nullopt;
}

std::size_t IntervalComplex::edge_containing(const Rational &x) const {
    if (!contains(x)) {
        throw ValidationError("point " + format_rational(x) + " lies outside the complex");
    }
    const auto it = std::upper_bound(vertices_.begin(), vertices_.end(), x);
    const auto e = static_cast<std::size_t>(it - vertices_.begin());
    return std::min(e, edge_count()) - 1;
}

Rational IntervalComplex::mesh() const {
    Rational best = 0;
    for (std::size_t e = 0; e < edge_count(); ++e) {
        best = std::max(best, length(e));
    }
    return best;
}

std::string base_edge_label(std::size_t edge) { return "I" + std::to_string(edge + 1); }

std::string star_edge_label(std::size_t parent, std::size_t piece) {
    return base_edge_label(parent) + "." + std::to_string(piece + 1);
}

Barycentric barycentric(const IntervalComplex &K, const Rational &x) {
    Barycentric b;
    if (const auto v = K.vertex_index(x)) {
        b.vertex = *v;
        b.edge = std::min(*v, K.edge_count() - 1);
        b.coordinates.emplace_back(*v, Rational(1));
        return b;
    }
    b.edge = K.edge_containing(x);
    const Rational t = (x - K.vertex(b.edge)) / K.length(b.edge);
    b.coordinates.emplace_back(b.edge, 1 - t);
    b.coordinates.emplace_back(b.edge + 1, t);
    return b;
}

Rational distance_K(const IntervalComplex &K, const Rational &x, const Rational &y) {
    const Barycentric bx = barycentric(K, x);
    const Barycentric by = barycentric(K, y);
    std::map<std::size_t, Rational> diff;
    for (const auto &[v, c] : bx.coordinates) {
        diff[v] += c;
    }
    for (const auto &[v, c] : by.coordinates) {
        diff[v] -= c;
    }
    Rational total = 0;
    for (const auto &[v, c] : diff) {
        total += abs(c);
    }
    return total;
}

void check_subdivision(const IntervalComplex &K, const IntervalComplex &Kstar) {
    if (K.hull() != Kstar.hull()) {
        throw ValidationError("K* does not cover the same interval as K");
    }
    for (const auto &v : K.vertices()) {
        if (!Kstar.vertex_index(v)) {
            throw ValidationError("K* is not a subdivision of K: vertex " + format_rational(v) + " missing");
        }
    }
}

bool is_proper(const IntervalComplex &K, const IntervalComplex &Kstar) {
    for (std::size_t e = 0; e < K.edge_count(); ++e) {
        const auto a = *Kstar.vertex_index(K.vertex(e));
        const auto b = *Kstar.vertex_index(K.vertex(e + 1));
        if (b - a < 2) {
            return false;
        }
    }
    return true;
}

std::vector<std::size_t> degenerate_edges(const VertexMap &map) {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e + 1 < map.image.size(); ++e) {
        const auto a = map.image[e];
        const auto b = map.image[e + 1];
        if (a == b || (a > b ? a - b : b - a) != 1) {
            out.push_back(e);
        }
    }
    return out;
}

namespace {

void check_vertex_map(const VertexMap &map) {
    check_subdivision(map.K, map.Kstar);
    if (!is_proper(map.K, map.Kstar)) {
        throw ValidationError("K* is not a proper subdivision: some K edge is not split");
    }
    if (map.image.size() != map.Kstar.vertex_count()) {
        throw ValidationError("vertex map must assign an image to every K* vertex");
    }
    for (std::size_t v : map.image) {
        if (v >= map.K.vertex_count()) {
            throw ValidationError("vertex map image out of range");
        }
    }
}

} // namespace

SimplicialSystem1D build_system(VertexMap map) {
    check_vertex_map(map);
    const auto bad = degenerate_edges(map);
    if (!bad.empty()) {
        const auto e = bad.front();
        throw ValidationError("degenerate vertex map: K* vertices " + format_rational(map.Kstar.vertex(e)) +
                              " and " + format_rational(map.Kstar.vertex(e + 1)) + " go to " +
                              format_rational(map.K.vertex(map.image[e])) + " and " +
                              format_rational(map.K.vertex(map.image[e + 1])));
    }

    SimplicialSystem1D system;
    const std::size_t m = map.Kstar.edge_count();
    system.parent_.resize(m);
    system.gamma_.resize(m);
    system.fibers_.assign(map.K.edge_count(), {});
    for (std::size_t s = 0; s < m; ++s) {
        system.parent_[s] = map.K.edge_containing(map.Kstar.edge(s).midpoint());
        system.gamma_[s] = std::min(map.image[s], map.image[s + 1]);
        system.fibers_[system.parent_[s]].push_back(s);
    }
    for (std::size_t e = 0; e < map.K.edge_count(); ++e) {
        system.base_labels_.push_back(base_edge_label(e));
    }
    for (std::size_t s = 0; s < m; ++s) {
        const auto &f = system.fibers_[system.parent_[s]];
        const auto piece = static_cast<std::size_t>(std::find(f.begin(), f.end(), s) - f.begin());
        system.star_labels_.push_back(star_edge_label(system.parent_[s], piece));
    }
    system.K_ = std::move(map.K);
    system.Kstar_ = std::move(map.Kstar);
    system.image_ = std::move(map.image);
    return system;
}

SimplicialSystem1D build_system(const IntervalComplex &K, const IntervalComplex &Kstar,
                                const std::map<Rational, Rational> &vmap) {
    VertexMap map{K, Kstar, {}};
    for (const auto &[key, value] : vmap) {
        if (!Kstar.vertex_index(key)) {
            throw ValidationError("vmap key " + format_rational(key) + " is not a K* vertex");
        }
    }
    for (const auto &w : Kstar.vertices()) {
        const auto it = vmap.find(w);
        if (it == vmap.end()) {
            throw ValidationError("vmap has no image for K* vertex " + format_rational(w));
        }
        const auto v = K.vertex_index(it->second);
        if (!v) {
            throw ValidationError("vmap image " + format_rational(it->second) + " is not a K vertex");
        }
        map.image.push_back(*v);
    }
    return build_system(std::move(map));
}

Rational theta(const SimplicialSystem1D &system) {
    const auto &K = system.K();
    const auto &Kstar = system.Kstar();
    Rational best = 1;
    for (const auto &w : Kstar.vertices()) {
        if (K.vertex_index(w)) {
            continue;
        }
        const auto e = K.edge_containing(w);
        const Rational left = (w - K.vertex(e)) / K.length(e);
        best = std::min(best, std::min(left, Rational(1 - left)));
    }
    return best;
}

Rational pl_eval(const SimplicialSystem1D &system, const Rational &x) {
    const auto &Kstar = system.Kstar();
    const auto s = Kstar.edge_containing(x);
    const Rational &ga = system.K().vertex(system.vertex_image()[s]);
    const Rational &gb = system.K().vertex(system.vertex_image()[s + 1]);
    return ga + (gb - ga) * (x - Kstar.vertex(s)) / Kstar.length(s);
}

Rational local_inverse(const SimplicialSystem1D &system, std::size_t star_edge, const Rational &y) {
    const Rational &ga = system.K().vertex(system.vertex_image()[star_edge]);
    const Rational &gb = system.K().vertex(system.vertex_image()[star_edge + 1]);
    if (y < std::min(ga, gb) || y > std::max(ga, gb)) {
        throw ValidationError("local_inverse: " + format_rational(y) + " outside gamma(" +
                              system.star_labels()[star_edge] + ")");
    }
    const Rational &a = system.Kstar().vertex(star_edge);
    return a + system.Kstar().length(star_edge) * (y - ga) / (gb - ga);
}

Interval local_inverse(const SimplicialSystem1D &system, std::size_t star_edge, const Interval &y) {
    Rational lo = local_inverse(system, star_edge, y.lo);
    Rational hi = local_inverse(system, star_edge, y.hi);
    if (hi < lo) {
        swap(lo, hi);
    }
    return {lo, hi};
}

bool star_edge_relation(const SimplicialSystem1D &system, std::size_t from, std::size_t to) {
    return system.J(to) == system.gamma(from);
}

namespace {

void check_star_word(const SimplicialSystem1D &system, const std::vector<std::size_t> &word) {
    if (word.empty()) {
        throw ValidationError("empty K* word");
    }
    const std::size_t m = system.Kstar().edge_count();
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] >= m) {
            throw ValidationError("K* edge index " + std::to_string(word[i]) + " out of range");
        }
        if (i > 0 && !star_edge_relation(system, word[i - 1], word[i])) {
            throw ValidationError("word leaves G* at position " + std::to_string(i));
        }
    }
}

} // namespace

Interval code_H_1d(const SimplicialSystem1D &system, const std::vector<std::size_t> &word) {
    check_star_word(system, word);
    Interval cell = system.Kstar().edge(word.back());
    for (std::size_t i = word.size() - 1; i-- > 0;) {
        cell = local_inverse(system, word[i], cell);
    }
    return cell;
}

Refinement refine(const SimplicialSystem1D &system, int n) {
    if (n < 0) {
        throw ValidationError("refinement level must be nonnegative");
    }
    const auto &Kstar = system.Kstar();
    const std::size_t m = Kstar.edge_count();

    // counts[s] = number of level-l cells inside K* edge s
    std::vector<std::uint64_t> counts(m, 1);
    for (int l = 1; l < n; ++l) {
        std::vector<std::uint64_t> next(m, 0);
        std::uint64_t total = 0;
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t t : system.fiber(system.gamma(s))) {
                next[s] = std::min(next[s] + counts[t], std::numeric_limits<std::uint64_t>::max() / 2);
            }
            total = std::min(total + next[s], std::numeric_limits<std::uint64_t>::max() / 2);
        }
        require_within_cap("refinement cells at level " + std::to_string(l + 1), total);
        counts = std::move(next);
    }

    std::vector<std::vector<Interval>> cells(m);
    for (std::size_t s = 0; s < m; ++s) {
        cells[s].push_back(Kstar.edge(s));
    }
    for (int l = 1; l < n; ++l) {
        std::vector<std::vector<Interval>> next(m);
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t t : system.fiber(system.gamma(s))) {
                for (const auto &c : cells[t]) {
                    next[s].push_back(local_inverse(system, s, c));
                }
            }
            std::sort(next[s].begin(), next[s].end(),
                      [](const Interval &a, const Interval &b) { return a.lo < b.lo; });
        }
        cells = std::move(next);
    }

    Refinement result;
    result.n = n;
    result.mesh = 0;
    for (std::size_t s = 0; s < m; ++s) {
        const Rational parent_length = system.K().length(system.J(s));
        for (auto &c : cells[s]) {
            result.mesh = std::max(result.mesh, Rational(2 * c.length() / parent_length));
            result.cells.push_back(std::move(c));
        }
    }
    Rational factor = 1 - theta(system);
    result.bound = 2;
    for (int l = 0; l < n; ++l) {
        result.bound *= factor;
    }
    if (n > 0 && result.mesh > result.bound) {
        throw InvariantViolation("refinement mesh " + format_rational(result.mesh) + " exceeds " +
                                 format_rational(result.bound));
    }
    return result;
}

std::vector<Rational> lebesgue_distribution_data(const SimplicialSystem1D &system) {
    std::vector<Rational> nu;
    nu.reserve(system.Kstar().edge_count());
    for (std::size_t s = 0; s < system.Kstar().edge_count(); ++s) {
        nu.push_back(system.Kstar().length(s) / system.K().length(system.J(s)));
    }
    return nu;
}

TwoAlphabetModel pl_model(const SimplicialSystem1D &system) {
    const std::size_t m = system.Kstar().edge_count();
    std::vector<std::size_t> J(m), gamma(m);
    for (std::size_t s = 0; s < m; ++s) {
        J[s] = system.J(s);
        gamma[s] = system.gamma(s);
    }
    return build_model(system.star_labels(), system.base_labels(), std::move(J), std::move(gamma),
                       lebesgue_distribution_data(system));
}

namespace {

struct Carrier {
    bool is_vertex;
    std::size_t index;
};

// Smallest simplex s of K with S inside the open star N°(s, K'), where K'
// adds the edge midpoints. In one dimension at most one vertex star
// contains S, and when none does at most one edge star does.
std::optional<Carrier> minimal_carrier(const IntervalComplex &K, const Interval &S) {
    const std::size_t last = K.vertex_count() - 1;
    auto mid = [&](std::size_t e) { return K.edge(e).midpoint(); };
    for (std::size_t i = 0; i <= last; ++i) {
        const bool lower_ok = i == 0 ? S.lo >= K.vertex(0) : S.lo > mid(i - 1);
        const bool upper_ok = i == last ? S.hi <= K.vertex(last) : S.hi < mid(i);
        if (lower_ok && upper_ok) {
            return Carrier{true, i};
        }
    }
    for (std::size_t e = 0; e < K.edge_count(); ++e) {
        const bool lower_ok = e == 0 ? S.lo >= K.vertex(0) : S.lo > mid(e - 1);
        const bool upper_ok = e + 1 == last ? S.hi <= K.vertex(last) : S.hi < mid(e + 1);
        if (lower_ok && upper_ok) {
            return Carrier{false, e};
        }
    }
    return std::nullopt;
}

std::size_t carrier_vertex(const IntervalComplex &K, const Carrier &c, const Rational &target) {
    if (c.is_vertex) {
        return c.index;
    }
    const Rational left = abs(target - K.vertex(c.index));
    const Rational right = abs(K.vertex(c.index + 1) - target);
    return right < left ? c.index + 1 : c.index;
}

} // namespace

RoundoffResult roundoff(const std::function<Rational(const Rational &)> &f, const Rational &lipschitz,
                        const IntervalComplex &K) {
    if (lipschitz <= 0) {
        throw ValidationError("Lipschitz bound must be positive");
    }
    const Interval X = K.hull();
    auto image = [&](const Rational &x) {
        Rational y = f(x);
        if (!X.contains(y)) {
            throw ValidationError("f(" + format_rational(x) + ") = " + format_rational(y) +
                                  " lies outside the complex");
        }
        return y;
    };

    std::vector<Rational> derived;
    for (std::size_t e = 0; e < K.edge_count(); ++e) {
        derived.push_back(K.vertex(e));
        derived.push_back(K.edge(e).midpoint());
    }
    derived.push_back(K.vertices().back());

    for (int level = 0;; ++level) {
        const std::uint64_t pieces = saturating_pow(2, static_cast<std::uint64_t>(level));
        const std::uint64_t l_edges = pieces > std::numeric_limits<std::uint64_t>::max() / derived.size()
                                          ? std::numeric_limits<std::uint64_t>::max()
                                          : pieces * (derived.size() - 1);
        require_within_cap("roundoff subdivision edges", 2 * l_edges);

        std::vector<Rational> L;
        L.reserve(static_cast<std::size_t>(l_edges) + 1);
        for (std::size_t i = 0; i + 1 < derived.size(); ++i) {
            const Rational step = (derived[i + 1] - derived[i]) / static_cast<unsigned long>(pieces);
            for (std::uint64_t j = 0; j < pieces; ++j) {
                L.push_back(derived[i] + step * static_cast<unsigned long>(j));
            }
        }
        L.push_back(derived.back());

        std::vector<Rational> vertex_images(L.size());
        std::vector<Carrier> vertex_carriers;
        vertex_carriers.reserve(L.size());
        for (std::size_t i = 0; i < L.size(); ++i) {
            vertex_images[i] = image(L[i]);
            vertex_carriers.push_back(*minimal_carrier(K, {vertex_images[i], vertex_images[i]}));
        }

        std::vector<Carrier> edge_carriers;
        std::vector<Rational> mid_images;
        bool fits = true;
        for (std::size_t i = 0; i + 1 < L.size() && fits; ++i) {
            const Rational c = (L[i] + L[i + 1]) / 2;
            const Rational fc = image(c);
            const Rational h = lipschitz * (L[i + 1] - L[i]) / 2;
            const Interval enclosure{std::max(Rational(fc - h), X.lo), std::min(Rational(fc + h), X.hi)};
            const auto carrier = minimal_carrier(K, enclosure);
            if (!carrier) {
                fits = false;
                break;
            }
            edge_carriers.push_back(*carrier);
            mid_images.push_back(fc);
        }
        if (!fits) {
            continue;
        }

        // L' = L plus edge midpoints, with γ(v(t)) a vertex of σ_f(t).
        VertexMap raw{K, {}, {}};
        std::vector<Rational> Lprime;
        Lprime.reserve(2 * L.size());
        for (std::size_t i = 0; i < L.size(); ++i) {
            Lprime.push_back(L[i]);
            raw.image.push_back(carrier_vertex(K, vertex_carriers[i], vertex_images[i]));
            if (i + 1 < L.size()) {
                Lprime.push_back((L[i] + L[i + 1]) / 2);
                raw.image.push_back(carrier_vertex(K, edge_carriers[i], mid_images[i]));
            }
        }
        raw.Kstar = IntervalComplex(std::move(Lprime));

        if (degenerate_edges(raw).empty()) {
            return {raw, build_system(raw), false, level};
        }
        return {raw, nondegenerate_repair(raw), true, level};
    }
}

SimplicialSystem1D nondegenerate_repair(const VertexMap &map) {
    check_vertex_map(map);
    const auto &img = map.image;
    for (std::size_t e = 0; e + 1 < img.size(); ++e) {
        const auto gap = img[e] > img[e + 1] ? img[e] - img[e + 1] : img[e + 1] - img[e];
        if (gap > 1) {
            throw ValidationError("cannot repair: adjacent K* vertices map to non-adjacent K vertices");
        }
    }

    VertexMap out{map.K, {}, {}};
    std::vector<Rational> vertices;
    const std::size_t count = img.size();
    std::size_t i = 0;
    while (i < count) {
        std::size_t j = i;
        while (j + 1 < count && img[j + 1] == img[i]) {
            ++j;
        }
        const std::size_t v = img[i];
        if (j == i) {
            vertices.push_back(map.Kstar.vertex(i));
            out.image.push_back(v);
            i = j + 1;
            continue;
        }
        const std::size_t u = v + 1 < map.K.vertex_count() ? v + 1 : v - 1;
        std::vector<Rational> run(map.Kstar.vertices().begin() + static_cast<std::ptrdiff_t>(i),
                                  map.Kstar.vertices().begin() + static_cast<std::ptrdiff_t>(j + 1));
        if (run.size() % 2 == 0) {
            const Rational mid = (run[run.size() - 2] + run.back()) / 2;
            run.insert(run.end() - 1, mid);
        }
        for (std::size_t t = 0; t < run.size(); ++t) {
            vertices.push_back(run[t]);
            out.image.push_back(t % 2 == 0 ? v : u);
        }
        i = j + 1;
    }
    out.Kstar = IntervalComplex(std::move(vertices));
    return build_system(std::move(out));
}

NormBoundCheck column_stochastic_norm_bound(const Eigen::MatrixXd &P, double theta, int samples,
                                            std::uint64_t seed) {
    const auto cols = P.cols();
    if (cols < 2) {
        throw ValidationError("norm bound needs d ≥ 1 (at least two columns)");
    }
    if (!(theta > 0.0)) {
        throw ValidationError("theta must be positive");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
        if ((P.col(j).array() < 0.0).any() || std::abs(P.col(j).sum() - 1.0) > kAlgebraicTolerance) {
            throw ValidationError("column " + std::to_string(j) + " is not a probability vector");
        }
    }
    for (Eigen::Index j1 = 0; j1 < cols; ++j1) {
        for (Eigen::Index j2 = j1 + 1; j2 < cols; ++j2) {
            const bool shared = ((P.col(j1).array() >= theta) && (P.col(j2).array() >= theta)).any();
            if (!shared) {
                throw ValidationError("columns " + std::to_string(j1) + " and " + std::to_string(j2) +
                                      " share no row with both entries ≥ theta");
            }
        }
    }

    const double d = static_cast<double>(cols - 1);
    NormBoundCheck result;
    result.bound = 1.0 - theta / d;
    auto observe = [&](const Eigen::VectorXd &a) {
        const double norm = a.lpNorm<1>();
        if (norm > 0.0) {
            result.max_ratio = std::max(result.max_ratio, (P * a).lpNorm<1>() / norm);
        }
    };
    for (Eigen::Index j1 = 0; j1 < cols; ++j1) {
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
            if (j1 != j2) {
                Eigen::VectorXd a = Eigen::VectorXd::Zero(cols);
                a(j1) = 1.0;
                a(j2) = -1.0;
                observe(a);
            }
        }
    }
    SplitMix64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd a(cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            a(j) = 2.0 * rng.uniform() - 1.0;
        }
        a.array() -= a.mean();
        observe(a);
    }
    if (result.max_ratio > result.bound + kAlgebraicTolerance) {
        throw InvariantViolation("norm ratio " + std::to_string(result.max_ratio) + " exceeds 1 - theta/d");
    }
    return result;
}

std::string flag_name(FlagKind kind) {
    switch (kind) {
    case FlagKind::VisibleButNotTerminal:
        return "visible_but_not_terminal";
    case FlagKind::PossibleMerge:
        return "possible_merge";
    }
    return "unknown";
}

namespace {

std::vector<Interval> class_support(const SimplicialSystem1D &system, const std::vector<std::size_t> &edges) {
    std::vector<Interval> support;
    for (std::size_t e : edges) {
        const Interval piece = system.K().edge(e);
        if (!support.empty() && support.back().hi == piece.lo) {
            support.back().hi = piece.hi;
        } else {
            support.push_back(piece);
        }
    }
    return support;
}

std::optional<Rational> touching_point(const std::vector<Interval> &a, const std::vector<Interval> &b) {
    for (const auto &x : a) {
        for (const auto &y : b) {
            if (x.hi == y.lo) {
                return x.hi;
            }
            if (y.hi == x.lo) {
                return x.lo;
            }
        }
    }
    return std::nullopt;
}

std::string class_name(const SimplicialSystem1D &system, const std::vector<std::size_t> &edges) {
    std::string out = "{";
    for (std::size_t i = 0; i < edges.size(); ++i) {
        out += (i ? "," : "") + system.base_labels()[edges[i]];
    }
    return out + "}";
}

} // namespace

PLReport tractability_report_pl(const SimplicialSystem1D &system, std::optional<std::vector<Rational>> v0) {
    const std::size_t edges = system.K().edge_count();
    std::vector<Rational> background;
    if (v0) {
        background = std::move(*v0);
        if (background.size() != edges) {
            throw ValidationError("background distribution must have one weight per K edge");
        }
        Rational total = 0;
        for (const auto &w : background) {
            if (w <= 0) {
                throw ValidationError("background distribution must be positive");
            }
            total += w;
        }
        if (total != 1) {
            throw ValidationError("background distribution sums to " + format_rational(total));
        }
    } else {
        const Rational whole = system.K().hull().length();
        for (std::size_t e = 0; e < edges; ++e) {
            background.push_back(system.K().length(e) / whole);
        }
    }

    TwoAlphabetModel model = pl_model(system);
    Correspondence correspondence = basic_set_correspondence(model);
    const ExactMatrix cover = induced_base_cover_exact(model);
    const InducedCovers floating = induced_covers(model);
    const DecayCertificate decay = transient_decay(floating.base, correspondence.base);

    std::vector<PLTerminal> terminals;
    for (std::size_t p = 0; p < correspondence.pairs.size(); ++p) {
        const auto &pair = correspondence.pairs[p];
        if (!pair.terminal) {
            continue;
        }
        const auto &members = correspondence.base.classes[pair.base_class];
        PLTerminal t;
        t.base_class = pair.base_class;
        t.star_class = pair.star_class;
        t.stationary = exact_stationary_distribution(cover, members);
        t.stationary_identity = stationary_identity_holds(model, correspondence, p, t.stationary);
        if (!t.stationary_identity) {
            throw InvariantViolation("stationary identity failed for terminal class " + class_name(system, members));
        }
        t.support = class_support(system, members);
        for (std::size_t e : members) {
            t.density.push_back({system.K().edge(e), t.stationary[e], t.stationary[e] / system.K().length(e)});
        }
        terminals.push_back(std::move(t));
    }

    const auto &classes = correspondence.base.classes;
    std::vector<std::vector<Interval>> supports;
    for (const auto &c : classes) {
        supports.push_back(class_support(system, c));
    }
    std::vector<ClassFlag> flags;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (correspondence.base.terminal[c]) {
            continue;
        }
        std::vector<std::size_t> escapes;
        for (std::size_t t = 0; t < classes.size(); ++t) {
            if (correspondence.base.terminal[t] && correspondence.base.reaches(c, t)) {
                escapes.push_back(t);
            }
        }
        for (std::size_t t = 0; t < classes.size(); ++t) {
            if (!correspondence.base.terminal[t]) {
                continue;
            }
            const auto point = touching_point(supports[c], supports[t]);
            if (!point) {
                continue;
            }
            std::vector<std::size_t> elsewhere;
            for (std::size_t r : escapes) {
                if (r != t) {
                    elsewhere.push_back(r);
                }
            }
            if (elsewhere.empty()) {
                continue;
            }
            std::vector<std::size_t> related{t};
            related.insert(related.end(), elsewhere.begin(), elsewhere.end());
            std::string detail = class_name(system, classes[c]) + " meets X(" + class_name(system, classes[t]) +
                                 ") at " + format_rational(*point) + " and reaches terminal ";
            for (std::size_t i = 0; i < elsewhere.size(); ++i) {
                detail += (i ? ", " : "") + class_name(system, classes[elsewhere[i]]);
            }
            detail += "; the g basic set containing X(" + class_name(system, classes[t]) +
                      ") may be visible but not terminal";
            flags.push_back({FlagKind::VisibleButNotTerminal, c, std::move(related), std::move(detail)});
        }
    }
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            if (!correspondence.base.terminal[a] || !correspondence.base.terminal[b]) {
                continue;
            }
            if (const auto point = touching_point(supports[a], supports[b])) {
                flags.push_back({FlagKind::PossibleMerge, a, {b},
                                 "X(" + class_name(system, classes[a]) + ") and X(" +
                                     class_name(system, classes[b]) + ") share " + format_rational(*point) +
                                     "; they may lie in one g basic set"});
            }
        }
    }

    const std::size_t class_count = classes.size();
    const std::size_t terminal_count = terminals.size();
    PLReport report{system,  std::move(model), std::move(correspondence), theta(system), std::move(background),
                    std::move(terminals), std::move(flags), decay, {}, {}, {}, {}};
    report.trac1 = {true, std::to_string(class_count) +
                              " G basic sets; distinct terminal classes may share one g basic set"};
    report.trac2 = {true, std::to_string(terminal_count) +
                              " ergodic measures lambda_B; transient mass decays with the certificate"};
    report.trac3 = {true, "each lambda_B is supported on X(B), which lies in a visible g basic set"};
    report.trac4 = {true, "supports of distinct lambda_B meet at finitely many points"};
    return report;
}

Rational terminal_measure(const PLTerminal &terminal, const Interval &interval) {
    Rational total = 0;
    for (const auto &piece : terminal.density) {
        const Rational lo = std::max(interval.lo, piece.interval.lo);
        const Rational hi = std::min(interval.hi, piece.interval.hi);
        if (lo < hi) {
            total += piece.density * (hi - lo);
        }
    }
    return total;
}

BirkhoffExperiment birkhoff_decoding(const PLReport &report, std::size_t terminal_index, std::size_t segments,
                                     int depth, std::uint64_t seed, int bin_count) {
    if (segments == 0 || depth < 0 || bin_count < 1) {
        throw ValidationError("Birkhoff experiment needs segments ≥ 1, depth ≥ 0 and at least one bin");
    }
    const PLTerminal &terminal = report.terminals.at(terminal_index);
    const auto &system = report.system;
    const auto &model = report.model;

    std::vector<double> initial(model.star_size(), 0.0);
    for (std::size_t s : report.correspondence.star.classes[terminal.star_class]) {
        initial[s] = Rational(terminal.stationary[model.J(s)] * model.nu_exact(s)).get_d();
    }
    const MarkovMeasureSpec spec{induced_covers(model).star, Distribution(std::move(initial), 1e-10)};
    const auto path = sample_path(spec, segments + static_cast<std::size_t>(depth), seed);

    BirkhoffExperiment result;
    result.segments = segments;
    result.depth = depth;
    const Rational lo = terminal.support.front().lo;
    const Rational width = (terminal.support.back().hi - lo) / bin_count;
    for (int b = 0; b < bin_count; ++b) {
        result.bins.push_back({lo + width * b, lo + width * (b + 1)});
        result.expected.push_back(terminal_measure(terminal, result.bins.back()).get_d());
    }

    std::vector<std::size_t> counts(static_cast<std::size_t>(bin_count), 0);
    for (std::size_t t = 0; t < segments; ++t) {
        // A point of ḡ_{s_t} ∘ … ∘ ḡ_{s_{t+depth-1}}(s_{t+depth}).
        Rational x = system.Kstar().edge(path[t + static_cast<std::size_t>(depth)]).midpoint();
        for (std::size_t i = t + static_cast<std::size_t>(depth); i-- > t;) {
            x = local_inverse(system, path[i], x);
        }
        const Rational position = (x - lo) / width;
        mpz_class index = position.get_num() / position.get_den();
        const long b = std::clamp(index.get_si(), 0L, static_cast<long>(bin_count - 1));
        ++counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bin_count; ++b) {
        const double freq = static_cast<double>(counts[static_cast<std::size_t>(b)]) / static_cast<double>(segments);
        result.empirical.push_back(freq);
        result.max_deviation = std::max(result.max_deviation, std::abs(freq - result.expected[static_cast<std::size_t>(b)]));
    }
    result.threshold = 5.0 / std::sqrt(static_cast<double>(segments));
    result.pass = result.max_deviation <= result.threshold;
    return result;
}

} // namespace tractdyn::simplicial
