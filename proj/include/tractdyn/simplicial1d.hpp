#ifndef TRACTDYN_SIMPLICIAL1D_HPP
#define TRACTDYN_SIMPLICIAL1D_HPP

#include "tractdyn/markov.hpp"
#include "tractdyn/rational.hpp"
#include "tractdyn/two_alphabet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tractdyn::simplicial {

struct Interval {
    Rational lo;
    Rational hi;

    Rational length() const { return hi - lo; }
    Rational midpoint() const { return (lo + hi) / 2; }
    bool contains(const Rational &x) const { return lo <= x && x <= hi; }
    bool contains(const Interval &other) const { return lo <= other.lo && other.hi <= hi; }
    friend bool operator==(const Interval &, const Interval &) = default;
};

/// Triangulation of [v₀, v_last] by strictly increasing rational vertices;
/// edge e is [v_e, v_{e+1}].
class IntervalComplex {
  public:
    IntervalComplex() = default;
    /// Throws ValidationError on fewer than two or non-increasing vertices.
    explicit IntervalComplex(std::vector<Rational> vertices);

    const std::vector<Rational> &vertices() const { return vertices_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return vertices_.size() - 1; }
    const Rational &vertex(std::size_t i) const { return vertices_[i]; }
    Interval edge(std::size_t e) const { return {vertices_[e], vertices_[e + 1]}; }
    Rational length(std::size_t e) const { return vertices_[e + 1] - vertices_[e]; }
    Interval hull() const { return {vertices_.front(), vertices_.back()}; }
    bool contains(const Rational &x) const { return hull().contains(x); }

    std::optional<std::size_t> vertex_index(const Rational &x) const;
    /// Edge containing x; a shared vertex belongs to the edge on its right
    /// except at the last vertex. Throws ValidationError outside the hull.
    std::size_t edge_containing(const Rational &x) const;
    /// Largest Euclidean edge length.
    Rational mesh() const;

    friend bool operator==(const IntervalComplex &, const IntervalComplex &) = default;

  private:
    std::vector<Rational> vertices_;
};

/// Edge labels: "I1", "I2", … for K and "Ii.j" for the j-th piece of Ii.
std::string base_edge_label(std::size_t edge);
std::string star_edge_label(std::size_t parent, std::size_t piece);

struct Barycentric {
    /// Carrier: a vertex when `vertex` is set, else the edge `edge`.
    std::optional<std::size_t> vertex;
    std::size_t edge = 0;
    /// Nonzero coordinates (vertex index, b_v(x)), at most two, summing to 1.
    std::vector<std::pair<std::size_t, Rational>> coordinates;
};

Barycentric barycentric(const IntervalComplex &K, const Rational &x);

/// L¹ distance between K barycentric coordinate vectors.
Rational distance_K(const IntervalComplex &K, const Rational &x, const Rational &y);

/// K ⊂ K* as vertex sets with equal endpoints; throws ValidationError otherwise.
void check_subdivision(const IntervalComplex &K, const IntervalComplex &Kstar);
/// Every K edge contains at least two K* edges.
bool is_proper(const IntervalComplex &K, const IntervalComplex &Kstar);

/// K* vertex -> K vertex assignment, before the non-degeneracy check.
struct VertexMap {
    IntervalComplex K;
    IntervalComplex Kstar;
    std::vector<std::size_t> image; ///< per K* vertex, index into K vertices
};

/// K* edges whose endpoint images are equal or not K-adjacent.
std::vector<std::size_t> degenerate_edges(const VertexMap &map);

/**
 * Non-degenerate simplicial dynamical system γ : K* -> K in dimension one.
 * J sends a K* edge to the K edge containing it; γ sends it to the K edge
 * spanned by its vertex images.
 */
class SimplicialSystem1D {
  public:
    const IntervalComplex &K() const { return K_; }
    const IntervalComplex &Kstar() const { return Kstar_; }
    const std::vector<std::size_t> &vertex_image() const { return image_; }
    std::size_t J(std::size_t star_edge) const { return parent_[star_edge]; }
    std::size_t gamma(std::size_t star_edge) const { return gamma_[star_edge]; }
    /// Whether g reverses orientation on the K* edge.
    bool reverses(std::size_t star_edge) const { return image_[star_edge] > image_[star_edge + 1]; }
    const std::vector<std::string> &base_labels() const { return base_labels_; }
    const std::vector<std::string> &star_labels() const { return star_labels_; }
    /// K* edges inside the K edge, left to right.
    const std::vector<std::size_t> &fiber(std::size_t base_edge) const { return fibers_[base_edge]; }

  private:
    friend SimplicialSystem1D build_system(VertexMap map);
    SimplicialSystem1D() = default;

    IntervalComplex K_, Kstar_;
    std::vector<std::size_t> image_;
    std::vector<std::size_t> parent_, gamma_;
    std::vector<std::vector<std::size_t>> fibers_;
    std::vector<std::string> base_labels_, star_labels_;
};

/// Throws ValidationError when K* is not a subdivision, not proper, or the
/// vertex map is degenerate.
SimplicialSystem1D build_system(VertexMap map);
/// vmap keyed by K* vertex value, valued in K vertices.
SimplicialSystem1D build_system(const IntervalComplex &K, const IntervalComplex &Kstar,
                                const std::map<Rational, Rational> &vmap);

/// min over K* vertices interior to a K edge of their smaller barycentric coordinate.
Rational theta(const SimplicialSystem1D &system);

/// g(x) by linear interpolation on the K* edge containing x.
Rational pl_eval(const SimplicialSystem1D &system, const Rational &x);

/// ḡ_{s*} : γ(s*) -> s*, the inverse of g on the K* edge.
Rational local_inverse(const SimplicialSystem1D &system, std::size_t star_edge, const Rational &y);
Interval local_inverse(const SimplicialSystem1D &system, std::size_t star_edge, const Interval &y);

/// (s*, t*) ∈ G* iff J(t*) = γ(s*).
bool star_edge_relation(const SimplicialSystem1D &system, std::size_t from, std::size_t to);

/// ḡ_{s₀} ∘ … ∘ ḡ_{s_{n-1}}(s_n); throws ValidationError when the word leaves G*.
Interval code_H_1d(const SimplicialSystem1D &system, const std::vector<std::size_t> &word);

struct Refinement {
    int n = 0;
    std::vector<Interval> cells; ///< left to right, tiling X
    Rational mesh;               ///< largest d_K diameter of a cell
    Rational bound;              ///< 2(1-θ)^n
};

/// K^{*n} for n ≥ 1: cells ḡ_{s₀}∘…∘ḡ_{s_{n-2}}(s_{n-1}) over G* words of
/// length n. n = 0 also returns K*. Throws ResourceCapError when the cell
/// count exceeds the cap and InvariantViolation if mesh > bound.
Refinement refine(const SimplicialSystem1D &system, int n);

/// ν(s*) = len(s*) / len(J(s*)).
std::vector<Rational> lebesgue_distribution_data(const SimplicialSystem1D &system);

/// Two-alphabet model on (ᵈK*, ᵈK) with Lebesgue distribution data.
TwoAlphabetModel pl_model(const SimplicialSystem1D &system);

/// g = p.l. map; sup |f - g| ≤ 2 mesh(K) before repair.
struct RoundoffResult {
    VertexMap raw;                 ///< roundoff before repair (may be degenerate)
    SimplicialSystem1D system;     ///< non-degenerate system
    bool repaired = false;
    int dyadic_level = 0;          ///< L splits every K' edge into 2^level parts
};

/// P.l. roundoff: stars of K in the derived subdivision K', a
/// subdivision L of K' fine enough that each simplex image (enclosed by
/// f(mid) ± Lip·len/2) lies in one star, and γ(v(t)) a vertex of the
/// minimal carrier σ_f(t). Degenerate results are repaired.
RoundoffResult roundoff(const std::function<Rational(const Rational &)> &f, const Rational &lipschitz,
                        const IntervalComplex &K);

/**
 * One-dimensional stand-in for the general non-degeneracy repair: every
 * maximal run of K* vertices sharing an image v keeps v at both ends and
 * alternates v with a K-neighbour inside; a run with an even number of
 * vertices first gets a midpoint inserted in its last edge. Adjacent images
 * must already be equal or K-adjacent. Moves g by at most mesh(K).
 */
SimplicialSystem1D nondegenerate_repair(const VertexMap &map);

struct NormBoundCheck {
    double bound = 0.0;     ///< 1 - θ/d
    double max_ratio = 0.0; ///< largest ‖Pa‖₁/‖a‖₁ observed
};

/// For a nonnegative column-stochastic (m+1)×(d+1) matrix in which every
/// pair of columns shares a row with both entries ≥ θ, checks
/// ‖Pa‖₁ ≤ (1 - θ/d)‖a‖₁ over sum-zero vectors a (all e_i - e_j plus
/// `samples` random ones). Throws ValidationError on a violated
/// precondition and InvariantViolation if the bound fails.
NormBoundCheck column_stochastic_norm_bound(const Eigen::MatrixXd &P, double theta, int samples = 1000,
                                            std::uint64_t seed = 0);

enum class FlagKind { VisibleButNotTerminal, PossibleMerge };

struct ClassFlag {
    FlagKind kind;
    std::size_t base_class;
    std::vector<std::size_t> related; ///< other base classes involved
    std::string detail;
};

struct DensityPiece {
    Interval interval;
    Rational weight;  ///< v_B(s), the mass of λ_B on s
    Rational density; ///< weight / len(s)
};

struct PLTerminal {
    std::size_t base_class = 0;
    std::size_t star_class = 0;
    std::vector<Rational> stationary; ///< v_B over ᵈK
    bool stationary_identity = false;
    std::vector<Interval> support; ///< X(B̄) as merged intervals
    std::vector<DensityPiece> density;
};

struct PLReport {
    SimplicialSystem1D system;
    TwoAlphabetModel model;
    Correspondence correspondence;
    Rational theta;
    std::vector<Rational> background; ///< v₀ over ᵈK
    std::vector<PLTerminal> terminals;
    std::vector<ClassFlag> flags;
    DecayCertificate decay;
    TracStatus trac1, trac2, trac3, trac4;
};

std::string flag_name(FlagKind kind);

/// v0 must be a positive distribution on ᵈK (exact); by default the
/// normalised Lebesgue weights len(s)/len(X).
PLReport tractability_report_pl(const SimplicialSystem1D &system, std::optional<std::vector<Rational>> v0 = {});

/// λ_B(interval) = Σ v_B(s)·|interval ∩ s|/len(s).
Rational terminal_measure(const PLTerminal &terminal, const Interval &interval);

struct BirkhoffExperiment {
    std::size_t segments = 0;
    int depth = 0;
    std::vector<Interval> bins;
    std::vector<double> empirical;
    std::vector<double> expected;
    double max_deviation = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/**
 * Samples a G* path from μ_{B*} of length segments + depth, decodes each
 * window of depth+1 symbols with code_H_1d, and compares the histogram of
 * decoded midpoints over equal bins of the hull of X(B̄) with λ_B.
 * Passes when every bin deviates by at most 5/√segments.
 */
BirkhoffExperiment birkhoff_decoding(const PLReport &report, std::size_t terminal_index, std::size_t segments,
                                     int depth, std::uint64_t seed, int bin_count = 10);

} // namespace tractdyn::simplicial

#endif
