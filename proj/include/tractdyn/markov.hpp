#ifndef TRACTDYN_MARKOV_HPP
#define TRACTDYN_MARKOV_HPP

#include "tractdyn/relation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tractdyn {

inline constexpr double kAlgebraicTolerance = 1e-12;
inline constexpr double kStationaryTolerance = 1e-9;

/**
 * Column-stochastic matrix carried by a relation: matrix(j, i) is the
 * probability of stepping from element i to element j, positive exactly on
 * the relation's edges. Products of covers are covers of the composed
 * relation, which is why columns (not rows) sum to one.
 */
class StochasticCover {
  public:
    const FiniteRelation &relation() const { return relation_; }
    const Eigen::MatrixXd &matrix() const { return matrix_; }
    std::size_t size() const { return relation_.size(); }
    double probability(std::size_t from, std::size_t to) const { return matrix_(to, from); }

  private:
    friend StochasticCover validate_cover(FiniteRelation, Eigen::MatrixXd, double);
    StochasticCover(FiniteRelation relation, Eigen::MatrixXd matrix)
        : relation_(std::move(relation)), matrix_(std::move(matrix)) {}

    FiniteRelation relation_;
    Eigen::MatrixXd matrix_;
};

/// Accepts the matrix iff its support is exactly the edge set, entries lie in
/// [0, 1] and every column sums to 1 within tolerance.
StochasticCover validate_cover(FiniteRelation relation, Eigen::MatrixXd matrix,
                               double tolerance = kAlgebraicTolerance);

/// Equal weight on each successor.
StochasticCover uniform_cover(const FiniteRelation &relation);

/// Probability vector over the elements of a relation.
class Distribution {
  public:
    Distribution() = default;
    /// Throws ValidationError on negative weights or a total away from 1.
    explicit Distribution(std::vector<double> weights, double tolerance = kAlgebraicTolerance);

    static Distribution point_mass(std::size_t size, std::size_t at);
    static Distribution uniform(std::size_t size);

    const std::vector<double> &weights() const { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::size_t size() const { return weights_.size(); }
    std::vector<std::size_t> support() const;
    double mass(std::span<const std::size_t> subset) const;

  private:
    std::vector<double> weights_;
};

struct MarkovMeasureSpec {
    StochasticCover cover;
    Distribution initial;
};

/// (Γ^{n k})_{tran, s} ≤ rho^k for every s and k ≥ 1.
struct DecayCertificate {
    int n = 1;
    double rho = 0.0;
};

/// ∞-norm of Γ·v − v.
double stationary_residual(const StochasticCover &cover, const Distribution &v);

DecayCertificate transient_decay(const StochasticCover &cover,
                                 const BasicSetDecomposition &decomposition);

/// (Γ^steps)_{tran, s} for every starting element s, by repeated
/// multiplication.
std::vector<double> transient_mass_after(const StochasticCover &cover,
                                         const BasicSetDecomposition &decomposition, int steps);

/// Unique stationary distribution with support equal to a terminal class.
/// Throws ValidationError if the subset is not a closed strongly connected
/// class, NumericalError if the residual exceeds the tolerance.
Distribution stationary_distribution(const StochasticCover &cover,
                                     std::span<const std::size_t> terminal_class,
                                     double tolerance = kAlgebraicTolerance);

/// Weights v(B) of the terminal classes, in decomposition.terminal_classes()
/// order, after checking v = Σ v(B) v_B.
std::vector<double> decompose_stationary(const StochasticCover &cover,
                                         const BasicSetDecomposition &decomposition,
                                         const Distribution &v,
                                         double tolerance = kStationaryTolerance);

/// initial(s₀) · ∏ Γ[s_{i+1}][s_i]; zero when the word leaves the relation.
double cylinder_measure(const MarkovMeasureSpec &spec, std::span<const std::size_t> word);

MarkovMeasureSpec ergodic_measure_spec(const StochasticCover &cover,
                                       const BasicSetDecomposition &decomposition,
                                       std::size_t class_index);

/// Draws s₀ from the initial distribution and each further step from the
/// current column, both by inverse CDF against splitmix64 uniforms.
std::vector<std::size_t> sample_path(const MarkovMeasureSpec &spec, std::size_t length,
                                     std::uint64_t seed);

struct GenericityReport {
    std::size_t path_length = 0;
    int word_length_cap = 0;
    std::optional<std::size_t> entered_class;
    std::size_t entry_time = 0;
    double max_deviation = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

/// Compares sliding-window frequencies of all words of length ≤ L with the
/// ergodic measure of the terminal class the path enters. Passes when the
/// largest deviation is at most 5/√T.
GenericityReport genericity_check(const StochasticCover &cover,
                                  const BasicSetDecomposition &decomposition,
                                  std::span<const std::size_t> path, int word_length_cap);

struct TracStatus {
    bool satisfied = false;
    std::string detail;
};

struct SubshiftClassSummary {
    std::vector<std::size_t> members;
    bool terminal = false;
    bool visible = false;
};

struct SubshiftReport {
    FiniteRelation relation;
    std::vector<SubshiftClassSummary> classes;
    std::vector<std::size_t> transient;
    std::vector<std::pair<std::size_t, std::size_t>> order;
    /// One stationary distribution per terminal class, same order as
    /// BasicSetDecomposition::terminal_classes().
    std::vector<std::size_t> terminal_classes;
    std::vector<Distribution> stationary;
    Distribution background;
    DecayCertificate decay;
    TracStatus trac1, trac2, trac3, trac4;
};

SubshiftReport tractability_report_subshift(const StochasticCover &cover,
                                            const Distribution &positive_initial);

} // namespace tractdyn

#endif
