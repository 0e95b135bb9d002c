#ifndef TRACTDYN_TWO_ALPHABET_HPP
#define TRACTDYN_TWO_ALPHABET_HPP

#include "tractdyn/markov.hpp"
#include "tractdyn/rational.hpp"
#include "tractdyn/relation.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tractdyn {

/// Dense exact matrix, entry [j][i] = probability of i -> j.
using ExactMatrix = std::vector<std::vector<Rational>>;

/**
 * Special two-alphabet model: finite sets K* and K with maps J, γ : K* -> K,
 * J onto, and distribution data ν that is a positive probability on each
 * fiber J⁻¹(s). It induces G = γ∘J⁻¹ on K and G* = J⁻¹∘γ on K*.
 *
 * ν is kept exactly when it was given as rationals; the floating view is
 * always available.
 */
class TwoAlphabetModel {
  public:
    const std::vector<std::string> &star_labels() const { return star_labels_; }
    const std::vector<std::string> &base_labels() const { return base_labels_; }
    std::size_t star_size() const { return star_labels_.size(); }
    std::size_t base_size() const { return base_labels_.size(); }

    std::size_t J(std::size_t star) const { return J_[star]; }
    std::size_t gamma(std::size_t star) const { return gamma_[star]; }
    const std::vector<std::size_t> &J_map() const { return J_; }
    const std::vector<std::size_t> &gamma_map() const { return gamma_; }

    /// J⁻¹(base), ascending.
    const std::vector<std::size_t> &fiber(std::size_t base) const { return fibers_[base]; }

    double nu(std::size_t star) const { return nu_[star]; }
    bool has_exact_nu() const { return nu_exact_.has_value(); }
    /// Throws ValidationError when ν was given in floating point.
    const Rational &nu_exact(std::size_t star) const;

    template <class Scalar> Scalar nu_as(std::size_t star) const;

  private:
    friend TwoAlphabetModel build_model(std::vector<std::string>, std::vector<std::string>,
                                        std::vector<std::size_t>, std::vector<std::size_t>,
                                        std::vector<Rational>);
    friend TwoAlphabetModel build_model(std::vector<std::string>, std::vector<std::string>,
                                        std::vector<std::size_t>, std::vector<std::size_t>,
                                        std::vector<double>);
    TwoAlphabetModel() = default;
    void check_structure();

    std::vector<std::string> star_labels_;
    std::vector<std::string> base_labels_;
    std::vector<std::size_t> J_;
    std::vector<std::size_t> gamma_;
    std::vector<std::vector<std::size_t>> fibers_;
    std::vector<double> nu_;
    std::optional<std::vector<Rational>> nu_exact_;
};

template <> inline double TwoAlphabetModel::nu_as<double>(std::size_t star) const { return nu(star); }
template <> inline Rational TwoAlphabetModel::nu_as<Rational>(std::size_t star) const {
    return nu_exact(star);
}

/// Exact distribution data: fiber sums must equal 1 exactly.
TwoAlphabetModel build_model(std::vector<std::string> star_labels, std::vector<std::string> base_labels,
                             std::vector<std::size_t> J, std::vector<std::size_t> gamma,
                             std::vector<Rational> nu);
/// Floating distribution data: fiber sums must equal 1 within 1e-12.
TwoAlphabetModel build_model(std::vector<std::string> star_labels, std::vector<std::string> base_labels,
                             std::vector<std::size_t> J, std::vector<std::size_t> gamma,
                             std::vector<double> nu);

struct InducedRelations {
    FiniteRelation base; ///< G = γ∘J⁻¹ on K
    FiniteRelation star; ///< G* = J⁻¹∘γ on K*
};

InducedRelations induced_relations(const TwoAlphabetModel &model);

struct InducedCovers {
    StochasticCover base;
    StochasticCover star;
};

/// Γ_{s₂s₁} = Σ{ν(s*) : J(s*) = s₁, γ(s*) = s₂};
/// Γ*_{s₂*s₁*} = ν(s₂*) when J(s₂*) = γ(s₁*).
InducedCovers induced_covers(const TwoAlphabetModel &model);

/// Exact Γ on K; requires exact ν.
ExactMatrix induced_base_cover_exact(const TwoAlphabetModel &model);

struct BasicSetPair {
    std::size_t star_class = 0;
    std::size_t base_class = 0;
    bool terminal = false;
};

/**
 * Basic sets of G and of G*, computed independently, and the bijection
 * B* -> γ(B*) between them. Construction cross-checks
 * B* = γ⁻¹(B) ∩ J⁻¹(B) for every pair, equality of terminal flags, and
 * J⁻¹(B) = B* for terminal pairs; a failure throws InvariantViolation.
 */
struct Correspondence {
    InducedRelations relations;
    BasicSetDecomposition base;
    BasicSetDecomposition star;
    /// Ordered by base class index.
    std::vector<BasicSetPair> pairs;

    const BasicSetPair &pair_for_base(std::size_t base_class) const { return pairs.at(base_class); }
};

Correspondence basic_set_correspondence(const TwoAlphabetModel &model);

/// v*(s*) = v(J(s*)) ν(s*); v must be stationary for Γ (residual ≤ 1e-9).
Distribution lift_stationary(const TwoAlphabetModel &model, const Distribution &v);
std::vector<Rational> lift_stationary_exact(const TwoAlphabetModel &model, const std::vector<Rational> &v);

/// Unique stationary vector of an exact cover supported on a closed
/// irreducible class, by rational Gaussian elimination. The result is
/// checked to satisfy Γ·v = v exactly.
std::vector<Rational> exact_stationary_distribution(const ExactMatrix &cover,
                                                    std::span<const std::size_t> terminal_class);

/// Σ_{s*∈B*∩γ⁻¹(s₂)} v_B(J(s*)) ν(s*) == v_B(s₂) for every s₂ ∈ K, exactly.
bool stationary_identity_holds(const TwoAlphabetModel &model, const Correspondence &correspondence,
                               std::size_t pair_index, const std::vector<Rational> &base_stationary);

/**
 * Ergodic measure μ_{B*} on K*_{G*} for a terminal pair:
 * μ⟨s₀*…sₙ*⟩ = v_B(J(s₀*)) ν(s₀*) ν(s₁*)⋯ν(sₙ*) for G* words starting in B*,
 * and 0 otherwise.
 */
template <class Scalar> class StarErgodicMeasure {
  public:
    /// Throws ValidationError when the pair is not terminal.
    StarErgodicMeasure(const TwoAlphabetModel &model, const Correspondence &correspondence,
                       std::size_t pair_index);

    Scalar cylinder(std::span<const std::size_t> word) const;
    const std::vector<Scalar> &base_stationary() const { return base_stationary_; }
    const std::vector<std::size_t> &star_class() const { return star_class_; }

  private:
    const TwoAlphabetModel *model_;
    const FiniteRelation *star_relation_;
    std::vector<std::size_t> star_class_;
    std::vector<char> in_class_;
    std::vector<Scalar> base_stationary_;
};

extern template class StarErgodicMeasure<double>;
extern template class StarErgodicMeasure<Rational>;

double ergodic_cylinder_measure_star(const TwoAlphabetModel &model, const Correspondence &correspondence,
                                     std::size_t pair_index, std::span<const std::size_t> word);

} // namespace tractdyn

#endif
