#include "tractdyn/two_alphabet.hpp"

#include "tractdyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tractdyn {

const Rational &TwoAlphabetModel::nu_exact(std::size_t star) const {
    if (!nu_exact_) {
        throw ValidationError("distribution data was not given as exact rationals");
    }
    return (*nu_exact_)[star];
}

void TwoAlphabetModel::check_structure() {
    const std::size_t m = star_labels_.size();
    const std::size_t n = base_labels_.size();
    // Reuse the relation constructor for label uniqueness.
    (void)FiniteRelation(star_labels_, {});
    (void)FiniteRelation(base_labels_, {});
    if (J_.size() != m || gamma_.size() != m) {
        throw ValidationError("J and gamma must be defined on every element of K*");
    }
    fibers_.assign(n, {});
    for (std::size_t s = 0; s < m; ++s) {
        if (J_[s] >= n || gamma_[s] >= n) {
            throw ValidationError("J or gamma maps '" + star_labels_[s] + "' outside K");
        }
        fibers_[J_[s]].push_back(s);
    }
    for (std::size_t b = 0; b < n; ++b) {
        if (fibers_[b].empty()) {
            throw ValidationError("J is not surjective: nothing maps to '" + base_labels_[b] + "'");
        }
    }
}

TwoAlphabetModel build_model(std::vector<std::string> star_labels, std::vector<std::string> base_labels,
                             std::vector<std::size_t> J, std::vector<std::size_t> gamma,
                             std::vector<Rational> nu) {
    TwoAlphabetModel model;
    model.star_labels_ = std::move(star_labels);
    model.base_labels_ = std::move(base_labels);
    model.J_ = std::move(J);
    model.gamma_ = std::move(gamma);
    model.check_structure();
    if (nu.size() != model.star_size()) {
        throw ValidationError("nu must be defined on every element of K*");
    }
    for (std::size_t s = 0; s < nu.size(); ++s) {
        if (nu[s] <= 0) {
            throw ValidationError("nu('" + model.star_labels_[s] + "') must be positive");
        }
    }
    for (std::size_t b = 0; b < model.base_size(); ++b) {
        Rational total = 0;
        for (std::size_t s : model.fibers_[b]) {
            total += nu[s];
        }
        if (total != 1) {
            throw ValidationError("nu sums to " + format_rational(total) + " on the fiber over '" +
                                  model.base_labels_[b] + "'");
        }
    }
    model.nu_.reserve(nu.size());
    for (const auto &value : nu) {
        model.nu_.push_back(value.get_d());
    }
    model.nu_exact_ = std::move(nu);
    return model;
}

TwoAlphabetModel build_model(std::vector<std::string> star_labels, std::vector<std::string> base_labels,
                             std::vector<std::size_t> J, std::vector<std::size_t> gamma,
                             std::vector<double> nu) {
    TwoAlphabetModel model;
    model.star_labels_ = std::move(star_labels);
    model.base_labels_ = std::move(base_labels);
    model.J_ = std::move(J);
    model.gamma_ = std::move(gamma);
    model.check_structure();
    if (nu.size() != model.star_size()) {
        throw ValidationError("nu must be defined on every element of K*");
    }
    for (std::size_t s = 0; s < nu.size(); ++s) {
        if (!(nu[s] > 0.0) || !std::isfinite(nu[s])) {
            throw ValidationError("nu('" + model.star_labels_[s] + "') must be positive");
        }
    }
    for (std::size_t b = 0; b < model.base_size(); ++b) {
        double total = 0.0;
        for (std::size_t s : model.fibers_[b]) {
            total += nu[s];
        }
        if (std::abs(total - 1.0) > kAlgebraicTolerance) {
            throw ValidationError("nu sums to " + std::to_string(total) + " on the fiber over '" +
                                  model.base_labels_[b] + "'");
        }
    }
    model.nu_ = std::move(nu);
    return model;
}

InducedRelations induced_relations(const TwoAlphabetModel &model) {
    std::set<Edge> base_edges;
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        base_edges.emplace(model.J(s), model.gamma(s));
    }
    std::vector<Edge> star_edges;
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        for (std::size_t t : model.fiber(model.gamma(s))) {
            star_edges.emplace_back(s, t);
        }
    }
    return {FiniteRelation(model.base_labels(), {base_edges.begin(), base_edges.end()}),
            FiniteRelation(model.star_labels(), std::move(star_edges))};
}

InducedCovers induced_covers(const TwoAlphabetModel &model) {
    InducedRelations relations = induced_relations(model);
    const auto n = static_cast<Eigen::Index>(model.base_size());
    const auto m = static_cast<Eigen::Index>(model.star_size());
    Eigen::MatrixXd base = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd star = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        base(static_cast<Eigen::Index>(model.gamma(s)), static_cast<Eigen::Index>(model.J(s))) += model.nu(s);
        for (std::size_t t : model.fiber(model.gamma(s))) {
            star(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = model.nu(t);
        }
    }
    return {validate_cover(std::move(relations.base), std::move(base)),
            validate_cover(std::move(relations.star), std::move(star))};
}

ExactMatrix induced_base_cover_exact(const TwoAlphabetModel &model) {
    const std::size_t n = model.base_size();
    ExactMatrix gamma(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        gamma[model.gamma(s)][model.J(s)] += model.nu_exact(s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Rational column = 0;
        for (std::size_t j = 0; j < n; ++j) {
            column += gamma[j][i];
        }
        if (column != 1) {
            throw InvariantViolation("induced cover column does not sum to 1");
        }
    }
    return gamma;
}

Correspondence basic_set_correspondence(const TwoAlphabetModel &model) {
    Correspondence result;
    result.relations = induced_relations(model);
    result.base = basic_sets(result.relations.base);
    result.star = basic_sets(result.relations.star);

    const std::size_t base_count = result.base.classes.size();
    if (result.star.classes.size() != base_count) {
        throw InvariantViolation("G and G* have different numbers of basic sets");
    }
    std::vector<char> base_used(base_count, 0);
    result.pairs.assign(base_count, {});
    for (std::size_t sc = 0; sc < result.star.classes.size(); ++sc) {
        std::vector<std::size_t> image;
        for (std::size_t s : result.star.classes[sc]) {
            image.push_back(model.gamma(s));
        }
        std::sort(image.begin(), image.end());
        image.erase(std::unique(image.begin(), image.end()), image.end());
        const auto cls = result.base.class_of[image.front()];
        if (!cls || result.base.classes[*cls] != image) {
            throw InvariantViolation("gamma(B*) is not a basic set of G");
        }
        if (base_used[*cls]) {
            throw InvariantViolation("two G* basic sets map onto the same G basic set");
        }
        base_used[*cls] = 1;

        // B* = γ⁻¹(B) ∩ J⁻¹(B)
        const auto &base_members = result.base.classes[*cls];
        std::vector<std::size_t> expected;
        for (std::size_t s = 0; s < model.star_size(); ++s) {
            if (std::binary_search(base_members.begin(), base_members.end(), model.gamma(s)) &&
                std::binary_search(base_members.begin(), base_members.end(), model.J(s))) {
                expected.push_back(s);
            }
        }
        if (expected != result.star.classes[sc]) {
            throw InvariantViolation("B* differs from gamma^-1(B) ∩ J^-1(B)");
        }

        const bool terminal = result.base.terminal[*cls];
        if (result.star.terminal[sc] != terminal) {
            throw InvariantViolation("terminal flags of associated basic sets differ");
        }
        std::vector<std::size_t> preimage;
        for (std::size_t b : base_members) {
            const auto &f = model.fiber(b);
            preimage.insert(preimage.end(), f.begin(), f.end());
        }
        std::sort(preimage.begin(), preimage.end());
        if (terminal != (preimage == result.star.classes[sc])) {
            throw InvariantViolation("J^-1(B) = B* does not match the terminal flag");
        }
        result.pairs[*cls] = {sc, *cls, terminal};
    }
    return result;
}

Distribution lift_stationary(const TwoAlphabetModel &model, const Distribution &v) {
    const InducedCovers covers = induced_covers(model);
    if (stationary_residual(covers.base, v) > kStationaryTolerance) {
        throw ValidationError("lift_stationary: v is not stationary for the induced cover");
    }
    std::vector<double> lifted(model.star_size());
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        lifted[s] = v[model.J(s)] * model.nu(s);
    }
    return Distribution(std::move(lifted), 1e-10);
}

std::vector<Rational> lift_stationary_exact(const TwoAlphabetModel &model, const std::vector<Rational> &v) {
    const ExactMatrix gamma = induced_base_cover_exact(model);
    const std::size_t n = model.base_size();
    if (v.size() != n) {
        throw ValidationError("lift_stationary: distribution size does not match K");
    }
    for (std::size_t j = 0; j < n; ++j) {
        Rational row = 0;
        for (std::size_t i = 0; i < n; ++i) {
            row += gamma[j][i] * v[i];
        }
        if (row != v[j]) {
            throw ValidationError("lift_stationary: v is not stationary for the induced cover");
        }
    }
    std::vector<Rational> lifted(model.star_size());
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        lifted[s] = v[model.J(s)] * model.nu_exact(s);
    }
    return lifted;
}

std::vector<Rational> exact_stationary_distribution(const ExactMatrix &cover,
                                                    std::span<const std::size_t> terminal_class) {
    const std::size_t n = cover.size();
    const std::size_t m = terminal_class.size();
    if (m == 0) {
        throw ValidationError("terminal class is empty");
    }
    std::vector<char> inside(n, 0);
    for (std::size_t x : terminal_class) {
        if (x >= n) {
            throw ValidationError("terminal class member out of range");
        }
        inside[x] = 1;
    }
    for (std::size_t x : terminal_class) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!inside[j] && cover[j][x] != 0) {
                throw ValidationError("class is not terminal: mass leaves it");
            }
        }
    }

    // Augmented system [A | b], A = Γ_B − I with the last row replaced by ones.
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1, Rational(0)));
    for (std::size_t r = 0; r + 1 < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            a[r][c] = cover[terminal_class[r]][terminal_class[c]];
        }
        a[r][r] -= 1;
    }
    for (std::size_t c = 0; c < m; ++c) {
        a[m - 1][c] = 1;
    }
    a[m - 1][m] = 1;

    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        while (pivot < m && a[pivot][col] == 0) {
            ++pivot;
        }
        if (pivot == m) {
            throw ValidationError("class is not irreducible: stationary vector is not unique");
        }
        std::swap(a[pivot], a[col]);
        const Rational inv = 1 / a[col][col];
        for (std::size_t c = col; c <= m; ++c) {
            a[col][c] *= inv;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r != col && a[r][col] != 0) {
                const Rational factor = a[r][col];
                for (std::size_t c = col; c <= m; ++c) {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }

    std::vector<Rational> v(n, Rational(0));
    for (std::size_t r = 0; r < m; ++r) {
        v[terminal_class[r]] = a[r][m];
        if (a[r][m] <= 0) {
            throw ValidationError("class is not irreducible: stationary vector is not positive");
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        Rational row = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] != 0) {
                row += cover[j][i] * v[i];
            }
        }
        if (row != v[j]) {
            throw InvariantViolation("exact stationary vector fails Gamma v = v");
        }
    }
    return v;
}

bool stationary_identity_holds(const TwoAlphabetModel &model, const Correspondence &correspondence,
                               std::size_t pair_index, const std::vector<Rational> &base_stationary) {
    const auto &pair = correspondence.pairs.at(pair_index);
    std::vector<Rational> lhs(model.base_size(), Rational(0));
    for (std::size_t s : correspondence.star.classes[pair.star_class]) {
        lhs[model.gamma(s)] += base_stationary[model.J(s)] * model.nu_exact(s);
    }
    return lhs == base_stationary;
}

template <class Scalar>
StarErgodicMeasure<Scalar>::StarErgodicMeasure(const TwoAlphabetModel &model,
                                               const Correspondence &correspondence,
                                               std::size_t pair_index)
    : model_(&model), star_relation_(&correspondence.relations.star) {
    const auto &pair = correspondence.pairs.at(pair_index);
    if (!pair.terminal) {
        throw ValidationError("ergodic measure requested for a non-terminal basic set");
    }
    star_class_ = correspondence.star.classes[pair.star_class];
    in_class_.assign(model.star_size(), 0);
    for (std::size_t s : star_class_) {
        in_class_[s] = 1;
    }
    const auto &base_class = correspondence.base.classes[pair.base_class];
    if constexpr (std::is_same_v<Scalar, Rational>) {
        base_stationary_ = exact_stationary_distribution(induced_base_cover_exact(model), base_class);
    } else {
        base_stationary_ = stationary_distribution(induced_covers(model).base, base_class).weights();
    }
}

template <class Scalar> Scalar StarErgodicMeasure<Scalar>::cylinder(std::span<const std::size_t> word) const {
    if (word.empty()) {
        return Scalar(1);
    }
    if (!is_path_word(*star_relation_, word) || !in_class_[word.front()]) {
        return Scalar(0);
    }
    Scalar value = base_stationary_[model_->J(word.front())];
    for (std::size_t s : word) {
        value *= model_->template nu_as<Scalar>(s);
    }
    return value;
}

template class StarErgodicMeasure<double>;
template class StarErgodicMeasure<Rational>;

double ergodic_cylinder_measure_star(const TwoAlphabetModel &model, const Correspondence &correspondence,
                                     std::size_t pair_index, std::span<const std::size_t> word) {
    return StarErgodicMeasure<double>(model, correspondence, pair_index).cylinder(word);
}

} // namespace tractdyn
