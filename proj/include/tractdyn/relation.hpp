#ifndef TRACTDYN_RELATION_HPP
#define TRACTDYN_RELATION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tractdyn {

/// Directed pair of element indices, (from, to).
using Edge = std::pair<std::size_t, std::size_t>;

/**
 * A relation G on a finite labelled set K: the edge (i, j) means that
 * element j is a G-successor of element i.
 *
 * Immutable after construction. Edges are kept sorted lexicographically,
 * which makes equality and serialization deterministic.
 */
class FiniteRelation {
  public:
    FiniteRelation() = default;

    /// Throws ValidationError on duplicate labels, out-of-range indices or
    /// duplicate edges.
    FiniteRelation(std::vector<std::string> elements, std::vector<Edge> edges);

    /// Labels become "0", "1", ...
    static FiniteRelation with_indices(std::size_t size, std::vector<Edge> edges);

    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }
    const std::vector<std::string> &elements() const { return elements_; }
    const std::string &label(std::size_t i) const { return elements_[i]; }
    const std::vector<Edge> &edges() const { return edges_; }

    /// Sorted successor list of element i.
    std::span<const std::size_t> successors(std::size_t i) const;
    bool contains(std::size_t from, std::size_t to) const;

    /// Index of a label; throws ValidationError for unknown labels.
    std::size_t index_of(const std::string &label) const;

    /// True when every element has at least one successor (Dom(G) = K).
    bool has_full_domain() const;

    bool operator==(const FiniteRelation &other) const {
        return elements_ == other.elements_ && edges_ == other.edges_;
    }

  private:
    std::vector<std::string> elements_;
    std::vector<Edge> edges_;
    // CSR successor lists
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> targets_;
};

/// S∘R: first apply R, then S. (i, k) is an edge iff (i, j) ∈ R and (j, k) ∈ S.
FiniteRelation compose(const FiniteRelation &first, const FiniteRelation &second);

/// Pair reversal G⁻¹.
FiniteRelation inverse(const FiniteRelation &relation);

/// Transitive closure ⋃_{n≥1} Gⁿ, which on a finite set is both the orbit
/// relation and the chain relation.
FiniteRelation orbit_closure(const FiniteRelation &relation);

struct RestrictedRelation {
    FiniteRelation relation;
    /// Indices (into the original element list) of the surviving elements.
    std::vector<std::size_t> kept;
};

/// Repeatedly deletes elements without successors. The survivors are exactly
/// the elements from which an infinite forward path starts. An empty result
/// means the sample-path space is empty.
RestrictedRelation restrict_to_infinite_domain(const FiniteRelation &relation);

/**
 * Chain-component (basic set) decomposition of a relation with full domain.
 *
 * classes are the strongly connected components that carry at least one
 * edge, listed by their smallest member; members are ascending.
 */
struct BasicSetDecomposition {
    std::vector<std::vector<std::size_t>> classes;
    std::vector<bool> terminal;
    /// Elements in no terminal class, ascending.
    std::vector<std::size_t> transient;
    /// (a, b), a ≠ b, whenever class b is reachable from class a.
    std::vector<std::pair<std::size_t, std::size_t>> order;
    /// class_of[x] = index of x's class, or nullopt if x is not periodic.
    std::vector<std::optional<std::size_t>> class_of;

    std::vector<std::size_t> terminal_classes() const;
    bool is_transient(std::size_t element) const;
    bool reaches(std::size_t from_class, std::size_t to_class) const;
};

/// Throws ValidationError when some element has no successor or the relation
/// is empty.
BasicSetDecomposition basic_sets(const FiniteRelation &relation);

/// Consecutive pairs of word are all edges of the relation (and the word is
/// nonempty with indices in range).
bool is_path_word(const FiniteRelation &relation, std::span<const std::size_t> word);

/// If the last symbol of a path word lies in a terminal class, every
/// infinite extension has that class as its endset; returns it. Otherwise
/// the endset is not determined by the prefix.
std::optional<std::size_t> endset_certificate(const FiniteRelation &relation,
                                              const BasicSetDecomposition &decomposition,
                                              std::span<const std::size_t> word);

} // namespace tractdyn

#endif
