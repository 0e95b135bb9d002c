#include "tractdyn/relation.hpp"

#include "tractdyn/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace tractdyn {

FiniteRelation::FiniteRelation(std::vector<std::string> elements, std::vector<Edge> edges)
    : elements_(std::move(elements)), edges_(std::move(edges)) {
    const std::size_t n = elements_.size();
    {
        std::unordered_set<std::string> seen;
        seen.reserve(n);
        for (const auto &label : elements_) {
            if (!seen.insert(label).second) {
                throw ValidationError("duplicate element label '" + label + "'");
            }
        }
    }
    for (const auto &[from, to] : edges_) {
        if (from >= n || to >= n) {
            throw ValidationError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                                  ") out of range for " + std::to_string(n) + " elements");
        }
    }
    std::sort(edges_.begin(), edges_.end());
    const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
    if (dup != edges_.end()) {
        throw ValidationError("duplicate edge (" + elements_[dup->first] + ", " +
                              elements_[dup->second] + ")");
    }

    offsets_.assign(n + 1, 0);
    for (const auto &edge : edges_) {
        ++offsets_[edge.first + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        offsets_[i + 1] += offsets_[i];
    }
    targets_.reserve(edges_.size());
    for (const auto &edge : edges_) {
        targets_.push_back(edge.second);
    }
}

FiniteRelation FiniteRelation::with_indices(std::size_t size, std::vector<Edge> edges) {
    std::vector<std::string> labels;
    labels.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        labels.push_back(std::to_string(i));
    }
    return FiniteRelation(std::move(labels), std::move(edges));
}

std::span<const std::size_t> FiniteRelation::successors(std::size_t i) const {
    return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool FiniteRelation::contains(std::size_t from, std::size_t to) const {
    if (from >= size()) {
        return false;
    }
    const auto succ = successors(from);
    return std::binary_search(succ.begin(), succ.end(), to);
}

std::size_t FiniteRelation::index_of(const std::string &label) const {
    const auto it = std::find(elements_.begin(), elements_.end(), label);
    if (it == elements_.end()) {
        throw ValidationError("unknown element label '" + label + "'");
    }
    return static_cast<std::size_t>(it - elements_.begin());
}

bool FiniteRelation::has_full_domain() const {
    for (std::size_t i = 0; i < size(); ++i) {
        if (offsets_[i + 1] == offsets_[i]) {
            return false;
        }
    }
    return true;
}

FiniteRelation compose(const FiniteRelation &first, const FiniteRelation &second) {
    if (first.elements() != second.elements()) {
        throw ValidationError("compose: element lists differ");
    }
    std::vector<Edge> edges;
    std::vector<char> mark(first.size(), 0);
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::fill(mark.begin(), mark.end(), 0);
        for (std::size_t j : first.successors(i)) {
            for (std::size_t k : second.successors(j)) {
                if (!mark[k]) {
                    mark[k] = 1;
                    edges.emplace_back(i, k);
                }
            }
        }
    }
    return FiniteRelation(first.elements(), std::move(edges));
}

FiniteRelation inverse(const FiniteRelation &relation) {
    std::vector<Edge> edges;
    edges.reserve(relation.edges().size());
    for (const auto &[from, to] : relation.edges()) {
        edges.emplace_back(to, from);
    }
    return FiniteRelation(relation.elements(), std::move(edges));
}

FiniteRelation orbit_closure(const FiniteRelation &relation) {
    const std::size_t n = relation.size();
    std::vector<Edge> edges;
    std::vector<char> seen(n);
    std::vector<std::size_t> stack;
    // Depth-first search from each element's successors: everything reached
    // in one or more steps.
    for (std::size_t source = 0; source < n; ++source) {
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(relation.successors(source).begin(), relation.successors(source).end());
        for (std::size_t s : stack) {
            seen[s] = 1;
        }
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            for (std::size_t y : relation.successors(x)) {
                if (!seen[y]) {
                    seen[y] = 1;
                    stack.push_back(y);
                }
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            if (seen[t]) {
                edges.emplace_back(source, t);
            }
        }
    }
    return FiniteRelation(relation.elements(), std::move(edges));
}

RestrictedRelation restrict_to_infinite_domain(const FiniteRelation &relation) {
    const std::size_t n = relation.size();
    std::vector<std::vector<std::size_t>> predecessors(n);
    std::vector<std::size_t> out_degree(n, 0);
    for (const auto &[from, to] : relation.edges()) {
        predecessors[to].push_back(from);
        ++out_degree[from];
    }
    std::vector<char> alive(n, 1);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (out_degree[i] == 0) {
            queue.push_back(i);
            alive[i] = 0;
        }
    }
    while (!queue.empty()) {
        const std::size_t x = queue.back();
        queue.pop_back();
        for (std::size_t p : predecessors[x]) {
            if (alive[p] && --out_degree[p] == 0) {
                alive[p] = 0;
                queue.push_back(p);
            }
        }
    }

    RestrictedRelation result;
    std::vector<std::size_t> new_index(n, 0);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
            new_index[i] = result.kept.size();
            result.kept.push_back(i);
            labels.push_back(relation.label(i));
        }
    }
    std::vector<Edge> edges;
    for (const auto &[from, to] : relation.edges()) {
        if (alive[from] && alive[to]) {
            edges.emplace_back(new_index[from], new_index[to]);
        }
    }
    result.relation = FiniteRelation(std::move(labels), std::move(edges));
    return result;
}

namespace {

// Iterative Tarjan; returns component id per vertex.
std::vector<std::size_t> strongly_connected_components(const FiniteRelation &relation,
                                                       std::size_t &component_count) {
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    const std::size_t n = relation.size();
    std::vector<std::size_t> index(n, unvisited), lowlink(n, 0), component(n, unvisited);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    struct Frame {
        std::size_t vertex;
        std::size_t next_child;
    };
    std::vector<Frame> call_stack;
    std::size_t counter = 0;
    component_count = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) {
            continue;
        }
        call_stack.push_back({root, 0});
        index[root] = lowlink[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call_stack.empty()) {
            Frame &frame = call_stack.back();
            const auto succ = relation.successors(frame.vertex);
            if (frame.next_child < succ.size()) {
                const std::size_t w = succ[frame.next_child++];
                if (index[w] == unvisited) {
                    index[w] = lowlink[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call_stack.push_back({w, 0});
                } else if (on_stack[w]) {
                    lowlink[frame.vertex] = std::min(lowlink[frame.vertex], index[w]);
                }
                continue;
            }
            const std::size_t v = frame.vertex;
            call_stack.pop_back();
            if (!call_stack.empty()) {
                const std::size_t parent = call_stack.back().vertex;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
            if (lowlink[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component[w] = component_count;
                } while (w != v);
                ++component_count;
            }
        }
    }
    return component;
}

} // namespace

std::vector<std::size_t> BasicSetDecomposition::terminal_classes() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (terminal[c]) {
            out.push_back(c);
        }
    }
    return out;
}

bool BasicSetDecomposition::is_transient(std::size_t element) const {
    return std::binary_search(transient.begin(), transient.end(), element);
}

bool BasicSetDecomposition::reaches(std::size_t from_class, std::size_t to_class) const {
    return std::binary_search(order.begin(), order.end(), std::make_pair(from_class, to_class));
}

BasicSetDecomposition basic_sets(const FiniteRelation &relation) {
    if (relation.empty()) {
        throw ValidationError("basic_sets: empty relation (no infinite paths)");
    }
    if (!relation.has_full_domain()) {
        for (std::size_t i = 0; i < relation.size(); ++i) {
            if (relation.successors(i).empty()) {
                throw ValidationError("basic_sets: element '" + relation.label(i) +
                                      "' has no successor; restrict to the infinite domain first");
            }
        }
    }
    const std::size_t n = relation.size();
    std::size_t component_count = 0;
    const auto component = strongly_connected_components(relation, component_count);

    std::vector<std::vector<std::size_t>> members(component_count);
    for (std::size_t x = 0; x < n; ++x) {
        members[component[x]].push_back(x);
    }
    // A component is a basic set iff it carries an edge.
    std::vector<char> recurrent(component_count, 0);
    std::vector<char> has_exit(component_count, 0);
    for (const auto &[from, to] : relation.edges()) {
        if (component[from] == component[to]) {
            recurrent[component[from]] = 1;
        } else {
            has_exit[component[from]] = 1;
        }
    }

    // Canonical order: by smallest member. members[c] is ascending already.
    std::vector<std::size_t> recurrent_ids;
    for (std::size_t c = 0; c < component_count; ++c) {
        if (recurrent[c]) {
            recurrent_ids.push_back(c);
        }
    }
    std::sort(recurrent_ids.begin(), recurrent_ids.end(),
              [&](std::size_t a, std::size_t b) { return members[a].front() < members[b].front(); });

    BasicSetDecomposition result;
    result.class_of.assign(n, std::nullopt);
    std::vector<std::size_t> class_index(component_count, static_cast<std::size_t>(-1));
    for (std::size_t c : recurrent_ids) {
        class_index[c] = result.classes.size();
        for (std::size_t x : members[c]) {
            result.class_of[x] = result.classes.size();
        }
        result.classes.push_back(members[c]);
        result.terminal.push_back(!has_exit[c]);
    }

    std::vector<char> in_terminal(n, 0);
    for (std::size_t k = 0; k < result.classes.size(); ++k) {
        if (result.terminal[k]) {
            for (std::size_t x : result.classes[k]) {
                in_terminal[x] = 1;
            }
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        if (!in_terminal[x]) {
            result.transient.push_back(x);
        }
    }

    // Reachability between classes through the condensation DAG.
    std::vector<std::vector<std::size_t>> dag(component_count);
    for (const auto &[from, to] : relation.edges()) {
        if (component[from] != component[to]) {
            dag[component[from]].push_back(component[to]);
        }
    }
    std::vector<char> seen(component_count);
    std::vector<std::size_t> stack;
    for (std::size_t k = 0; k < result.classes.size(); ++k) {
        const std::size_t source = recurrent_ids[k];
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(1, source);
        seen[source] = 1;
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            for (std::size_t d : dag[c]) {
                if (!seen[d]) {
                    seen[d] = 1;
                    stack.push_back(d);
                }
            }
        }
        for (std::size_t c = 0; c < component_count; ++c) {
            if (c != source && seen[c] && class_index[c] != static_cast<std::size_t>(-1)) {
                result.order.emplace_back(k, class_index[c]);
            }
        }
    }
    std::sort(result.order.begin(), result.order.end());
    return result;
}

bool is_path_word(const FiniteRelation &relation, std::span<const std::size_t> word) {
    if (word.empty()) {
        return false;
    }
    for (std::size_t s : word) {
        if (s >= relation.size()) {
            return false;
        }
    }
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
        if (!relation.contains(word[i], word[i + 1])) {
            return false;
        }
    }
    return true;
}

std::optional<std::size_t> endset_certificate(const FiniteRelation &relation,
                                              const BasicSetDecomposition &decomposition,
                                              std::span<const std::size_t> word) {
    if (!is_path_word(relation, word)) {
        throw ValidationError("endset_certificate: word is not a path of the relation");
    }
    const auto cls = decomposition.class_of[word.back()];
    if (cls && decomposition.terminal[*cls]) {
        return cls;
    }
    return std::nullopt;
}

} // namespace tractdyn
