#pragma once

#include "lgsynth/linear_graph.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

namespace lgsynth::lg {

/// Split of the element set into normal-tree branches and co-tree links.
/// Both id lists are sorted ascending.
struct TreePartition {
    std::vector<std::size_t> branch_ids;
    std::vector<std::size_t> link_ids;

    [[nodiscard]] bool is_branch(std::size_t id) const {
        return std::binary_search(branch_ids.begin(), branch_ids.end(), id);
    }

    friend bool operator==(const TreePartition&, const TreePartition&) = default;
};

/// Tree priority class of an element kind; lower classes enter the tree first.
/// T-sources are never tree branches.
constexpr int tree_priority(ElementKind k) noexcept {
    switch (k) {
    case ElementKind::ASource: return 0;
    case ElementKind::AType: return 1;
    case ElementKind::DType: return 2;
    case ElementKind::Transformer:
    case ElementKind::Gyrator: return 3;
    case ElementKind::TType: return 4;
    case ElementKind::TSource: return 5;
    }
    return 5;
}

/// Greedy (Kruskal-style) normal tree: classes in priority order, lower id first
/// inside a class. Across-sources must all be branches and through-sources must
/// all be links, otherwise the model is unrealizable.
inline TreePartition select_normal_tree(const LinearGraph& g) {
    require_valid(g);

    std::vector<std::size_t> order(g.elements.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tree_priority(g.elements[a].kind) < tree_priority(g.elements[b].kind);
    });

    detail::DisjointSets sets(g.node_count + 1);
    TreePartition tp;
    for (std::size_t idx : order) {
        const Element& e = g.elements[idx];
        if (e.kind == ElementKind::TSource) {
            tp.link_ids.push_back(e.id);
            continue;
        }
        if (sets.unite(e.source_node, e.target_node)) {
            tp.branch_ids.push_back(e.id);
        } else {
            if (e.kind == ElementKind::ASource)
                throw ModelError(ErrorCode::SourceLoop,
                                 "across-source element " + std::to_string(e.id) + " closes a loop of sources");
            tp.link_ids.push_back(e.id);
        }
    }
    if (tp.branch_ids.size() + 1 != g.node_count)
        throw ModelError(ErrorCode::SourceCutset, "through-sources form a cutset of the graph");

    std::sort(tp.branch_ids.begin(), tp.branch_ids.end());
    std::sort(tp.link_ids.begin(), tp.link_ids.end());
    return tp;
}

}  // namespace lgsynth::lg
