#pragma once

#include "lgsynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgsynth::lg {

// Integer codes are the ones used by the model file format.
enum class ElementKind : int {
    ASource = 1,
    AType = 2,
    Transformer = 3,
    Gyrator = 4,
    DType = 5,
    TType = 6,
    TSource = 7,
};

enum class EnergyDomain : int {
    Electrical = 1,
    MechTranslational = 2,
    MechRotational = 3,
    Hydraulic = 4,
    Thermal = 5,
};

enum class Variable { Across, Through };

constexpr bool is_valid_kind_code(int code) noexcept { return code >= 1 && code <= 7; }
constexpr bool is_valid_domain_code(int code) noexcept { return code >= 1 && code <= 5; }

constexpr bool is_two_port(ElementKind k) noexcept {
    return k == ElementKind::Transformer || k == ElementKind::Gyrator;
}
constexpr bool is_source(ElementKind k) noexcept {
    return k == ElementKind::ASource || k == ElementKind::TSource;
}
constexpr bool is_passive_single_port(ElementKind k) noexcept {
    return k == ElementKind::AType || k == ElementKind::DType || k == ElementKind::TType;
}
constexpr bool is_mechanical(EnergyDomain d) noexcept {
    return d == EnergyDomain::MechTranslational || d == EnergyDomain::MechRotational;
}

constexpr std::string_view to_string(ElementKind k) noexcept {
    switch (k) {
    case ElementKind::ASource: return "ASource";
    case ElementKind::AType: return "AType";
    case ElementKind::Transformer: return "Transformer";
    case ElementKind::Gyrator: return "Gyrator";
    case ElementKind::DType: return "DType";
    case ElementKind::TType: return "TType";
    case ElementKind::TSource: return "TSource";
    }
    return "?";
}

/// One branch of the graph. Ids and node indices are 1-based, node 1 is ground.
///
/// `param_value` is given in the natural unit of the element's domain: mechanical
/// D-type elements carry a damping coefficient b (f = b v), mechanical T-type
/// elements a stiffness K (f = K x); every other passive element carries the
/// generalized C, L or R directly. Two-port sides carry the TF/GY ratio and the
/// side-1 value is authoritative. Sources carry their amplitude.
struct Element {
    std::size_t id = 0;
    ElementKind kind = ElementKind::DType;
    EnergyDomain domain = EnergyDomain::Electrical;
    std::size_t source_node = 0;
    std::size_t target_node = 0;
    double param_value = 0.0;
    std::string param_label;

    friend bool operator==(const Element&, const Element&) = default;
};

/// Generalized constitutive coefficient: C for A-type, L for T-type, R for D-type.
inline double generalized_coefficient(const Element& e) {
    if (is_mechanical(e.domain) && (e.kind == ElementKind::DType || e.kind == ElementKind::TType))
        return 1.0 / e.param_value;
    return e.param_value;
}

struct OutputRequest {
    std::size_t element_id = 0;
    Variable variable = Variable::Across;

    friend bool operator==(const OutputRequest&, const OutputRequest&) = default;
};

struct LinearGraph {
    static constexpr std::size_t ground_node = 1;

    std::size_t node_count = 0;
    std::vector<Element> elements;
    std::vector<OutputRequest> outputs;

    [[nodiscard]] const Element& element(std::size_t id) const { return elements.at(id - 1); }
    [[nodiscard]] std::size_t element_count() const noexcept { return elements.size(); }

    friend bool operator==(const LinearGraph&, const LinearGraph&) = default;
};

struct Diagnostic {
    ErrorCode code;
    std::size_t element_id = 0;  // 0 when not element specific
    std::size_t node = 0;        // 0 when not node specific
    std::string message;
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a < b) std::swap(a, b);
        parent_[a] = b;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Returns the id of the other side of a two-port, or nothing when `id` is not
/// a properly paired two-port side.
inline std::optional<std::size_t> two_port_partner(const LinearGraph& g, std::size_t id) {
    std::size_t i = 0;
    while (i < g.elements.size()) {
        const auto kind = g.elements[i].kind;
        if (is_two_port(kind) && i + 1 < g.elements.size() && g.elements[i + 1].kind == kind) {
            if (g.elements[i].id == id) return g.elements[i + 1].id;
            if (g.elements[i + 1].id == id) return g.elements[i].id;
            i += 2;
        } else {
            ++i;
        }
    }
    return std::nullopt;
}

/// Checks every structural invariant and reports one diagnostic per violation.
inline std::vector<Diagnostic> validate_graph(const LinearGraph& g) {
    std::vector<Diagnostic> out;
    auto report = [&](ErrorCode c, std::size_t el, std::size_t node, std::string msg) {
        out.push_back(Diagnostic{c, el, node, std::move(msg)});
    };

    if (g.node_count < 2) report(ErrorCode::Disconnected, 0, 0, "graph needs at least two nodes");
    if (g.elements.empty()) report(ErrorCode::Disconnected, 0, 0, "graph has no elements");

    for (std::size_t i = 0; i < g.elements.size(); ++i) {
        const Element& e = g.elements[i];
        const std::string tag = "element " + std::to_string(e.id);
        if (e.id != i + 1) report(ErrorCode::InvalidCode, e.id, 0, tag + " is out of sequence");
        if (!is_valid_kind_code(static_cast<int>(e.kind)))
            report(ErrorCode::InvalidCode, e.id, 0, tag + " has an unknown type code");
        if (!is_valid_domain_code(static_cast<int>(e.domain)))
            report(ErrorCode::InvalidCode, e.id, 0, tag + " has an unknown domain code");
        const bool in_range = e.source_node >= 1 && e.source_node <= g.node_count && e.target_node >= 1 &&
                              e.target_node <= g.node_count;
        if (!in_range) report(ErrorCode::NodeOutOfRange, e.id, 0, tag + " references a node outside the graph");
        if (e.source_node == e.target_node) report(ErrorCode::SelfLoop, e.id, e.source_node, tag + " is a self loop");
        if (!is_source(e.kind) && !(e.param_value > 0.0 && std::isfinite(e.param_value)))
            report(ErrorCode::NonPositiveParameter, e.id, 0, tag + " needs a positive finite parameter");
        if (is_source(e.kind) && !std::isfinite(e.param_value))
            report(ErrorCode::NonPositiveParameter, e.id, 0, tag + " has a non-finite amplitude");
    }

    for (std::size_t i = 0; i < g.elements.size();) {
        const auto kind = g.elements[i].kind;
        if (!is_two_port(kind)) {
            ++i;
            continue;
        }
        if (i + 1 < g.elements.size() && g.elements[i + 1].kind == kind) {
            i += 2;
        } else {
            report(ErrorCode::UnpairedTwoPort, g.elements[i].id, 0,
                   "element " + std::to_string(g.elements[i].id) + " has no consecutive two-port partner");
            ++i;
        }
    }

    for (const auto& o : g.outputs) {
        if (o.element_id < 1 || o.element_id > g.elements.size())
            report(ErrorCode::BadOutputSpec, o.element_id, 0,
                   "output references unknown element " + std::to_string(o.element_id));
    }

    if (g.node_count >= 1) {
        detail::DisjointSets sets(g.node_count + 1);
        for (const auto& e : g.elements) {
            if (e.source_node >= 1 && e.source_node <= g.node_count && e.target_node >= 1 &&
                e.target_node <= g.node_count)
                sets.unite(e.source_node, e.target_node);
        }
        for (std::size_t n = 1; n <= g.node_count; ++n) {
            if (sets.find(n) != sets.find(LinearGraph::ground_node))
                report(ErrorCode::Disconnected, 0, n, "node " + std::to_string(n) + " is not connected to ground");
        }
    }
    return out;
}

/// Throws the first diagnostic of `validate_graph` as a ModelError.
inline void require_valid(const LinearGraph& g) {
    const auto diags = validate_graph(g);
    if (!diags.empty()) throw ModelError(diags.front().code, diags.front().message);
}

/// Builds a graph from the source/target vector convention: element i leaves
/// node `source[i]` and enters node `target[i]`.
inline LinearGraph build_graph(std::span<const std::size_t> source, std::span<const std::size_t> target,
                               std::span<const int> type_codes, std::span<const int> domain_codes,
                               std::span<const double> params, std::span<const std::string> labels,
                               std::vector<OutputRequest> outputs = {}) {
    const std::size_t n = source.size();
    if (target.size() != n || type_codes.size() != n || domain_codes.size() != n || params.size() != n ||
        labels.size() != n)
        throw ModelError(ErrorCode::LengthMismatch, "all element sequences must have the same length");

    LinearGraph g;
    g.elements.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_valid_kind_code(type_codes[i]))
            throw ModelError(ErrorCode::InvalidCode,
                             "type code " + std::to_string(type_codes[i]) + " of element " + std::to_string(i + 1));
        if (!is_valid_domain_code(domain_codes[i]))
            throw ModelError(ErrorCode::InvalidCode, "domain code " + std::to_string(domain_codes[i]) +
                                                         " of element " + std::to_string(i + 1));
        g.node_count = std::max({g.node_count, source[i], target[i]});
        g.elements.push_back(Element{i + 1, static_cast<ElementKind>(type_codes[i]),
                                     static_cast<EnergyDomain>(domain_codes[i]), source[i], target[i], params[i],
                                     labels[i]});
    }
    g.outputs = std::move(outputs);
    require_valid(g);
    return g;
}

}  // namespace lgsynth::lg
