#pragma once

#include "lgsynth/dynamics.hpp"
#include "lgsynth/gp.hpp"
#include "lgsynth/linear_graph.hpp"
#include "lgsynth/state_space.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lgsynth::synth {

using lg::ElementKind;
using lg::EnergyDomain;
using lg::LinearGraph;

/// Fitness assigned to any candidate whose model cannot be derived or evaluated.
inline constexpr double kPenalty = 1e12;

struct EmbryoSpec {
    double source_voltage = 10.0;
    double source_resistance = 750.0;
    double load_resistance = 50.0;

    void validate() const {
        if (!(source_voltage > 0.0) || !(source_resistance > 0.0) || !(load_resistance > 0.0))
            throw std::invalid_argument("embryo source voltage and resistances must be positive");
    }
    /// Geometric mean of the source and load resistances.
    [[nodiscard]] double characteristic_resistance() const { return std::sqrt(source_resistance * load_resistance); }

    friend bool operator==(const EmbryoSpec&, const EmbryoSpec&) = default;
};

enum class FilterKind { LowPass, HighPass, BandPass };

constexpr std::string_view to_string(FilterKind k) noexcept {
    switch (k) {
    case FilterKind::LowPass: return "lowpass";
    case FilterKind::HighPass: return "highpass";
    case FilterKind::BandPass: return "bandpass";
    }
    return "?";
}

/// Target filter. For low- and high-pass filters `band_lo == band_hi == f_c`.
struct FilterSpec {
    FilterKind kind = FilterKind::LowPass;
    double band_lo = 50e3;
    double band_hi = 50e3;
    std::size_t grid_points = 200;
    double grid_lo = 500.0;
    double grid_hi = 5e6;

    /// Default grid: two decades beyond the cutoffs on each side.
    static FilterSpec make(FilterKind kind, double lo, double hi, std::size_t points = 200) {
        return FilterSpec{kind, lo, hi, points, lo / 100.0, hi * 100.0};
    }
    static FilterSpec low_pass(double fc) { return make(FilterKind::LowPass, fc, fc); }
    static FilterSpec high_pass(double fc) { return make(FilterKind::HighPass, fc, fc); }
    static FilterSpec band_pass(double lo, double hi) { return make(FilterKind::BandPass, lo, hi); }

    void validate() const {
        if (!(band_lo > 0.0) || !(band_hi > 0.0)) throw std::invalid_argument("cutoff frequencies must be positive");
        if (kind == FilterKind::BandPass && !(band_lo < band_hi))
            throw std::invalid_argument("band-pass needs f_lo < f_hi");
        if (kind != FilterKind::BandPass && band_lo != band_hi)
            throw std::invalid_argument("low/high-pass filters take a single cutoff");
        if (!(grid_lo > 0.0) || !(grid_lo < grid_hi)) throw std::invalid_argument("need 0 < grid_lo < grid_hi");
        if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
    }

    [[nodiscard]] std::vector<double> grid() const { return dynamics::log_space(grid_lo, grid_hi, grid_points); }

    /// Closed passband: boundary frequencies pass.
    [[nodiscard]] bool passes(double f) const {
        switch (kind) {
        case FilterKind::LowPass: return f <= band_hi;
        case FilterKind::HighPass: return f >= band_lo;
        case FilterKind::BandPass: return f >= band_lo && f <= band_hi;
        }
        return false;
    }

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// Ideal brick-wall output magnitude: the full source voltage in the passband, zero elsewhere.
inline double target_magnitude(const FilterSpec& fspec, const EmbryoSpec& espec, double f) {
    if (!(f > 0.0)) throw std::invalid_argument("target_magnitude: frequency must be positive");
    return fspec.passes(f) ? espec.source_voltage : 0.0;
}

inline constexpr std::size_t kEmbryoStartNode = 3;

struct PartialEmbryo {
    LinearGraph graph;
    std::size_t cursor = kEmbryoStartNode;
};

/// Source V_S (2 -> 1) in series with R_S (2 -> 3). The load is attached later.
inline PartialEmbryo build_embryo(const EmbryoSpec& spec) {
    spec.validate();
    PartialEmbryo out;
    out.graph.node_count = 3;
    out.graph.elements.push_back({1, ElementKind::ASource, EnergyDomain::Electrical, 2, 1, spec.source_voltage, "V_S"});
    out.graph.elements.push_back({2, ElementKind::DType, EnergyDomain::Electrical, 2, 3, spec.source_resistance, "R_S"});
    return out;
}

/// Log-uniform sampling range for the component added by a terminal.
inline std::pair<double, double> parameter_bounds(gp::Primitive kind, const EmbryoSpec& espec,
                                                  const FilterSpec& fspec) {
    const double rc = espec.characteristic_resistance();
    const double two_pi = 2.0 * std::numbers::pi;
    switch (kind) {
    case gp::Primitive::AddA: return {1.0 / (two_pi * fspec.band_hi * rc * 50.0), 50.0 / (two_pi * fspec.band_lo * rc)};
    case gp::Primitive::AddT: return {rc / (two_pi * fspec.band_hi * 50.0), 50.0 * rc / (two_pi * fspec.band_lo)};
    case gp::Primitive::AddD: return {espec.load_resistance / 10.0, 10.0 * espec.source_resistance};
    default: throw std::invalid_argument("parameter_bounds: not a terminal primitive");
    }
}

template <std::uniform_random_bit_generator G>
double sample_parameter(gp::Primitive kind, const EmbryoSpec& espec, const FilterSpec& fspec, G& rng) {
    const auto [lo, hi] = parameter_bounds(kind, espec, fspec);
    const double a = std::log(lo);
    const double v = std::exp(a + (std::log(hi) - a) * gp::uniform01(rng));
    return std::clamp(v, lo, hi);
}

/// Terminal sampler bound to one embryo/filter pair, usable by the GP engine.
struct ParameterSampler {
    EmbryoSpec embryo;
    FilterSpec filter;

    template <std::uniform_random_bit_generator G>
    double operator()(gp::Primitive kind, G& rng) const {
        return sample_parameter(kind, embryo, filter, rng);
    }
};

struct CompiledCircuit {
    LinearGraph graph;
    std::size_t load_node = kEmbryoStartNode;
    std::size_t load_element_id = 0;
    /// Element id -> prefix index of the terminal that created it.
    std::map<std::size_t, std::size_t> element_provenance;
};

namespace detail {

struct Builder {
    const gp::Tree& tree;
    std::size_t next_node = kEmbryoStartNode + 1;
    std::vector<bool> grounded;  // indexed by raw node number
    struct Raw {
        ElementKind kind;
        std::size_t from, to;
        double value;
        std::size_t tree_node;
    };
    std::vector<Raw> added;

    // Returns {cursor after the subtree, index one past the subtree}.
    std::pair<std::size_t, std::size_t> eval(std::size_t pos, std::size_t cursor) {
        const gp::Node& node = tree.nodes()[pos];
        switch (node.op) {
        case gp::Primitive::Series: {
            const auto [ca, next] = eval(pos + 1, cursor);
            return eval(next, ca);
        }
        case gp::Primitive::Split: {
            const auto [ca, next] = eval(pos + 1, cursor);
            ground(ca);
            return eval(next, cursor);
        }
        default: {
            const std::size_t fresh = next_node++;
            const ElementKind kind = node.op == gp::Primitive::AddA   ? ElementKind::AType
                                     : node.op == gp::Primitive::AddT ? ElementKind::TType
                                                                      : ElementKind::DType;
            added.push_back({kind, cursor, fresh, node.value, pos});
            return {fresh, pos + 1};
        }
        }
    }

    void ground(std::size_t node) {
        if (grounded.size() <= node) grounded.resize(node + 1, false);
        grounded[node] = true;
    }
    [[nodiscard]] bool is_grounded(std::size_t node) const { return node < grounded.size() && grounded[node]; }
};

inline std::string component_label(ElementKind kind, std::size_t ordinal) {
    const char* prefix = kind == ElementKind::AType ? "C" : kind == ElementKind::TType ? "L" : "R";
    return prefix + std::to_string(ordinal);
}

}  // namespace detail

/// Runs the constructor program against the embryo.
///
/// Evaluation is depth first, first child first, with a cursor node that starts
/// at node 3. A terminal adds its element from the cursor to a fresh node and
/// moves the cursor there. Series feeds the first child's cursor to the second
/// child. Split grounds the first child's final cursor and runs the second child
/// from the original cursor. The root's final cursor is grounded too, then R_L
/// joins the highest surviving node to ground and nodes are renumbered densely.
inline CompiledCircuit compile_tree(const gp::Tree& tree, const EmbryoSpec& espec) {
    PartialEmbryo embryo = build_embryo(espec);
    detail::Builder b{tree, kEmbryoStartNode + 1, {}, {}};
    if (!tree.empty()) {
        const auto [cursor, end] = b.eval(0, embryo.cursor);
        (void)end;
        b.ground(cursor);
    }

    // Dense renumbering of surviving nodes, grounded ones collapse onto node 1.
    std::vector<std::size_t> renumber(b.next_node, LinearGraph::ground_node);
    std::size_t count = kEmbryoStartNode;
    renumber[2] = 2;
    renumber[3] = 3;
    std::size_t highest_raw = kEmbryoStartNode;
    for (std::size_t raw = kEmbryoStartNode + 1; raw < b.next_node; ++raw) {
        if (b.is_grounded(raw)) continue;
        renumber[raw] = ++count;
        highest_raw = raw;
    }

    CompiledCircuit out;
    out.graph = std::move(embryo.graph);
    out.graph.node_count = count;
    std::size_t c_count = 0, l_count = 0, r_count = 0;
    for (const auto& raw : b.added) {
        const std::size_t id = out.graph.elements.size() + 1;
        const std::size_t ordinal = raw.kind == ElementKind::AType   ? ++c_count
                                    : raw.kind == ElementKind::TType ? ++l_count
                                                                     : ++r_count;
        out.graph.elements.push_back({id, raw.kind, EnergyDomain::Electrical, renumber[raw.from], renumber[raw.to],
                                      raw.value, detail::component_label(raw.kind, ordinal)});
        out.element_provenance.emplace(id, raw.tree_node);
    }
    out.load_node = renumber[highest_raw];
    out.load_element_id = out.graph.elements.size() + 1;
    out.graph.elements.push_back({out.load_element_id, ElementKind::DType, EnergyDomain::Electrical, out.load_node,
                                  LinearGraph::ground_node, espec.load_resistance, "R_L"});
    out.graph.outputs = {{out.load_element_id, lg::Variable::Across}};
    return out;
}

/// Load-voltage magnitude over the filter grid next to the brick-wall target.
struct ResponseSample {
    double freq_hz;
    double magnitude_v;
    double target_v;
};

struct CircuitResponse {
    bool ok = false;
    std::string failure;  // error name when !ok
    std::vector<ResponseSample> samples;
};

inline CircuitResponse evaluate_response(const CompiledCircuit& circuit, const EmbryoSpec& espec,
                                         const FilterSpec& fspec) {
    CircuitResponse out;
    try {
        const auto ss = lg::derive_state_space(circuit.graph);
        const auto fr = dynamics::frequency_response(ss, fspec.grid());
        if (fr.any_singular()) {
            out.failure = "SingularAtFrequency";
            return out;
        }
        const auto mag = fr.magnitude(0, 0);
        out.samples.reserve(mag.size());
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double v = espec.source_voltage * mag[k];
            if (!std::isfinite(v)) {
                out.failure = "NonFiniteGain";
                out.samples.clear();
                return out;
            }
            out.samples.push_back({fr.freqs_hz[k], v, target_magnitude(fspec, espec, fr.freqs_hz[k])});
        }
        out.ok = true;
    } catch (const ModelError& e) {
        out.failure = std::string(to_string(e.code()));
    }
    return out;
}

/// Summed deviation from the target; band-pass filters square passband errors.
inline double fitness_from_samples(const std::vector<ResponseSample>& samples, const FilterSpec& fspec) {
    double sum = 0.0;
    for (const auto& s : samples) {
        const double e = std::abs(s.magnitude_v - s.target_v);
        sum += (fspec.kind == FilterKind::BandPass && fspec.passes(s.freq_hz)) ? e * e : e;
    }
    return sum;
}

inline double evaluate_fitness(const gp::Tree& tree, const EmbryoSpec& espec, const FilterSpec& fspec) {
    const auto response = evaluate_response(compile_tree(tree, espec), espec, fspec);
    if (!response.ok) return kPenalty;
    const double f = fitness_from_samples(response.samples, fspec);
    return std::isfinite(f) && f < kPenalty ? f : kPenalty;
}

struct NetlistRecord {
    std::size_t element_id;
    std::string kind;
    std::size_t node_a;
    std::size_t node_b;
    double value;
    std::string unit;
    long tree_node;  // -1 for embryo elements
};

inline std::vector<NetlistRecord> netlist(const CompiledCircuit& circuit) {
    std::vector<NetlistRecord> out;
    for (const auto& e : circuit.graph.elements) {
        std::string kind, unit;
        switch (e.kind) {
        case ElementKind::ASource: kind = "V"; unit = "V"; break;
        case ElementKind::AType: kind = "C"; unit = "F"; break;
        case ElementKind::TType: kind = "L"; unit = "H"; break;
        default: kind = "R"; unit = "Ohm"; break;
        }
        const auto it = circuit.element_provenance.find(e.id);
        out.push_back({e.id, kind, e.source_node, e.target_node, e.param_value, unit,
                       it == circuit.element_provenance.end() ? -1L : static_cast<long>(it->second)});
    }
    return out;
}

}  // namespace lgsynth::synth
