#pragma once

#include "lgsynth/linear_graph.hpp"
#include "lgsynth/normal_tree.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lgsynth::lg {

/// x' = A x + B u,  y = C x + D u + F u'.
struct StateSpaceModel {
    Eigen::MatrixXd A, B, C, D, F;
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;

    [[nodiscard]] Eigen::Index state_count() const noexcept { return A.rows(); }
    [[nodiscard]] Eigen::Index input_count() const noexcept { return B.cols(); }
    [[nodiscard]] Eigen::Index output_count() const noexcept { return C.rows(); }
};

struct EquationTerm {
    std::size_t element_id;
    Variable variable;
    double coefficient;
};

/// Homogeneous constitutive relation: sum of coefficient * variable = 0.
/// `element_id` is the element that owns the equation (one per element).
struct ElementalEquation {
    std::size_t element_id;
    std::vector<EquationTerm> terms;
};

/// Algebraic constitutive equations of D-type elements and two-port pairs.
/// Storage elements and sources are not included: their relations define the
/// state derivatives and the inputs.
inline std::vector<ElementalEquation> algebraic_elemental_equations(const LinearGraph& g) {
    std::vector<ElementalEquation> eqs;
    for (std::size_t i = 0; i < g.elements.size(); ++i) {
        const Element& e = g.elements[i];
        if (e.kind == ElementKind::DType) {
            // v = R f
            eqs.push_back({e.id, {{e.id, Variable::Across, 1.0}, {e.id, Variable::Through, -generalized_coefficient(e)}}});
        } else if (is_two_port(e.kind)) {
            const Element& side2 = g.elements.at(i + 1);
            const double ratio = e.param_value;
            if (e.kind == ElementKind::Transformer) {
                // v1 = TF v2,  f1 = -(1/TF) f2
                eqs.push_back({e.id, {{e.id, Variable::Across, 1.0}, {side2.id, Variable::Across, -ratio}}});
                eqs.push_back(
                    {side2.id, {{e.id, Variable::Through, 1.0}, {side2.id, Variable::Through, 1.0 / ratio}}});
            } else {
                // v1 = GY f2,  f1 = -(1/GY) v2
                eqs.push_back({e.id, {{e.id, Variable::Across, 1.0}, {side2.id, Variable::Through, -ratio}}});
                eqs.push_back(
                    {side2.id, {{e.id, Variable::Through, 1.0}, {side2.id, Variable::Across, 1.0 / ratio}}});
            }
            ++i;
        }
    }
    return eqs;
}

namespace detail {

inline std::string variable_label(const Element& e, Variable v) {
    const std::string name = e.param_label.empty() ? "e" + std::to_string(e.id) : e.param_label;
    return (v == Variable::Across ? "v_" : "f_") + name;
}

}  // namespace detail

/// Numeric state-space model of `g` for the given normal tree.
///
/// Unknowns are the non-ground node potentials and every element through-variable;
/// rows are node continuity plus one relation per element (state, input or
/// constitutive). Solving that system for unit states and inputs yields the
/// state derivatives and the requested outputs.
inline StateSpaceModel derive_state_space(const LinearGraph& g, const TreePartition& tp) {
    require_valid(g);

    std::vector<std::size_t> state_elements;
    std::vector<Variable> state_vars;
    std::vector<std::size_t> input_elements;
    for (const auto& e : g.elements) {
        const bool branch = tp.is_branch(e.id);
        if (e.kind == ElementKind::AType && !branch)
            throw ModelError(ErrorCode::DependentStorage,
                             "A-type element " + std::to_string(e.id) + " is forced into the links");
        if (e.kind == ElementKind::TType && branch)
            throw ModelError(ErrorCode::DependentStorage,
                             "T-type element " + std::to_string(e.id) + " is forced into the tree");
        if (is_source(e.kind)) input_elements.push_back(e.id);
    }
    for (const auto& e : g.elements)
        if (e.kind == ElementKind::AType) {
            state_elements.push_back(e.id);
            state_vars.push_back(Variable::Across);
        }
    for (const auto& e : g.elements)
        if (e.kind == ElementKind::TType) {
            state_elements.push_back(e.id);
            state_vars.push_back(Variable::Through);
        }

    const auto n_nodes = static_cast<Eigen::Index>(g.node_count - 1);
    const auto n_elem = static_cast<Eigen::Index>(g.elements.size());
    const auto n_unknown = n_nodes + n_elem;
    const auto n_state = static_cast<Eigen::Index>(state_elements.size());
    const auto n_input = static_cast<Eigen::Index>(input_elements.size());

    auto potential = [](std::size_t node) { return static_cast<Eigen::Index>(node) - 2; };
    auto flow = [&](std::size_t id) { return n_nodes + static_cast<Eigen::Index>(id) - 1; };

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_unknown, n_unknown);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_unknown, n_state + n_input);

    // Variable coefficients in terms of the unknown vector.
    auto add_variable = [&](Eigen::Index row, const Element& e, Variable v, double coeff) {
        if (v == Variable::Through) {
            M(row, flow(e.id)) += coeff;
            return;
        }
        if (e.source_node != LinearGraph::ground_node) M(row, potential(e.source_node)) += coeff;
        if (e.target_node != LinearGraph::ground_node) M(row, potential(e.target_node)) -= coeff;
    };

    // Continuity at every non-ground node: leaving minus entering through-variables.
    for (const auto& e : g.elements) {
        if (e.source_node != LinearGraph::ground_node) M(potential(e.source_node), flow(e.id)) += 1.0;
        if (e.target_node != LinearGraph::ground_node) M(potential(e.target_node), flow(e.id)) -= 1.0;
    }

    auto element_row = [&](std::size_t id) { return n_nodes + static_cast<Eigen::Index>(id) - 1; };
    for (Eigen::Index s = 0; s < n_state; ++s) {
        const Element& e = g.element(state_elements[static_cast<std::size_t>(s)]);
        add_variable(element_row(e.id), e, state_vars[static_cast<std::size_t>(s)], 1.0);
        rhs(element_row(e.id), s) = 1.0;
    }
    for (Eigen::Index k = 0; k < n_input; ++k) {
        const Element& e = g.element(input_elements[static_cast<std::size_t>(k)]);
        add_variable(element_row(e.id), e,
                     e.kind == ElementKind::ASource ? Variable::Across : Variable::Through, 1.0);
        rhs(element_row(e.id), n_state + k) = 1.0;
    }
    for (const auto& eq : algebraic_elemental_equations(g))
        for (const auto& term : eq.terms)
            add_variable(element_row(eq.element_id), g.element(term.element_id), term.variable, term.coefficient);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    // The rcond estimate alone can miss an exactly zero pivot.
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_ratio = pivots.size() == 0 ? 1.0 : pivots.minCoeff() / pivots.maxCoeff();
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13) || !(pivot_ratio > 1e-13))
        throw ModelError(ErrorCode::SingularReduction,
                         "algebraic subsystem is singular (rcond " + std::to_string(rcond) + ")");
    const Eigen::MatrixXd Z = lu.solve(rhs);
    if (!Z.allFinite()) throw ModelError(ErrorCode::SingularReduction, "algebraic subsystem is singular");

    auto variable_row = [&](const Element& e, Variable v) -> Eigen::RowVectorXd {
        if (v == Variable::Through) return Z.row(flow(e.id));
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(Z.cols());
        if (e.source_node != LinearGraph::ground_node) r += Z.row(potential(e.source_node));
        if (e.target_node != LinearGraph::ground_node) r -= Z.row(potential(e.target_node));
        return r;
    };

    StateSpaceModel ss;
    ss.A.resize(n_state, n_state);
    ss.B.resize(n_state, n_input);
    for (Eigen::Index s = 0; s < n_state; ++s) {
        const Element& e = g.element(state_elements[static_cast<std::size_t>(s)]);
        // A-type: f = C dv/dt, T-type: v = L df/dt
        const Variable rate_var =
            state_vars[static_cast<std::size_t>(s)] == Variable::Across ? Variable::Through : Variable::Across;
        const Eigen::RowVectorXd r = variable_row(e, rate_var) / generalized_coefficient(e);
        ss.A.row(s) = r.head(n_state);
        ss.B.row(s) = r.tail(n_input);
        ss.state_labels.push_back(detail::variable_label(e, state_vars[static_cast<std::size_t>(s)]));
    }
    for (auto id : input_elements) {
        const Element& e = g.element(id);
        ss.input_labels.push_back(e.param_label.empty() ? "u" + std::to_string(id) : e.param_label);
    }

    const auto n_out = static_cast<Eigen::Index>(g.outputs.size());
    ss.C.resize(n_out, n_state);
    ss.D.resize(n_out, n_input);
    ss.F = Eigen::MatrixXd::Zero(n_out, n_input);
    for (Eigen::Index o = 0; o < n_out; ++o) {
        const auto& req = g.outputs[static_cast<std::size_t>(o)];
        const Element& e = g.element(req.element_id);
        const Eigen::RowVectorXd r = variable_row(e, req.variable);
        ss.C.row(o) = r.head(n_state);
        ss.D.row(o) = r.tail(n_input);
        ss.output_labels.push_back(detail::variable_label(e, req.variable));
    }
    return ss;
}

/// Normal tree selection followed by reduction.
inline StateSpaceModel derive_state_space(const LinearGraph& g) {
    return derive_state_space(g, select_normal_tree(g));
}

}  // namespace lgsynth::lg
