#pragma once

#include "lgsynth/linear_graph.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fixtures {

// Pump -> pipe -> piston -> mass/spring/damper, entered with the
// S/T/type/domain vectors of the hydraulic actuator listing (7 domain entries).
struct Hydraulic {
    static constexpr double pressure = 100e3;  // Pa
    static constexpr double pipe_r = 100.0;    // Pa s / m^3
    static constexpr double damping = 50.0;    // N s / m
    static constexpr double stiffness = 150.0; // N / m
    static constexpr double mass = 100.0;      // kg
    static double area() { return std::numbers::pi * 0.05 * 0.05; }

    static lgsynth::lg::LinearGraph graph() {
        const std::vector<std::size_t> s{2, 2, 3, 4, 4, 4, 4};
        const std::vector<std::size_t> t{1, 3, 1, 1, 1, 1, 1};
        const std::vector<int> type{1, 5, 4, 4, 5, 6, 2};
        const std::vector<int> domain{4, 4, 4, 2, 2, 2, 2};
        const std::vector<double> params{pressure, pipe_r, 1.0 / area(), 1.0 / area(), damping, stiffness, mass};
        const std::vector<std::string> labels{"P_s", "R", "GY", "GY", "b", "K", "m"};
        return lgsynth::lg::build_graph(s, t, type, domain, params, labels,
                                        {{7, lgsynth::lg::Variable::Across}, {6, lgsynth::lg::Variable::Through}});
    }
};

}  // namespace fixtures
