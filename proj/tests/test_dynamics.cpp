#include "fixtures.hpp"
#include "nodal_oracle.hpp"

#include "lgsynth/dynamics.hpp"
#include "lgsynth/filter_synth.hpp"
#include "lgsynth/state_space.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace lgsynth;
using namespace lgsynth::dynamics;
using lg::Variable;

namespace {

lg::LinearGraph divider(bool with_cap) {
    std::vector<std::size_t> s{2, 2, 3}, t{1, 3, 1};
    std::vector<int> type{1, 5, 5};
    std::vector<double> p{10.0, 750.0, 50.0};
    std::vector<std::string> labels{"V_S", "R_S", "R_L"};
    if (with_cap) {
        s.push_back(3);
        t.push_back(1);
        type.push_back(2);
        p.push_back(100e-9);
        labels.push_back("C1");
    }
    std::vector<int> dom(s.size(), 1);
    return lg::build_graph(s, t, type, dom, p, labels, {{3, Variable::Across}});
}

StateSpaceModel scalar(double a) {
    StateSpaceModel ss;
    ss.A = Eigen::MatrixXd::Constant(1, 1, a);
    ss.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    ss.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
    ss.D = Eigen::MatrixXd::Zero(1, 1);
    ss.F = Eigen::MatrixXd::Zero(1, 1);
    ss.state_labels = {"x"};
    ss.input_labels = {"u"};
    ss.output_labels = {"x"};
    return ss;
}

double rk4_terminal_error(double dt) {
    const auto tr = simulate(scalar(-1.0), step_input(Eigen::VectorXd::Zero(1)), 1.0, dt,
                             Eigen::VectorXd::Constant(1, 1.0));
    return std::abs(tr.states.back()(0) - std::exp(-1.0));
}

}  // namespace

TEST(FrequencyResponse, DividerIsFlat) {
    const auto g = divider(false);
    const auto ss = lg::derive_state_space(g);
    EXPECT_EQ(ss.state_count(), 0);
    const auto freqs = log_space(1.0, 1e7, 40);
    const auto fr = frequency_response(ss, freqs);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const double want = std::abs(oracle::transfer(g, 3, freqs[k]));
        EXPECT_NEAR(want, 50.0 / 800.0, 1e-15);
        EXPECT_NEAR(std::abs(fr.gains[k](0, 0)), want, 1e-14);
    }
    EXPECT_FALSE(fr.any_singular());
}

TEST(FrequencyResponse, FirstOrderRc) {
    const auto ss = lg::derive_state_space(divider(true));
    ASSERT_EQ(ss.state_count(), 1);
    const double rp = 750.0 * 50.0 / 800.0;
    const double corner = 1.0 / (2.0 * std::numbers::pi * rp * 100e-9);
    EXPECT_NEAR(corner, 33.95e3, 5.0);
    const auto freqs = log_space(10.0, 1e7, 61);
    const auto fr = frequency_response(ss, freqs);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const std::complex<double> h = 0.0625 / std::complex<double>(1.0, freqs[k] / corner);
        EXPECT_LT(std::abs(fr.gains[k](0, 0) - h), 1e-12 * std::abs(h) + 1e-16);
    }
    const auto at_corner = frequency_response(ss, {corner});
    EXPECT_NEAR(std::abs(at_corner.gains[0](0, 0)), 0.0625 / std::sqrt(2.0), 1e-12);
}

TEST(FrequencyResponse, ScalarDcGain) {
    const auto fr = frequency_response(scalar(-1.0), {1e-12});
    EXPECT_NEAR(fr.gains[0](0, 0).real(), 1.0, 1e-10);
    EXPECT_NEAR(fr.gains[0](0, 0).imag(), 0.0, 1e-10);
}

TEST(FrequencyResponse, LowFrequencyLimitMatchesDcGain) {
    using H = fixtures::Hydraulic;
    const auto ss = lg::derive_state_space(H::graph());
    const Eigen::MatrixXd dc = -ss.C * ss.A.inverse() * ss.B + ss.D;
    const auto fr = frequency_response(ss, {1e-9});
    for (Eigen::Index o = 0; o < dc.rows(); ++o) {
        const double scale = std::max(1.0, std::abs(dc(o, 0)));
        EXPECT_LT(std::abs(fr.gains[0](o, 0) - dc(o, 0)) / scale, 1e-10);
    }
}

TEST(FrequencyResponse, MagnitudePhaseSelfConsistent) {
    const auto ss = lg::derive_state_space(fixtures::Hydraulic::graph());
    const auto fr = frequency_response(ss, log_space(1e-3, 1e2, 50));
    for (Eigen::Index o = 0; o < 2; ++o) {
        const auto mag = fr.magnitude(o), ph = fr.phase(o);
        const auto val = fr.channel(o);
        for (std::size_t k = 0; k < val.size(); ++k)
            EXPECT_LE(std::abs(std::polar(mag[k], ph[k]) - val[k]), 1e-15 * std::abs(val[k]) + 1e-300);
    }
}

TEST(FrequencyResponse, UndampedPoleFlagged) {
    // Lossless LC: x'' = -w0^2 x with w0 = 2*pi.
    StateSpaceModel ss;
    ss.A = Eigen::MatrixXd{{0.0, 1.0}, {-4.0 * std::numbers::pi * std::numbers::pi, 0.0}};
    ss.B = Eigen::MatrixXd{{0.0}, {1.0}};
    ss.C = Eigen::MatrixXd{{1.0, 0.0}};
    ss.D = Eigen::MatrixXd::Zero(1, 1);
    ss.F = Eigen::MatrixXd::Zero(1, 1);
    const auto fr = frequency_response(ss, {0.5, 1.0, 2.0});
    EXPECT_FALSE(fr.singular[0]);
    EXPECT_TRUE(fr.singular[1]);
    EXPECT_TRUE(std::isnan(std::abs(fr.gains[1](0, 0))));
    EXPECT_FALSE(fr.singular[2]);
}

TEST(FrequencyResponse, RejectsBadGrid) {
    const auto ss = scalar(-1.0);
    EXPECT_THROW(frequency_response(ss, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(frequency_response(ss, {0.0, 1.0}), std::invalid_argument);
}

TEST(Simulate, ExponentialDecay) {
    const auto tr = simulate(scalar(-1.0), step_input(Eigen::VectorXd::Zero(1)), 1.0, 0.01,
                             Eigen::VectorXd::Constant(1, 1.0));
    ASSERT_EQ(tr.times.size(), 101u);
    EXPECT_EQ(tr.states.size(), tr.times.size());
    EXPECT_EQ(tr.outputs.size(), tr.times.size());
    EXPECT_NEAR(tr.states.back()(0), std::exp(-1.0), 1e-8);
    for (std::size_t k = 0; k < tr.times.size(); ++k) EXPECT_NEAR(tr.times[k], 0.01 * static_cast<double>(k), 1e-15);
}

TEST(Simulate, FourthOrderConvergence) {
    const double ratio = rk4_terminal_error(0.1) / rk4_terminal_error(0.05);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(Simulate, ZeroInputStaysAtRest) {
    const auto ss = lg::derive_state_space(fixtures::Hydraulic::graph());
    const auto tr = simulate(ss, step_input(Eigen::VectorXd::Zero(1)), 1.0, 1e-3, Eigen::VectorXd::Zero(2));
    for (const auto& x : tr.states) EXPECT_TRUE(x.isZero(0.0));
}

TEST(Simulate, HydraulicStepResponse) {
    using H = fixtures::Hydraulic;
    const auto ss = lg::derive_state_space(H::graph());
    const auto tr = simulate(ss, step_input(Eigen::VectorXd::Constant(1, H::pressure)), 60.0, 1e-3,
                             Eigen::VectorXd::Zero(2));
    // Steady state from the force balance: F_K = -A_p * P_s.
    const double force_ss = -H::area() * H::pressure;
    EXPECT_NEAR(force_ss, -785.398, 1e-3);
    EXPECT_NEAR(tr.outputs.back()(1), force_ss, 0.001 * std::abs(force_ss));

    // Velocity goes negative first and decays.
    const auto first_move = std::find_if(tr.outputs.begin(), tr.outputs.end(),
                                         [](const Eigen::VectorXd& y) { return std::abs(y(0)) > 1e-9; });
    ASSERT_NE(first_move, tr.outputs.end());
    EXPECT_LT((*first_move)(0), 0.0);
    EXPECT_LT(std::abs(tr.outputs.back()(0)), 1e-2);

    const auto pos = integrate_signal(tr, 0);
    const double pos_ss = force_ss / H::stiffness;
    EXPECT_NEAR(pos.back(), pos_ss, 0.01 * std::abs(pos_ss));
    const double peak = std::abs(*std::min_element(pos.begin(), pos.end()));
    EXPECT_GE(peak, 7.0);
    EXPECT_LE(peak, 9.0);
}

TEST(Simulate, DivergenceAborts) {
    try {
        simulate(scalar(1000.0), step_input(Eigen::VectorXd::Zero(1)), 100.0, 1.0, Eigen::VectorXd::Constant(1, 1.0));
        FAIL() << "expected NonFiniteState";
    } catch (const NonFiniteState& e) {
        EXPECT_GT(e.last_valid_step(), 0u);
        EXPECT_LT(e.last_valid_step(), 100u);
    }
}

TEST(Simulate, RejectsBadStep) {
    const auto ss = scalar(-1.0);
    const auto in = step_input(Eigen::VectorXd::Zero(1));
    EXPECT_THROW(simulate(ss, in, 1.0, 0.0, Eigen::VectorXd::Zero(1)), std::invalid_argument);
    EXPECT_THROW(simulate(ss, in, 0.001, 0.01, Eigen::VectorXd::Zero(1)), std::invalid_argument);
}

TEST(Integrate, ConstantAndSine) {
    std::vector<double> t, one, sine;
    for (int k = 0; k <= 1000; ++k) {
        t.push_back(k * 1e-3);
        one.push_back(1.0);
    }
    EXPECT_NEAR(cumulative_trapezoid(t, one).back(), 1.0, 1e-12);

    t.clear();
    const int n = static_cast<int>(std::llround(std::numbers::pi / 1e-3));
    for (int k = 0; k <= n; ++k) {
        t.push_back(std::numbers::pi * k / n);
        sine.push_back(std::sin(t.back()));
    }
    const auto area = cumulative_trapezoid(t, sine);
    EXPECT_EQ(area.front(), 0.0);
    EXPECT_NEAR(area.back(), 2.0, 1e-5);
}

TEST(Integrate, BadChannel) {
    const auto tr = simulate(scalar(-1.0), step_input(Eigen::VectorXd::Zero(1)), 0.1, 0.01, Eigen::VectorXd::Zero(1));
    EXPECT_THROW(integrate_signal(tr, 1), std::out_of_range);
}

// Random ladders with synthesis-range values against the nodal oracle.
TEST(FrequencyResponse, MatchesNodalOracle) {
    const synth::EmbryoSpec embryo;
    const auto filter = synth::FilterSpec::low_pass(50e3);
    const synth::ParameterSampler sampler{embryo, filter};
    gp::Rng rng(11);
    const auto freqs = log_space(filter.grid_lo, filter.grid_hi, 50);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto tree = gp::random_tree(3, sampler, rng);
        ASSERT_LE(tree.terminal_count(), 4u);
        auto g = synth::compile_tree(tree, embryo).graph;
        const std::size_t load = g.elements.size();
        g.outputs = {{load, Variable::Across}};
        lg::StateSpaceModel ss;
        try {
            ss = lg::derive_state_space(g);
        } catch (const ModelError&) {
            continue;
        }
        const auto fr = frequency_response(ss, freqs);
        for (std::size_t k = 0; k < freqs.size(); ++k) {
            const auto want = oracle::transfer(g, load, freqs[k]);
            EXPECT_LE(std::abs(fr.gains[k](0, 0) - want), 1e-9 * std::abs(want)) << tree.to_string();
        }
        ++checked;
    }
    EXPECT_GE(checked, 25);
}
