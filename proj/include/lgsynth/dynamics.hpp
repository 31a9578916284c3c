#pragma once

#include "lgsynth/error.hpp"
#include "lgsynth/state_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lgsynth::dynamics {

using lg::StateSpaceModel;
using Complex = std::complex<double>;

struct FrequencyResponse {
    std::vector<double> freqs_hz;
    /// One output-by-input complex gain matrix per frequency.
    std::vector<Eigen::MatrixXcd> gains;
    /// True where jwI - A is numerically singular; the gain there is NaN.
    std::vector<bool> singular;

    [[nodiscard]] std::size_t size() const noexcept { return freqs_hz.size(); }
    [[nodiscard]] bool any_singular() const {
        return std::find(singular.begin(), singular.end(), true) != singular.end();
    }

    [[nodiscard]] std::vector<Complex> channel(Eigen::Index output, Eigen::Index input = 0) const {
        std::vector<Complex> out;
        out.reserve(gains.size());
        for (const auto& g : gains) out.push_back(g(output, input));
        return out;
    }
    [[nodiscard]] std::vector<double> magnitude(Eigen::Index output, Eigen::Index input = 0) const {
        std::vector<double> out;
        out.reserve(gains.size());
        for (const auto& g : gains) out.push_back(std::abs(g(output, input)));
        return out;
    }
    [[nodiscard]] std::vector<double> phase(Eigen::Index output, Eigen::Index input = 0) const {
        std::vector<double> out;
        out.reserve(gains.size());
        for (const auto& g : gains) out.push_back(std::arg(g(output, input)));
        return out;
    }
};

/// `count` logarithmically spaced points from `lo` to `hi` inclusive.
inline std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("log_space: need 0 < lo < hi, count >= 2");
    std::vector<double> out(count);
    const double a = std::log10(lo);
    const double step = (std::log10(hi) - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::pow(10.0, a + step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

namespace detail {

// Solves (s I - H) X = R in place for upper Hessenberg H, with partial pivoting
// restricted to the single subdiagonal. Returns false on a vanishing pivot.
inline bool solve_shifted_hessenberg(const Eigen::MatrixXd& H, Complex s, Eigen::MatrixXcd& R, double tol) {
    const Eigen::Index n = H.rows();
    Eigen::MatrixXcd T = -H.cast<Complex>();
    T.diagonal().array() += s;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (std::abs(T(k + 1, k)) > std::abs(T(k, k))) {
            T.row(k).tail(n - k).swap(T.row(k + 1).tail(n - k));
            R.row(k).swap(R.row(k + 1));
        }
        const Complex pivot = T(k, k);
        if (std::abs(pivot) <= tol) return false;
        const Complex l = T(k + 1, k) / pivot;
        if (l != Complex{}) {
            T.row(k + 1).tail(n - k - 1) -= l * T.row(k).tail(n - k - 1);
            R.row(k + 1) -= l * R.row(k);
        }
        T(k + 1, k) = Complex{};
    }
    if (n > 0 && std::abs(T(n - 1, n - 1)) <= tol) return false;
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        if (k + 1 < n) R.row(k) -= T.row(k).tail(n - k - 1) * R.bottomRows(n - k - 1);
        R.row(k) /= T(k, k);
    }
    return true;
}

}  // namespace detail

/// Complex gain C (jwI - A)^-1 B + D + jw F at each frequency, w = 2 pi f.
inline FrequencyResponse frequency_response(const StateSpaceModel& ss, const std::vector<double>& freqs_hz) {
    if (ss.A.rows() != ss.A.cols()) throw std::invalid_argument("frequency_response: A must be square");
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        if (!(freqs_hz[i] > 0.0) || (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])))
            throw std::invalid_argument("frequency_response: frequencies must be positive and strictly increasing");
    }

    FrequencyResponse fr;
    fr.freqs_hz = freqs_hz;
    fr.gains.reserve(freqs_hz.size());
    fr.singular.assign(freqs_hz.size(), false);

    const Eigen::Index n = ss.A.rows();
    const Eigen::MatrixXcd D = ss.D.cast<Complex>();
    const Eigen::MatrixXcd F = ss.F.cast<Complex>();
    if (n == 0) {
        for (double f : freqs_hz) fr.gains.push_back(D + Complex(0.0, 2.0 * std::numbers::pi * f) * F);
        return fr;
    }

    // A = Q H Q^T reduces every frequency point to an O(n^2) Hessenberg solve.
    const Eigen::HessenbergDecomposition<Eigen::MatrixXd> hess(ss.A);
    const Eigen::MatrixXd H = hess.matrixH();
    const Eigen::MatrixXd Q = hess.matrixQ();
    const Eigen::MatrixXcd Bh = (Q.transpose() * ss.B).cast<Complex>();
    const Eigen::MatrixXcd Ch = (ss.C * Q).cast<Complex>();
    const double scale = H.cwiseAbs().maxCoeff();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        const double w = 2.0 * std::numbers::pi * freqs_hz[i];
        const Complex s(0.0, w);
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n) * (scale + w);
        Eigen::MatrixXcd X = Bh;
        if (!detail::solve_shifted_hessenberg(H, s, X, tol)) {
            fr.singular[i] = true;
            fr.gains.push_back(Eigen::MatrixXcd::Constant(D.rows(), D.cols(), Complex(nan, nan)));
            continue;
        }
        fr.gains.push_back(Ch * X + D + s * F);
    }
    return fr;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> outputs;
};

using InputFunction = std::function<Eigen::VectorXd(double)>;

/// Classical fixed-step RK4 on x' = A x + B u. Outputs are sampled as
/// y = C x + D u; the F term is not applied.
inline Trajectory simulate(const StateSpaceModel& ss, const InputFunction& input, double t_end, double dt,
                           const Eigen::VectorXd& x0) {
    if (!(dt > 0.0) || !(t_end >= dt)) throw std::invalid_argument("simulate: need dt > 0 and t_end >= dt");
    if (x0.size() != ss.A.rows()) throw std::invalid_argument("simulate: initial state has the wrong dimension");

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trajectory tr;
    tr.times.reserve(steps + 1);
    tr.states.reserve(steps + 1);
    tr.outputs.reserve(steps + 1);

    auto rhs = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return ss.A * x + ss.B * u;
    };

    Eigen::VectorXd x = x0;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Eigen::VectorXd u = input(t);
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.outputs.push_back(ss.C * x + ss.D * u);
        if (k == steps) break;

        const Eigen::VectorXd u_mid = input(t + 0.5 * dt);
        const Eigen::VectorXd u_end = input(t + dt);
        const Eigen::VectorXd k1 = rhs(x, u);
        const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1, u_mid);
        const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2, u_mid);
        const Eigen::VectorXd k4 = rhs(x + dt * k3, u_end);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw NonFiniteState(k);
    }
    return tr;
}

/// Constant input vector, e.g. a step applied at t = 0.
inline InputFunction step_input(Eigen::VectorXd level) {
    return [level = std::move(level)](double) { return level; };
}

/// Cumulative trapezoidal integral; first entry 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t k = 1; k < times.size(); ++k)
        out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    return out;
}

/// Running integral of one output channel of a trajectory.
inline std::vector<double> integrate_signal(const Trajectory& tr, std::size_t channel) {
    std::vector<double> values;
    values.reserve(tr.outputs.size());
    for (const auto& y : tr.outputs) {
        if (channel >= static_cast<std::size_t>(y.size()))
            throw std::out_of_range("integrate_signal: BadChannel " + std::to_string(channel));
        values.push_back(y(static_cast<Eigen::Index>(channel)));
    }
    return cumulative_trapezoid(tr.times, values);
}

}  // namespace lgsynth::dynamics
