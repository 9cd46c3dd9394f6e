#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "crane/errors.hpp"

namespace crane::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Called with every accepted sample, starting with the initial state.
using Emit = std::function<void(double t, const std::vector<double>& y)>;

struct AdaptiveOptions {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double h_init = 0.01;
    double h_min = 1e-12;
};

namespace detail {

inline void check_finite(const std::vector<double>& y, const char* who) {
    for (double v : y)
        if (!std::isfinite(v)) throw NonFiniteState(std::string(who) + ": state diverged");
}

} // namespace detail

/// Classical fixed-step 4th-order Runge-Kutta from t0 to t1. The last
/// step is shortened to land exactly on t1.
inline void integrate_rk4(const Rhs& f, std::vector<double> y, double t0, double t1, double h,
                          const Emit& emit) {
    if (!(h > 0.0)) throw Error("integrate_rk4: step must be positive");
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    detail::check_finite(y, "integrate_rk4");
    emit(t0, y);
    double t = t0;
    std::size_t step = 0;
    while (t < t1) {
        const double hs = std::min(h, t1 - t);
        f(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hs * k1[i];
        f(t + 0.5 * hs, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * hs * k2[i];
        f(t + 0.5 * hs, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * k3[i];
        f(t + hs, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        // Keep the grid anchored at t0 + k*h so rounding never inserts
        // an extra sliver step before the horizon.
        ++step;
        const double tn = t0 + static_cast<double>(step) * h;
        t = (tn >= t1) ? t1 : tn;
        detail::check_finite(y, "integrate_rk4");
        emit(t, y);
    }
}

/// Embedded Fehlberg 4(5) pair with per-component error control
/// err_i = |y5_i - y4_i| / (abs_tol + rel_tol*|y_i|); a step is accepted
/// when the worst ratio is <= 1 and the solution advances with the
/// 5th-order value. Throws StepUnderflow below h_min.
inline void integrate_rkf45(const Rhs& f, std::vector<double> y, double t0, double t1,
                            const AdaptiveOptions& opt, const Emit& emit) {
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), y4(n), y5(n);

    detail::check_finite(y, "integrate_rkf45");
    emit(t0, y);
    double t = t0;
    double h = std::min(opt.h_init, t1 - t0);
    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h < opt.h_min) throw StepUnderflow("integrate_rkf45: step size underflow");

        f(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (0.25 * k1[i]);
        f(t + 0.25 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (3.0 / 32 * k1[i] + 9.0 / 32 * k2[i]);
        f(t + 3.0 / 8 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (1932.0 / 2197 * k1[i] - 7200.0 / 2197 * k2[i] +
                                 7296.0 / 2197 * k3[i]);
        f(t + 12.0 / 13 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (439.0 / 216 * k1[i] - 8.0 * k2[i] + 3680.0 / 513 * k3[i] -
                                 845.0 / 4104 * k4[i]);
        f(t + h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (-8.0 / 27 * k1[i] + 2.0 * k2[i] - 3544.0 / 2565 * k3[i] +
                                 1859.0 / 4104 * k4[i] - 11.0 / 40 * k5[i]);
        f(t + 0.5 * h, tmp, k6);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y4[i] = y[i] + h * (25.0 / 216 * k1[i] + 1408.0 / 2565 * k3[i] +
                                2197.0 / 4104 * k4[i] - 1.0 / 5 * k5[i]);
            y5[i] = y[i] + h * (16.0 / 135 * k1[i] + 6656.0 / 12825 * k3[i] +
                                28561.0 / 56430 * k4[i] - 9.0 / 50 * k5[i] + 2.0 / 55 * k6[i]);
            const double scale = opt.abs_tol + opt.rel_tol * std::fabs(y[i]);
            err = std::max(err, std::fabs(y5[i] - y4[i]) / scale);
        }
        if (!std::isfinite(err)) throw NonFiniteState("integrate_rkf45: state diverged");

        if (err <= 1.0) {
            t += h;
            y = y5;
            detail::check_finite(y, "integrate_rkf45");
            emit(t, y);
        }
        const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
    }
}

} // namespace crane::ode
