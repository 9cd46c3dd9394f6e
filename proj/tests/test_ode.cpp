#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crane/ode.hpp"

using namespace crane;

namespace {

// dx/dt = -x, x(0) = 1, exact solution e^-t.
void decay(double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0];
}

double rk4_final(double h) {
    double last = 0.0;
    ode::integrate_rk4(decay, {1.0}, 0.0, 1.0, h,
                       [&](double, const std::vector<double>& y) { last = y[0]; });
    return last;
}

} // namespace

TEST_CASE("rk4 shows fourth-order convergence on exponential decay") {
    const double exact = std::exp(-1.0);
    const double e1 = std::fabs(rk4_final(0.1) - exact);
    const double e2 = std::fabs(rk4_final(0.05) - exact);
    const double e3 = std::fabs(rk4_final(0.025) - exact);
    const double p12 = std::log2(e1 / e2);
    const double p23 = std::log2(e2 / e3);
    CHECK(p12 >= 3.8);
    CHECK(p12 <= 4.2);
    CHECK(p23 >= 3.8);
    CHECK(p23 <= 4.2);

    CHECK(std::fabs(rk4_final(0.01) - exact) <= 1e-9);
}

TEST_CASE("rk4 lands exactly on the horizon") {
    double last_t = -1.0;
    int samples = 0;
    ode::integrate_rk4(decay, {1.0}, 0.0, 0.35, 0.1,
                       [&](double t, const std::vector<double>&) {
                           last_t = t;
                           ++samples;
                       });
    CHECK(last_t == 0.35);
    CHECK(samples == 5); // 0, 0.1, 0.2, 0.3, 0.35
}

TEST_CASE("rkf45 meets its tolerance on exponential decay") {
    double last = 0.0;
    ode::AdaptiveOptions opt;
    ode::integrate_rkf45(decay, {1.0}, 0.0, 1.0, opt,
                         [&](double, const std::vector<double>& y) { last = y[0]; });
    CHECK(std::fabs(last - std::exp(-1.0)) <= 1e-7);
}

TEST_CASE("rkf45 tracks an oscillator") {
    // y'' = -y: solution (cos t, -sin t) from (1, 0).
    auto osc = [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    std::vector<double> last;
    ode::AdaptiveOptions opt;
    ode::integrate_rkf45(osc, {1.0, 0.0}, 0.0, 10.0, opt,
                         [&](double, const std::vector<double>& y) { last = y; });
    CHECK(std::fabs(last[0] - std::cos(10.0)) <= 1e-6);
    CHECK(std::fabs(last[1] + std::sin(10.0)) <= 1e-6);
}

TEST_CASE("divergent dynamics raise NonFiniteState") {
    // x' = x^2 from 1 blows up at t = 1.
    auto blowup = [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[0] * y[0];
    };
    CHECK_THROWS_AS(
        ode::integrate_rk4(blowup, {1.0}, 0.0, 2.0, 0.01, [](double, const std::vector<double>&) {}),
        NonFiniteState);
}
