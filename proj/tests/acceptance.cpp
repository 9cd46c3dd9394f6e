// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "crane/config.hpp"
#include "crane/model.hpp"
#include "crane/numkit.hpp"
#include "crane/ode.hpp"
#include "crane/simulate.hpp"
#include "crane/stability.hpp"
#include "crane/synthesis.hpp"
#include "test_util.hpp"

using namespace crane;
using numkit::Mat;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] %d. %s — %s\n", pass ? "PASS" : "FAIL", idx, what.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const model::CraneParams kPaper{};

Mat paper_gain6() {
    return Mat(3, 6,
               {0.1050, 0, 0, 0.6500, 0, 0,
                0, 0.0300, 0, 0, 0.3500, 0,
                0, 0, 0.0250, 0, 0, 0.3500});
}

sim::Scenario scenario6() {
    sim::Scenario sc;
    sc.model = sim::CraneModelKind::varying6;
    sc.start = {0, 3, 0, 0, -0.5, 0};
    sc.target = {10, 3, 0, 0, 0, 0};
    sc.poles.poles = {-0.1, -0.15, -0.2, -0.25, -0.3, -0.35};
    sc.assignment = synthesis::ChannelAssignment::reference();
    return sc;
}

sim::Scenario scenario4() {
    sim::Scenario sc;
    sc.model = sim::CraneModelKind::constant4;
    sc.start = {0, 0, 0, 0};
    sc.target = {10, 0, 0, 0};
    sc.poles.poles = {-0.2, -0.25, -0.3, -0.35};
    return sc;
}

void criterion1_gain_varying() {
    Mat a, b;
    model::linearize6(kPaper, a, b);
    const auto asg = synthesis::ChannelAssignment::reference();
    const auto t0 = Clock::now();
    const auto k = synthesis::place_decoupled(a, b, asg);
    const double elapsed_ms = ms_since(t0);

    const Mat expect = paper_gain6();
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 6; ++j) worst = std::max(worst, std::fabs(k.k(i, j) - expect(i, j)));
    const bool pass = worst <= 0.5e-4 && elapsed_ms < 1.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "max |K - K_ref| = %.2e (tol 5e-5), runtime %.3f ms (< 1 ms)",
                  worst, elapsed_ms);
    report(1, pass, "gain reproduction, varying rope", buf);
}

void criterion2_gain_constant() {
    Mat a, b;
    model::linearize4(kPaper, a, b);
    synthesis::PoleSet poles{{-0.2, -0.25, -0.3, -0.35}};
    const auto k = synthesis::ackermann(a, b, poles);
    const double expect[4] = {0.0010, 99.1882, 0.0159, -2.1061};
    double worst = 0.0;
    for (int j = 0; j < 4; ++j) worst = std::max(worst, std::fabs(k.k(0, j) - expect[j]));
    const auto check = synthesis::verify_placement(a, b, k, poles, 1e-8);
    const bool pass = worst <= 1e-3 && check.pass;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "max |K - K_ref| = %.2e (tol 1e-3), pole mismatch %.2e (tol 1e-8)", worst,
                  check.max_mismatch);
    report(2, pass, "gain reproduction, constant rope", buf);
}

void criterion3_controllability() {
    Mat a6, b6;
    model::linearize6(kPaper, a6, b6);
    const Mat c6 = synthesis::controllability_matrix(a6, b6);
    const int rank6 = numkit::rank(c6);
    Mat bab(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) bab(i, j) = c6(i, j);
    const double det_bab = numkit::determinant(bab);

    Mat a4, b4;
    model::linearize4(kPaper, a4, b4);
    const double det4 = numkit::determinant(synthesis::controllability_matrix(a4, b4));
    const double den = kPaper.M * kPaper.m * kPaper.l * kPaper.l + kPaper.I * (kPaper.M + kPaper.m);
    const double closed_form =
        -kPaper.g * kPaper.g * std::pow(kPaper.l, 4) * std::pow(kPaper.m, 4) / std::pow(den, 4);

    const bool pass = rank6 == 6 && std::fabs(det_bab + 1.0) <= 1e-12 &&
                      std::fabs(det4 - closed_form) <= 1e-9 * std::fabs(closed_form);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "rank C6 = %d, det(B AB) = %.15g, det C4 = %.6f vs formula %.6f (rel err %.1e)",
                  rank6, det_bab, det4, closed_form,
                  std::fabs(det4 - closed_form) / std::fabs(closed_form));
    report(3, pass, "controllability fixtures", buf);
}

void criterion4_dynamics_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> ds(-5.0, 5.0);
    double worst_dev = 0.0, worst_res = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const model::State6 s{ds(rng), ds(rng), ds(rng), ds(rng), ds(rng), ds(rng)};
        const model::ControlU u{ds(rng), ds(rng), ds(rng)};
        const auto f = model::forces_from_u(s, u, kPaper);
        const auto fast = model::deriv6(s, u, kPaper);
        const auto oracle = model::deriv_mass_matrix(s, f, kPaper);
        for (int i = 0; i < 6; ++i)
            worst_dev = std::max(worst_dev, std::fabs(fast[i] - oracle[i]));
        const auto res = model::lagrange_residual(s, fast, f, kPaper);
        for (double r : res) worst_res = std::max(worst_res, std::fabs(r));
    }
    const double sec = ms_since(t0) / 1e3;
    const bool pass = worst_dev <= 1e-10 && worst_res <= 1e-9 && sec < 1.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "1000 states: max route deviation %.2e (tol 1e-10), max residual %.2e (tol 1e-9), "
                  "%.2f s (< 1 s)",
                  worst_dev, worst_res, sec);
    report(4, pass, "dynamics oracle equivalence", buf);
}

void criterion5_conservation() {
    const auto t0 = Clock::now();
    const model::State4 start{0.0, 0.4, 0.3, 0.0};
    const auto e0 = model::energy(start, kPaper);
    const double total0 = e0.kinetic + e0.potential;
    const double mom0 = (kPaper.M + kPaper.m) * start.zdot +
                        kPaper.m * kPaper.l * start.thetadot * std::cos(start.theta);
    double worst_e = 0.0, worst_p = 0.0;
    ode::Rhs rhs = [](double, std::span<const double> y, std::span<double> dy) {
        const auto d = model::deriv4(model::State4{y[0], y[1], y[2], y[3]}, 0.0, kPaper);
        for (int i = 0; i < 4; ++i) dy[i] = d[i];
    };
    ode::integrate_rk4(rhs, {start.z, start.theta, start.zdot, start.thetadot}, 0.0, 60.0, 1e-3,
                       [&](double, const std::vector<double>& y) {
                           const model::State4 s{y[0], y[1], y[2], y[3]};
                           const auto e = model::energy(s, kPaper);
                           const double mom =
                               (kPaper.M + kPaper.m) * s.zdot +
                               kPaper.m * kPaper.l * s.thetadot * std::cos(s.theta);
                           worst_e = std::max(worst_e, std::fabs(e.kinetic + e.potential - total0));
                           worst_p = std::max(worst_p, std::fabs(mom - mom0));
                       });
    const double sec = ms_since(t0) / 1e3;
    const double rel_e = worst_e / std::fabs(total0);
    const double rel_p = worst_p / std::max(1.0, std::fabs(mom0));
    const bool pass = rel_e <= 1e-8 && rel_p <= 1e-8 && sec < 5.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "60 s at h=1e-3: energy drift %.2e, momentum drift %.2e (tol 1e-8 rel), %.2f s (< 5 s)",
                  rel_e, rel_p, sec);
    report(5, pass, "unforced conservation", buf);
}

void criterion6_convergence_and_descent() {
    const sim::Scenario sc = scenario6();
    const auto k = sim::synthesize_gain(sc);
    const auto tr = sim::integrate_closed_loop(sc, k);
    double err2 = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double d = tr.states.back()[i] - sc.target[i];
        err2 += d * d;
    }
    const double final_err = std::sqrt(err2);

    // Certificate for the translated closed loop.
    Mat a, b;
    model::linearize6(sc.params, a, b);
    const Mat a_cl = a - b * k.k;
    const Mat q = Mat::identity(6);
    const auto rhs = sim::shifted_closed_loop(sc, k);
    const double radius = stability::roa_radius(a_cl, q, rhs, 1.0, 2000, 1);
    const double sigma = stability::estimate_sigma(rhs, a_cl, radius, 2000, 1);
    const auto cert = stability::certify(a_cl, q, sigma, radius);

    // V along the (shifted) trajectory wherever it is inside the ball.
    std::vector<double> times;
    std::vector<std::vector<double>> inside;
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
        std::vector<double> e(6);
        double n2 = 0.0;
        for (int i = 0; i < 6; ++i) {
            e[i] = tr.states[s][i] - sc.target[i];
            n2 += e[i] * e[i];
        }
        if (std::sqrt(n2) <= radius) {
            times.push_back(tr.times[s]);
            inside.push_back(std::move(e));
        }
    }
    const auto series = stability::vdot_along(times, inside, rhs, cert.p);
    bool v_monotone = true;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].v > series[i - 1].v + 1e-12) v_monotone = false;

    // Same check on a run that starts (and provably stays) inside the
    // certified ball: start at radius/10 so the V sublevel set is
    // contained in the ball despite P's eccentricity.
    sim::Scenario inner = sc;
    inner.horizon = 40.0;
    inner.start = sc.target;
    inner.start[0] += 0.06 * radius;
    inner.start[1] -= 0.05 * radius;
    inner.start[2] += 0.04 * radius;
    const auto tri = sim::integrate_closed_loop(inner, k);
    std::vector<double> ti;
    std::vector<std::vector<double>> ei;
    for (std::size_t s = 0; s < tri.states.size(); ++s) {
        std::vector<double> e(6);
        for (int i = 0; i < 6; ++i) e[i] = tri.states[s][i] - sc.target[i];
        ti.push_back(tri.times[s]);
        ei.push_back(std::move(e));
    }
    const auto inner_series = stability::vdot_along(ti, ei, rhs, cert.p);
    bool inner_monotone = true;
    for (std::size_t i = 1; i < inner_series.size(); ++i)
        if (inner_series[i].v > inner_series[i - 1].v + 1e-12) inner_monotone = false;

    const bool pass = final_err < 1e-2 && cert.valid() && v_monotone && inner_monotone &&
                      series.size() >= 2;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "|x(100) - target| = %.2e (tol 1e-2); certified radius %.3g (margin %.2e); "
                  "V non-increasing on %zu in-ball samples and on an in-ball run",
                  final_err, radius, cert.margin, series.size());
    report(6, pass, "reference transport converges with Lyapunov descent", buf);
}

void criterion7_feed_forward() {
    // Identical step on both sides; linear force interpolation between
    // exported samples. At h = 2.5e-4 the interpolation error sits well
    // under the 1e-6 target (the deviation scales as h^2; at the CLI
    // default h = 0.01 it is ~5.6e-4).
    sim::Scenario sc = scenario6();
    sc.step = 2.5e-4;
    const auto k = sim::synthesize_gain(sc);
    const auto closed = sim::integrate_closed_loop(sc, k);
    const auto replay = sim::integrate_open_loop(sc, sim::ForceProfile::from_trajectory(closed));
    const double dev = sim::max_state_deviation(closed, replay);
    const bool pass = dev <= 1e-6;
    char buf[128];
    std::snprintf(buf, sizeof buf, "sup-norm deviation %.2e at shared h = 2.5e-4 (tol 1e-6)", dev);
    report(7, pass, "feed-forward replay equivalence", buf);
}

void criterion8_transport_comparison() {
    const auto t0 = Clock::now();
    const auto rep = sim::compare_scenarios(scenario6(), scenario4());
    const double sec = ms_since(t0) / 1e3;
    const bool settled = rep.transport_a.has_value() && rep.transport_b.has_value();
    const bool pass = settled && rep.ratio <= 0.7 && rep.peak_sway_a > rep.peak_sway_b && sec < 10.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "transport ratio %.3f (tol 0.7); peak sway %.3f > %.4f rad as published; %.2f s "
                  "(< 10 s)",
                  rep.ratio, rep.peak_sway_a, rep.peak_sway_b, sec);
    report(8, pass, "transportation-time comparison", buf);
}

void criterion9_numerical_kernels() {
    // RK4 order on exponential decay.
    auto rk4_final = [](double h) {
        double last = 0.0;
        ode::integrate_rk4(
            [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }, {1.0},
            0.0, 1.0, h, [&](double, const std::vector<double>& y) { last = y[0]; });
        return last;
    };
    const double exact = std::exp(-1.0);
    const double e1 = std::fabs(rk4_final(0.1) - exact);
    const double e2 = std::fabs(rk4_final(0.05) - exact);
    const double e3 = std::fabs(rk4_final(0.025) - exact);
    const double p12 = std::log2(e1 / e2);
    const double p23 = std::log2(e2 / e3);
    const bool order_ok = p12 >= 3.8 && p12 <= 4.2 && p23 >= 3.8 && p23 <= 4.2;

    // Lyapunov residual on the reference closed loop.
    Mat a, b;
    model::linearize6(kPaper, a, b);
    const Mat a_cl = a - b * paper_gain6();
    const Mat q = Mat::identity(6);
    const Mat p = numkit::lyapunov_solve(a_cl, q);
    const double lyap_res = (p * a_cl + a_cl.transpose() * p + q).norm_inf();
    const bool lyap_ok = lyap_res <= 1e-9 * q.norm_inf();

    // Eigen-solver residual contracts.
    std::mt19937_64 rng(77);
    bool eig_ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        const Mat m = testutil::random_mat(rng, 6, 6);
        const auto spec = numkit::eig_general(m);
        const double bound = 1e-6 * std::pow(std::max(1.0, m.norm_inf()), 6);
        for (auto z : spec.values)
            if (std::abs(testutil::char_poly_at(m, z)) > bound) eig_ok = false;
    }
    const auto pv = numkit::eig_symmetric(p);
    double trace = 0.0, sum = 0.0;
    for (int i = 0; i < 6; ++i) trace += p(i, i);
    for (double v : pv) sum += v;
    if (std::fabs(sum - trace) > 1e-10 * std::fabs(trace) || pv.front() <= 0.0) eig_ok = false;

    const bool pass = order_ok && lyap_ok && eig_ok;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "RK4 order exponents %.3f/%.3f (in [3.8,4.2]); Lyapunov residual %.2e (tol "
                  "1e-9); eigen residual contracts %s",
                  p12, p23, lyap_res, eig_ok ? "hold" : "VIOLATED");
    report(9, pass, "numerical kernels", buf);
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    criterion1_gain_varying();
    criterion2_gain_constant();
    criterion3_controllability();
    criterion4_dynamics_oracle();
    criterion5_conservation();
    criterion6_convergence_and_descent();
    criterion7_feed_forward();
    criterion8_transport_comparison();
    criterion9_numerical_kernels();
    const double sec = ms_since(t0) / 1e3;
    std::printf("%d/9 criteria passed in %.2f s\n", 9 - g_failures, sec);
    return g_failures == 0 ? 0 : 1;
}
