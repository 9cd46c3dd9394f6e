#include "crane/stability.hpp"

#include <cmath>
#include <random>

namespace crane::stability {

namespace {

constexpr int kShells = 10;

// Gaussian deviates via Box-Muller on explicit 53-bit uniforms, so a
// given seed produces the same sample set on every platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// All sample points, flattened: one direction pool shared across the
// ten shells, so shrinking the radius keeps the even shells inside the
// larger sample set.
std::vector<double> build_samples(int dim, double radius, int samples, std::uint64_t seed,
                                  int& total) {
    const int per_shell = samples / kShells;
    total = per_shell * kShells;
    GaussianStream gauss(seed);

    std::vector<double> dirs(static_cast<std::size_t>(per_shell) * dim);
    for (int d = 0; d < per_shell; ++d) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double g = gauss.next();
                dirs[static_cast<std::size_t>(d) * dim + i] = g;
                norm2 += g * g;
            }
        } while (norm2 < 1e-24);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < dim; ++i) dirs[static_cast<std::size_t>(d) * dim + i] *= inv;
    }

    std::vector<double> pts(static_cast<std::size_t>(total) * dim);
    std::size_t at = 0;
    for (int k = 1; k <= kShells; ++k) {
        const double r = radius * k / kShells;
        for (int d = 0; d < per_shell; ++d)
            for (int i = 0; i < dim; ++i)
                pts[at++] = r * dirs[static_cast<std::size_t>(d) * dim + i];
    }
    return pts;
}

// ||rhs(x) - a_cl x||_2 / ||x||_2 for one sample; NaN marks a failure.
double remainder_ratio(const ClosedLoopRhs& rhs, const numkit::Mat& a_cl,
                       std::span<const double> x, std::span<double> gx) {
    const int n = static_cast<int>(x.size());
    try {
        rhs(x, gx);
    } catch (...) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double lin = 0.0;
        for (int j = 0; j < n; ++j) lin += a_cl(i, j) * x[j];
        const double d = gx[i] - lin;
        num += d * d;
        den += x[i] * x[i];
    }
    return std::sqrt(num) / std::sqrt(den);
}

void check_sigma_args(double radius, int samples) {
    if (!(radius > 0.0)) throw Error("estimate_sigma: radius must be positive");
    if (samples < 1000) throw Error("estimate_sigma: at least 1000 samples required");
}

} // namespace

double estimate_sigma(const ClosedLoopRhs& rhs, const numkit::Mat& a_cl, double radius,
                      int samples, std::uint64_t seed) {
    check_sigma_args(radius, samples);
    const int n = a_cl.rows();
    int total = 0;
    const std::vector<double> pts = build_samples(n, radius, samples, seed, total);

    double sigma = 0.0;
    bool bad = false;
#pragma omp parallel
    {
        std::vector<double> gx(n);
#pragma omp for reduction(max : sigma) reduction(|| : bad)
        for (int i = 0; i < total; ++i) {
            const double r = remainder_ratio(
                rhs, a_cl, std::span<const double>(pts.data() + static_cast<std::size_t>(i) * n, n),
                gx);
            if (!std::isfinite(r))
                bad = true;
            else
                sigma = std::max(sigma, r);
        }
    }
    if (bad) throw NonFiniteState("estimate_sigma: dynamics diverged at a sample point");
    return sigma;
}

double estimate_sigma_serial(const ClosedLoopRhs& rhs, const numkit::Mat& a_cl, double radius,
                             int samples, std::uint64_t seed) {
    check_sigma_args(radius, samples);
    const int n = a_cl.rows();
    int total = 0;
    const std::vector<double> pts = build_samples(n, radius, samples, seed, total);

    double sigma = 0.0;
    bool bad = false;
    std::vector<double> gx(n);
    for (int i = 0; i < total; ++i) {
        const double r = remainder_ratio(
            rhs, a_cl, std::span<const double>(pts.data() + static_cast<std::size_t>(i) * n, n), gx);
        if (!std::isfinite(r))
            bad = true;
        else
            sigma = std::max(sigma, r);
    }
    if (bad) throw NonFiniteState("estimate_sigma: dynamics diverged at a sample point");
    return sigma;
}

LyapunovCertificate certify(const numkit::Mat& a_cl, const numkit::Mat& q, double sigma,
                            double radius) {
    auto spec = numkit::eig_general(a_cl);
    for (auto z : spec.values)
        if (!(z.real() < 0.0))
            throw NotHurwitz("certify: closed-loop matrix has a non-negative eigenvalue");

    const auto q_eigs = numkit::eig_symmetric(q);
    if (q_eigs.front() <= 0.0) throw Error("certify: Q is not positive definite");

    LyapunovCertificate cert;
    cert.q = q;
    cert.p = numkit::lyapunov_solve(a_cl, q);
    const auto p_eigs = numkit::eig_symmetric(cert.p);
    cert.sigma = sigma;
    cert.radius = radius;
    cert.lambda_min_q = q_eigs.front();
    cert.lambda_max_p = p_eigs.back();
    cert.lambda_min_p = p_eigs.front();
    cert.margin = cert.lambda_min_q - 2.0 * sigma * cert.lambda_max_p;
    return cert;
}

double roa_radius(const numkit::Mat& a_cl, const numkit::Mat& q, const ClosedLoopRhs& rhs,
                  double r_max, int samples, std::uint64_t seed, std::vector<RoaProbe>* probes) {
    if (!(r_max > 0.0)) throw Error("roa_radius: r_max must be positive");
    auto spec = numkit::eig_general(a_cl);
    for (auto z : spec.values)
        if (!(z.real() < 0.0))
            throw NotHurwitz("roa_radius: closed-loop matrix has a non-negative eigenvalue");

    auto margin_at = [&](double r) {
        const double sigma = estimate_sigma(rhs, a_cl, r, samples, seed);
        const auto cert = certify(a_cl, q, sigma, r);
        if (probes) probes->push_back({r, sigma, cert.margin});
        return cert.margin;
    };

    if (margin_at(r_max) > 0.0) return r_max;

    // Shrink until a certifiable radius appears.
    double hi = r_max;
    double lo = 0.5 * r_max;
    while (margin_at(lo) <= 0.0) {
        hi = lo;
        lo *= 0.5;
        if (lo < r_max * 1e-9) return 0.0;
    }
    while ((hi - lo) > 1e-3 * hi) {
        const double mid = 0.5 * (hi + lo);
        if (margin_at(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<VdotPoint> vdot_along(const std::vector<double>& times,
                                  const std::vector<std::vector<double>>& states,
                                  const ClosedLoopRhs& rhs, const numkit::Mat& p) {
    if (times.size() != states.size()) throw Error("vdot_along: times/states length mismatch");
    const int n = p.rows();
    std::vector<VdotPoint> out;
    out.reserve(times.size());
    std::vector<double> gx(n);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const auto& x = states[s];
        rhs(x, gx);
        const auto px = p.mul_vec(x);
        const auto pg = p.mul_vec(gx);
        VdotPoint pt;
        pt.t = times[s];
        for (int i = 0; i < n; ++i) {
            pt.v += x[i] * px[i];
            pt.vdot += x[i] * pg[i] + gx[i] * px[i];
        }
        out.push_back(pt);
    }
    return out;
}

} // namespace crane::stability
