#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crane/errors.hpp"
#include "crane/numkit.hpp"

namespace crane::stability {

/// Autonomous closed-loop right-hand side x -> G(x, -Kx).
using ClosedLoopRhs = std::function<void(std::span<const double> x, std::span<double> dx)>;

/// Numerical Lyapunov certificate for a closed loop: valid (margin > 0)
/// means the quadratic form x^T P x decreases along trajectories inside
/// the sampled radius.
struct LyapunovCertificate {
    numkit::Mat p;
    numkit::Mat q;
    double sigma = 0.0;  // estimated remainder ratio ||R1(x)||/||x||
    double radius = 0.0; // state-norm ball the estimate was sampled on
    double margin = 0.0; // lambda_min(Q) - 2 sigma lambda_max(P)
    double lambda_min_q = 0.0;
    double lambda_max_p = 0.0;
    double lambda_min_p = 0.0;

    bool valid() const { return margin > 0.0; }
};

/// Monte-Carlo estimate of the remainder ratio: max over points sampled
/// on ten concentric spheres of radii radius*k/10 (k = 1..10, one seeded
/// direction pool shared across shells) of ||rhs(x) - a_cl x|| / ||x||.
/// Deterministic for a fixed seed; OpenMP-parallel (max reduction is
/// order-independent, so results are identical to the serial path).
double estimate_sigma(const ClosedLoopRhs& rhs, const numkit::Mat& a_cl, double radius,
                      int samples, std::uint64_t seed);

/// Serial reference implementation of estimate_sigma; kept for testing
/// and benchmarking against the parallel path.
double estimate_sigma_serial(const ClosedLoopRhs& rhs, const numkit::Mat& a_cl, double radius,
                             int samples, std::uint64_t seed);

/// Solve the Lyapunov equation for a_cl against q and combine with the
/// sigma estimate into a certificate. Throws NotHurwitz when a_cl has an
/// eigenvalue with non-negative real part.
LyapunovCertificate certify(const numkit::Mat& a_cl, const numkit::Mat& q, double sigma,
                            double radius = 0.0);

struct RoaProbe {
    double radius = 0.0;
    double sigma = 0.0;
    double margin = 0.0;
};

/// Largest radius r <= r_max (bisection to 1e-3 relative) whose
/// certificate is valid; 0 when none is. Probe history is appended to
/// *probes when given.
double roa_radius(const numkit::Mat& a_cl, const numkit::Mat& q, const ClosedLoopRhs& rhs,
                  double r_max, int samples, std::uint64_t seed,
                  std::vector<RoaProbe>* probes = nullptr);

struct VdotPoint {
    double t = 0.0;
    double v = 0.0;
    double vdot = 0.0;
};

/// V = x^T P x and Vdot = x^T P g(x) + g(x)^T P x along a sampled
/// trajectory (states given in the coordinates the certificate lives in).
std::vector<VdotPoint> vdot_along(const std::vector<double>& times,
                                  const std::vector<std::vector<double>>& states,
                                  const ClosedLoopRhs& rhs, const numkit::Mat& p);

} // namespace crane::stability
