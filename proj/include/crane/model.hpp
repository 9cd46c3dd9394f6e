#pragma once

#include <array>

#include "crane/errors.hpp"
#include "crane/numkit.hpp"

namespace crane::model {

// Physical constants of the 2-D overhead crane. Masses are in 10^3 kg
// and the payload inertia in 10^3 kg m^2, so forces come out in kN and
// torques in kN m.
struct CraneParams {
    double M = 0.2;  // trolley mass (10^3 kg)
    double m = 10.0; // payload mass (10^3 kg)
    double I = 4.0;  // payload inertia (10^3 kg m^2)
    double g = 9.81; // gravity (m/s^2)
    double l = 3.0;  // rope length (m), fixed-rope model only

    void validate() const;
};

// State of the varying-rope model:
// (z, l, theta, zdot, ldot, thetadot)
// z: trolley position (m), l: rope length (m), theta: sway angle from
// vertical (rad).
struct State6 {
    double z = 0, l = 0, theta = 0, zdot = 0, ldot = 0, thetadot = 0;

    static State6 from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    std::array<double, 6> to_array() const { return {z, l, theta, zdot, ldot, thetadot}; }
};

// State of the fixed-rope model: (z, theta, zdot, thetadot).
struct State4 {
    double z = 0, theta = 0, zdot = 0, thetadot = 0;

    static State4 from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
    std::array<double, 4> to_array() const { return {z, theta, zdot, thetadot}; }
};

// Control variables of the varying-rope model. u1, u2 in m/s^2, u3 in
// rad/s^2. The fixed-rope model uses u1 alone, and there u1 IS the
// trolley force F_z (kN) with no (M+m) scaling.
struct ControlU {
    double u1 = 0, u2 = 0, u3 = 0;
};

// Control forces: trolley force F_z (kN), rope force F_l (kN), sway
// torque F_theta (kN m).
struct Forces {
    double Fz = 0, Fl = 0, Ftheta = 0;
};

/// Right-hand side of the varying-rope model in control variables
/// (closed-form expressions; the fast path).
std::array<double, 6> deriv6(const State6& s, const ControlU& u, const CraneParams& p);

/// Same derivatives obtained by solving the symmetric 3x3 mass-matrix
/// system for the accelerations. Serves as the independent route
/// against deriv6 and as the force-driven plant for open-loop replay.
std::array<double, 6> deriv_mass_matrix(const State6& s, const Forces& f, const CraneParams& p);

/// Right-hand side of the fixed-rope model; u1 is the trolley force.
std::array<double, 4> deriv4(const State4& s, double u1, const CraneParams& p);

/// Fixed-rope accelerations from the 2x2 mass-matrix system, driven by
/// the trolley force alone (sway torque is absent in this model).
std::array<double, 4> deriv4_forces(const State4& s, double fz, const CraneParams& p);

/// Map control variables to physical forces:
///   F_z = (M+m) u1,  F_l = m u2 - g m cos(theta),  F_theta = I u3.
/// The -g m cos(theta) term compensates the payload weight. Applying
/// the same map to the transformed controls yields the transformed
/// forces, related to the originals by Fl~ + Fl = -2 g m cos(theta).
Forces forces_from_u(const State6& s, const ControlU& u, const CraneParams& p);

/// Translation to a target equilibrium (velocities and sway zero):
///   x~1 = target.z + x1, x~2 = target.l - x2, x~3 = x3,
///   x~4 = x4, x~5 = -x5, x~6 = x6.
State6 transform_phi(const State6& x, const State6& target);
/// Inverse of transform_phi; maps the target itself to the origin.
State6 transform_phi_inverse(const State6& xt, const State6& target);

/// Diagonal sign matrix (1,-1,1,1,-1,1): the Jacobian of both the
/// translation and its inverse.
std::array<double, 6> phi_sign() ;

/// Jacobians of the varying-rope model at the origin: A is the 6x6
/// matrix with ones at (1,4),(2,5),(3,6); B selects the accelerations.
void linearize6(const CraneParams& p, numkit::Mat& a, numkit::Mat& b);

/// Jacobians of the fixed-rope model at the origin, entries in closed
/// form in (M, m, I, g, l).
void linearize4(const CraneParams& p, numkit::Mat& a, numkit::Mat& b);

/// Kinetic and potential energy of the crane.
struct Energy {
    double kinetic = 0, potential = 0;
};
Energy energy(const State6& s, const CraneParams& p);
Energy energy(const State4& s, const CraneParams& p);

/// Residuals (left minus right side) of the three Euler-Lagrange
/// equations after substituting the claimed accelerations sdot and
/// forces f at state s. Zero when (s, sdot, f) is dynamically
/// consistent.
std::array<double, 3> lagrange_residual(const State6& s, const std::array<double, 6>& sdot,
                                        const Forces& f, const CraneParams& p);

} // namespace crane::model
