#include "crane/model.hpp"

#include <cmath>

namespace crane::model {

namespace {

bool finite6(const std::array<double, 6>& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

bool finite4(const std::array<double, 4>& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

void CraneParams::validate() const {
    if (!(M > 0 && m > 0 && I > 0 && g > 0 && l > 0))
        throw Error("CraneParams: M, m, I, g, l must all be positive");
}

std::array<double, 6> deriv6(const State6& s, const ControlU& u, const CraneParams& p) {
    if (!finite6(s.to_array()) || !std::isfinite(u.u1) || !std::isfinite(u.u2) || !std::isfinite(u.u3))
        throw NonFiniteState("deriv6: non-finite input");

    const double M = p.M, m = p.m, I = p.I, g = p.g;
    const double x2 = s.l, x5 = s.ldot, x6 = s.thetadot;
    const double sn = std::sin(s.theta);
    const double cs = std::cos(s.theta);
    const double s2 = std::sin(2.0 * s.theta);
    const double x2sq = x2 * x2;

    // Common denominator; bounded below by I*M for positive parameters.
    const double den = M * m * x2sq + I * m * cs * cs + I * M;

    const double g4 =
        -(cs * (I * m * u.u3 * x2 + 2.0 * I * m * x5 * x6) +
          sn * (m * m * u.u2 * x2sq + I * m * u.u2 - g * m * m * x2sq * cs) -
          I * u.u1 * (M + m) - m * (M + m) * u.u1 * x2sq) /
        den;

    const double g5 =
        (I * M * u.u2 + m * m * u.u2 * x2sq + I * m * u.u2 + I * M * x2 * x6 * x6 -
         g * m * m * x2sq * cs - I * M * u.u1 * sn - m * m * u.u1 * x2sq * sn +
         M * m * u.u2 * x2sq - I * m * u.u1 * sn + g * m * m * x2sq * cs * cs * cs -
         m * m * u.u2 * x2sq * cs * cs + M * m * x2sq * x2 * x6 * x6 +
         0.5 * I * m * u.u3 * x2 * s2 + I * m * x5 * x6 * s2 - M * m * u.u1 * x2sq * sn +
         I * m * x2 * x6 * x6 * cs * cs) /
        den;

    const double g6 =
        (I * M * u.u3 - x2 * (2.0 * M * m * x5 * x6 + m * (M + m) * u.u1 * cs) +
         x2 * sn * (m * cs * (m * u.u2 - g * m * cs) - M * g * m) + I * m * u.u3 * cs * cs) /
        den;

    const std::array<double, 6> out = {s.zdot, s.ldot, s.thetadot, g4, g5, g6};
    if (!finite6(out)) throw NonFiniteState("deriv6: non-finite output");
    return out;
}

std::array<double, 6> deriv_mass_matrix(const State6& s, const Forces& f, const CraneParams& p) {
    if (!finite6(s.to_array()) || !std::isfinite(f.Fz) || !std::isfinite(f.Fl) || !std::isfinite(f.Ftheta))
        throw NonFiniteState("deriv_mass_matrix: non-finite input");

    const double M = p.M, m = p.m, I = p.I, g = p.g;
    const double x2 = s.l, x5 = s.ldot, x6 = s.thetadot;
    const double sn = std::sin(s.theta);
    const double cs = std::cos(s.theta);

    numkit::Mat mass(3, 3,
                     {M + m, m * sn, m * x2 * cs,
                      m * sn, m, 0.0,
                      m * x2 * cs, 0.0, m * x2 * x2 + I});
    numkit::Mat rhs(3, 1,
                    {f.Fz + m * x2 * x6 * x6 * sn - 2.0 * m * x5 * x6 * cs,
                     f.Fl + m * x2 * x6 * x6 + g * m * cs,
                     f.Ftheta - 2.0 * m * x2 * x5 * x6 - g * m * x2 * sn});

    numkit::Mat acc = numkit::solve_linear(mass, rhs);

    const std::array<double, 6> out = {s.zdot, s.ldot, s.thetadot, acc(0, 0), acc(1, 0), acc(2, 0)};
    if (!finite6(out)) throw NonFiniteState("deriv_mass_matrix: non-finite output");
    return out;
}

std::array<double, 4> deriv4(const State4& s, double u1, const CraneParams& p) {
    if (!finite4(s.to_array()) || !std::isfinite(u1))
        throw NonFiniteState("deriv4: non-finite input");

    const double M = p.M, m = p.m, I = p.I, g = p.g, l = p.l;
    const double x6 = s.thetadot;
    const double sn = std::sin(s.theta);
    const double cs = std::cos(s.theta);
    const double s2 = std::sin(2.0 * s.theta);
    const double lsq = l * l;

    const double den = lsq * m * m * sn * sn + M * lsq * m + I * m + I * M;

    const double g4 = (I * u1 + sn * (lsq * l * m * m * x6 * x6 + I * l * m * x6 * x6) +
                       lsq * m * u1 + 0.5 * g * lsq * m * m * s2) /
                      den;

    const double g6 = -(cs * (lsq * m * m * x6 * x6 * sn + l * m * u1) +
                        l * m * (M * g + g * m) * sn) /
                      den;

    const std::array<double, 4> out = {s.zdot, s.thetadot, g4, g6};
    if (!finite4(out)) throw NonFiniteState("deriv4: non-finite output");
    return out;
}

std::array<double, 4> deriv4_forces(const State4& s, double fz, const CraneParams& p) {
    if (!finite4(s.to_array()) || !std::isfinite(fz))
        throw NonFiniteState("deriv4_forces: non-finite input");

    const double M = p.M, m = p.m, I = p.I, g = p.g, l = p.l;
    const double x6 = s.thetadot;
    const double sn = std::sin(s.theta);
    const double cs = std::cos(s.theta);

    numkit::Mat mass(2, 2,
                     {M + m, l * m * cs,
                      l * m * cs, m * l * l + I});
    numkit::Mat rhs(2, 1,
                    {fz + l * m * x6 * x6 * sn,
                     -g * l * m * sn});
    numkit::Mat acc = numkit::solve_linear(mass, rhs);

    const std::array<double, 4> out = {s.zdot, s.thetadot, acc(0, 0), acc(1, 0)};
    if (!finite4(out)) throw NonFiniteState("deriv4_forces: non-finite output");
    return out;
}

Forces forces_from_u(const State6& s, const ControlU& u, const CraneParams& p) {
    Forces f;
    f.Fz = (p.M + p.m) * u.u1;
    f.Fl = p.m * u.u2 - p.g * p.m * std::cos(s.theta);
    f.Ftheta = p.I * u.u3;
    return f;
}

State6 transform_phi(const State6& x, const State6& target) {
    return {target.z + x.z, target.l - x.l, x.theta, x.zdot, -x.ldot, x.thetadot};
}

State6 transform_phi_inverse(const State6& xt, const State6& target) {
    return {xt.z - target.z, target.l - xt.l, xt.theta, xt.zdot, -xt.ldot, xt.thetadot};
}

std::array<double, 6> phi_sign() {
    return {1.0, -1.0, 1.0, 1.0, -1.0, 1.0};
}

void linearize6(const CraneParams& p, numkit::Mat& a, numkit::Mat& b) {
    p.validate();
    a = numkit::Mat(6, 6);
    a(0, 3) = a(1, 4) = a(2, 5) = 1.0;
    b = numkit::Mat(6, 3);
    b(3, 0) = b(4, 1) = b(5, 2) = 1.0;
}

void linearize4(const CraneParams& p, numkit::Mat& a, numkit::Mat& b) {
    p.validate();
    const double M = p.M, m = p.m, I = p.I, g = p.g, l = p.l;
    const double den = M * m * l * l + I * (M + m);
    a = numkit::Mat(4, 4);
    a(0, 2) = 1.0;
    a(1, 3) = 1.0;
    a(2, 1) = g * l * l * m * m / den;
    a(3, 1) = -g * l * m * (M + m) / den;
    b = numkit::Mat(4, 1);
    b(2, 0) = (m * l * l + I) / den;
    b(3, 0) = -l * m / den;
}

Energy energy(const State6& s, const CraneParams& p) {
    const double M = p.M, m = p.m, I = p.I, g = p.g;
    Energy e;
    e.kinetic = 0.5 * (M + m) * s.zdot * s.zdot + 0.5 * m * s.ldot * s.ldot +
                0.5 * m * (s.l * s.thetadot) * (s.l * s.thetadot) +
                m * s.zdot * (s.ldot * std::sin(s.theta) + s.l * s.thetadot * std::cos(s.theta)) +
                0.5 * I * s.thetadot * s.thetadot;
    e.potential = -g * s.l * m * std::cos(s.theta);
    return e;
}

Energy energy(const State4& s, const CraneParams& p) {
    State6 full{s.z, p.l, s.theta, s.zdot, 0.0, s.thetadot};
    return energy(full, p);
}

std::array<double, 3> lagrange_residual(const State6& s, const std::array<double, 6>& sdot,
                                        const Forces& f, const CraneParams& p) {
    const double M = p.M, m = p.m, I = p.I, g = p.g;
    const double x2 = s.l, x5 = s.ldot, x6 = s.thetadot;
    const double sn = std::sin(s.theta);
    const double cs = std::cos(s.theta);
    const double zdd = sdot[3], ldd = sdot[4], tdd = sdot[5];

    const double r1 = (M + m) * zdd + m * ldd * sn + 2.0 * m * x5 * x6 * cs +
                      x2 * m * tdd * cs - x2 * m * x6 * x6 * sn - f.Fz;
    const double r2 = m * zdd * sn + m * ldd - x2 * m * x6 * x6 - g * m * cs - f.Fl;
    const double r3 = x2 * m * zdd * cs + (m * x2 * x2 + I) * tdd + 2.0 * x2 * m * x5 * x6 +
                      g * x2 * m * sn - f.Ftheta;
    return {r1, r2, r3};
}

} // namespace crane::model
