#pragma once

#include <array>
#include <vector>

#include "crane/errors.hpp"
#include "crane/numkit.hpp"

namespace crane::synthesis {

/// Desired closed-loop eigenvalues: real and strictly negative (real
/// values keep the convergence to the equilibrium monotonous).
struct PoleSet {
    std::vector<double> poles;

    void validate(int expected_count = 0) const;
};

/// One pole pair per input channel (z, l, theta) of the varying-rope
/// model; the pairs must partition the six-element pole set.
struct ChannelAssignment {
    std::array<std::array<double, 2>, 3> pairs{};

    /// The pairing that reproduces the published varying-rope gain for
    /// the pole set {-0.1, ..., -0.35}.
    static ChannelAssignment reference();
    /// Pairs taken in listed order: (p1,p2)->z, (p3,p4)->l, (p5,p6)->theta.
    static ChannelAssignment consecutive(const PoleSet& poles);

    PoleSet pole_set() const;
    /// True when the pairs are a permutation of the given pole set.
    bool covers(const PoleSet& poles, double tol = 1e-12) const;
};

/// State feedback gain u = -K x.
struct Gain {
    numkit::Mat k;
};

struct ControllabilityReport {
    bool controllable = false;
    int rank = 0;
    int dimension = 0;
};

/// Kalman controllability matrix (B AB A^2B ... A^(n-1)B).
numkit::Mat controllability_matrix(const numkit::Mat& a, const numkit::Mat& b);

ControllabilityReport is_controllable(const numkit::Mat& a, const numkit::Mat& b);

/// Closed-form placement for the decoupled varying-rope structure (A
/// the 6x6 shift with A^2 = 0, B the acceleration selector): each
/// channel is a double integrator, so the pair (la, lb) yields position
/// gain la*lb and velocity gain -(la+lb). Throws StructureMismatch when
/// (a, b) deviate from that structure beyond 1e-12.
Gain place_decoupled(const numkit::Mat& a, const numkit::Mat& b, const ChannelAssignment& assignment);

/// Single-input pole placement, K = (0 ... 0 1) C^-1 chi(a) with chi the
/// desired characteristic polynomial evaluated at a.
Gain ackermann(const numkit::Mat& a, const numkit::Mat& b, const PoleSet& poles);

/// Gain for the translated equilibrium: sign of the second row and of
/// the second and fifth column flipped. An involution.
Gain gain_transform(const Gain& k);

struct PlacementCheck {
    bool pass = false;
    double max_mismatch = 0.0;
    std::vector<double> char_poly_residuals; // |det(pole_i I - A_cl)|
    std::vector<numkit::Complex> closed_loop_eigenvalues;
};

/// Compare the closed-loop spectrum of a - b*k against the requested
/// poles (nearest-match pairing); pass iff the worst mismatch is within
/// tol.
PlacementCheck verify_placement(const numkit::Mat& a, const numkit::Mat& b, const Gain& k,
                                const PoleSet& poles, double tol = 1e-6);

} // namespace crane::synthesis
