#include "crane/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crane::synthesis {

using numkit::Mat;

void PoleSet::validate(int expected_count) const {
    if (expected_count > 0 && static_cast<int>(poles.size()) != expected_count)
        throw Error("PoleSet: expected " + std::to_string(expected_count) + " poles, got " +
                    std::to_string(poles.size()));
    for (double p : poles)
        if (!(p < 0.0))
            throw Error("PoleSet: pole " + std::to_string(p) + " is not strictly negative");
}

ChannelAssignment ChannelAssignment::reference() {
    ChannelAssignment a;
    a.pairs = {{{-0.3, -0.35}, {-0.15, -0.2}, {-0.1, -0.25}}};
    return a;
}

ChannelAssignment ChannelAssignment::consecutive(const PoleSet& poles) {
    poles.validate(6);
    ChannelAssignment a;
    for (int c = 0; c < 3; ++c) a.pairs[c] = {poles.poles[2 * c], poles.poles[2 * c + 1]};
    return a;
}

PoleSet ChannelAssignment::pole_set() const {
    PoleSet s;
    for (const auto& pr : pairs) {
        s.poles.push_back(pr[0]);
        s.poles.push_back(pr[1]);
    }
    return s;
}

bool ChannelAssignment::covers(const PoleSet& poles, double tol) const {
    if (poles.poles.size() != 6) return false;
    auto mine = pole_set().poles;
    auto theirs = poles.poles;
    std::sort(mine.begin(), mine.end());
    std::sort(theirs.begin(), theirs.end());
    for (int i = 0; i < 6; ++i)
        if (std::fabs(mine[i] - theirs[i]) > tol) return false;
    return true;
}

Mat controllability_matrix(const Mat& a, const Mat& b) {
    if (!a.square() || a.rows() != b.rows())
        throw Error("controllability_matrix: shape mismatch");
    const int n = a.rows();
    const int m = b.cols();
    Mat c(n, n * m);
    Mat block = b;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) c(i, k * m + j) = block(i, j);
        if (k + 1 < n) block = a * block;
    }
    return c;
}

ControllabilityReport is_controllable(const Mat& a, const Mat& b) {
    ControllabilityReport rep;
    rep.dimension = a.rows();
    rep.rank = numkit::rank(controllability_matrix(a, b));
    rep.controllable = (rep.rank == rep.dimension);
    return rep;
}

Gain place_decoupled(const Mat& a, const Mat& b, const ChannelAssignment& assignment) {
    if (a.rows() != 6 || a.cols() != 6 || b.rows() != 6 || b.cols() != 3)
        throw StructureMismatch("place_decoupled: expected 6x6 A and 6x3 B");
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double want = (j == i + 3) ? 1.0 : 0.0;
            if (std::fabs(a(i, j) - want) > 1e-12)
                throw StructureMismatch("place_decoupled: A is not the triple-integrator shift");
        }
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = (i == j + 3) ? 1.0 : 0.0;
            if (std::fabs(b(i, j) - want) > 1e-12)
                throw StructureMismatch("place_decoupled: B is not the acceleration selector");
        }

    Gain g{Mat(3, 6)};
    for (int c = 0; c < 3; ++c) {
        const double la = assignment.pairs[c][0];
        const double lb = assignment.pairs[c][1];
        g.k(c, c) = la * lb;            // position gain
        g.k(c, c + 3) = -(la + lb);     // velocity gain
    }
    return g;
}

namespace {

// Coefficients of prod (s - p_i), highest degree first, monic.
std::vector<double> poly_from_roots(const std::vector<double>& roots) {
    std::vector<double> c{1.0};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    return c;
}

Mat poly_at_matrix(const std::vector<double>& coeffs, const Mat& a) {
    const int n = a.rows();
    Mat acc = Mat::identity(n) * coeffs[0];
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        acc = acc * a + Mat::identity(n) * coeffs[i];
    return acc;
}

} // namespace

Gain ackermann(const Mat& a, const Mat& b, const PoleSet& poles) {
    if (b.cols() != 1) throw Error("ackermann: single-input systems only");
    const int n = a.rows();
    poles.validate(n);

    const Mat ctrb = controllability_matrix(a, b);
    if (numkit::rank(ctrb) < n)
        throw NotControllable("ackermann: (A, B) pair is not controllable");

    const Mat chi = poly_at_matrix(poly_from_roots(poles.poles), a);
    Mat y = numkit::solve_linear(ctrb, chi); // y = C^-1 chi(A)

    const Mat residual = ctrb * y - chi;
    if (residual.norm_inf() > 1e-6 * std::max(1.0, chi.norm_inf()))
        throw IllConditioned("ackermann: controllability-matrix solve residual too large");

    Gain g{Mat(1, n)};
    for (int j = 0; j < n; ++j) g.k(0, j) = y(n - 1, j);
    return g;
}

Gain gain_transform(const Gain& k) {
    Gain g = k;
    const int rows = g.k.rows();
    const int cols = g.k.cols();
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const bool flip_row = (i == 1);
            const bool flip_col = (j == 1 || j == 4);
            if (flip_row != flip_col) g.k(i, j) = -g.k(i, j);
            if (g.k(i, j) == 0.0) g.k(i, j) = 0.0; // normalize -0
        }
    return g;
}

PlacementCheck verify_placement(const Mat& a, const Mat& b, const Gain& k, const PoleSet& poles,
                                double tol) {
    const Mat a_cl = a - b * k.k;
    PlacementCheck out;
    out.closed_loop_eigenvalues = numkit::eig_general(a_cl).values;

    const int n = a_cl.rows();
    std::vector<bool> used(n, false);
    double worst = 0.0;
    for (double p : poles.poles) {
        int best = -1;
        double best_d = 0.0;
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double d = std::abs(out.closed_loop_eigenvalues[i] - numkit::Complex(p, 0.0));
            if (best < 0 || d < best_d) {
                best = i;
                best_d = d;
            }
        }
        used[best] = true;
        worst = std::max(worst, best_d);

        // Characteristic-polynomial residual at the requested pole.
        Mat shifted = Mat::identity(n) * p - a_cl;
        out.char_poly_residuals.push_back(std::fabs(numkit::determinant(shifted)));
    }
    out.max_mismatch = worst;
    out.pass = worst <= tol;
    return out;
}

} // namespace crane::synthesis
