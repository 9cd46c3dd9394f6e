#include "crane/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace crane::numkit {

Mat::Mat(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}

Mat::Mat(int rows, int cols, std::initializer_list<double> entries)
    : rows_(rows), cols_(cols), a_(entries) {
    if (a_.size() != static_cast<std::size_t>(rows) * cols)
        throw Error("Mat: initializer size does not match dimensions");
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat Mat::operator*(const Mat& rhs) const {
    if (cols_ != rhs.rows_) throw Error("Mat: incompatible shapes for product");
    Mat r(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < rhs.cols_; ++j) r(i, j) += aik * rhs(k, j);
        }
    return r;
}

Mat Mat::operator+(const Mat& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error("Mat: shape mismatch");
    Mat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += rhs.a_[i];
    return r;
}

Mat Mat::operator-(const Mat& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error("Mat: shape mismatch");
    Mat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= rhs.a_[i];
    return r;
}

Mat Mat::operator*(double s) const {
    Mat r = *this;
    for (double& v : r.a_) v *= s;
    return r;
}

double Mat::norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
        double row = 0.0;
        for (int j = 0; j < cols_; ++j) row += std::fabs((*this)(i, j));
        best = std::max(best, row);
    }
    return best;
}

double Mat::max_abs() const {
    double best = 0.0;
    for (double v : a_) best = std::max(best, std::fabs(v));
    return best;
}

bool Mat::all_finite() const {
    for (double v : a_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> Mat::mul_vec(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_) throw Error("Mat: vector size mismatch");
    std::vector<double> y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
}

Mat solve_linear(const Mat& a, const Mat& b) {
    if (!a.square()) throw Error("solve_linear: matrix must be square");
    if (b.rows() != a.rows()) throw Error("solve_linear: rhs row count mismatch");
    const int n = a.rows();
    const int m = b.cols();
    Mat lu = a;
    Mat x = b;
    const double scale = a.max_abs();

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(lu(i, k)) > std::fabs(lu(piv, k))) piv = i;
        if (std::fabs(lu(piv, k)) < 1e-12 * scale)
            throw SingularMatrix("solve_linear: pivot below 1e-12 of matrix scale");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            for (int j = 0; j < m; ++j) std::swap(x(k, j), x(piv, j));
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (int j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < m; ++j) {
            double s = x(k, j);
            for (int i = k + 1; i < n; ++i) s -= lu(k, i) * x(i, j);
            x(k, j) = s / lu(k, k);
        }
    }
    return x;
}

double determinant(const Mat& a) {
    if (!a.square()) throw Error("determinant: matrix must be square");
    const int n = a.rows();
    Mat u = a;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(u(i, k)) > std::fabs(u(piv, k))) piv = i;
        if (u(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(u(k, j), u(piv, j));
            det = -det;
        }
        det *= u(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = u(i, k) / u(k, k);
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) u(i, j) -= f * u(k, j);
        }
    }
    return det;
}

int rank(const Mat& a, double rel_tol) {
    if (rel_tol <= 0.0) throw Error("rank: rel_tol must be positive");
    const double tol = rel_tol * a.max_abs();
    Mat u = a;
    const int nr = u.rows();
    const int nc = u.cols();
    int r = 0;
    for (int col = 0; col < nc && r < nr; ++col) {
        int piv = r;
        for (int i = r + 1; i < nr; ++i)
            if (std::fabs(u(i, col)) > std::fabs(u(piv, col))) piv = i;
        if (std::fabs(u(piv, col)) <= tol) continue;
        if (piv != r)
            for (int j = 0; j < nc; ++j) std::swap(u(r, j), u(piv, j));
        for (int i = r + 1; i < nr; ++i) {
            const double f = u(i, col) / u(r, col);
            if (f == 0.0) continue;
            for (int j = col; j < nc; ++j) u(i, j) -= f * u(r, j);
        }
        ++r;
    }
    return r;
}

namespace {

// Reduce to upper Hessenberg form by stabilized elementary similarity
// transformations. 1-indexed working array, in place.
void hessenberg(std::vector<double>& a, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int m = 2; m < n; ++m) {
        double x = 0.0;
        int piv = m;
        for (int j = m; j <= n; ++j) {
            if (std::fabs(at(j, m - 1)) > std::fabs(x)) {
                x = at(j, m - 1);
                piv = j;
            }
        }
        if (piv != m) {
            for (int j = m - 1; j <= n; ++j) std::swap(at(piv, j), at(m, j));
            for (int j = 1; j <= n; ++j) std::swap(at(j, piv), at(j, m));
        }
        if (x != 0.0) {
            for (int i = m + 1; i <= n; ++i) {
                double y = at(i, m - 1);
                if (y == 0.0) continue;
                y /= x;
                at(i, m - 1) = 0.0;
                for (int j = m; j <= n; ++j) at(i, j) -= y * at(m, j);
                for (int j = 1; j <= n; ++j) at(j, m) += y * at(j, i);
            }
        }
    }
    // Clear anything left below the subdiagonal.
    for (int i = 3; i <= n; ++i)
        for (int j = 1; j <= i - 2; ++j) at(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
// Exceptional shifts every 10 stalled iterations, global cap per the
// module contract (500*n sweeps).
std::vector<Complex> hqr(std::vector<double>& a, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * (n + 1) + j]; };
    const double eps = 2.3e-16;
    std::vector<Complex> out;
    out.reserve(n);

    double anorm = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::fabs(at(i, j));
    if (anorm == 0.0) {
        out.assign(n, Complex(0.0, 0.0));
        return out;
    }

    int total_sweeps = 0;
    const int sweep_cap = 500 * n;
    int nn = n;
    double t = 0.0;
    while (nn >= 1) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 2; --l) {
                double s = std::fabs(at(l - 1, l - 1)) + std::fabs(at(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(at(l, l - 1)) <= eps * s) {
                    at(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 1) l = 1;
            double x = at(nn, nn);
            if (l == nn) {
                out.emplace_back(x + t, 0.0);
                --nn;
            } else {
                double y = at(nn - 1, nn - 1);
                double w = at(nn, nn - 1) * at(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0.0 ? z : -z);
                        double e1 = x + z;
                        double e2 = (z != 0.0) ? x - w / z : e1;
                        out.emplace_back(e1, 0.0);
                        out.emplace_back(e2, 0.0);
                    } else {
                        out.emplace_back(x + p, z);
                        out.emplace_back(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if (++total_sweeps > sweep_cap)
                        throw NoConvergence("eig_general: QR sweep cap exceeded");
                    if (its > 0 && its % 10 == 0) {
                        // Exceptional shift to break stalled cycles.
                        t += x;
                        for (int i = 1; i <= nn; ++i) at(i, i) -= x;
                        double s = std::fabs(at(nn, nn - 1)) + std::fabs(at(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    int m = 0;
                    for (m = nn - 2; m >= l; --m) {
                        z = at(m, m);
                        double rr = x - z;
                        double ss = y - z;
                        p = (rr * ss - w) / at(m + 1, m) + at(m, m + 1);
                        q = at(m + 1, m + 1) - z - rr - ss;
                        r = at(m + 2, m + 1);
                        double sc = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= sc;
                        q /= sc;
                        r /= sc;
                        if (m == l) break;
                        double u = std::fabs(at(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        double v = std::fabs(p) *
                                   (std::fabs(at(m - 1, m - 1)) + std::fabs(z) + std::fabs(at(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        at(i, i - 2) = 0.0;
                        if (i != m + 2) at(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        double xscale = 0.0;
                        if (k != m) {
                            p = at(k, k - 1);
                            q = at(k + 1, k - 1);
                            r = (k != nn - 1) ? at(k + 2, k - 1) : 0.0;
                            xscale = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (xscale != 0.0) {
                                p /= xscale;
                                q /= xscale;
                                r /= xscale;
                            }
                        }
                        double snorm = std::sqrt(p * p + q * q + r * r);
                        double s = (p >= 0.0) ? snorm : -snorm;
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) at(k, k - 1) = -at(k, k - 1);
                            } else {
                                at(k, k - 1) = -s * xscale;
                            }
                            p += s;
                            double xf = p / s;
                            double yf = q / s;
                            double zf = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                double pp = at(k, j) + q * at(k + 1, j);
                                if (k != nn - 1) {
                                    pp += r * at(k + 2, j);
                                    at(k + 2, j) -= pp * zf;
                                }
                                at(k + 1, j) -= pp * yf;
                                at(k, j) -= pp * xf;
                            }
                            int mmin = std::min(nn, k + 3);
                            for (int i = l; i <= mmin; ++i) {
                                double pp = xf * at(i, k) + yf * at(i, k + 1);
                                if (k != nn - 1) {
                                    pp += zf * at(i, k + 2);
                                    at(i, k + 2) -= pp * r;
                                }
                                at(i, k + 1) -= pp * q;
                                at(i, k) -= pp;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return out;
}

} // namespace

Spectrum eig_general(const Mat& a) {
    if (!a.square()) throw Error("eig_general: matrix must be square");
    if (!a.all_finite()) throw Error("eig_general: non-finite entries");
    const int n = a.rows();
    if (n > 10) throw Error("eig_general: sized for n <= 10");
    if (n == 0) return {};
    std::vector<double> w(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(i + 1) * (n + 1) + (j + 1)] = a(i, j);
    hessenberg(w, n);
    Spectrum s;
    s.values = hqr(w, n);
    return s;
}

std::vector<double> eig_symmetric(const Mat& a) {
    if (!a.square()) throw Error("eig_symmetric: matrix must be square");
    const int n = a.rows();
    const double asym = (a - a.transpose()).norm_inf();
    if (asym > 1e-10 * std::max(a.norm_inf(), 1e-300))
        throw NotSymmetric("eig_symmetric: input is not symmetric");

    Mat w = a;
    double fro = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) fro += w(i, j) * w(i, j);
    fro = std::sqrt(fro);
    const double tol = 1e-12 * std::max(1.0, fro);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * w(i, j) * w(i, j);
        off = std::sqrt(off);
        if (off <= tol) break;
        if (sweep == 99) throw NoConvergence("eig_symmetric: Jacobi sweeps exhausted");

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (apq == 0.0) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                double tt;
                if (std::fabs(theta) > 1e150) {
                    tt = 1.0 / (2.0 * theta);
                } else {
                    tt = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) tt = -tt;
                }
                const double c = 1.0 / std::sqrt(tt * tt + 1.0);
                const double s = tt * c;
                const double tau = s / (1.0 + c);
                const double h = tt * apq;
                w(p, p) -= h;
                w(q, q) += h;
                w(p, q) = 0.0;
                w(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double g = w(i, p);
                    const double f = w(i, q);
                    w(i, p) = g - s * (f + g * tau);
                    w(i, q) = f + s * (g - f * tau);
                    w(p, i) = w(i, p);
                    w(q, i) = w(i, q);
                }
            }
        }
    }

    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = w(i, i);
    std::sort(vals.begin(), vals.end());
    return vals;
}

Mat lyapunov_solve(const Mat& a_cl, const Mat& q) {
    if (!a_cl.square() || !q.square() || a_cl.rows() != q.rows())
        throw Error("lyapunov_solve: shape mismatch");
    const int n = a_cl.rows();
    const int nn = n * n;

    // Unknowns P(k,l) indexed k*n+l; equation (i,j) of P*A + A^T*P = -Q.
    Mat sys(nn, nn);
    Mat rhs(nn, 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int row = i * n + j;
            for (int k = 0; k < n; ++k) {
                sys(row, i * n + k) += a_cl(k, j); // P(i,k)*A(k,j)
                sys(row, k * n + j) += a_cl(k, i); // A(k,i)*P(k,j)
            }
            rhs(row, 0) = -q(i, j);
        }
    }
    Mat pv = solve_linear(sys, rhs);
    Mat p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = pv(i * n + j, 0);
    // The exact solution is symmetric for symmetric q; remove solver noise.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = avg;
            p(j, i) = avg;
        }
    return p;
}

} // namespace crane::numkit
