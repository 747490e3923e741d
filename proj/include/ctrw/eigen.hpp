#ifndef CTRW_EIGEN_HPP
#define CTRW_EIGEN_HPP

// Dense real nonsymmetric eigensolver: diagonal balancing, Householder
// reduction to upper Hessenberg form, and Francis double-shift QR iteration
// with optional accumulation of transformations and eigenvector
// back-substitution. The algorithm follows the classic EISPACK
// balanc/orthes/hqr2 lineage.
//
// Eigenvalues of a real matrix come out in exact conjugate pairs (the 2x2
// block exit writes lambda and conj(lambda) from the same square root).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "ctrw/errors.hpp"
#include "ctrw/matrix.hpp"

namespace ctrw {

struct EigenOptions {
    bool compute_vectors = true;
    bool balance = true;
    int max_iterations_per_eigenvalue = 64;
};

struct EigenSystem {
    std::vector<std::complex<double>> values;  // sorted by descending real part
    // Right eigenvectors, unit 2-norm, phase fixed so the largest component
    // is real and positive; values[k] pairs with vectors[k].
    std::vector<std::vector<std::complex<double>>> vectors;
    // max_k ||A v_k - lambda_k v_k||_2 relative to ||A||_F (vectors mode only).
    double max_backward_error = 0.0;
};

namespace detail {

// Robust complex division (Smith's algorithm).
inline void cdiv(double xr, double xi, double yr, double yi, double& zr, double& zi) {
    if (std::abs(yr) > std::abs(yi)) {
        const double r = yi / yr;
        const double d = yr + r * yi;
        zr = (xr + r * xi) / d;
        zi = (xi - r * xr) / d;
    } else {
        const double r = yr / yi;
        const double d = yi + r * yr;
        zr = (r * xr + xi) / d;
        zi = (r * xi - xr) / d;
    }
}

// Diagonal similarity scaling A -> D^{-1} A D equalizing row/column norms.
inline void balance_in_place(Matrix& a, std::vector<double>& scale) {
    const std::size_t n = a.rows();
    scale.assign(n, 1.0);
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    for (int pass = 0; pass < 200; ++pass) {
        bool done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c >= g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                scale[i] *= f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
        if (done) break;
    }
}

// Householder reduction to upper Hessenberg form; optionally accumulates the
// orthogonal transformation into v. Householder vectors are stashed below the
// subdiagonal of h exactly as EISPACK orthes leaves them.
inline void hessenberg_in_place(Matrix& h, Matrix& v, bool want_vectors) {
    const std::size_t nn = h.rows();
    if (nn == 0) return;
    const std::size_t high = nn - 1;
    std::vector<double> ort(nn, 0.0);

    for (std::size_t m = 1; m + 1 <= high; ++m) {
        double scale = 0.0;
        for (std::size_t i = m; i <= high; ++i) scale += std::abs(h(i, m - 1));
        if (scale == 0.0) continue;

        double hh = 0.0;
        for (std::size_t i = high + 1; i-- > m;) {
            ort[i] = h(i, m - 1) / scale;
            hh += ort[i] * ort[i];
        }
        double g = std::sqrt(hh);
        if (ort[m] > 0) g = -g;
        hh -= ort[m] * g;
        ort[m] -= g;

        for (std::size_t j = m; j < nn; ++j) {
            double f = 0.0;
            for (std::size_t i = high + 1; i-- > m;) f += ort[i] * h(i, j);
            f /= hh;
            for (std::size_t i = m; i <= high; ++i) h(i, j) -= f * ort[i];
        }
        for (std::size_t i = 0; i <= high; ++i) {
            double f = 0.0;
            for (std::size_t j = high + 1; j-- > m;) f += ort[j] * h(i, j);
            f /= hh;
            for (std::size_t j = m; j <= high; ++j) h(i, j) -= f * ort[j];
        }
        ort[m] *= scale;
        h(m, m - 1) = scale * g;
    }

    if (want_vectors) {
        v = Matrix::identity(nn);
        for (std::size_t m = high; m-- > 1;) {
            if (h(m, m - 1) == 0.0) continue;
            for (std::size_t i = m + 1; i <= high; ++i) ort[i] = h(i, m - 1);
            for (std::size_t j = m; j <= high; ++j) {
                double g = 0.0;
                for (std::size_t i = m; i <= high; ++i) g += ort[i] * v(i, j);
                g = (g / ort[m]) / h(m, m - 1);  // double division avoids underflow
                for (std::size_t i = m; i <= high; ++i) v(i, j) += g * ort[i];
            }
        }
    }
}

// Francis double-shift QR on an upper Hessenberg matrix. Eigenvalues land in
// (d, e) as real and imaginary parts. With want_vectors the Schur vectors are
// accumulated into v and the eigenvectors of the (balanced) matrix are
// recovered by back-substitution, replacing the columns of v.
inline void hqr2_in_place(Matrix& h, Matrix& v, std::vector<double>& d, std::vector<double>& e,
                          bool want_vectors, int iter_cap) {
    const int nn = static_cast<int>(h.rows());
    d.assign(static_cast<std::size_t>(nn), 0.0);
    e.assign(static_cast<std::size_t>(nn), 0.0);
    if (nn == 0) return;

    int n = nn - 1;
    const int low = 0;
    const int high = nn - 1;
    const double mach_eps = std::pow(2.0, -52.0);
    double exshift = 0.0;
    double p = 0, q = 0, r = 0, s = 0, z = 0, t, w, x, y;

    double norm = 0.0;
    for (int i = 0; i < nn; ++i)
        for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h(i, j));

    int iter = 0;
    while (n >= low) {
        // Look for a single small subdiagonal element.
        int l = n;
        while (l > low) {
            s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (s == 0.0) s = norm;
            if (std::abs(h(l, l - 1)) < mach_eps * s) break;
            --l;
        }

        if (l == n) {
            // One root found.
            h(n, n) += exshift;
            d[n] = h(n, n);
            e[n] = 0.0;
            --n;
            iter = 0;
        } else if (l == n - 1) {
            // Two roots found.
            w = h(n, n - 1) * h(n - 1, n);
            p = (h(n - 1, n - 1) - h(n, n)) / 2.0;
            q = p * p + w;
            z = std::sqrt(std::abs(q));
            h(n, n) += exshift;
            h(n - 1, n - 1) += exshift;
            x = h(n, n);
            if (q >= 0) {
                // Real pair.
                z = (p >= 0) ? p + z : p - z;
                d[n - 1] = x + z;
                d[n] = d[n - 1];
                if (z != 0.0) d[n] = x - w / z;
                e[n - 1] = 0.0;
                e[n] = 0.0;
                x = h(n, n - 1);
                s = std::abs(x) + std::abs(z);
                p = x / s;
                q = z / s;
                r = std::sqrt(p * p + q * q);
                p /= r;
                q /= r;
                for (int j = n - 1; j < nn; ++j) {
                    z = h(n - 1, j);
                    h(n - 1, j) = q * z + p * h(n, j);
                    h(n, j) = q * h(n, j) - p * z;
                }
                for (int i = 0; i <= n; ++i) {
                    z = h(i, n - 1);
                    h(i, n - 1) = q * z + p * h(i, n);
                    h(i, n) = q * h(i, n) - p * z;
                }
                if (want_vectors) {
                    for (int i = low; i <= high; ++i) {
                        z = v(i, n - 1);
                        v(i, n - 1) = q * z + p * v(i, n);
                        v(i, n) = q * v(i, n) - p * z;
                    }
                }
            } else {
                // Complex conjugate pair.
                d[n - 1] = x + p;
                d[n] = x + p;
                e[n - 1] = z;
                e[n] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            x = h(n, n);
            y = 0.0;
            w = 0.0;
            if (l < n) {
                y = h(n - 1, n - 1);
                w = h(n, n - 1) * h(n - 1, n);
            }

            if (iter == 10) {  // exceptional shift (Wilkinson ad hoc)
                exshift += x;
                for (int i = low; i <= n; ++i) h(i, i) -= x;
                s = std::abs(h(n, n - 1)) + std::abs(h(n - 1, n - 2));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            if (iter == 30) {  // second exceptional shift
                s = (y - x) / 2.0;
                s = s * s + w;
                if (s > 0) {
                    s = std::sqrt(s);
                    if (y < x) s = -s;
                    s = x - w / ((y - x) / 2.0 + s);
                    for (int i = low; i <= n; ++i) h(i, i) -= s;
                    exshift += s;
                    x = y = w = 0.964;
                }
            }

            ++iter;
            if (iter > iter_cap)
                throw EigenSolverError("QR iteration failed to converge at eigenvalue index " +
                                       std::to_string(n));

            // Look for two consecutive small subdiagonal elements.
            int m = n - 2;
            while (m >= l) {
                z = h(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                q = h(m + 1, m + 1) - z - r - s;
                r = h(m + 2, m + 1);
                s = std::abs(p) + std::abs(q) + std::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if (m == l) break;
                if (std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r)) <
                    mach_eps * (std::abs(p) * (std::abs(h(m - 1, m - 1)) + std::abs(z) +
                                               std::abs(h(m + 1, m + 1)))))
                    break;
                --m;
            }
            for (int i = m + 2; i <= n; ++i) {
                h(i, i - 2) = 0.0;
                if (i > m + 2) h(i, i - 3) = 0.0;
            }

            // Double QR sweep on rows l..n, columns m..n.
            for (int k = m; k <= n - 1; ++k) {
                const bool notlast = (k != n - 1);
                if (k != m) {
                    p = h(k, k - 1);
                    q = h(k + 1, k - 1);
                    r = notlast ? h(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x == 0.0) continue;
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = std::sqrt(p * p + q * q + r * r);
                if (p < 0) s = -s;
                if (s == 0.0) continue;
                if (k != m)
                    h(k, k - 1) = -s * x;
                else if (l != m)
                    h(k, k - 1) = -h(k, k - 1);
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for (int j = k; j < nn; ++j) {
                    p = h(k, j) + q * h(k + 1, j);
                    if (notlast) {
                        p += r * h(k + 2, j);
                        h(k + 2, j) -= p * z;
                    }
                    h(k, j) -= p * x;
                    h(k + 1, j) -= p * y;
                }
                for (int i = 0; i <= std::min(n, k + 3); ++i) {
                    p = x * h(i, k) + y * h(i, k + 1);
                    if (notlast) {
                        p += z * h(i, k + 2);
                        h(i, k + 2) -= p * r;
                    }
                    h(i, k) -= p;
                    h(i, k + 1) -= p * q;
                }
                if (want_vectors) {
                    for (int i = low; i <= high; ++i) {
                        p = x * v(i, k) + y * v(i, k + 1);
                        if (notlast) {
                            p += z * v(i, k + 2);
                            v(i, k + 2) -= p * r;
                        }
                        v(i, k) -= p;
                        v(i, k + 1) -= p * q;
                    }
                }
            }
        }
    }

    if (!want_vectors || norm == 0.0) return;

    // Back-substitute in the quasi-triangular form to get eigenvectors.
    for (n = nn - 1; n >= 0; --n) {
        p = d[n];
        q = e[n];
        if (q == 0.0) {
            // Real eigenvector.
            int l2 = n;
            h(n, n) = 1.0;
            for (int i = n - 1; i >= 0; --i) {
                w = h(i, i) - p;
                r = 0.0;
                for (int j = l2; j <= n; ++j) r += h(i, j) * h(j, n);
                if (e[i] < 0.0) {
                    z = w;
                    s = r;
                } else {
                    l2 = i;
                    if (e[i] == 0.0) {
                        h(i, n) = (w != 0.0) ? -r / w : -r / (mach_eps * norm);
                    } else {
                        // Solve the real 2x2 block equations.
                        x = h(i, i + 1);
                        y = h(i + 1, i);
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h(i, n) = t;
                        h(i + 1, n) =
                            (std::abs(x) > std::abs(z)) ? (-r - w * t) / x : (-s - y * t) / z;
                    }
                    t = std::abs(h(i, n));
                    if ((mach_eps * t) * t > 1)
                        for (int j = i; j <= n; ++j) h(j, n) /= t;
                }
            }
        } else if (q < 0.0) {
            // Complex eigenvector; real part in column n-1, imag part in n.
            int l2 = n - 1;
            if (std::abs(h(n, n - 1)) > std::abs(h(n - 1, n))) {
                h(n - 1, n - 1) = q / h(n, n - 1);
                h(n - 1, n) = -(h(n, n) - p) / h(n, n - 1);
            } else {
                double zr, zi;
                cdiv(0.0, -h(n - 1, n), h(n - 1, n - 1) - p, q, zr, zi);
                h(n - 1, n - 1) = zr;
                h(n - 1, n) = zi;
            }
            h(n, n - 1) = 0.0;
            h(n, n) = 1.0;
            for (int i = n - 2; i >= 0; --i) {
                double ra = 0.0, sa = 0.0;
                for (int j = l2; j <= n; ++j) {
                    ra += h(i, j) * h(j, n - 1);
                    sa += h(i, j) * h(j, n);
                }
                w = h(i, i) - p;
                if (e[i] < 0.0) {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l2 = i;
                    if (e[i] == 0.0) {
                        double zr, zi;
                        cdiv(-ra, -sa, w, q, zr, zi);
                        h(i, n - 1) = zr;
                        h(i, n) = zi;
                    } else {
                        x = h(i, i + 1);
                        y = h(i + 1, i);
                        double vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        double vi = (d[i] - p) * 2.0 * q;
                        if (vr == 0.0 && vi == 0.0)
                            vr = mach_eps * norm *
                                 (std::abs(w) + std::abs(q) + std::abs(x) + std::abs(y) +
                                  std::abs(z));
                        double zr, zi;
                        cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi, zr, zi);
                        h(i, n - 1) = zr;
                        h(i, n) = zi;
                        if (std::abs(x) > std::abs(z) + std::abs(q)) {
                            h(i + 1, n - 1) = (-ra - w * h(i, n - 1) + q * h(i, n)) / x;
                            h(i + 1, n) = (-sa - w * h(i, n) - q * h(i, n - 1)) / x;
                        } else {
                            cdiv(-r - y * h(i, n - 1), -s - y * h(i, n), z, q, zr, zi);
                            h(i + 1, n - 1) = zr;
                            h(i + 1, n) = zi;
                        }
                    }
                    t = std::max(std::abs(h(i, n - 1)), std::abs(h(i, n)));
                    if ((mach_eps * t) * t > 1)
                        for (int j = i; j <= n; ++j) {
                            h(j, n - 1) /= t;
                            h(j, n) /= t;
                        }
                }
            }
        }
    }

    // Back-transform: columns of v become eigenvectors of the balanced matrix.
    for (int j = nn - 1; j >= low; --j) {
        for (int i = low; i <= high; ++i) {
            double acc = 0.0;
            for (int k2 = low; k2 <= std::min(j, high); ++k2) acc += v(i, k2) * h(k2, j);
            v(i, j) = acc;
        }
    }
}

}  // namespace detail

// Full spectrum (+ optional right eigenvectors) of a square real matrix.
inline EigenSystem eigen_system(const Matrix& a, EigenOptions opt = {}) {
    if (a.rows() != a.cols()) throw InvalidParameterError("eigen_system: matrix must be square");
    const std::size_t n = a.rows();
    EigenSystem sys;
    if (n == 0) return sys;

    Matrix h = a;
    std::vector<double> scale(n, 1.0);
    if (opt.balance) detail::balance_in_place(h, scale);
    Matrix v;
    detail::hessenberg_in_place(h, v, opt.compute_vectors);
    std::vector<double> d, e;
    detail::hqr2_in_place(h, v, d, e, opt.compute_vectors, opt.max_iterations_per_eigenvalue);

    sys.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) sys.values[k] = {d[k], e[k]};

    if (opt.compute_vectors) {
        sys.vectors.assign(n, {});
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<std::complex<double>> vec(n);
            if (e[k] == 0.0) {
                for (std::size_t i = 0; i < n; ++i) vec[i] = {scale[i] * v(i, k), 0.0};
            } else if (e[k] > 0.0) {
                for (std::size_t i = 0; i < n; ++i)
                    vec[i] = {scale[i] * v(i, k), scale[i] * v(i, k + 1)};
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    vec[i] = {scale[i] * v(i, k - 1), -scale[i] * v(i, k)};
            }
            // Unit 2-norm, largest component real positive.
            double nrm = 0.0;
            std::size_t imax = 0;
            double amax = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double m2 = std::norm(vec[i]);
                nrm += m2;
                if (m2 > amax) {
                    amax = m2;
                    imax = i;
                }
            }
            nrm = std::sqrt(nrm);
            std::complex<double> phase = vec[imax] / std::abs(vec[imax]);
            for (auto& c : vec) c /= nrm * phase;
            sys.vectors[k] = std::move(vec);
        }

        const double anorm = a.norm_frobenius();
        if (anorm > 0.0) {
            for (std::size_t k = 0; k < n; ++k) {
                // Residual ||A v - lambda v||_2 for the returned pair.
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    std::complex<double> avi = 0.0;
                    for (std::size_t j = 0; j < n; ++j) avi += a(i, j) * sys.vectors[k][j];
                    acc += std::norm(avi - sys.values[k] * sys.vectors[k][i]);
                }
                sys.max_backward_error =
                    std::max(sys.max_backward_error, std::sqrt(acc) / anorm);
            }
        }
    }

    // Sort by descending real part (stable, keeps value/vector pairing).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (sys.values[i].real() != sys.values[j].real())
            return sys.values[i].real() > sys.values[j].real();
        return sys.values[i].imag() < sys.values[j].imag();
    });
    EigenSystem sorted;
    sorted.max_backward_error = sys.max_backward_error;
    sorted.values.resize(n);
    if (opt.compute_vectors) sorted.vectors.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        sorted.values[k] = sys.values[order[k]];
        if (opt.compute_vectors) sorted.vectors[k] = std::move(sys.vectors[order[k]]);
    }
    return sorted;
}

inline std::vector<std::complex<double>> eigen_values(const Matrix& a, EigenOptions opt = {}) {
    opt.compute_vectors = false;
    return eigen_system(a, opt).values;
}

}  // namespace ctrw

#endif
