#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "zorb/errors.hpp"
#include "zorb/matrix.hpp"

namespace zorb {

/// Thin SVD: A = U * diag(S) * V^T with U m x k, V n x k, k = min(m, n).
/// Singular values are nonincreasing and nonnegative; U and V have
/// orthonormal columns (zero singular directions are basis-completed).
struct SvdResult {
    Matrix u;
    std::vector<double> s;
    Matrix v;
};

namespace detail {

// Householder vector for x[0..len): overwrites x[1..) with the reflector
// tail (v0 = 1 implicit) and returns {tau, beta} such that
// (I - tau*v*v^T) x = beta*e1 with beta = ||x|| >= 0.
struct House {
    double tau;
    double beta;
};

inline House make_householder(double* x, std::size_t len) {
    double sigma = 0.0;
    for (std::size_t i = 1; i < len; ++i) sigma += x[i] * x[i];
    const double alpha = x[0];
    if (sigma == 0.0) {
        if (alpha >= 0.0) return {0.0, alpha};
        return {2.0, -alpha}; // v = e1
    }
    const double mu = std::sqrt(alpha * alpha + sigma);
    const double v0 = (alpha <= 0.0) ? alpha - mu : -sigma / (alpha + mu);
    const double tau = 2.0 * v0 * v0 / (sigma + v0 * v0);
    const double inv_v0 = 1.0 / v0;
    for (std::size_t i = 1; i < len; ++i) x[i] *= inv_v0;
    return {tau, mu};
}

// One-sided Jacobi on the rows of `rows` (each row is one column of the
// matrix being decomposed). Rotations are mirrored onto the rows of `vt`.
// Returns false if the sweep limit is hit before convergence.
inline bool jacobi_orthogonalize(std::vector<std::vector<double>>& rows,
                                 std::vector<std::vector<double>>& vt) {
    const std::size_t k = rows.size();
    if (k < 2) return true;
    const std::size_t len = rows[0].size();
    const double tol = 1e-13;
    const int max_sweeps = 60;

    // Rotations preserve the total Frobenius norm. Columns accumulate
    // roundoff of order eps * ||A||_F from rotations against large
    // columns, so angles are only meaningful above that absolute floor;
    // without it, pairs of near-null columns rotate forever.
    double fro2 = 0.0;
    for (const auto& r : rows)
        for (double v : r) fro2 += v * v;
    const double abs_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(fro2);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                double dij = 0.0, dii = 0.0, djj = 0.0;
                const double* ri = rows[i].data();
                const double* rj = rows[j].data();
                for (std::size_t p = 0; p < len; ++p) {
                    dij += ri[p] * rj[p];
                    dii += ri[p] * ri[p];
                    djj += rj[p] * rj[p];
                }
                if (dii == 0.0 || djj == 0.0) continue;
                const double ni = std::sqrt(dii), nj = std::sqrt(djj);
                if (std::abs(dij) <= tol * ni * nj + abs_floor * (ni + nj)) continue;
                rotated = true;

                const double zeta = (djj - dii) / (2.0 * dij);
                const double sign_z = (zeta >= 0.0) ? 1.0 : -1.0;
                const double t = sign_z / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                double* wi = rows[i].data();
                double* wj = rows[j].data();
                for (std::size_t p = 0; p < len; ++p) {
                    const double a = wi[p], b = wj[p];
                    wi[p] = c * a - s * b;
                    wj[p] = s * a + c * b;
                }
                double* vi = vt[i].data();
                double* vj = vt[j].data();
                for (std::size_t p = 0; p < vt[i].size(); ++p) {
                    const double a = vi[p], b = vj[p];
                    vi[p] = c * a - s * b;
                    vj[p] = s * a + c * b;
                }
            }
        }
        if (!rotated) return true;
    }
    return false;
}

// Replace zero rows of `ut` (columns of U) with canonical basis vectors
// orthogonalized against the other rows, so U keeps orthonormal columns
// even when the input is rank deficient.
inline void complete_basis(std::vector<std::vector<double>>& ut,
                           const std::vector<double>& s) {
    const std::size_t len = ut.empty() ? 0 : ut[0].size();
    for (std::size_t k = 0; k < ut.size(); ++k) {
        if (s[k] != 0.0) continue;
        std::vector<double> cand(len, 0.0);
        for (std::size_t e = 0; e < len; ++e) {
            std::fill(cand.begin(), cand.end(), 0.0);
            cand[e] = 1.0;
            for (std::size_t j = 0; j < ut.size(); ++j) {
                if (j == k) continue;
                double dot = 0.0;
                for (std::size_t p = 0; p < len; ++p) dot += cand[p] * ut[j][p];
                for (std::size_t p = 0; p < len; ++p) cand[p] -= dot * ut[j][p];
            }
            double norm = 0.0;
            for (double v : cand) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 0.5) {
                for (std::size_t p = 0; p < len; ++p) ut[k][p] = cand[p] / norm;
                break;
            }
        }
    }
}

// SVD of a tall (m >= n) matrix. Reduces to an n x n problem via
// Householder QR, then runs one-sided Jacobi on the columns of R.
inline SvdResult svd_tall(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    // ct row j = column j of A, contiguous
    std::vector<std::vector<double>> ct(n, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ct[j][i] = a(i, j);

    std::vector<double> taus(n, 0.0), betas(n, 0.0);
    const bool use_qr = m > n;
    if (use_qr) {
        for (std::size_t k = 0; k < n; ++k) {
            House h = make_householder(ct[k].data() + k, m - k);
            taus[k] = h.tau;
            betas[k] = h.beta;
            if (h.tau == 0.0) continue;
            const double* v = ct[k].data(); // tail at [k+1..m), v[k] treated as 1
            for (std::size_t j = k + 1; j < n; ++j) {
                double* row = ct[j].data();
                double w = row[k];
                for (std::size_t i = k + 1; i < m; ++i) w += v[i] * row[i];
                w *= h.tau;
                row[k] -= w;
                for (std::size_t i = k + 1; i < m; ++i) row[i] -= w * v[i];
            }
        }
    }

    // rt row c = column c of R (or of A itself when no QR was needed)
    std::vector<std::vector<double>> rt(n, std::vector<double>(n, 0.0));
    if (use_qr) {
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t r = 0; r < c; ++r) rt[c][r] = ct[c][r];
            rt[c][c] = betas[c];
        }
    } else {
        rt = ct;
    }

    std::vector<std::vector<double>> vt(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vt[i][i] = 1.0;

    if (!jacobi_orthogonalize(rt, vt))
        throw NumericError("svd: Jacobi iteration did not converge for " + a.shape_str());

    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (double v : rt[j]) norm += v * v;
        s[j] = std::sqrt(norm);
        if (s[j] > 0.0)
            for (double& v : rt[j]) v /= s[j];
    }

    // sort singular values descending, carrying U/V columns along
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&s](std::size_t x, std::size_t y) { return s[x] > s[y]; });

    std::vector<double> s_sorted(n);
    std::vector<std::vector<double>> ur(n), vts(n);
    for (std::size_t j = 0; j < n; ++j) {
        s_sorted[j] = s[order[j]];
        ur[j] = std::move(rt[order[j]]);
        vts[j] = std::move(vt[order[j]]);
    }

    complete_basis(ur, s_sorted);

    // lift U_R back through the Householder reflectors: U = Q * U_R
    std::vector<std::vector<double>> ut(n, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) ut[j][i] = ur[j][i];
    if (use_qr) {
        for (std::size_t k = n; k-- > 0;) {
            if (taus[k] == 0.0) continue;
            const double* v = ct[k].data();
            for (std::size_t j = 0; j < n; ++j) {
                double* row = ut[j].data();
                double w = row[k];
                for (std::size_t i = k + 1; i < m; ++i) w += v[i] * row[i];
                w *= taus[k];
                row[k] -= w;
                for (std::size_t i = k + 1; i < m; ++i) row[i] -= w * v[i];
            }
        }
    }

    SvdResult out;
    out.s = std::move(s_sorted);
    out.u = Matrix(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.u(i, j) = ut[j][i];
    out.v = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.v(i, j) = vts[j][i];
    return out;
}

} // namespace detail

/// Thin SVD via Householder QR reduction + one-sided Jacobi. Deterministic
/// for a fixed input. Throws NumericError if the iteration fails to
/// converge (never returns silent garbage).
inline SvdResult svd(const Matrix& a) {
    if (a.empty()) throw DimError("svd: empty matrix");
    if (a.rows() >= a.cols()) return detail::svd_tall(a);
    SvdResult t = detail::svd_tall(transpose(a));
    return {std::move(t.v), std::move(t.s), std::move(t.u)};
}

/// Moore-Penrose pseudoinverse with relative truncation: singular values
/// below rcond * sigma_max are dropped before inversion.
inline Matrix pinv(const Matrix& a, double rcond) {
    if (rcond < 0.0) throw DimError("pinv: rcond must be >= 0");
    SvdResult r = svd(a);
    const double cutoff = r.s.empty() ? 0.0 : rcond * r.s[0];
    const std::size_t k = r.s.size();
    // A+ = V * diag(1/s) * U^T
    Matrix vs = r.v;
    for (std::size_t j = 0; j < k; ++j) {
        const double inv = (r.s[j] > 0.0 && r.s[j] >= cutoff) ? 1.0 / r.s[j] : 0.0;
        for (std::size_t i = 0; i < vs.rows(); ++i) vs(i, j) *= inv;
    }
    return matmul(vs, transpose(r.u));
}

/// Minimum-norm least-squares solve of W X ~= Y: returns W = Y * X+.
/// X is d x n, Y is k x n, result is k x d.
inline Matrix lstsq_solve(const Matrix& x, const Matrix& y, double rcond) {
    if (x.cols() != y.cols())
        throw DimError("lstsq_solve: sample counts differ, X " + x.shape_str() + " vs Y " +
                       y.shape_str());
    SvdResult r = svd(x);
    const double cutoff = r.s.empty() ? 0.0 : rcond * r.s[0];
    Matrix t = matmul(y, r.v); // k x min(d,n)
    for (std::size_t j = 0; j < r.s.size(); ++j) {
        const double inv = (r.s[j] > 0.0 && r.s[j] >= cutoff) ? 1.0 / r.s[j] : 0.0;
        for (std::size_t i = 0; i < t.rows(); ++i) t(i, j) *= inv;
    }
    return matmul(t, transpose(r.u));
}

} // namespace zorb
