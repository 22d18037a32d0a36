#include "tucker/dense_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "tucker/errors.hpp"
#include "tucker/rng.hpp"

namespace tucker {

namespace {
constexpr std::uint64_t kDeficiencySeed = 0x48514F5251ull;  // rank-deficient column fill
constexpr double kRankTol = 1e-12;
}  // namespace

Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ShapeError("matmul_tn: row counts differ");
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeError("matmul_nt: column counts differ");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            ci[j] = s;
        }
    }
    return c;
}

double frob_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return s;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ShapeError("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

CoreTensor::CoreTensor(std::vector<std::size_t> r) : ranks(std::move(r)) {
    std::size_t total = 1;
    for (std::size_t k : ranks) {
        if (k == 0) throw ShapeError("zero core rank");
        if (total > SIZE_MAX / k) throw CapacityError("core tensor size overflows");
        total *= k;
    }
    data.assign(total, 0.0);
}

double norm_sq(const CoreTensor& g) {
    double s = 0.0;
    for (double v : g.data) s += v * v;
    return s;
}

double FactorSet::orthonormality_defect() const {
    double worst = 0.0;
    for (const Matrix& u : factors) {
        Matrix g = matmul_tn(u, u);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j)
                worst = std::max(worst, std::fabs(g(i, j) - (i == j ? 1.0 : 0.0)));
    }
    return worst;
}

Matrix qr_orthonormal(const Matrix& a) {
    const std::size_t m = a.rows, n = a.cols;
    if (m < n) throw ShapeError("qr_orthonormal: need rows >= cols");
    if (n == 0) return Matrix(m, 0);

    Matrix w = a;
    const double anorm = std::sqrt(frob_norm_sq(a));
    const double pivot_tol = kRankTol * anorm;

    std::vector<std::vector<double>> reflectors(n);
    std::vector<double> betas(n, 0.0);
    std::vector<bool> flip(n, false);
    Rng deficiency_rng(kDeficiencySeed);

    for (std::size_t k = 0; k < n; ++k) {
        double normx = 0.0;
        for (std::size_t i = k; i < m; ++i) normx += w(i, k) * w(i, k);
        normx = std::sqrt(normx);

        if (normx <= pivot_tol) {
            // rank-deficient pivot: substitute a seeded random direction;
            // the remaining reflectors keep the result orthonormal
            do {
                normx = 0.0;
                for (std::size_t i = k; i < m; ++i) {
                    w(i, k) = deficiency_rng.normal();
                    normx += w(i, k) * w(i, k);
                }
                normx = std::sqrt(normx);
            } while (normx == 0.0);
        }

        double x0 = w(k, k);
        double alpha = (x0 >= 0.0) ? -normx : normx;
        std::vector<double> v(m - k);
        v[0] = x0 - alpha;
        for (std::size_t i = k + 1; i < m; ++i) v[i - k] = w(i, k);
        double vn2 = 0.0;
        for (double vi : v) vn2 += vi * vi;
        double beta = (vn2 > 0.0) ? 2.0 / vn2 : 0.0;

        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i - k] * w(i, j);
            dot *= beta;
            for (std::size_t i = k; i < m; ++i) w(i, j) -= dot * v[i - k];
        }
        w(k, k) = alpha;
        flip[k] = alpha < 0.0;  // sign convention: R_kk >= 0
        reflectors[k] = std::move(v);
        betas[k] = beta;
    }

    Matrix q(m, n);
    for (std::size_t k = 0; k < n; ++k) q(k, k) = 1.0;
    for (std::size_t kk = n; kk-- > 0;) {
        const std::vector<double>& v = reflectors[kk];
        double beta = betas[kk];
        if (beta == 0.0) continue;
        for (std::size_t j = kk; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = kk; i < m; ++i) dot += v[i - kk] * q(i, j);
            dot *= beta;
            for (std::size_t i = kk; i < m; ++i) q(i, j) -= dot * v[i - kk];
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!flip[k]) continue;
        for (std::size_t i = 0; i < m; ++i) q(i, k) = -q(i, k);
    }
    return q;
}

EigResult jacobi_eig_sym(Matrix m) {
    const std::size_t n = m.rows;
    if (n != m.cols) throw ShapeError("jacobi_eig_sym: square matrix required");

    // symmetrize; callers hand in Gram matrices that are symmetric up to
    // rounding anyway
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = avg;
        }

    Matrix v = identity(n);
    double fnorm = std::sqrt(frob_norm_sq(m));
    const double stop = 1e-15 * (fnorm > 0.0 ? fnorm : 1.0);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (std::sqrt(2.0 * off) <= stop) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = m(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                double app = m(p, p), aqq = m(q, q);
                m(p, p) = app - t * apq;
                m(q, q) = aqq + t * apq;
                m(p, q) = m(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = m(r, p), arq = m(r, q);
                        m(r, p) = m(p, r) = arp - s * (arq + tau * arp);
                        m(r, q) = m(q, r) = arq + s * (arp - tau * arq);
                    }
                    double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

    EigResult result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        result.values[j] = m(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) result.vectors(i, j) = v(i, order[j]);
    }
    return result;
}

Matrix svd_leading(const Matrix& y, std::size_t k) {
    const std::size_t m = y.rows, p = y.cols;
    if (k > std::min(m, p))
        throw ShapeError("svd_leading: k exceeds min(rows, cols)");
    if (k == 0) return Matrix(m, 0);

    if (m <= p) {
        EigResult eig = jacobi_eig_sym(matmul_nt(y, y));  // Y Y^T, m x m
        Matrix u(m, k);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < m; ++i) u(i, j) = eig.vectors(i, j);
        return u;
    }

    // Gram on the smaller side: eigenvectors v of Y^T Y, then u = Y v / sigma.
    EigResult eig = jacobi_eig_sym(matmul_tn(y, y));
    double lam_max = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
    double sigma_max = std::sqrt(lam_max);

    Matrix u(m, k);
    Rng deficiency_rng(kDeficiencySeed ^ 0x5544ull);
    for (std::size_t j = 0; j < k; ++j) {
        double lam = std::max(eig.values[j], 0.0);
        double sigma = std::sqrt(lam);
        if (sigma > kRankTol * (sigma_max > 0.0 ? sigma_max : 1.0)) {
            for (std::size_t i = 0; i < m; ++i) {
                const double* yi = y.row(i);
                double s = 0.0;
                for (std::size_t q = 0; q < p; ++q) s += yi[q] * eig.vectors(q, j);
                u(i, j) = s / sigma;
            }
        } else {
            for (std::size_t i = 0; i < m; ++i) u(i, j) = deficiency_rng.normal();
        }
    }

    // one modified Gram-Schmidt pass; preserves each leading span while
    // tightening orthonormality of the back-transformed columns
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t jj = 0; jj < j; ++jj) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += u(i, jj) * u(i, j);
            for (std::size_t i = 0; i < m; ++i) u(i, j) -= dot * u(i, jj);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) nrm += u(i, j) * u(i, j);
        nrm = std::sqrt(nrm);
        while (nrm == 0.0) {
            for (std::size_t i = 0; i < m; ++i) u(i, j) = deficiency_rng.normal();
            for (std::size_t jj = 0; jj < j; ++jj) {
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += u(i, jj) * u(i, j);
                for (std::size_t i = 0; i < m; ++i) u(i, j) -= dot * u(i, jj);
            }
            nrm = 0.0;
            for (std::size_t i = 0; i < m; ++i) nrm += u(i, j) * u(i, j);
            nrm = std::sqrt(nrm);
        }
        for (std::size_t i = 0; i < m; ++i) u(i, j) /= nrm;
    }
    return u;
}

double nuclear_norm(const Matrix& m) {
    if (m.rows != m.cols) throw ShapeError("nuclear_norm: square matrix required");
    EigResult eig = jacobi_eig_sym(matmul_tn(m, m));  // eigenvalues of M^T M
    double s = 0.0;
    for (double lam : eig.values) s += std::sqrt(std::max(lam, 0.0));
    return s;
}

std::vector<std::size_t> unfold_col_strides(const std::vector<std::size_t>& dims,
                                            std::size_t mode) {
    if (mode >= dims.size()) throw RangeError("unfold: mode out of range");
    std::vector<std::size_t> strides(dims.size(), 0);
    std::size_t s = 1;
    for (std::size_t v = dims.size(); v-- > 0;) {
        if (v == mode) continue;
        strides[v] = s;
        s *= dims[v];
    }
    return strides;
}

Matrix unfold_core(const CoreTensor& g, std::size_t mode) {
    const std::size_t n = g.order();
    if (mode >= n) throw RangeError("unfold_core: mode out of range");
    std::size_t ncols = g.size() / g.ranks[mode];
    Matrix m(g.ranks[mode], ncols);

    std::vector<std::size_t> colstride = unfold_col_strides(g.ranks, mode);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t lin = 0; lin < g.size(); ++lin) {
        std::size_t col = 0;
        for (std::size_t v = 0; v < n; ++v)
            if (v != mode) col += idx[v] * colstride[v];
        m(idx[mode], col) = g.data[lin];
        for (std::size_t v = n; v-- > 0;) {  // odometer, last mode fastest
            if (++idx[v] < g.ranks[v]) break;
            idx[v] = 0;
        }
    }
    return m;
}

std::vector<double> gram_eigvals_desc(const Matrix& m) {
    if (m.rows != m.cols) throw ShapeError("gram_eigvals_desc: square matrix required");
    double scale = std::max(1.0, std::sqrt(frob_norm_sq(m)));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = i + 1; j < m.cols; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > 1e-10 * scale)
                throw ContractError("gram_eigvals_desc: matrix is not symmetric");

    EigResult eig = jacobi_eig_sym(m);
    for (double& v : eig.values) {
        if (v < -1e-10 * scale)
            throw ContractError("gram_eigvals_desc: matrix is not PSD");
        if (v < 0.0) v = 0.0;
    }
    return eig.values;
}

}  // namespace tucker
