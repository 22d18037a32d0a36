#pragma once

// Brute-force dense references for the test suites. Everything here is
// deliberately independent of the library's kernel and eigensolver code
// paths: contractions run over fully densified arrays, and singular values
// come from a one-sided Jacobi SVD rather than the Gram route the library
// uses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "tucker/dense_core.hpp"
#include "tucker/rng.hpp"
#include "tucker/sparse_tensor.hpp"

namespace oracle {

using tucker::Matrix;

inline std::size_t total_size(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

// row-major (last mode fastest) linear index
inline std::size_t linear_index(const std::vector<std::size_t>& dims,
                                const std::vector<std::size_t>& idx) {
    std::size_t lin = 0;
    for (std::size_t m = 0; m < dims.size(); ++m) lin = lin * dims[m] + idx[m];
    return lin;
}

inline std::vector<std::size_t> unlinear_index(const std::vector<std::size_t>& dims,
                                               std::size_t lin) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t m = dims.size(); m-- > 0;) {
        idx[m] = lin % dims[m];
        lin /= dims[m];
    }
    return idx;
}

inline std::vector<double> densify(const tucker::SparseTensor& x) {
    std::vector<double> t(total_size(x.dims()), 0.0);
    std::vector<std::size_t> idx(x.order());
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        for (std::size_t m = 0; m < x.order(); ++m) idx[m] = x.coord(e, m);
        t[linear_index(x.dims(), idx)] += x.value(e);
    }
    return t;
}

// T x_mode U^T : contracts extent I_mode down to u.cols
inline std::vector<double> mode_multiply_t(const std::vector<double>& in,
                                           std::vector<std::size_t>& dims,
                                           const Matrix& u, std::size_t mode) {
    std::vector<std::size_t> out_dims = dims;
    out_dims[mode] = u.cols;
    std::vector<double> out(total_size(out_dims), 0.0);
    for (std::size_t lin = 0; lin < in.size(); ++lin) {
        if (in[lin] == 0.0) continue;
        std::vector<std::size_t> idx = unlinear_index(dims, lin);
        std::size_t i = idx[mode];
        for (std::size_t k = 0; k < u.cols; ++k) {
            idx[mode] = k;
            out[linear_index(out_dims, idx)] += u(i, k) * in[lin];
        }
    }
    dims = out_dims;
    return out;
}

// T x_mode U (no transpose): expands u.cols up to u.rows
inline std::vector<double> mode_multiply(const std::vector<double>& in,
                                         std::vector<std::size_t>& dims,
                                         const Matrix& u, std::size_t mode) {
    std::vector<std::size_t> out_dims = dims;
    out_dims[mode] = u.rows;
    std::vector<double> out(total_size(out_dims), 0.0);
    for (std::size_t lin = 0; lin < in.size(); ++lin) {
        if (in[lin] == 0.0) continue;
        std::vector<std::size_t> idx = unlinear_index(dims, lin);
        std::size_t k = idx[mode];
        for (std::size_t i = 0; i < u.rows; ++i) {
            idx[mode] = i;
            out[linear_index(out_dims, idx)] += u(i, k) * in[lin];
        }
    }
    dims = out_dims;
    return out;
}

// X x {U^T} over all modes -> dense core array
inline std::vector<double> dense_ttmc_all(const tucker::SparseTensor& x,
                                          const tucker::FactorSet& u,
                                          std::vector<std::size_t>& dims_out) {
    std::vector<double> t = densify(x);
    dims_out = x.dims();
    for (std::size_t n = 0; n < x.order(); ++n)
        t = mode_multiply_t(t, dims_out, u.factors[n], n);
    return t;
}

// X x_{-skip} {U^T}
inline std::vector<double> dense_ttmc_except(const tucker::SparseTensor& x,
                                             const tucker::FactorSet& u, std::size_t skip,
                                             std::vector<std::size_t>& dims_out) {
    std::vector<double> t = densify(x);
    dims_out = x.dims();
    for (std::size_t n = 0; n < x.order(); ++n)
        if (n != skip) t = mode_multiply_t(t, dims_out, u.factors[n], n);
    return t;
}

// G x {U} reconstruction back to the data extents
inline std::vector<double> dense_reconstruct(const std::vector<double>& core,
                                             const std::vector<std::size_t>& ranks,
                                             const tucker::FactorSet& u,
                                             std::vector<std::size_t>& dims_out) {
    std::vector<double> t = core;
    dims_out = ranks;
    for (std::size_t n = 0; n < ranks.size(); ++n)
        t = mode_multiply(t, dims_out, u.factors[n], n);
    return t;
}

// mode-n unfolding with its own (consistent) column order
inline Matrix dense_unfold(const std::vector<double>& t,
                           const std::vector<std::size_t>& dims, std::size_t mode) {
    std::size_t rows = dims[mode];
    std::size_t cols = total_size(dims) / rows;
    Matrix m(rows, cols);
    std::vector<std::size_t> colstride(dims.size(), 0);
    std::size_t s = 1;
    for (std::size_t v = dims.size(); v-- > 0;) {
        if (v == mode) continue;
        colstride[v] = s;
        s *= dims[v];
    }
    for (std::size_t lin = 0; lin < t.size(); ++lin) {
        std::vector<std::size_t> idx = unlinear_index(dims, lin);
        std::size_t col = 0;
        for (std::size_t v = 0; v < dims.size(); ++v)
            if (v != mode) col += idx[v] * colstride[v];
        m(idx[mode], col) = t[lin];
    }
    return m;
}

// One-sided Jacobi (Hestenes) SVD. Returns all min(rows, cols) singular
// values in descending order; left/right vectors in the columns of u and v.
struct Svd {
    Matrix u;
    std::vector<double> sigma;
    Matrix v;
};

inline Svd svd_full(Matrix y) {
    bool transposed = y.rows < y.cols;
    if (transposed) y = tucker::transpose(y);
    const std::size_t m = y.rows, n = y.cols;
    Matrix v = tucker::identity(n);

    for (int sweep = 0; sweep < 120; ++sweep) {
        bool rotated = false;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                double ajj = 0.0, akk = 0.0, ajk = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    ajj += y(i, j) * y(i, j);
                    akk += y(i, k) * y(i, k);
                    ajk += y(i, j) * y(i, k);
                }
                if (std::fabs(ajk) <= 1e-15 * std::sqrt(ajj * akk) || ajk == 0.0)
                    continue;
                rotated = true;
                double tau = (akk - ajj) / (2.0 * ajk);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    double yj = y(i, j), yk = y(i, k);
                    y(i, j) = c * yj - s * yk;
                    y(i, k) = s * yj + c * yk;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vj = v(i, j), vk = v(i, k);
                    v(i, j) = c * vj - s * vk;
                    v(i, k) = s * vj + c * vk;
                }
            }
        }
        if (!rotated) break;
    }

    Svd out;
    out.sigma.resize(n);
    Matrix u(m, n);
    for (std::size_t j = 0; j < n; ++j) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) nrm += y(i, j) * y(i, j);
        nrm = std::sqrt(nrm);
        out.sigma[j] = nrm;
        for (std::size_t i = 0; i < m; ++i) u(i, j) = nrm > 0.0 ? y(i, j) / nrm : 0.0;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.sigma[a] > out.sigma[b];
    });
    Svd sorted;
    sorted.sigma.resize(n);
    sorted.u = Matrix(m, n);
    sorted.v = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted.sigma[j] = out.sigma[order[j]];
        for (std::size_t i = 0; i < m; ++i) sorted.u(i, j) = u(i, order[j]);
        for (std::size_t i = 0; i < n; ++i) sorted.v(i, j) = v(i, order[j]);
    }
    if (transposed) std::swap(sorted.u, sorted.v);
    return sorted;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, tucker::Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

inline double sum_sq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double max_abs_diff_vec(const std::vector<double>& a,
                               const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
