#pragma once

#include <cstddef>
#include <vector>

namespace tucker {

// Dense row-major matrix. All desk-scale linear algebra in this project
// (factors, Gram matrices, core unfoldings) goes through this type.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

Matrix identity(std::size_t n);
Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);     // A B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A B^T
double frob_norm_sq(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Dense core tensor, lexicographic layout with the last mode fastest.
struct CoreTensor {
    std::vector<std::size_t> ranks;
    std::vector<double> data;

    CoreTensor() = default;
    explicit CoreTensor(std::vector<std::size_t> r);

    std::size_t order() const { return ranks.size(); }
    std::size_t size() const { return data.size(); }
};

double norm_sq(const CoreTensor& g);

// The N per-mode factor matrices, factor n of shape I_n x K_n. Columns are
// orthonormal by contract; defect() reports the worst deviation.
struct FactorSet {
    std::vector<Matrix> factors;

    std::size_t order() const { return factors.size(); }
    double orthonormality_defect() const;  // max_n max_ij |U^T U - I|
};

// Orthonormal basis of col(A) via Householder QR with a deterministic sign
// convention (diagonal of R nonnegative). Columns whose pivot falls below
// 1e-12 * ||A||_F are replaced with seeded random directions, so the result
// always has full column rank.
Matrix qr_orthonormal(const Matrix& a);

// K leading left singular vectors of Y, computed from the eigendecomposition
// of the smaller Gram matrix (Y Y^T or Y^T Y).
Matrix svd_leading(const Matrix& y, std::size_t k);

// Sum of singular values of a square matrix.
double nuclear_norm(const Matrix& m);

// Mode-n unfolding of the core: row k is the slice with mode-n index k,
// columns over the remaining modes in lexicographic order, last fastest.
// `mode` is 0-based.
Matrix unfold_core(const CoreTensor& g, std::size_t mode);

// Column strides of the mode-n unfolding for arbitrary extents; stride of
// the row mode itself is 0. Shared by the core unfolding and the sparse
// kernels so both sides agree on column order.
std::vector<std::size_t> unfold_col_strides(const std::vector<std::size_t>& dims,
                                            std::size_t mode);

// Eigenvalues of a symmetric PSD matrix, descending, small negatives clamped
// to zero. Rejects asymmetric or meaningfully indefinite input.
std::vector<double> gram_eigvals_desc(const Matrix& m);

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenpairs sorted
// by descending eigenvalue, eigenvectors in the columns.
struct EigResult {
    std::vector<double> values;
    Matrix vectors;
};
EigResult jacobi_eig_sym(Matrix m);

}  // namespace tucker
