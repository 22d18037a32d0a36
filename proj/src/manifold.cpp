#include "tucker/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "tucker/errors.hpp"

namespace tucker {

Matrix project_tangent(const Matrix& u, const Matrix& a) {
    if (u.rows != a.rows || u.cols != a.cols)
        throw ShapeError("project_tangent: U and A must have the same shape");
    Matrix uta = matmul_tn(u, a);  // U^T A
    Matrix sym(uta.rows, uta.cols);
    for (std::size_t i = 0; i < uta.rows; ++i)
        for (std::size_t j = 0; j < uta.cols; ++j)
            sym(i, j) = 0.5 * (uta(i, j) + uta(j, i));
    Matrix us = matmul(u, sym);
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= us.data[i];
    return out;
}

Matrix riemannian_grad(const Matrix& u, const Matrix& a, const Matrix& gn) {
    if (u.rows != a.rows || u.cols != a.cols)
        throw ShapeError("riemannian_grad: U and A must have the same shape");
    if (gn.rows != u.cols)
        throw ShapeError("riemannian_grad: core unfolding does not match the mode rank");
    Matrix gg = matmul_nt(gn, gn);  // K x K
    Matrix ugg = matmul(u, gg);
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 2.0 * a.data[i] - 2.0 * ugg.data[i];
    return out;
}

double grad_norm_sq(const Matrix& a, const Matrix& gn) {
    if (gn.rows != a.cols)
        throw ShapeError("grad_norm_sq: core unfolding does not match the mode rank");
    double a_sq = frob_norm_sq(a);
    Matrix gg = matmul_nt(gn, gn);
    double gg_sq = frob_norm_sq(gg);
    double r = 4.0 * (a_sq - gg_sq);

    // the cancellation in a_sq - gg_sq grows with the operands, so the
    // corruption check scales; the report clamp stays absolute
    double scale = std::max(1.0, 4.0 * a_sq);
    if (r < -1e-8 * scale)
        throw DiagnosticError("grad_norm_sq is negative beyond rounding; "
                              "orthonormality is broken upstream");
    if (std::fabs(r) <= 1e-10) return 0.0;
    return std::max(r, 0.0);
}

double subspace_distance(const Matrix& u, const Matrix& v) {
    if (u.rows != v.rows || u.cols != v.cols)
        throw ShapeError("subspace_distance: shapes differ");
    double d = 2.0 * static_cast<double>(u.cols) - 2.0 * nuclear_norm(matmul_tn(u, v));
    return std::max(d, 0.0);
}

InterlacingResult interlacing_check(const Matrix& a, const Matrix& gn) {
    if (gn.rows != a.cols)
        throw ShapeError("interlacing_check: core unfolding does not match the mode rank");

    InterlacingResult r;
    std::vector<double> ata_eigs = gram_eigvals_desc(matmul_tn(a, a));
    r.sigma.resize(ata_eigs.size());
    for (std::size_t i = 0; i < ata_eigs.size(); ++i) r.sigma[i] = std::sqrt(ata_eigs[i]);
    r.lambda = gram_eigvals_desc(matmul_nt(gn, gn));

    r.min_margin = 0.0;
    double scale = std::max(1.0, r.sigma.empty() ? 0.0 : r.sigma[0]);
    bool first = true;
    for (std::size_t k = 0; k < r.sigma.size(); ++k) {
        double margin = r.sigma[k] - r.lambda[k];
        if (first || margin < r.min_margin) r.min_margin = margin;
        first = false;
        if (margin < -1e-9 * scale)
            throw DiagnosticError("interlacing violated at k=" + std::to_string(k + 1) +
                                  "; upstream state is numerically corrupted");
    }
    return r;
}

}  // namespace tucker
