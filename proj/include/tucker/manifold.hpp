#pragma once

#include <cstddef>
#include <vector>

#include "tucker/dense_core.hpp"

namespace tucker {

// Per-state gradient diagnostics: squared Riemannian gradient norms per
// mode plus the singular values of A^(n) and the eigenvalues of
// G_(n) G_(n)^T they are built from. sigma_k >= lambda_k holds exactly in
// real arithmetic, so a violation beyond rounding flags corruption upstream.
struct GradientReport {
    std::vector<double> per_mode_norm_sq;
    double total_norm_sq = 0.0;
    std::vector<std::vector<double>> sigma;
    std::vector<std::vector<double>> lambda;
};

// Projection of A onto the tangent space of the Stiefel manifold at U:
// A - U (U^T A + A^T U) / 2.
Matrix project_tangent(const Matrix& u, const Matrix& a);

// Riemannian gradient of the Tucker objective for one mode:
// 2 A - 2 U G_(n) G_(n)^T.
Matrix riemannian_grad(const Matrix& u, const Matrix& a, const Matrix& gn);

// Squared norm of that gradient via 4 (||A||^2 - ||G_(n) G_(n)^T||^2),
// clamped to zero within rounding of zero.
double grad_norm_sq(const Matrix& a, const Matrix& gn);

// min over orthogonal Q of ||U - V Q||^2 = 2K - 2 ||U^T V||_*. Zero exactly
// when U and V span the same subspace.
double subspace_distance(const Matrix& u, const Matrix& v);

struct InterlacingResult {
    std::vector<double> sigma;   // singular values of A^(n), descending
    std::vector<double> lambda;  // eigenvalues of G_(n) G_(n)^T, descending
    double min_margin = 0.0;     // min_k (sigma_k - lambda_k)
};

// Computes sigma and lambda for one mode and checks sigma_k >= lambda_k up
// to rounding; a violation throws.
InterlacingResult interlacing_check(const Matrix& a, const Matrix& gn);

}  // namespace tucker
