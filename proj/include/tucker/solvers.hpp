#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tucker/dense_core.hpp"
#include "tucker/kernels.hpp"
#include "tucker/manifold.hpp"
#include "tucker/sparse_tensor.hpp"

namespace tucker {

enum class InitMode { kRandom, kHosvd };
enum class KernelVariant { kElementwise, kMatrix };

struct SolverConfig {
    std::vector<std::size_t> ranks;
    std::size_t max_sweeps = 100;     // one sweep = N mode updates
    double tol_fit_change = 1e-12;    // sweep-over-sweep fit change
    std::uint64_t seed = 0;
    InitMode init = InitMode::kRandom;
    bool trace_gradients = false;
    KernelVariant kernel = KernelVariant::kElementwise;
    double tol_grad = 0.0;  // optional gradient stop ||grad|| <= tol_grad * f;
                            // nonzero implies gradient tracing
    std::size_t capacity_cap = kDefaultCapacityCap;
};

struct TuckerModel {
    FactorSet factors;
    CoreTensor core;       // X x {U^T} at the final factors
    double data_norm_sq = 0.0;
};

// One mode update within a sweep; filled only when gradients are traced.
struct ModeUpdateRecord {
    std::size_t sweep = 0;
    std::size_t mode = 0;            // 0-based
    double f_before = 0.0;           // ||G||^2 at the pre-update state
    double f_after = 0.0;            // ||G||^2 once this mode is updated
    double grad_norm_sq = 0.0;       // at the pre-update state
    std::vector<double> sigma;       // singular values of A^(n)
    std::vector<double> lambda;      // eigenvalues of G_(n) G_(n)^T
    double elapsed_s = 0.0;
};

struct SweepRecord {
    std::size_t sweep = 0;           // 1-based
    double elapsed_s = 0.0;          // cumulative since the solve started
    double objective = 0.0;          // f = ||G||^2 after the sweep
    double fit = 0.0;                // ||X||^2 - f
    double total_grad_norm_sq = 0.0;
    std::vector<double> grad_norm_sq;  // per mode, pre-update states
    std::vector<double> drift;         // d(U_t, U_{t-1}) per mode
};

struct IterationTrace {
    double data_norm_sq = 0.0;
    double initial_objective = 0.0;  // f right after initialization
    std::vector<SweepRecord> sweeps;
    std::vector<ModeUpdateRecord> updates;
};

struct SolveResult {
    TuckerModel model;
    IterationTrace trace;
};

// Seeded random orthonormal factors (Gaussian then QR). Bitwise reproducible
// for a given seed.
FactorSet random_factors(const std::vector<std::size_t>& dims,
                         const std::vector<std::size_t>& ranks, std::uint64_t seed);

// Initialization per the configured mode: random, or the leading singular
// vectors of each dense unfolding (desk scale, guarded by the capacity cap).
FactorSet init_factors(const SparseTensor& x, const SolverConfig& config);

// Block coordinate ascent with QR orthonormalization of the TTMcTC output.
SolveResult hoqri(const SparseTensor& x, const SolverConfig& config);

// Reference solver: leading singular vectors of the dense TTMc unfolding.
SolveResult hooi(const SparseTensor& x, const SolverConfig& config);

// ||X - G x {U}||^2 through the orthonormal-factor identity
// ||X||^2 - ||G||^2, clamped at zero.
double fit_error(const SparseTensor& x, const TuckerModel& model);

// Full gradient diagnostics (all modes) for one state; see manifold.hpp for
// the report contract.
GradientReport gradient_report(const SparseTensor& x, const FactorSet& u);

struct DescentCheck {
    bool ok = true;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_violation = 0.0;  // largest lhs - rhs excess over the slack
};

// Verifies, for every recorded mode update,
//   ||grad_n f||^2 <= 4 ||X||^2 (f_{t+1} - f_t) + 1e-8 ||X||^4.
DescentCheck check_descent_inequality(const IterationTrace& trace,
                                      double data_norm_sq);

}  // namespace tucker
