#include "tucker/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "tucker/errors.hpp"
#include "tucker/manifold.hpp"
#include "tucker/rng.hpp"

namespace tucker {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_ranks(const SparseTensor& x, const std::vector<std::size_t>& ranks) {
    if (ranks.size() != x.order())
        throw ShapeError("rank count does not match tensor order");
    for (std::size_t n = 0; n < ranks.size(); ++n) {
        if (ranks[n] < 1 || ranks[n] > x.dims()[n])
            throw ShapeError("rank for mode " + std::to_string(n + 1) +
                             " must lie in [1, " + std::to_string(x.dims()[n]) + "]");
    }
}

// gradient diagnostics at the pre-update state of one mode
struct UpdateDiagnostics {
    double grad_norm_sq = 0.0;
    std::vector<double> sigma;
    std::vector<double> lambda;
};

UpdateDiagnostics diagnose_update(const Matrix& a, const Matrix& gn) {
    UpdateDiagnostics d;
    d.grad_norm_sq = grad_norm_sq(a, gn);
    InterlacingResult il = interlacing_check(a, gn);
    d.sigma = std::move(il.sigma);
    d.lambda = std::move(il.lambda);
    return d;
}

enum class Algorithm { kHoqri, kHooi };

SolveResult solve(const SparseTensor& x, const SolverConfig& config, Algorithm alg) {
    check_ranks(x, config.ranks);
    if (config.max_sweeps < 1) throw ShapeError("max_sweeps must be at least 1");
    if (config.tol_fit_change < 0.0) throw ShapeError("tolerance must be nonnegative");

    const std::size_t order = x.order();
    const double dns = norm_sq(x);
    // gradient-based stopping needs the per-update diagnostics
    const bool tracing = config.trace_gradients || config.tol_grad > 0.0;

    FactorSet u = init_factors(x, config);

    SolveResult result;
    IterationTrace& trace = result.trace;
    trace.data_norm_sq = dns;

    CoreTensor core = ttmc_core(x, u);
    trace.initial_objective = norm_sq(core);
    double fit_prev = dns - trace.initial_objective;

    // For HOQRI's element-wise kernel the current core is what the kernel
    // needs anyway, so it is kept fresh and passed through. The matrix
    // variant without tracing skips per-update cores entirely.
    const bool core_per_update =
        tracing || (alg == Algorithm::kHoqri && config.kernel == KernelVariant::kElementwise);

    KernelWorkspace ws;
    const auto t0 = Clock::now();

    for (std::size_t sweep = 1; sweep <= config.max_sweeps; ++sweep) {
        SweepRecord rec;
        rec.sweep = sweep;
        rec.grad_norm_sq.assign(order, 0.0);
        rec.drift.assign(order, 0.0);

        for (std::size_t n = 0; n < order; ++n) {
            const auto tu0 = Clock::now();

            Matrix a;
            if (alg == Algorithm::kHoqri) {
                a = (config.kernel == KernelVariant::kElementwise)
                        ? ttmctc_elementwise(x, u, n, core_per_update ? &core : nullptr, &ws)
                        : ttmctc_matrix(x, u, n, &ws);
            } else {
                Matrix y = ttmc_unfold_dense(x, u, n, config.capacity_cap);
                if (max_abs(y) == 0.0) throw DegenerateStateError(n + 1);

                ModeUpdateRecord up;
                if (tracing) {
                    Matrix gn = matmul_tn(u.factors[n], y);  // G_(n) = U^T Y_(n)
                    a = matmul_nt(y, gn);
                    up.sweep = sweep;
                    up.mode = n;
                    up.f_before = norm_sq(core);
                    UpdateDiagnostics d = diagnose_update(a, gn);
                    up.grad_norm_sq = d.grad_norm_sq;
                    up.sigma = std::move(d.sigma);
                    up.lambda = std::move(d.lambda);
                    rec.grad_norm_sq[n] = up.grad_norm_sq;
                }

                Matrix u_old = std::move(u.factors[n]);
                u.factors[n] = svd_leading(y, config.ranks[n]);
                rec.drift[n] = subspace_distance(u.factors[n], u_old);

                if (tracing) {
                    core = ttmc_core(x, u);
                    up.f_after = norm_sq(core);
                    up.elapsed_s = seconds_since(tu0);
                    trace.updates.push_back(std::move(up));
                }
                continue;
            }

            if (max_abs(a) == 0.0) throw DegenerateStateError(n + 1);

            ModeUpdateRecord up;
            if (tracing) {
                up.sweep = sweep;
                up.mode = n;
                up.f_before = norm_sq(core);
                Matrix gn = unfold_core(core, n);
                UpdateDiagnostics d = diagnose_update(a, gn);
                up.grad_norm_sq = d.grad_norm_sq;
                up.sigma = std::move(d.sigma);
                up.lambda = std::move(d.lambda);
                rec.grad_norm_sq[n] = up.grad_norm_sq;
            }

            Matrix u_old = std::move(u.factors[n]);
            u.factors[n] = qr_orthonormal(a);
            rec.drift[n] = subspace_distance(u.factors[n], u_old);

            if (core_per_update) {
                core = ttmc_core(x, u);
                if (tracing) {
                    up.f_after = norm_sq(core);
                    up.elapsed_s = seconds_since(tu0);
                    trace.updates.push_back(std::move(up));
                }
            }
        }

        if (!core_per_update) core = ttmc_core(x, u);
        rec.objective = norm_sq(core);
        rec.fit = dns - rec.objective;
        for (double g : rec.grad_norm_sq) rec.total_grad_norm_sq += g;
        rec.elapsed_s = seconds_since(t0);

        double fit = rec.fit;
        double total_gnsq = rec.total_grad_norm_sq;
        double objective = rec.objective;
        trace.sweeps.push_back(std::move(rec));

        if (std::fabs(fit_prev - fit) < config.tol_fit_change) break;
        if (config.tol_grad > 0.0 &&
            std::sqrt(total_gnsq) <= config.tol_grad * std::max(objective, 1e-300))
            break;
        fit_prev = fit;
    }

    if (u.orthonormality_defect() > 1e-10)
        throw DiagnosticError("solver produced factors with orthonormality defect above 1e-10");

    result.model.factors = std::move(u);
    result.model.core = std::move(core);  // fresh: recomputed after the last update
    result.model.data_norm_sq = dns;
    return result;
}

}  // namespace

FactorSet random_factors(const std::vector<std::size_t>& dims,
                         const std::vector<std::size_t>& ranks, std::uint64_t seed) {
    if (dims.size() != ranks.size())
        throw ShapeError("random_factors: dims/ranks length mismatch");
    FactorSet u;
    u.factors.reserve(dims.size());
    for (std::size_t n = 0; n < dims.size(); ++n) {
        Rng rng(mix_seed(seed, n));
        Matrix g(dims[n], ranks[n]);
        for (double& v : g.data) v = rng.normal();
        u.factors.push_back(qr_orthonormal(g));
    }
    return u;
}

FactorSet init_factors(const SparseTensor& x, const SolverConfig& config) {
    check_ranks(x, config.ranks);
    if (config.init == InitMode::kRandom)
        return random_factors(x.dims(), config.ranks, config.seed);

    FactorSet u;
    u.factors.reserve(x.order());
    for (std::size_t n = 0; n < x.order(); ++n) {
        Matrix xn;
        try {
            xn = densify_unfold(x, n, config.capacity_cap);
        } catch (const CapacityError& e) {
            throw CapacityError(std::string(e.what()) +
                                "; HOSVD initialization is desk-scale only, use random init");
        }
        u.factors.push_back(svd_leading(xn, config.ranks[n]));
    }
    return u;
}

SolveResult hoqri(const SparseTensor& x, const SolverConfig& config) {
    return solve(x, config, Algorithm::kHoqri);
}

SolveResult hooi(const SparseTensor& x, const SolverConfig& config) {
    return solve(x, config, Algorithm::kHooi);
}

double fit_error(const SparseTensor& x, const TuckerModel& model) {
    if (model.factors.order() != x.order())
        throw ShapeError("fit_error: model order does not match the tensor");
    double dns = model.data_norm_sq;
    double r = dns - norm_sq(model.core);
    double scale = std::max(1.0, dns);
    if (r < -1e-8 * scale)
        throw ContractError("fit_error: core energy exceeds the data norm; "
                            "core is inconsistent with the factors");
    if (std::fabs(r) <= 1e-10 * scale) return 0.0;
    return std::max(r, 0.0);
}

GradientReport gradient_report(const SparseTensor& x, const FactorSet& u) {
    CoreTensor core = ttmc_core(x, u);
    GradientReport report;
    report.per_mode_norm_sq.reserve(x.order());
    for (std::size_t n = 0; n < x.order(); ++n) {
        Matrix a = ttmctc_elementwise(x, u, n, &core);
        Matrix gn = unfold_core(core, n);
        report.per_mode_norm_sq.push_back(grad_norm_sq(a, gn));
        InterlacingResult il = interlacing_check(a, gn);
        report.sigma.push_back(std::move(il.sigma));
        report.lambda.push_back(std::move(il.lambda));
        report.total_norm_sq += report.per_mode_norm_sq.back();
    }
    return report;
}

DescentCheck check_descent_inequality(const IterationTrace& trace,
                                      double data_norm_sq) {
    DescentCheck out;
    const double slack = 1e-8 * data_norm_sq * data_norm_sq;
    for (const ModeUpdateRecord& up : trace.updates) {
        ++out.checked;
        double rhs = 4.0 * data_norm_sq * (up.f_after - up.f_before) + slack;
        double excess = up.grad_norm_sq - rhs;
        if (excess > 0.0) {
            ++out.violations;
            out.ok = false;
        }
        out.worst_violation = std::max(out.worst_violation, excess);
    }
    return out;
}

}  // namespace tucker
