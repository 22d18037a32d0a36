// Command-line driver: decompose (run a solver and write traces), gen
// (synthetic tensor to .tns), bench (time one kernel), convert (validate and
// normalize a .tns file).
//
// Exit codes: 0 success, 2 parse/validation error, 3 capacity error,
// 4 degenerate solver state, 1 anything else.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tucker/errors.hpp"
#include "tucker/harness.hpp"

using namespace tucker;

namespace {

struct InputArgs {
    std::string input_path;
    std::vector<std::size_t> dims_override;
    std::vector<std::size_t> synthetic_dims;
    std::size_t synthetic_nnz = 0;
    std::uint64_t gen_seed = 0;
};

void add_input_options(CLI::App* cmd, InputArgs& in) {
    auto* file = cmd->add_option("--input", in.input_path, ".tns input file");
    cmd->add_option("--dims", in.dims_override, "extent override i1,i2,...")
        ->delimiter(',');
    auto* syn = cmd->add_option("--synthetic", in.synthetic_dims,
                                "generate a synthetic tensor with these extents")
                    ->delimiter(',');
    cmd->add_option("--nnz", in.synthetic_nnz, "synthetic nonzero count")->needs(syn);
    cmd->add_option("--gen-seed", in.gen_seed, "synthetic generator seed");
    file->excludes(syn);
}

SparseTensor load_input(const InputArgs& in) {
    if (!in.input_path.empty()) {
        std::optional<std::vector<std::size_t>> dims;
        if (!in.dims_override.empty()) dims = in.dims_override;
        return load_tns_file(in.input_path, dims);
    }
    if (in.synthetic_dims.empty())
        throw ParseError("either --input or --synthetic is required");
    return gen_synthetic(in.synthetic_dims, in.synthetic_nnz, in.gen_seed);
}

int run(int argc, char** argv) {
    CLI::App app{"Tucker decomposition of large sparse tensors (HOQRI / HOOI)"};
    app.require_subcommand(1);

    // decompose
    auto* dec = app.add_subcommand("decompose", "run a solver and write traces");
    InputArgs dec_in;
    add_input_options(dec, dec_in);
    SolverConfig cfg;
    std::string solver = "hoqri", init = "random", kernel = "elementwise", out_dir;
    std::size_t reps = 1;
    bool parallel_reps = false, trace_gradients = false;
    dec->add_option("--rank", cfg.ranks, "target multilinear rank k1,k2,...")
        ->delimiter(',')
        ->required();
    dec->add_option("--max-sweeps", cfg.max_sweeps, "sweep budget");
    dec->add_option("--tol", cfg.tol_fit_change, "fit-change stopping tolerance");
    dec->add_option("--tol-grad", cfg.tol_grad,
                    "optional gradient stop: ||grad|| <= tol * f (0 disables)");
    dec->add_option("--seed", cfg.seed, "solver seed");
    dec->add_option("--init", init, "random|hosvd")
        ->check(CLI::IsMember({"random", "hosvd"}));
    dec->add_option("--solver", solver, "hoqri|hooi|both")
        ->check(CLI::IsMember({"hoqri", "hooi", "both"}));
    dec->add_option("--kernel", kernel, "elementwise|matrix")
        ->check(CLI::IsMember({"elementwise", "matrix"}));
    dec->add_option("--reps", reps, "repetitions per solver");
    dec->add_flag("--parallel-reps", parallel_reps, "run repetitions concurrently");
    dec->add_flag("--trace-gradients", trace_gradients,
                  "record per-update gradient diagnostics");
    dec->add_option("--capacity-cap", cfg.capacity_cap,
                    "dense intermediate allocation cap, in entries");
    dec->add_option("--out", out_dir, "output directory")->required();

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic tensor");
    std::vector<std::size_t> gen_dims;
    std::size_t gen_nnz = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--dims", gen_dims, "extents i1,i2,...")->delimiter(',')->required();
    gen->add_option("--nnz", gen_nnz, "nonzero count")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output .tns path")->required();

    // bench
    auto* ben = app.add_subcommand("bench", "time one TTMcTC kernel call");
    InputArgs ben_in;
    add_input_options(ben, ben_in);
    std::vector<std::size_t> ben_ranks;
    std::size_t ben_mode = 1, ben_reps = 5;
    std::uint64_t ben_seed = 0;
    std::string ben_kernel = "matrix";
    ben->add_option("--rank", ben_ranks, "factor ranks k1,k2,...")
        ->delimiter(',')
        ->required();
    ben->add_option("--mode", ben_mode, "target mode (1-based)");
    ben->add_option("--kernel", ben_kernel, "elementwise|matrix")
        ->check(CLI::IsMember({"elementwise", "matrix"}));
    ben->add_option("--reps", ben_reps, "timed repetitions");
    ben->add_option("--seed", ben_seed, "factor seed");

    // convert
    auto* con = app.add_subcommand("convert", "validate and normalize a .tns file");
    std::string con_in, con_out;
    std::vector<std::size_t> con_dims, con_expect;
    con->add_option("--input", con_in, ".tns input file")->required();
    con->add_option("--out", con_out, "normalized output path")->required();
    con->add_option("--dims", con_dims, "extent override i1,i2,...")->delimiter(',');
    con->add_option("--expect", con_expect,
                    "expected i1,...,iN,nnz; mismatch fails the run")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    if (dec->parsed()) {
        ExperimentSpec spec;
        if (!dec_in.input_path.empty())
            spec.input_path = dec_in.input_path;
        else
            spec.synthetic =
                SyntheticSpec{dec_in.synthetic_dims, dec_in.synthetic_nnz, dec_in.gen_seed};
        if (!dec_in.dims_override.empty()) spec.dims_override = dec_in.dims_override;
        cfg.init = init == "hosvd" ? InitMode::kHosvd : InitMode::kRandom;
        cfg.kernel =
            kernel == "matrix" ? KernelVariant::kMatrix : KernelVariant::kElementwise;
        cfg.trace_gradients = trace_gradients;
        spec.config = cfg;
        spec.solver = solver == "hooi"   ? SolverChoice::kHooi
                      : solver == "both" ? SolverChoice::kBoth
                                         : SolverChoice::kHoqri;
        spec.repetitions = reps;
        spec.parallel_reps = parallel_reps;
        spec.out_dir = out_dir;

        ExperimentResult res = run_experiment(spec);
        for (const std::string& p : res.trace_paths) std::cout << p << "\n";
        std::cout << res.summary_path << "\n";
        return 0;
    }

    if (gen->parsed()) {
        SparseTensor x = gen_synthetic(gen_dims, gen_nnz, gen_seed);
        write_tns_file(gen_out, x);
        std::cout << gen_out << "\n";
        return 0;
    }

    if (ben->parsed()) {
        SparseTensor x = load_input(ben_in);
        if (ben_mode < 1 || ben_mode > x.order())
            throw RangeError("--mode must lie in [1, " + std::to_string(x.order()) + "]");
        FactorSet u = random_factors(x.dims(), ben_ranks, ben_seed);
        KernelVariant v = ben_kernel == "matrix" ? KernelVariant::kMatrix
                                                 : KernelVariant::kElementwise;
        BenchStats stats = bench_kernel(x, u, ben_mode - 1, v, ben_reps);
        nlohmann::json j;
        j["kernel"] = ben_kernel;
        j["mode"] = ben_mode;
        j["repetitions"] = stats.repetitions;
        j["median_s"] = stats.median_s;
        j["min_s"] = stats.min_s;
        j["max_s"] = stats.max_s;
        j["peak_slots"] = stats.peak_slots;
        j["largest_alloc_slots"] = stats.largest_alloc_slots;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    // convert
    std::optional<std::vector<std::size_t>> dims;
    if (!con_dims.empty()) dims = con_dims;
    SparseTensor x = load_tns_file(con_in, dims);
    if (!con_expect.empty()) {
        if (con_expect.size() != x.order() + 1)
            throw ParseError("--expect needs " + std::to_string(x.order() + 1) +
                             " values (extents then nnz)");
        for (std::size_t m = 0; m < x.order(); ++m)
            if (con_expect[m] != x.dims()[m])
                throw ParseError("extent mismatch for mode " + std::to_string(m + 1) +
                                 ": expected " + std::to_string(con_expect[m]) + ", got " +
                                 std::to_string(x.dims()[m]));
        if (con_expect.back() != x.nnz())
            throw ParseError("nnz mismatch: expected " + std::to_string(con_expect.back()) +
                             ", got " + std::to_string(x.nnz()));
    }
    write_tns_file(con_out, x);
    std::cout << con_out << " (dims";
    for (std::size_t d : x.dims()) std::cout << " " << d;
    std::cout << ", nnz " << x.nnz() << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateStateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
