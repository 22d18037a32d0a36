#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tucker/solvers.hpp"
#include "tucker/sparse_tensor.hpp"

namespace tucker {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kTraceVersion = 1;

struct SyntheticSpec {
    std::vector<std::size_t> dims;
    std::size_t nnz = 0;
    std::uint64_t seed = 0;
};

// nnz distinct uniformly sampled coordinates (rejection against duplicates),
// values i.i.d. standard normal. Deterministic per seed.
SparseTensor gen_synthetic(const std::vector<std::size_t>& dims, std::size_t nnz,
                           std::uint64_t seed);

// One solver run serialized for plotting. The same values go to CSV and
// JSON; columns are sweep, elapsed_s, objective, fit, grad_norm_sq,
// drift_1..drift_N.
struct TraceFile {
    std::map<std::string, std::string> header;  // spec echo, versions, timestamp
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

TraceFile make_trace_file(const std::string& solver_name, const SolverConfig& config,
                          const SparseTensor& x, const IterationTrace& trace);

void write_trace_csv(std::ostream& out, const TraceFile& t);
void write_trace_json(std::ostream& out, const TraceFile& t);
TraceFile read_trace_csv(std::istream& in);
TraceFile read_trace_json(std::istream& in);

enum class SolverChoice { kHoqri, kHooi, kBoth };

struct ExperimentSpec {
    std::optional<std::string> input_path;      // exactly one input source
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::vector<std::size_t>> dims_override;
    SolverConfig config;
    SolverChoice solver = SolverChoice::kHoqri;
    std::size_t repetitions = 1;
    std::string out_dir;
    bool parallel_reps = false;
};

struct ExperimentResult {
    std::vector<std::string> trace_paths;  // csv path per run (json sits next to it)
    std::string summary_path;
};

// Runs each selected solver for each repetition, writing one trace (CSV +
// JSON) per run plus a summary with mean per-sweep elapsed time. Repetition
// r uses solver seed config.seed + r.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct BenchStats {
    std::size_t repetitions = 0;
    double median_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
    std::size_t peak_slots = 0;           // 8-byte value slots, worst call
    std::size_t largest_alloc_slots = 0;  // largest single buffer, worst call
};

// Times repeated kernel calls on a fixed state and reports the transient
// allocation footprint alongside.
BenchStats bench_kernel(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                        KernelVariant variant, std::size_t repetitions);

}  // namespace tucker
