#include "tucker/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tucker/errors.hpp"
#include "tucker/rng.hpp"

namespace tucker {

namespace {

using json = nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Key128 {
    std::uint64_t hi, lo;
    bool operator==(const Key128& o) const { return hi == o.hi && lo == o.lo; }
};
struct Key128Hash {
    std::size_t operator()(const Key128& k) const {
        return mix_seed(k.hi, k.lo);
    }
};

}  // namespace

SparseTensor gen_synthetic(const std::vector<std::size_t>& dims, std::size_t nnz,
                           std::uint64_t seed) {
    if (dims.empty()) throw ShapeError("gen_synthetic: need at least one mode");
    unsigned __int128 total = 1;
    for (std::size_t d : dims) {
        if (d == 0) throw ShapeError("gen_synthetic: zero extent");
        total *= d;
    }
    if (static_cast<unsigned __int128>(nnz) > total)
        throw InfeasibleError("gen_synthetic: nnz " + std::to_string(nnz) +
                              " exceeds the number of cells");

    Rng rng(seed);
    std::unordered_set<Key128, Key128Hash> seen;
    seen.reserve(nnz * 2);

    const std::size_t order = dims.size();
    std::vector<index_t> coords;
    coords.reserve(nnz * order);
    std::vector<double> values;
    values.reserve(nnz);
    std::vector<index_t> tuple(order);

    while (values.size() < nnz) {
        unsigned __int128 linear = 0;
        for (std::size_t m = 0; m < order; ++m) {
            tuple[m] = static_cast<index_t>(rng.uniform_below(dims[m]));
            linear = linear * dims[m] + tuple[m];
        }
        Key128 key{static_cast<std::uint64_t>(linear >> 64),
                   static_cast<std::uint64_t>(linear)};
        if (!seen.insert(key).second) continue;  // duplicate: resample
        coords.insert(coords.end(), tuple.begin(), tuple.end());
        values.push_back(rng.normal());
    }

    return SparseTensor(dims, std::move(coords), std::move(values));
}

TraceFile make_trace_file(const std::string& solver_name, const SolverConfig& config,
                          const SparseTensor& x, const IterationTrace& trace) {
    TraceFile t;
    t.header["trace_version"] = std::to_string(kTraceVersion);
    t.header["tool_version"] = kToolVersion;
    t.header["timestamp"] = utc_timestamp();
    t.header["solver"] = solver_name;
    t.header["dims"] = join_sizes(x.dims());
    t.header["nnz"] = std::to_string(x.nnz());
    t.header["ranks"] = join_sizes(config.ranks);
    t.header["seed"] = std::to_string(config.seed);
    t.header["init"] = config.init == InitMode::kRandom ? "random" : "hosvd";
    t.header["kernel"] =
        config.kernel == KernelVariant::kElementwise ? "elementwise" : "matrix";
    t.header["max_sweeps"] = std::to_string(config.max_sweeps);
    t.header["tol"] = format_double(config.tol_fit_change);
    t.header["data_norm_sq"] = format_double(trace.data_norm_sq);
    t.header["initial_objective"] = format_double(trace.initial_objective);

    const std::size_t order = x.order();
    t.columns = {"sweep", "elapsed_s", "objective", "fit", "grad_norm_sq"};
    for (std::size_t n = 0; n < order; ++n)
        t.columns.push_back("drift_" + std::to_string(n + 1));

    for (const SweepRecord& r : trace.sweeps) {
        std::vector<double> row;
        row.reserve(5 + order);
        row.push_back(static_cast<double>(r.sweep));
        row.push_back(r.elapsed_s);
        row.push_back(r.objective);
        row.push_back(r.fit);
        row.push_back(r.total_grad_norm_sq);
        for (double d : r.drift) row.push_back(d);
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_trace_csv(std::ostream& out, const TraceFile& t) {
    for (const auto& [k, v] : t.header) out << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

void write_trace_json(std::ostream& out, const TraceFile& t) {
    json j;
    j["header"] = t.header;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    out << j.dump(2) << "\n";
}

TraceFile read_trace_csv(std::istream& in) {
    TraceFile t;
    std::string line;
    bool have_columns = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t start = line.find_first_not_of(" \t", 1);
            if (start == std::string::npos) continue;
            std::size_t eq = line.find('=', start);
            if (eq == std::string::npos) continue;
            t.header[line.substr(start, eq - start)] = line.substr(eq + 1);
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!have_columns) {
            while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
            have_columns = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || p != cell.data() + cell.size())
                throw ParseError("bad numeric cell '" + cell + "'", line_no);
            row.push_back(v);
        }
        if (row.size() != t.columns.size())
            throw ParseError("row width does not match the column header", line_no);
        t.rows.push_back(std::move(row));
    }
    if (!have_columns) throw ParseError("trace has no column header");
    return t;
}

TraceFile read_trace_json(std::istream& in) {
    json j;
    in >> j;
    TraceFile t;
    for (auto it = j.at("header").begin(); it != j.at("header").end(); ++it)
        t.header[it.key()] = it.value().get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    return t;
}

namespace {

struct RunOutput {
    std::string csv_path;
    double mean_sweep_s = 0.0;
    double final_objective = 0.0;
    double final_fit = 0.0;
    std::size_t sweeps = 0;
};

RunOutput run_one(const SparseTensor& x, const ExperimentSpec& spec,
                  SolverChoice which, std::size_t rep) {
    SolverConfig cfg = spec.config;
    cfg.seed = spec.config.seed + rep;
    const char* name = which == SolverChoice::kHoqri ? "hoqri" : "hooi";

    SolveResult res;
    try {
        res = which == SolverChoice::kHoqri ? hoqri(x, cfg) : hooi(x, cfg);
    } catch (const CapacityError& e) {
        throw CapacityError(std::string(name) + " rep " + std::to_string(rep) + ": " +
                            e.what());
    } catch (const DegenerateStateError& e) {
        throw DegenerateStateError(e.mode);
    }

    TraceFile t = make_trace_file(name, cfg, x, res.trace);
    std::filesystem::path base = std::filesystem::path(spec.out_dir) /
                                 (std::string(name) + "_rep" + std::to_string(rep));
    std::ofstream csv(base.string() + ".trace.csv");
    write_trace_csv(csv, t);
    std::ofstream js(base.string() + ".trace.json");
    write_trace_json(js, t);

    RunOutput out;
    out.csv_path = base.string() + ".trace.csv";
    out.sweeps = res.trace.sweeps.size();
    if (!res.trace.sweeps.empty()) {
        const SweepRecord& lastr = res.trace.sweeps.back();
        out.mean_sweep_s = lastr.elapsed_s / static_cast<double>(out.sweeps);
        out.final_objective = lastr.objective;
        out.final_fit = lastr.fit;
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.repetitions < 1) throw ShapeError("repetitions must be at least 1");
    if (spec.input_path.has_value() == spec.synthetic.has_value())
        throw ShapeError("specify exactly one input source (file or synthetic)");
    if (spec.out_dir.empty()) throw ShapeError("output directory required");

    SparseTensor x;
    if (spec.input_path) {
        x = load_tns_file(*spec.input_path, spec.dims_override);
    } else {
        const SyntheticSpec& s = *spec.synthetic;
        if (s.nnz > 0) {
            unsigned __int128 total = 1;
            for (std::size_t d : s.dims) total *= d;
            if (static_cast<unsigned __int128>(s.nnz) > total)
                throw InfeasibleError("synthetic nnz exceeds the number of cells");
        }
        x = gen_synthetic(s.dims, s.nnz, s.seed);
    }

    std::filesystem::create_directories(spec.out_dir);

    std::vector<SolverChoice> chosen;
    if (spec.solver == SolverChoice::kBoth)
        chosen = {SolverChoice::kHoqri, SolverChoice::kHooi};
    else
        chosen = {spec.solver};

    struct Slot {
        SolverChoice which;
        std::size_t rep;
        RunOutput out;
        std::exception_ptr err;
    };
    std::vector<Slot> slots;
    for (SolverChoice which : chosen)
        for (std::size_t rep = 0; rep < spec.repetitions; ++rep)
            slots.push_back(Slot{which, rep, {}, nullptr});

    auto work = [&](Slot& s) {
        try {
            s.out = run_one(x, spec, s.which, s.rep);
        } catch (...) {
            s.err = std::current_exception();
        }
    };

    if (spec.parallel_reps && slots.size() > 1) {
        std::vector<std::thread> threads;
        threads.reserve(slots.size());
        for (Slot& s : slots) threads.emplace_back(work, std::ref(s));
        for (std::thread& th : threads) th.join();
    } else {
        for (Slot& s : slots) work(s);
    }
    for (Slot& s : slots)
        if (s.err) std::rethrow_exception(s.err);

    ExperimentResult result;
    json summary;
    summary["tool_version"] = kToolVersion;
    summary["dims"] = x.dims();
    summary["nnz"] = x.nnz();
    summary["ranks"] = spec.config.ranks;
    summary["repetitions"] = spec.repetitions;
    for (SolverChoice which : chosen) {
        const char* name = which == SolverChoice::kHoqri ? "hoqri" : "hooi";
        json runs = json::array();
        double mean_sweep_total = 0.0;
        std::size_t count = 0;
        for (const Slot& s : slots) {
            if (s.which != which) continue;
            json r;
            r["rep"] = s.rep;
            r["trace"] = s.out.csv_path;
            r["sweeps"] = s.out.sweeps;
            r["mean_sweep_s"] = s.out.mean_sweep_s;
            r["final_objective"] = s.out.final_objective;
            r["final_fit"] = s.out.final_fit;
            runs.push_back(std::move(r));
            mean_sweep_total += s.out.mean_sweep_s;
            ++count;
            result.trace_paths.push_back(s.out.csv_path);
        }
        summary[name]["runs"] = std::move(runs);
        summary[name]["mean_sweep_s"] = count ? mean_sweep_total / count : 0.0;
    }

    std::filesystem::path sp = std::filesystem::path(spec.out_dir) / "summary.json";
    std::ofstream out(sp);
    out << summary.dump(2) << "\n";
    result.summary_path = sp.string();
    return result;
}

BenchStats bench_kernel(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                        KernelVariant variant, std::size_t repetitions) {
    if (repetitions < 1) throw ShapeError("repetitions must be at least 1");
    using Clock = std::chrono::steady_clock;

    BenchStats stats;
    stats.repetitions = repetitions;
    std::vector<double> times;
    times.reserve(repetitions);

    for (std::size_t r = 0; r < repetitions; ++r) {
        KernelWorkspace ws;  // fresh per call so the footprint is the worst case
        auto t0 = Clock::now();
        Matrix a = variant == KernelVariant::kElementwise
                       ? ttmctc_elementwise(x, u, mode, nullptr, &ws)
                       : ttmctc_matrix(x, u, mode, &ws);
        times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
        stats.peak_slots = std::max(stats.peak_slots, ws.meter.peak_slots());
        stats.largest_alloc_slots =
            std::max(stats.largest_alloc_slots, ws.meter.largest_single_slots());
        if (a.data.empty()) throw Error("bench: kernel produced an empty result");
    }

    std::sort(times.begin(), times.end());
    stats.min_s = times.front();
    stats.max_s = times.back();
    std::size_t mid = times.size() / 2;
    stats.median_s = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    return stats;
}

}  // namespace tucker
