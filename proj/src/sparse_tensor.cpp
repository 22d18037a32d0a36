#include "tucker/sparse_tensor.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "tucker/errors.hpp"

namespace tucker {

SparseTensor::SparseTensor(std::vector<std::size_t> dims,
                           std::vector<index_t> coords,
                           std::vector<double> values)
    : dims_(std::move(dims)), coords_(std::move(coords)), values_(std::move(values)) {
    const std::size_t n = dims_.size();
    if (n == 0) throw ShapeError("sparse tensor needs at least one mode");
    for (std::size_t d : dims_) {
        if (d == 0) throw ShapeError("zero extent");
    }
    if (coords_.size() != values_.size() * n)
        throw ShapeError("coordinate array does not match entry count");
    for (std::size_t e = 0; e < values_.size(); ++e) {
        for (std::size_t m = 0; m < n; ++m) {
            if (coords_[e * n + m] >= dims_[m])
                throw RangeError("coordinate " + std::to_string(coords_[e * n + m]) +
                                 " out of range for mode " + std::to_string(m + 1) +
                                 " (extent " + std::to_string(dims_[m]) + ")");
        }
        if (!std::isfinite(values_[e]))
            throw ValueError("non-finite value at entry " + std::to_string(e));
    }
    normalize_entries();
    build_mode_buckets();
}

void SparseTensor::normalize_entries() {
    const std::size_t n = dims_.size();
    const std::size_t count = values_.size();
    std::vector<std::size_t> perm(count);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const index_t* c = coords_.data();
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(c + a * n, c + (a + 1) * n,
                                            c + b * n, c + (b + 1) * n);
    });

    std::vector<index_t> sorted_coords;
    std::vector<double> sorted_values;
    sorted_coords.reserve(coords_.size());
    sorted_values.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
        const index_t* row = c + perm[p] * n;
        bool dup = !sorted_values.empty() &&
                   std::equal(row, row + n, sorted_coords.end() - n);
        if (dup) {
            sorted_values.back() += values_[perm[p]];  // duplicates summed
        } else {
            sorted_coords.insert(sorted_coords.end(), row, row + n);
            sorted_values.push_back(values_[perm[p]]);
        }
    }
    coords_ = std::move(sorted_coords);
    values_ = std::move(sorted_values);
}

void SparseTensor::build_mode_buckets() {
    const std::size_t n = dims_.size();
    if (n == 0) return;
    buckets_.assign(n, ModeBuckets{});
    for (std::size_t m = 0; m < n; ++m) {
        ModeBuckets& b = buckets_[m];
        b.offsets.assign(dims_[m] + 1, 0);
        for (std::size_t e = 0; e < values_.size(); ++e)
            ++b.offsets[coord(e, m) + 1];
        for (std::size_t i = 0; i < dims_[m]; ++i)
            b.offsets[i + 1] += b.offsets[i];
        b.entries.resize(values_.size());
        std::vector<std::size_t> cursor(b.offsets.begin(), b.offsets.end() - 1);
        for (std::size_t e = 0; e < values_.size(); ++e)
            b.entries[cursor[coord(e, m)]++] = e;
    }
}

double norm_sq(const SparseTensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return s;
}

namespace {

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char ch) { return std::isspace(ch); });
}

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::uint64_t parse_index(std::string_view tok, std::size_t line_no) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError("expected an integer index, got '" + std::string(tok) + "'",
                         line_no);
    return v;
}

double parse_value(std::string_view tok, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError("expected a real value, got '" + std::string(tok) + "'",
                         line_no);
    return v;
}

}  // namespace

SparseTensor load_tns(std::istream& in,
                      std::optional<std::vector<std::size_t>> dims_override) {
    std::vector<std::size_t> header_dims;
    std::vector<index_t> coords;
    std::vector<double> values;
    std::vector<std::size_t> observed_max;

    std::size_t order = dims_override ? dims_override->size() : 0;
    std::string line;
    std::size_t line_no = 0;
    bool saw_content = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || is_blank(line)) continue;

        if (!saw_content && line.rfind("dims:", 0) == 0) {
            saw_content = true;
            auto toks = split_tokens(std::string_view(line).substr(5));
            if (toks.empty()) throw ParseError("empty dims header", line_no);
            for (auto t : toks) {
                std::uint64_t d = parse_index(t, line_no);
                if (d == 0) throw RangeError("line " + std::to_string(line_no) +
                                             ": extent must be at least 1");
                header_dims.push_back(static_cast<std::size_t>(d));
            }
            if (order != 0 && header_dims.size() != order)
                throw ParseError("dims header order does not match override", line_no);
            if (order == 0) order = header_dims.size();
            observed_max.assign(order, 0);
            continue;
        }
        saw_content = true;

        auto toks = split_tokens(line);
        if (order == 0) {
            if (toks.size() < 2)
                throw ParseError("entry line needs at least one index and a value",
                                 line_no);
            order = toks.size() - 1;
            observed_max.assign(order, 0);
        }
        if (toks.size() != order + 1)
            throw ParseError("expected " + std::to_string(order + 1) +
                                 " fields, got " + std::to_string(toks.size()),
                             line_no);
        if (observed_max.empty()) observed_max.assign(order, 0);

        for (std::size_t m = 0; m < order; ++m) {
            std::uint64_t idx = parse_index(toks[m], line_no);
            if (idx < 1)
                throw RangeError("line " + std::to_string(line_no) +
                                 ": indices are 1-based, got " + std::to_string(idx));
            if (idx - 1 > std::numeric_limits<index_t>::max())
                throw RangeError("line " + std::to_string(line_no) + ": index " +
                                 std::to_string(idx) + " too large");
            coords.push_back(static_cast<index_t>(idx - 1));
            observed_max[m] = std::max(observed_max[m], static_cast<std::size_t>(idx));
        }
        double v = parse_value(toks[order], line_no);
        if (!std::isfinite(v))
            throw ValueError("line " + std::to_string(line_no) + ": non-finite value");
        values.push_back(v);
    }

    std::vector<std::size_t> dims;
    if (dims_override)
        dims = *dims_override;
    else if (!header_dims.empty())
        dims = header_dims;
    else if (!observed_max.empty())
        dims = observed_max;
    else
        throw ParseError("no entries and no dims header; cannot infer tensor order");

    for (std::size_t& d : dims)
        if (d == 0) d = 1;  // empty tensor with inferred extents

    return SparseTensor(std::move(dims), std::move(coords), std::move(values));
}

SparseTensor load_tns_file(const std::string& path,
                           std::optional<std::vector<std::size_t>> dims_override) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return load_tns(in, std::move(dims_override));
}

void write_tns(std::ostream& out, const SparseTensor& x) {
    out << "dims:";
    for (std::size_t d : x.dims()) out << ' ' << d;
    out << '\n';
    char buf[64];
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        for (std::size_t m = 0; m < x.order(); ++m)
            out << (x.coord(e, m) + 1) << ' ';
        std::snprintf(buf, sizeof(buf), "%.17g", x.value(e));
        out << buf << '\n';
    }
}

void write_tns_file(const std::string& path, const SparseTensor& x) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_tns(out, x);
}

}  // namespace tucker
