#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tucker {

using index_t = std::uint32_t;

// Coordinate-format sparse tensor.
//
// Entries are normalized on construction: coordinates validated against the
// extents, duplicates summed, the entry list sorted lexicographically, and
// per-mode buckets built. After that the object is immutable and safe to
// share read-only across threads.
class SparseTensor {
public:
    // CSR-style grouping of entry positions by their mode-n index:
    // entries[offsets[i] .. offsets[i+1]) are the positions whose mode-n
    // coordinate equals i.
    struct ModeBuckets {
        std::vector<std::size_t> offsets;  // length I_n + 1
        std::vector<std::size_t> entries;  // length nnz

        std::size_t bucket_size(std::size_t i) const {
            return offsets[i + 1] - offsets[i];
        }
    };

    SparseTensor() = default;

    // coords holds one row of `order` indices per entry, matching values.
    SparseTensor(std::vector<std::size_t> dims, std::vector<index_t> coords,
                 std::vector<double> values);

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t nnz() const { return values_.size(); }

    double value(std::size_t e) const { return values_[e]; }
    const std::vector<double>& values() const { return values_; }
    index_t coord(std::size_t e, std::size_t mode) const {
        return coords_[e * dims_.size() + mode];
    }
    const index_t* coord_row(std::size_t e) const {
        return coords_.data() + e * dims_.size();
    }

    // Populates mode_buckets for all modes. Idempotent; called by the
    // constructor, exposed for deserialized/default-constructed instances.
    void build_mode_buckets();
    bool buckets_built() const { return buckets_.size() == dims_.size() && !dims_.empty(); }
    const ModeBuckets& mode_bucket(std::size_t mode) const { return buckets_[mode]; }

private:
    void normalize_entries();

    std::vector<std::size_t> dims_;
    std::vector<index_t> coords_;
    std::vector<double> values_;
    std::vector<ModeBuckets> buckets_;
};

// Sum of squared entry values (squared Frobenius norm).
double norm_sq(const SparseTensor& x);

// Reads the whitespace-separated text format: optional '#' comment lines,
// an optional "dims: I_1 ... I_N" line, then one entry per line as N
// 1-based indices followed by a real value. Indices are converted to
// 0-based in memory. dims_override (e.g. from the CLI) wins over both the
// header and the observed maxima.
SparseTensor load_tns(std::istream& in,
                      std::optional<std::vector<std::size_t>> dims_override = {});
SparseTensor load_tns_file(const std::string& path,
                           std::optional<std::vector<std::size_t>> dims_override = {});

// Writes the same format, always with an explicit dims header.
void write_tns(std::ostream& out, const SparseTensor& x);
void write_tns_file(const std::string& path, const SparseTensor& x);

}  // namespace tucker
