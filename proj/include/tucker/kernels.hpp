#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tucker/dense_core.hpp"
#include "tucker/sparse_tensor.hpp"

namespace tucker {

// Accounting for kernel-internal buffers, in 8-byte value slots. The point
// is to make the memory contract checkable: the matrix-variant TTMcTC must
// stay O(I_n * K_n) and never hold an I_n * (prod K / K_n) buffer.
struct WorkspaceMeter {
    std::size_t current_bytes = 0;
    std::size_t peak_bytes = 0;
    std::size_t largest_single_bytes = 0;

    void acquire(std::size_t bytes) {
        current_bytes += bytes;
        if (current_bytes > peak_bytes) peak_bytes = current_bytes;
        if (bytes > largest_single_bytes) largest_single_bytes = bytes;
    }
    void release(std::size_t bytes) {
        current_bytes -= bytes < current_bytes ? bytes : current_bytes;
    }
    void reset() { *this = WorkspaceMeter{}; }

    std::size_t peak_slots() const { return (peak_bytes + 7) / 8; }
    std::size_t largest_single_slots() const { return (largest_single_bytes + 7) / 8; }
};

// Reusable scratch for the TTMcTC kernels: one column buffer of length I_n
// plus the I_n x K_n accumulator. Total footprint stays O(I_n * K_n).
struct KernelWorkspace {
    std::vector<double> column;         // length I_n
    std::vector<std::uint32_t> stamp;   // column-membership marks, length I_n
    std::vector<std::size_t> touched;   // rows hit by the current column
    WorkspaceMeter meter;
};

// Core contraction G = X x {U^T}: G(k_1..k_N) = sum over nonzeros of
// x * prod_v U^(v)(i_v, k_v). Cost O(nnz * prod K), no dense I-sized
// intermediate.
CoreTensor ttmc_core(const SparseTensor& x, const FactorSet& u);

// A^(n) = Y_(n) G_(n)^T with Y = X x_{-n} {U^T}, computed element by
// element without materializing Y. Recomputes the core unless a
// precomputed one (for the current factors) is passed in. Cost
// O(nnz * prod K).
Matrix ttmctc_elementwise(const SparseTensor& x, const FactorSet& u,
                          std::size_t mode, const CoreTensor* precomputed_core = nullptr,
                          KernelWorkspace* ws = nullptr);

// Same result through the column recursion A^(n) += y y^T U^(n), one column
// y of Y_(n) at a time. Cost O(nnz * prod K / K_n + I_n * prod K); workspace
// bounded by O(I_n * K_n).
Matrix ttmctc_matrix(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                     KernelWorkspace* ws = nullptr);

constexpr std::size_t kDefaultCapacityCap = std::size_t{1} << 31;  // entries

// Dense mode-n unfolding of X x_{-n} {U^T}; the HOOI intermediate and the
// desk-scale oracle. Refuses allocations above the cap.
Matrix ttmc_unfold_dense(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                         std::size_t capacity_cap = kDefaultCapacityCap);

// Dense mode-n unfolding of X itself (used by the HOSVD initializer).
Matrix densify_unfold(const SparseTensor& x, std::size_t mode,
                      std::size_t capacity_cap = kDefaultCapacityCap);

}  // namespace tucker
