#include "tucker/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "tucker/errors.hpp"

namespace tucker {

namespace {

void check_factors(const SparseTensor& x, const FactorSet& u) {
    if (u.order() != x.order())
        throw ShapeError("factor count does not match tensor order");
    for (std::size_t n = 0; n < x.order(); ++n) {
        if (u.factors[n].rows != x.dims()[n])
            throw ShapeError("factor " + std::to_string(n + 1) + " has " +
                             std::to_string(u.factors[n].rows) + " rows, tensor extent is " +
                             std::to_string(x.dims()[n]));
        if (u.factors[n].cols == 0) throw ShapeError("factor with zero columns");
    }
}

std::vector<std::size_t> factor_ranks(const FactorSet& u) {
    std::vector<std::size_t> ranks(u.order());
    for (std::size_t n = 0; n < u.order(); ++n) ranks[n] = u.factors[n].cols;
    return ranks;
}

// metered vector helper: records the buffer size with the workspace meter
// for the duration of the call
template <class T>
void acquire_resize(std::vector<T>& v, std::size_t n, WorkspaceMeter* meter) {
    if (meter) meter->acquire(n * sizeof(T));
    v.resize(n);
}

}  // namespace

CoreTensor ttmc_core(const SparseTensor& x, const FactorSet& u) {
    check_factors(x, u);
    const std::size_t order = x.order();
    CoreTensor g(factor_ranks(u));
    const std::vector<std::size_t>& ranks = g.ranks;

    std::vector<const double*> w(order);
    std::vector<std::size_t> stride(order, 1);
    for (std::size_t v = order; v-- > 1;) stride[v - 1] = stride[v] * ranks[v];

    const std::size_t last = order - 1;
    const std::size_t klast = ranks[last];
    std::vector<std::size_t> idx(order, 0);

    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const double xv = x.value(e);
        const index_t* c = x.coord_row(e);
        for (std::size_t v = 0; v < order; ++v) w[v] = u.factors[v].row(c[v]);

        std::fill(idx.begin(), idx.end(), std::size_t{0});
        for (;;) {
            double p = xv;
            std::size_t base = 0;
            for (std::size_t v = 0; v < last; ++v) {
                p *= w[v][idx[v]];
                base += idx[v] * stride[v];
            }
            double* gb = g.data.data() + base;
            const double* wl = w[last];
            for (std::size_t k = 0; k < klast; ++k) gb[k] += p * wl[k];

            if (order == 1) break;
            std::size_t v = last;
            while (v-- > 0) {
                if (++idx[v] < ranks[v]) break;
                idx[v] = 0;
                if (v == 0) goto next_entry;
            }
            continue;
        next_entry:
            break;
        }
    }
    return g;
}

Matrix ttmctc_elementwise(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                          const CoreTensor* precomputed_core, KernelWorkspace* ws) {
    check_factors(x, u);
    const std::size_t order = x.order();
    if (mode >= order) throw RangeError("ttmctc: mode out of range");

    std::vector<std::size_t> ranks = factor_ranks(u);
    CoreTensor local_core;
    const CoreTensor* g = precomputed_core;
    if (g) {
        if (g->ranks != ranks)
            throw ShapeError("precomputed core ranks do not match the factors");
    } else {
        local_core = ttmc_core(x, u);
        g = &local_core;
    }

    WorkspaceMeter* meter = ws ? &ws->meter : nullptr;
    if (meter && !precomputed_core) meter->acquire(g->size() * sizeof(double));

    const std::size_t rows = x.dims()[mode];
    const std::size_t kn = ranks[mode];
    if (meter) meter->acquire(rows * kn * sizeof(double));
    Matrix a(rows, kn);

    std::vector<const double*> w(order);
    std::vector<std::size_t> stride(order, 1);
    for (std::size_t v = order; v-- > 1;) stride[v - 1] = stride[v] * ranks[v];

    const std::size_t last = order - 1;
    const std::size_t klast = ranks[last];
    std::vector<std::size_t> idx(order, 0);

    // nonzeros outermost, rank tuples inner; the inner sweep over the last
    // mode runs contiguously through the core
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const double xv = x.value(e);
        const index_t* c = x.coord_row(e);
        for (std::size_t v = 0; v < order; ++v) w[v] = u.factors[v].row(c[v]);
        double* arow = a.row(c[mode]);

        std::fill(idx.begin(), idx.end(), std::size_t{0});
        for (;;) {
            double p = xv;
            std::size_t base = 0;
            for (std::size_t v = 0; v < last; ++v) {
                if (v != mode) p *= w[v][idx[v]];
                base += idx[v] * stride[v];
            }
            const double* gb = g->data.data() + base;
            if (mode == last) {
                for (std::size_t k = 0; k < klast; ++k) arow[k] += p * gb[k];
            } else {
                const double* wl = w[last];
                double s = 0.0;
                for (std::size_t k = 0; k < klast; ++k) s += wl[k] * gb[k];
                arow[idx[mode]] += p * s;
            }

            if (order == 1) break;
            std::size_t v = last;
            while (v-- > 0) {
                if (++idx[v] < ranks[v]) break;
                idx[v] = 0;
                if (v == 0) goto next_entry;
            }
            continue;
        next_entry:
            break;
        }
    }

    if (meter) {
        if (!precomputed_core) meter->release(g->size() * sizeof(double));
        meter->release(rows * kn * sizeof(double));
    }
    return a;
}

Matrix ttmctc_matrix(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                     KernelWorkspace* ws) {
    check_factors(x, u);
    const std::size_t order = x.order();
    if (mode >= order) throw RangeError("ttmctc: mode out of range");

    KernelWorkspace local;
    if (!ws) ws = &local;
    WorkspaceMeter* meter = &ws->meter;

    const std::size_t rows = x.dims()[mode];
    const std::size_t kn = u.factors[mode].cols;
    const Matrix& un = u.factors[mode];

    meter->acquire(rows * kn * sizeof(double));
    Matrix a(rows, kn);

    acquire_resize(ws->column, rows, meter);
    acquire_resize(ws->stamp, rows, meter);
    std::fill(ws->stamp.begin(), ws->stamp.end(), std::uint32_t{0});
    if (meter) meter->acquire(rows * sizeof(std::size_t));  // touched, worst case
    ws->touched.clear();
    ws->touched.reserve(std::min(rows, x.nnz()));
    std::vector<double> wrow;
    acquire_resize(wrow, kn, meter);

    // modes participating in the column multi-index, ascending; the odometer
    // below advances the last of them fastest
    std::vector<std::size_t> cmodes;
    for (std::size_t v = 0; v < order; ++v)
        if (v != mode) cmodes.push_back(v);
    std::vector<std::size_t> kidx(cmodes.size(), 0);
    std::vector<const double*> ucol(order, nullptr);
    std::vector<std::size_t> ustride(order, 0);
    for (std::size_t v : cmodes) {
        ucol[v] = u.factors[v].data.data();
        ustride[v] = u.factors[v].cols;
    }

    double* y = ws->column.data();
    std::uint32_t colid = 0;

    for (;;) {
        ++colid;
        ws->touched.clear();

        // y = X x_{-n} (selected factor columns), sparse mode product
        for (std::size_t e = 0; e < x.nnz(); ++e) {
            const index_t* c = x.coord_row(e);
            double val = x.value(e);
            for (std::size_t j = 0; j < cmodes.size(); ++j) {
                std::size_t v = cmodes[j];
                val *= ucol[v][c[v] * ustride[v] + kidx[j]];
            }
            std::size_t i = c[mode];
            if (ws->stamp[i] != colid) {
                ws->stamp[i] = colid;
                y[i] = 0.0;
                ws->touched.push_back(i);
            }
            y[i] += val;
        }

        // A += y (y^T U^(n)); y is zero off the touched rows
        std::fill(wrow.begin(), wrow.end(), 0.0);
        for (std::size_t i : ws->touched) {
            double yi = y[i];
            const double* ur = un.row(i);
            for (std::size_t k = 0; k < kn; ++k) wrow[k] += yi * ur[k];
        }
        for (std::size_t i : ws->touched) {
            double yi = y[i];
            double* ar = a.row(i);
            for (std::size_t k = 0; k < kn; ++k) ar[k] += yi * wrow[k];
        }

        if (cmodes.empty()) break;
        std::size_t j = cmodes.size();
        bool done = false;
        while (j-- > 0) {
            if (++kidx[j] < u.factors[cmodes[j]].cols) break;
            kidx[j] = 0;
            if (j == 0) done = true;
        }
        if (done) break;
        if (colid == UINT32_MAX) {  // stamp epoch wrap
            std::fill(ws->stamp.begin(), ws->stamp.end(), std::uint32_t{0});
            colid = 0;
        }
    }

    meter->release(rows * kn * sizeof(double));
    meter->release(rows * sizeof(double));
    meter->release(rows * sizeof(std::uint32_t));
    meter->release(rows * sizeof(std::size_t));
    meter->release(kn * sizeof(double));
    return a;
}

Matrix ttmc_unfold_dense(const SparseTensor& x, const FactorSet& u, std::size_t mode,
                         std::size_t capacity_cap) {
    check_factors(x, u);
    const std::size_t order = x.order();
    if (mode >= order) throw RangeError("ttmc_unfold_dense: mode out of range");

    const std::size_t rows = x.dims()[mode];
    std::size_t ncols = 1;
    for (std::size_t v = 0; v < order; ++v)
        if (v != mode) ncols *= u.factors[v].cols;
    if (ncols != 0 && rows > capacity_cap / ncols)
        throw CapacityError("dense unfolding of " + std::to_string(rows) + " x " +
                            std::to_string(ncols) +
                            " exceeds the capacity cap; this path is desk-scale only");

    Matrix y(rows, ncols);

    std::vector<std::size_t> cmodes;
    for (std::size_t v = 0; v < order; ++v)
        if (v != mode) cmodes.push_back(v);

    std::vector<const double*> w(order, nullptr);
    std::vector<std::size_t> kidx;

    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const double xv = x.value(e);
        const index_t* c = x.coord_row(e);
        for (std::size_t v : cmodes) w[v] = u.factors[v].row(c[v]);
        double* yrow = y.row(c[mode]);

        if (cmodes.empty()) {
            yrow[0] += xv;
            continue;
        }
        // odometer over the column modes, last fastest; the column index is
        // sequential by construction
        kidx.assign(cmodes.size(), 0);
        std::size_t col = 0;
        const std::size_t lastj = cmodes.size() - 1;
        const double* wl = w[cmodes[lastj]];
        const std::size_t klast = u.factors[cmodes[lastj]].cols;
        for (;;) {
            double p = xv;
            for (std::size_t j = 0; j < lastj; ++j) p *= w[cmodes[j]][kidx[j]];
            for (std::size_t k = 0; k < klast; ++k) yrow[col + k] += p * wl[k];
            col += klast;

            if (lastj == 0) break;
            std::size_t j = lastj;
            bool done = false;
            while (j-- > 0) {
                if (++kidx[j] < u.factors[cmodes[j]].cols) break;
                kidx[j] = 0;
                if (j == 0) done = true;
            }
            if (done) break;
        }
    }
    return y;
}

Matrix densify_unfold(const SparseTensor& x, std::size_t mode,
                      std::size_t capacity_cap) {
    const std::size_t order = x.order();
    if (mode >= order) throw RangeError("densify_unfold: mode out of range");
    const std::size_t rows = x.dims()[mode];
    std::size_t ncols = 1;
    for (std::size_t v = 0; v < order; ++v)
        if (v != mode) ncols *= x.dims()[v];
    if (ncols != 0 && rows > capacity_cap / ncols)
        throw CapacityError("dense unfolding of " + std::to_string(rows) + " x " +
                            std::to_string(ncols) +
                            " exceeds the capacity cap; this path is desk-scale only");

    Matrix m(rows, ncols);
    std::vector<std::size_t> colstride = unfold_col_strides(x.dims(), mode);
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const index_t* c = x.coord_row(e);
        std::size_t col = 0;
        for (std::size_t v = 0; v < order; ++v)
            if (v != mode) col += c[v] * colstride[v];
        m(c[mode], col) += x.value(e);
    }
    return m;
}

}  // namespace tucker
