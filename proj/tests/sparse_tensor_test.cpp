#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "tucker/errors.hpp"
#include "tucker/harness.hpp"
#include "tucker/rng.hpp"
#include "tucker/sparse_tensor.hpp"
#include "oracles.hpp"

using namespace tucker;

TEST_CASE("load_tns: single entry") {
    std::istringstream in("1 1 1 2.5\n");
    SparseTensor x = load_tns(in);
    CHECK(x.order() == 3);
    CHECK(x.dims() == std::vector<std::size_t>{1, 1, 1});
    CHECK(x.nnz() == 1);
    CHECK(x.value(0) == 2.5);
    CHECK(x.coord(0, 0) == 0);
}

TEST_CASE("load_tns: duplicates are summed") {
    std::istringstream in("1 1 1 1.0\n1 1 1 2.0\n");
    SparseTensor x = load_tns(in);
    CHECK(x.nnz() == 1);
    CHECK(x.value(0) == doctest::Approx(3.0));
}

TEST_CASE("load_tns: comments, dims header, and overrides") {
    std::istringstream in("# comment\ndims: 4 5 6\n2 3 4 -1.5\n");
    SparseTensor x = load_tns(in);
    CHECK(x.dims() == std::vector<std::size_t>{4, 5, 6});
    CHECK(x.nnz() == 1);
    CHECK(x.coord(0, 0) == 1);  // 0-based in memory
    CHECK(x.coord(0, 2) == 3);

    std::istringstream in2("2 3 4 -1.5\n");
    SparseTensor y = load_tns(in2, std::vector<std::size_t>{10, 10, 10});
    CHECK(y.dims() == std::vector<std::size_t>{10, 10, 10});

    // without either, dims default to the observed maxima
    std::istringstream in3("2 3 4 -1.5\n1 1 1 1.0\n");
    SparseTensor z = load_tns(in3);
    CHECK(z.dims() == std::vector<std::size_t>{2, 3, 4});
}

TEST_CASE("load_tns: declared dims with the Last dataset shape") {
    std::vector<std::size_t> dims{2100, 18744, 12647};
    SparseTensor x = gen_synthetic(dims, 186479, 7);
    std::ostringstream out;
    write_tns(out, x);
    std::istringstream in(out.str());
    SparseTensor y = load_tns(in);
    CHECK(y.dims() == dims);
    CHECK(y.nnz() == 186479);
}

TEST_CASE("load_tns: error reporting") {
    std::istringstream wrong_count("1 1 2.5\n1 1 1 1 2.5\n");
    CHECK_THROWS_AS(load_tns(wrong_count), ParseError);
    try {
        std::istringstream in("1 1 1 1.0\n1 1 nope 2.5\n");
        load_tns(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }

    std::istringstream zero_index("0 1 1 2.5\n");
    CHECK_THROWS_AS(load_tns(zero_index), RangeError);

    std::istringstream nonfinite("1 1 1 nan\n");
    CHECK_THROWS_AS(load_tns(nonfinite), ValueError);

    std::istringstream beyond("3 1 1 1.0\n");
    CHECK_THROWS_AS(load_tns(beyond, std::vector<std::size_t>{2, 2, 2}), RangeError);

    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(load_tns(empty), ParseError);
}

TEST_CASE("norm_sq") {
    std::istringstream empty("dims: 2 2 2\n");
    CHECK(norm_sq(load_tns(empty)) == 0.0);

    std::istringstream one("1 1 1 3.0\n");
    CHECK(norm_sq(load_tns(one)) == doctest::Approx(9.0));

    SparseTensor x = gen_synthetic({5, 5, 5}, 20, 11);
    std::vector<double> dense = oracle::densify(x);
    CHECK(norm_sq(x) == doctest::Approx(oracle::sum_sq(dense)).epsilon(1e-12));
}

TEST_CASE("norm_sq is invariant under entry permutation") {
    SparseTensor x = gen_synthetic({6, 4, 5}, 30, 3);
    std::vector<index_t> coords;
    std::vector<double> values;
    for (std::size_t e = x.nnz(); e-- > 0;) {  // reversed order
        for (std::size_t m = 0; m < x.order(); ++m) coords.push_back(x.coord(e, m));
        values.push_back(x.value(e));
    }
    SparseTensor y(x.dims(), coords, values);
    CHECK(norm_sq(y) == norm_sq(x));
    // normalization also restores the sorted entry order
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        CHECK(y.value(e) == x.value(e));
        for (std::size_t m = 0; m < x.order(); ++m) CHECK(y.coord(e, m) == x.coord(e, m));
    }
}

TEST_CASE("mode buckets") {
    SUBCASE("single entry") {
        SparseTensor x({1, 2, 3}, {0, 1, 2}, {5.0});
        for (std::size_t m = 0; m < 3; ++m) {
            const auto& b = x.mode_bucket(m);
            std::size_t expect_i = x.coord(0, m);
            for (std::size_t i = 0; i < x.dims()[m]; ++i)
                CHECK(b.bucket_size(i) == (i == expect_i ? 1u : 0u));
        }
    }
    SUBCASE("shared mode-0 index") {
        SparseTensor x({6, 3, 3}, {4, 0, 0, 4, 2, 1}, {1.0, 2.0});
        CHECK(x.mode_bucket(0).bucket_size(4) == 2);
    }
    SUBCASE("bucket sizes sum to nnz and visit each entry once") {
        SparseTensor x = gen_synthetic({7, 9, 4, 3}, 50, 21);
        for (std::size_t m = 0; m < x.order(); ++m) {
            const auto& b = x.mode_bucket(m);
            std::size_t total = 0;
            std::vector<int> seen(x.nnz(), 0);
            for (std::size_t i = 0; i < x.dims()[m]; ++i) {
                total += b.bucket_size(i);
                for (std::size_t p = b.offsets[i]; p < b.offsets[i + 1]; ++p) {
                    std::size_t e = b.entries[p];
                    CHECK(x.coord(e, m) == i);
                    ++seen[e];
                }
            }
            CHECK(total == x.nnz());
            CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        }
    }
    SUBCASE("build is idempotent") {
        SparseTensor x = gen_synthetic({5, 5, 5}, 12, 2);
        auto before = x.mode_bucket(1).entries;
        x.build_mode_buckets();
        CHECK(x.mode_bucket(1).entries == before);
    }
}

TEST_CASE("tns round-trip preserves the entry set") {
    SparseTensor x = gen_synthetic({12, 8, 15}, 64, 99);
    std::ostringstream out;
    write_tns(out, x);
    std::istringstream in(out.str());
    SparseTensor y = load_tns(in);
    REQUIRE(y.nnz() == x.nnz());
    CHECK(y.dims() == x.dims());
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        CHECK(y.value(e) == x.value(e));  // %.17g round-trips doubles exactly
        for (std::size_t m = 0; m < x.order(); ++m)
            CHECK(y.coord(e, m) == x.coord(e, m));
    }
}
