#include "doctest.h"

#include "countgauss/geometry.hpp"
#include "countgauss/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace cg;

TEST_CASE("generate_separable: construction identities") {
    SeededRng rng(60);
    auto inst = generate_separable(10, 30, 4, rng);
    REQUIRE(inst.anchors == std::vector<index_t>{0, 1, 2, 3});
    REQUIRE(inst.h_true.has_value());
    // X = X_I * H exactly (within accumulation noise)
    CHECK(relative_error(inst.x, inst.anchors, *inst.h_true) <= 1e-12);
    // anchor columns of H are unit basis vectors
    for (index_t j = 0; j < 4; ++j)
        for (index_t i = 0; i < 4; ++i) CHECK((*inst.h_true)(i, j) == (i == j ? 1.0 : 0.0));
    // non-anchor mixing weights are convex
    for (index_t j = 4; j < 30; ++j) {
        double sum = 0;
        for (index_t i = 0; i < 4; ++i) {
            CHECK((*inst.h_true)(i, j) >= 0.0);
            sum += (*inst.h_true)(i, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(generate_separable(3, 30, 4, rng), std::invalid_argument);
}

TEST_CASE("generate_separable: k = n makes every column an anchor") {
    SeededRng rng(61);
    auto inst = generate_separable(6, 4, 4, rng);
    CHECK(inst.x.cols() == 4);
    auto ext = extreme_points_bruteforce(inst.x);
    CHECK(ext == inst.anchors);
}

TEST_CASE("generate_separable accepts the full experiment shape") {
    SeededRng rng(62);
    auto inst = generate_separable(1000, 500, 20, rng);
    CHECK(inst.x.rows() == 1000);
    CHECK(inst.x.cols() == 500);
    CHECK(inst.x.all_finite());
}

TEST_CASE("generate_noisy_polytope: counts and midpoint identity") {
    SeededRng rng(63);
    auto inst = generate_noisy_polytope(25, 20, 0.0, rng);
    CHECK(inst.x.cols() == 210); // 20 + 190 midpoints
    // noiseless: every midpoint column is the average of its two vertices
    index_t col = 20;
    for (index_t a = 0; a < 20; ++a)
        for (index_t b = a + 1; b < 20; ++b) {
            for (index_t i = 0; i < 25; ++i)
                CHECK(inst.x(i, col) == doctest::Approx(0.5 * (inst.x(i, a) + inst.x(i, b))).epsilon(1e-15));
            ++col;
        }
    SeededRng rng2(64);
    auto noisy = generate_noisy_polytope(25, 6, 0.3, rng2);
    CHECK(noisy.noise_sigma == 0.3);
    CHECK_FALSE(noisy.h_true.has_value());
}

TEST_CASE("cg_nmf/gp_nmf: identity columns are all recovered with enough rows") {
    const index_t k = 6;
    DenseMatrix x = DenseMatrix::identity(k);
    SeededRng r1(65), r2(66);
    AnchorSet cg = cg_nmf(x, 40, 200, r1);
    AnchorSet gp = gp_nmf(x, 40, r2);
    std::vector<index_t> want(k);
    for (index_t i = 0; i < k; ++i) want[static_cast<std::size_t>(i)] = i;
    CHECK(cg.contains_all(want));
    CHECK(gp.contains_all(want));
    CHECK_THROWS_AS(cg_nmf(x, 0, 10, r1), std::invalid_argument);
    CHECK_THROWS_AS(gp_nmf(x, 0, r2), std::invalid_argument);
}

TEST_CASE("identity columns: coverage frequency beats 1 - 2*delta") {
    // X = I_k with m = ceil(kappa k ln(k/delta)) projections covers every
    // column with empirical frequency at least 1 - 2*delta.
    const index_t k = 5;
    const double delta = 0.25;
    const index_t m = static_cast<index_t>(std::ceil(k * std::log(k / delta)));
    DenseMatrix x = DenseMatrix::identity(k);
    std::vector<index_t> want(k);
    for (index_t i = 0; i < k; ++i) want[static_cast<std::size_t>(i)] = i;
    const int trials = 200;
    int cg_hits = 0, gp_hits = 0;
    for (int t = 0; t < trials; ++t) {
        SeededRng r1(mix64(655, static_cast<std::uint64_t>(t)));
        SeededRng r2(mix64(656, static_cast<std::uint64_t>(t)));
        cg_hits += cg_nmf(x, m, 5 * m, r1).contains_all(want);
        gp_hits += gp_nmf(x, m, r2).contains_all(want);
    }
    CHECK(static_cast<double>(cg_hits) / trials >= 1.0 - 2.0 * delta);
    CHECK(static_cast<double>(gp_hits) / trials >= 1.0 - 2.0 * delta);
}

TEST_CASE("noiseless instances only ever surface anchors") {
    for (int t = 0; t < 100; ++t) {
        SeededRng rng(mix64(670, static_cast<std::uint64_t>(t)));
        auto inst = generate_separable(20, 50, 5, rng);
        SeededRng r1(mix64(680, static_cast<std::uint64_t>(t)));
        SeededRng r2(mix64(690, static_cast<std::uint64_t>(t)));
        AnchorSet cg = cg_nmf(inst.x, 8, 40, r1);
        AnchorSet gp = gp_nmf(inst.x, 8, r2);
        CHECK(cg.subset_of(inst.anchors));
        CHECK(gp.subset_of(inst.anchors));
    }
}

TEST_CASE("noiseless polytope: cg union stays within the vertices") {
    for (int t = 0; t < 20; ++t) {
        SeededRng rng(mix64(700, static_cast<std::uint64_t>(t)));
        auto inst = generate_noisy_polytope(15, 6, 0.0, rng);
        SeededRng r1(mix64(710, static_cast<std::uint64_t>(t)));
        AnchorSet cg = cg_nmf(inst.x, 10, 50, r1);
        CHECK(cg.subset_of(inst.anchors));
    }
}

TEST_CASE("gp_nmf covers a pentagon with m = 50 rows") {
    // Per-vertex solid angle is 1/5; the chance of a miss is at most
    // 5*(4/5)^50 ~ 7e-5, so five fixed seeds must all cover.
    PolytopeSpec pent = regular_polygon(5, 2);
    std::vector<index_t> want = {0, 1, 2, 3, 4};
    for (int t = 0; t < 5; ++t) {
        SeededRng rng(mix64(720, static_cast<std::uint64_t>(t)));
        AnchorSet got = gp_nmf(pent.vertices, 50, rng);
        CHECK(got.contains_all(want));
    }
}

TEST_CASE("cg/gp success-rate parity on a small grid") {
    const index_t d = 80, n = 60, k = 6;
    const index_t m = 20, buckets = 100;
    const int trials = 60;
    int cg_ok = 0, gp_ok = 0;
    for (int t = 0; t < trials; ++t) {
        SeededRng inst_rng(mix64(730, static_cast<std::uint64_t>(t)));
        auto inst = generate_separable(d, n, k, inst_rng);
        SeededRng r1(mix64(740, static_cast<std::uint64_t>(t)));
        SeededRng r2(mix64(750, static_cast<std::uint64_t>(t)));
        cg_ok += cg_nmf(inst.x, m, buckets, r1).contains_all(inst.anchors);
        gp_ok += gp_nmf(inst.x, m, r2).contains_all(inst.anchors);
    }
    CHECK(std::abs(cg_ok - gp_ok) <= 0.15 * trials);
}

TEST_CASE("spa: hand-executed recursion") {
    DenseMatrix x(2, 3);
    x(0, 0) = 1.0;               // e1
    x(1, 1) = 1.0;               // e2
    x(0, 2) = 0.5;
    x(1, 2) = 0.5;               // midpoint
    auto got = spa(x, 2);
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<index_t>{0, 1});
}

TEST_CASE("spa: exact on noiseless separable data, ties resolved low") {
    for (int t = 0; t < 20; ++t) {
        SeededRng rng(mix64(760, static_cast<std::uint64_t>(t)));
        auto inst = generate_separable(12, 40, 5, rng);
        auto got = spa(inst.x, 5);
        std::sort(got.begin(), got.end());
        CHECK(got == inst.anchors);
    }
    // duplicate anchors: one representative per direction, lowest index wins
    DenseMatrix x(4, 4);
    x(0, 0) = 1.0;
    x(0, 1) = 1.0; // duplicate of column 0
    x(1, 2) = 2.0;
    x(0, 3) = 0.0;
    auto got = spa(x, 2);
    CHECK(got == std::vector<index_t>{2, 0});
    CHECK_THROWS_AS(spa(x, 4), SpaRankDeficiency); // rank 2 < 4 selections
}

TEST_CASE("xray: first pick, exactness, preconditions") {
    DenseMatrix dom(3, 3);
    dom(0, 0) = 10.0;
    dom(1, 0) = 10.0;
    dom(2, 0) = 10.0;
    dom(0, 1) = 0.1;
    dom(1, 2) = 0.2;
    auto first = xray(dom, 1);
    CHECK(first.indices == std::vector<index_t>{0});

    for (int t = 0; t < 20; ++t) {
        SeededRng rng(mix64(770, static_cast<std::uint64_t>(t)));
        auto inst = generate_separable(12, 40, 5, rng);
        auto got = xray(inst.x, 5);
        std::sort(got.indices.begin(), got.indices.end());
        CHECK_FALSE(got.truncated);
        CHECK(got.indices == inst.anchors);
    }

    DenseMatrix neg(2, 2);
    neg(0, 0) = -1.0;
    CHECK_THROWS_AS(xray(neg, 1), std::invalid_argument);

    // residual vanishes early: rank-1 nonnegative data, k = 3
    DenseMatrix rank1(3, 4);
    for (index_t j = 0; j < 4; ++j)
        for (index_t i = 0; i < 3; ++i) rank1(i, j) = static_cast<double>(j + 1);
    auto trunc = xray(rank1, 3);
    CHECK(trunc.truncated);
    CHECK(trunc.indices.size() < 3);
}

TEST_CASE("nnls_solve: identity fit, boundary solution, nonnegativity") {
    SeededRng rng(78);
    DenseMatrix a = gaussian_matrix(6, 3, rng);
    DenseMatrix h = nnls_solve(a, a);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 3; ++j)
            CHECK(h(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-6));

    // Y = -A with A >= 0 pins the solution at the origin.
    DenseMatrix pos(4, 2);
    for (index_t i = 0; i < pos.size(); ++i) pos.data()[i] = 0.5 + rng.next_uniform();
    DenseMatrix negy(4, 2);
    for (index_t i = 0; i < negy.size(); ++i) negy.data()[i] = -pos.data()[i];
    DenseMatrix h0 = nnls_solve(pos, negy);
    CHECK(max_abs(h0) == 0.0);

    DenseMatrix zero_col(4, 2);
    zero_col(0, 0) = 1.0; // column 1 is all zero
    CHECK_THROWS_AS(nnls_solve(zero_col, pos), std::invalid_argument);
}

TEST_CASE("nnls_solve: separable reconstruction reaches 1e-6 relative") {
    SeededRng rng(79);
    auto inst = generate_separable(15, 40, 5, rng);
    DenseMatrix anchors = take_columns(inst.x, inst.anchors);
    DenseMatrix h = nnls_solve(anchors, inst.x);
    for (index_t i = 0; i < h.size(); ++i) CHECK(h.data()[i] >= 0.0);
    CHECK(relative_error(inst.x, inst.anchors, h) <= 1e-6);
}

TEST_CASE("relative_error edge cases and anchor-count monotonicity") {
    SeededRng rng(80);
    auto inst = generate_separable(10, 25, 4, rng);
    // the generator's exact factorization reconstructs to roundoff
    CHECK(relative_error(inst.x, inst.anchors, *inst.h_true) <= 1e-12);

    DenseMatrix hz(4, 25);
    CHECK(relative_error(inst.x, inst.anchors, hz) == doctest::Approx(1.0)); // H = 0

    DenseMatrix zero(3, 3);
    CHECK_THROWS_AS(relative_error(zero, {0}, DenseMatrix(1, 3)), std::invalid_argument);

    // appending anchors never increases the error
    double prev = 2.0;
    std::vector<index_t> prefix;
    for (index_t idx : inst.anchors) {
        prefix.push_back(idx);
        DenseMatrix basis = take_columns(inst.x, prefix);
        DenseMatrix hh = nnls_solve(basis, inst.x);
        double err = relative_error(inst.x, prefix, hh);
        CHECK(err <= prev + 1e-9);
        prev = err;
    }
}
