#include "doctest.h"

#include "countgauss/linalg.hpp"
#include "countgauss/svm.hpp"

#include <cmath>
#include <stdexcept>

using namespace cg;

namespace {

SvmProblem two_point_problem(double c) {
    SvmProblem p;
    p.c = c;
    p.x = DenseMatrix(2, 2);
    p.x(0, 0) = 1.0;  // (+1, 0) labeled +1
    p.x(1, 0) = -1.0; // (-1, 0) labeled -1
    p.y = {1.0, -1.0};
    return p;
}

DenseMatrix random_rotation(index_t d, SeededRng& rng) {
    return orthonormal_basis(gaussian_matrix(d, d, rng));
}

} // namespace

TEST_CASE("svm_dual_solve: two symmetric points give margin 1") {
    SvmSolution sol = svm_dual_solve(two_point_problem(500.0));
    CHECK(sol.w[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(sol.w[1]) <= 1e-12);
    CHECK(sol.objective == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.margin == doctest::Approx(1.0).epsilon(1e-9));
    for (double a : sol.alpha) {
        CHECK(a >= 0.0);
        CHECK(a <= 500.0);
    }
}

TEST_CASE("svm_dual_solve: single point closed form alpha* = min(C, 1/||x||^2)") {
    SvmProblem p;
    p.c = 100.0;
    p.x = DenseMatrix(1, 2);
    p.x(0, 0) = 1.0;
    p.y = {1.0};
    SvmSolution sol = svm_dual_solve(p);
    CHECK(p.one_class());
    CHECK(sol.alpha[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.w[0] == doctest::Approx(1.0).epsilon(1e-10));

    p.c = 0.25; // box binds below the unconstrained optimum
    SvmSolution clipped = svm_dual_solve(p);
    CHECK(clipped.alpha[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("svm_dual_solve: objective is nonnegative and nondecreasing across passes") {
    SeededRng rng(100);
    SvmProblem p = make_blobs(30, 12, 3, 2.0, 0.8, 10.0, rng);
    // run with an increasing pass budget; the deterministic cyclic solver must
    // show monotone objectives
    double prev = -1.0;
    for (int passes : {1, 2, 4, 8, 1000}) {
        SvmSolution sol = [&] {
            try {
                return svm_dual_solve(p, 1e-10, passes);
            } catch (const SvmConvergenceFailure&) {
                // rebuild the partial state by running with a loose tolerance
                return svm_dual_solve(p, 1e30, passes);
            }
        }();
        CHECK(sol.objective >= prev - 1e-12);
        CHECK(sol.objective >= 0.0);
        prev = sol.objective;
    }
}

TEST_CASE("svm_dual_solve: separable data satisfies the support-vector identity") {
    SeededRng rng(101);
    SvmProblem p = make_blobs(40, 10, 4, 3.0, 0.2, 1e6, rng);
    SvmSolution sol = svm_dual_solve(p, 1e-12, 100000);
    // min_i y_i <w, x_i> = 1 at the support vectors in the hard-margin regime
    double min_activation = 1e300;
    for (index_t i = 0; i < p.x.rows(); ++i) {
        double wx = 0;
        for (index_t j = 0; j < p.x.cols(); ++j)
            wx += sol.w[static_cast<std::size_t>(j)] * p.x(i, j);
        min_activation = std::min(min_activation, p.y[static_cast<std::size_t>(i)] * wx);
    }
    CHECK(min_activation == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scaling the data by c scales the margin by c") {
    SeededRng rng(102);
    SvmProblem p = make_blobs(24, 8, 3, 3.0, 0.3, 1e8, rng);
    SvmSolution base = svm_dual_solve(p, 1e-12, 200000);
    SvmProblem scaled = p;
    for (index_t i = 0; i < scaled.x.size(); ++i) scaled.x.data()[i] *= 2.5;
    SvmSolution big = svm_dual_solve(scaled, 1e-12, 200000);
    CHECK(big.margin == doctest::Approx(2.5 * base.margin).epsilon(1e-6));
    CHECK(big.objective == doctest::Approx(base.objective / (2.5 * 2.5)).epsilon(1e-6));
}

TEST_CASE("embedding_error: orthogonal, zero, and Gaussian trend") {
    SeededRng rng(103);
    SvmProblem p = make_blobs(20, 16, 3, 2.0, 1.0, 1.0, rng);

    DenseMatrix q = random_rotation(16, rng);
    CHECK(embedding_error(p.x, q) <= 1e-8);

    DenseMatrix zero(16, 8);
    CHECK(embedding_error(p.x, zero) == doctest::Approx(1.0).epsilon(1e-10));

    // scaled Gaussian error decreases with r
    double prev = 2.0;
    for (index_t r : {64, 512}) {
        double mean = 0;
        for (int t = 0; t < 5; ++t) {
            SeededRng rr(mix64(104, static_cast<std::uint64_t>(16 * r + t)));
            DenseMatrix g = gaussian_matrix(16, r, rr);
            const double s = 1.0 / std::sqrt(static_cast<double>(r));
            for (index_t i = 0; i < g.size(); ++i) g.data()[i] *= s;
            mean += embedding_error(p.x, g);
        }
        mean /= 5;
        CHECK(mean < prev);
        prev = mean;
    }

    DenseMatrix zx(4, 16);
    CHECK_THROWS_AS(embedding_error(zx, q), std::invalid_argument);
}

TEST_CASE("margin_preservation_check: rotation invariance and refusal") {
    SeededRng rng(105);
    SvmProblem p = make_blobs(30, 12, 3, 3.0, 0.5, 500.0, rng);

    DenseMatrix q = random_rotation(12, rng);
    MarginReport rep = margin_preservation_check(p, q);
    CHECK(rep.pass);
    CHECK(rep.gamma_proj == doctest::Approx(rep.gamma_orig).epsilon(1e-8));

    DenseMatrix zero(12, 6);
    CHECK_THROWS_AS(margin_preservation_check(p, zero), EmbeddingTooLossy);
}

TEST_CASE("margin bound holds whenever the embedding error is small") {
    int checked = 0;
    for (int t = 0; checked < 25 && t < 60; ++t) {
        SeededRng rng(mix64(106, static_cast<std::uint64_t>(t)));
        const index_t n = 6 + static_cast<index_t>(rng.next_below(20));
        const index_t d = 16 + static_cast<index_t>(rng.next_below(49));
        SvmProblem p = make_blobs(n, d, 2, 2.5, 0.6, 500.0, rng);
        const index_t r = 40 * d; // far above the numerical rank: e stays small
        DenseMatrix g = gaussian_matrix(d, r, rng);
        const double s = 1.0 / std::sqrt(static_cast<double>(r));
        for (index_t i = 0; i < g.size(); ++i) g.data()[i] *= s;
        if (embedding_error(p.x, g) > 0.3) continue;
        MarginReport rep = margin_preservation_check(p, g, 1e-11, 200000);
        CHECK(rep.pass);
        ++checked;
    }
    CHECK(checked == 25);
}

TEST_CASE("problem validation") {
    SvmProblem p = two_point_problem(1.0);
    p.y = {1.0};
    CHECK_THROWS_AS(svm_dual_solve(p), std::invalid_argument);
    p = two_point_problem(-1.0);
    CHECK_THROWS_AS(svm_dual_solve(p), std::invalid_argument);
    p = two_point_problem(1.0);
    p.y = {1.0, 3.0};
    CHECK_THROWS_AS(svm_dual_solve(p), std::invalid_argument);
}
