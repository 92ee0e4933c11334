#include "countgauss/geometry.hpp"

#include "countgauss/nmf.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cg {

PolytopeSpec regular_polygon(index_t sides, index_t ambient_dim) {
    if (sides < 3) throw std::invalid_argument("regular_polygon: need at least 3 vertices");
    if (ambient_dim < 2) throw std::invalid_argument("regular_polygon: ambient_dim must be >= 2");
    PolytopeSpec poly;
    poly.vertices = DenseMatrix(ambient_dim, sides);
    for (index_t t = 0; t < sides; ++t) {
        const double theta = std::numbers::pi / 2.0 +
                             2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(sides);
        poly.vertices(0, t) = std::cos(theta);
        poly.vertices(1, t) = std::sin(theta);
    }
    // Vertex 0 lands exactly on (0, 1, 0, ...).
    poly.vertices(0, 0) = 0.0;
    poly.vertices(1, 0) = 1.0;
    return poly;
}

bool normal_cone_member(const PolytopeSpec& poly, index_t vertex_idx, std::span<const double> w) {
    const index_t d = poly.ambient_dim(), v = poly.count();
    if (vertex_idx < 0 || vertex_idx >= v)
        throw std::invalid_argument("normal_cone_member: vertex index out of range");
    if (static_cast<index_t>(w.size()) != d)
        throw std::invalid_argument("normal_cone_member: direction has wrong dimension");

    double wnorm = 0.0;
    for (double wi : w) wnorm += wi * wi;
    wnorm = std::sqrt(wnorm);

    for (index_t j = 0; j < v; ++j) {
        if (j == vertex_idx) continue;
        double dot = 0.0, diff_norm = 0.0;
        for (index_t i = 0; i < d; ++i) {
            const double diff = poly.vertices(i, j) - poly.vertices(i, vertex_idx);
            dot += w[static_cast<std::size_t>(i)] * diff;
            diff_norm += diff * diff;
        }
        diff_norm = std::sqrt(diff_norm);
        if (dot > 1e-12 * wnorm * diff_norm) return false;
    }
    return true;
}

SolidAngleEstimate solid_angle_mc(const PolytopeSpec& poly, index_t vertex_idx, index_t samples,
                                  SeededRng& rng) {
    if (samples < 1000)
        throw std::invalid_argument("solid_angle_mc: needs samples >= 1000");
    const index_t d = poly.ambient_dim();
    const std::uint64_t master = rng.next_u64();

    index_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (index_t s = 0; s < samples; ++s) {
        SeededRng sample_rng(mix64(master, static_cast<std::uint64_t>(s)));
        std::vector<double> w(static_cast<std::size_t>(d));
        for (auto& wi : w) wi = sample_rng.next_normal();
        // Cone membership is scale invariant, so the Gaussian direction needs
        // no normalization.
        if (normal_cone_member(poly, vertex_idx, w)) ++hits;
    }

    SolidAngleEstimate est;
    est.samples = samples;
    est.omega = static_cast<double>(hits) / static_cast<double>(samples);
    est.stderr_ = std::sqrt(est.omega * (1.0 - est.omega) / static_cast<double>(samples));
    return est;
}

double condition_number(std::span<const double> omegas, index_t k, KappaVariant variant) {
    if (omegas.empty() || k < 1)
        throw std::invalid_argument("condition_number: need omegas and k >= 1");
    // The driving quantity is max_i(1 - 2 w_i) = 1 - 2 min_i w_i: the smallest
    // vertex cone is the hardest to hit with a random direction.
    double term = -std::numeric_limits<double>::infinity();
    for (double w : omegas) {
        if (variant == KappaVariant::Log && !(w > 0.0 && w < 0.5))
            throw std::invalid_argument("condition_number: log variant needs every omega in (0, 1/2)");
        term = std::max(term, 1.0 - 2.0 * w);
    }
    if (variant == KappaVariant::Log)
        return 1.0 / (static_cast<double>(k) * std::log(1.0 / term));
    return 1.0 / (static_cast<double>(k) * term);
}

std::vector<index_t> extreme_points_bruteforce(const DenseMatrix& x) {
    const index_t d = x.rows(), n = x.cols();
    if (n > 200)
        throw std::invalid_argument("extreme_points_bruteforce: oracle limited to n <= 200");
    if (n == 1) return {0};

    const double scale = std::max(1.0, max_abs(x));
    const double penalty = scale; // weight of the sum-to-one row
    std::vector<index_t> extremes;
    for (index_t j = 0; j < n; ++j) {
        // Feasibility of x_j = sum_l lambda_l x_l (l != j), lambda >= 0, sum = 1,
        // as an augmented nonnegative least-squares problem.
        DenseMatrix a(d + 1, n - 1);
        DenseMatrix y(d + 1, 1);
        index_t col = 0;
        for (index_t l = 0; l < n; ++l) {
            if (l == j) continue;
            for (index_t i = 0; i < d; ++i) a(i, col) = x(i, l);
            a(d, col) = penalty;
            ++col;
        }
        for (index_t i = 0; i < d; ++i) y(i, 0) = x(i, j);
        y(d, 0) = penalty;

        DenseMatrix lambda = nnls_solve(a, y, 1e-11, 500000);
        double resid = 0.0;
        for (index_t i = 0; i < d; ++i) {
            double fit = 0.0;
            for (index_t l = 0; l < n - 1; ++l) fit += a(i, l) * lambda(l, 0);
            const double e = fit - x(i, j);
            resid += e * e;
        }
        double lsum = 0.0;
        for (index_t l = 0; l < n - 1; ++l) lsum += lambda(l, 0);
        const double tol = 1e-5 * (1.0 + scale);
        const bool representable = std::sqrt(resid) <= tol && std::abs(lsum - 1.0) <= 1e-5;
        if (!representable) extremes.push_back(j);
    }
    return extremes;
}

SrhtConeReport srht_counterexample_check(index_t dim, index_t mc_samples, SeededRng& rng) {
    if (dim < 2 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
        throw std::invalid_argument("srht_counterexample_check: dim must be a power of two, >= 2");

    PolytopeSpec poly = regular_polygon(5, dim);
    SrhtConeReport rep;
    rep.dim = dim;
    rep.sin_3pi_10 = std::sin(3.0 * std::numbers::pi / 10.0);
    rep.coordinate = 1.0 / std::sqrt(static_cast<double>(dim));

    const double entry = rep.coordinate;
    std::vector<double> w(static_cast<std::size_t>(dim));
    if (dim <= 16) {
        rep.exhaustive = true;
        const std::uint64_t total = 1ULL << dim;
        rep.vectors_checked = static_cast<index_t>(total);
        for (std::uint64_t code = 0; code < total; ++code) {
            for (index_t i = 0; i < dim; ++i)
                w[static_cast<std::size_t>(i)] = (code >> i) & 1ULL ? entry : -entry;
            if (normal_cone_member(poly, 0, w)) ++rep.vectors_in_cone;
        }
    } else {
        rep.exhaustive = false;
        rep.vectors_checked = 100000;
        SeededRng pattern_rng = rng.split();
        for (index_t s = 0; s < rep.vectors_checked; ++s) {
            for (index_t i = 0; i < dim; ++i)
                w[static_cast<std::size_t>(i)] = (pattern_rng.next_u64() & 1ULL) ? entry : -entry;
            if (normal_cone_member(poly, 0, w)) ++rep.vectors_in_cone;
        }
    }

    SolidAngleEstimate omega = solid_angle_mc(poly, 0, mc_samples, rng);
    rep.omega_mc = omega.omega;
    rep.omega_stderr = omega.stderr_;
    return rep;
}

} // namespace cg
