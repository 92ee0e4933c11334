#include "countgauss/reference.hpp"

#include "countgauss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace cg::reference {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("reference::matmul: inner dimensions mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (index_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows())
        throw std::invalid_argument("reference::spmm: inner dimensions mismatch");
    DenseMatrix c(a.rows, b.cols());
    for (index_t i = 0; i < a.rows; ++i)
        for (index_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
            for (index_t j = 0; j < b.cols(); ++j)
                c(i, j) += a.values[p] * b(a.col_indices[p], j);
    return c;
}

DenseMatrix materialize(const CountSketchMap& map) {
    DenseMatrix s(map.buckets, map.input_dim);
    for (index_t i = 0; i < map.input_dim; ++i)
        s(map.hash[static_cast<std::size_t>(i)], i) = map.sign[static_cast<std::size_t>(i)];
    return s;
}

DenseMatrix countsketch_apply(const CountSketchMap& map, const SparseMatrix& x) {
    if (x.rows != map.input_dim)
        throw std::invalid_argument("reference::countsketch_apply: dimension mismatch");
    DenseMatrix out(map.buckets, x.cols);
    for (index_t i = 0; i < x.rows; ++i) {
        const index_t b = map.hash[static_cast<std::size_t>(i)];
        const double s = map.sign[static_cast<std::size_t>(i)];
        for (index_t p = x.row_offsets[i]; p < x.row_offsets[i + 1]; ++p)
            out(b, x.col_indices[p]) += s * x.values[p];
    }
    return out;
}

DenseMatrix countsketch_apply(const CountSketchMap& map, const DenseMatrix& x) {
    if (x.rows() != map.input_dim)
        throw std::invalid_argument("reference::countsketch_apply: dimension mismatch");
    DenseMatrix out(map.buckets, x.cols());
    for (index_t i = 0; i < x.rows(); ++i) {
        const index_t b = map.hash[static_cast<std::size_t>(i)];
        const double s = map.sign[static_cast<std::size_t>(i)];
        for (index_t j = 0; j < x.cols(); ++j) out(b, j) += s * x(i, j);
    }
    return out;
}

std::vector<double> jacobi_singular_values(const DenseMatrix& a, int max_sweeps, double tol) {
    // One-sided Jacobi on the taller orientation: rotate column pairs until all
    // are mutually orthogonal; singular values are the final column norms.
    DenseMatrix w = a.rows() >= a.cols() ? a : transpose(a);
    const index_t n = w.rows(), d = w.cols();
    const double off_tol = tol * frobenius_norm(w) * frobenius_norm(w);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (index_t p = 0; p < d - 1; ++p) {
            for (index_t q = p + 1; q < d; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (index_t i = 0; i < n; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                if (std::abs(apq) <= off_tol) continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (index_t i = 0; i < n; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(static_cast<std::size_t>(d));
    for (index_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < n; ++i) s += w(i, j) * w(i, j);
        sv[static_cast<std::size_t>(j)] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

namespace {

// Composite Simpson weights over [-range, range] with `points` nodes (odd).
void simpson_grid(int points, double range, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<std::size_t>(points));
    weights.resize(static_cast<std::size_t>(points));
    const double h = 2.0 * range / (points - 1);
    for (int i = 0; i < points; ++i) {
        nodes[static_cast<std::size_t>(i)] = -range + h * i;
        double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        weights[static_cast<std::size_t>(i)] = w * h / 3.0;
    }
}

} // namespace

double kl_quadrature(const DenseMatrix& sigma) {
    const index_t d = sigma.rows();
    if (sigma.cols() != d || (d != 1 && d != 2))
        throw std::invalid_argument("kl_quadrature: supports d in {1,2} only");
    DenseMatrix lower;
    if (!cholesky(sigma, lower))
        throw std::invalid_argument("kl_quadrature: sigma not SPD");

    const double range = 12.0;
    const int points = d == 1 ? 8001 : 1201;
    std::vector<double> nodes, weights;
    simpson_grid(points, range, nodes, weights);

    const double log2pi = std::log(2.0 * std::numbers::pi);
    if (d == 1) {
        const double s = sigma(0, 0);
        double acc = 0.0;
        for (int i = 0; i < points; ++i) {
            const double x = nodes[static_cast<std::size_t>(i)];
            const double logp = -0.5 * (log2pi + x * x);
            const double logq = -0.5 * (log2pi + std::log(s) + x * x / s);
            acc += weights[static_cast<std::size_t>(i)] * std::exp(logp) * (logp - logq);
        }
        return acc;
    }

    // d == 2: q density via the explicit inverse of sigma.
    const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
    const double i00 = sigma(1, 1) / det, i11 = sigma(0, 0) / det, i01 = -sigma(0, 1) / det;
    double acc = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = nodes[static_cast<std::size_t>(i)];
        double inner = 0.0;
        for (int j = 0; j < points; ++j) {
            const double y = nodes[static_cast<std::size_t>(j)];
            const double logp = -log2pi - 0.5 * (x * x + y * y);
            const double quad = i00 * x * x + 2.0 * i01 * x * y + i11 * y * y;
            const double logq = -log2pi - 0.5 * std::log(det) - 0.5 * quad;
            inner += weights[static_cast<std::size_t>(j)] * std::exp(logp) * (logp - logq);
        }
        acc += weights[static_cast<std::size_t>(i)] * inner;
    }
    return acc;
}

double expected_gram_deviation_exhaustive(const DenseMatrix& u, index_t buckets) {
    const index_t n = u.rows(), d = u.cols();
    double outcomes = std::pow(2.0 * static_cast<double>(buckets), static_cast<double>(n));
    if (outcomes > 2e7)
        throw std::invalid_argument("expected_gram_deviation_exhaustive: state space too large");

    std::vector<index_t> hash(static_cast<std::size_t>(n), 0);
    std::vector<double> sign(static_cast<std::size_t>(n), 1.0);
    const auto total = static_cast<std::uint64_t>(outcomes);
    double acc = 0.0;
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (index_t i = 0; i < n; ++i) {
            hash[static_cast<std::size_t>(i)] = static_cast<index_t>(c % static_cast<std::uint64_t>(buckets));
            c /= static_cast<std::uint64_t>(buckets);
            sign[static_cast<std::size_t>(i)] = (c & 1ULL) ? 1.0 : -1.0;
            c >>= 1;
        }
        // M = (SU)^T (SU) accumulated bucket by bucket.
        DenseMatrix su(buckets, d);
        for (index_t i = 0; i < n; ++i)
            for (index_t j = 0; j < d; ++j)
                su(hash[static_cast<std::size_t>(i)], j) += sign[static_cast<std::size_t>(i)] * u(i, j);
        DenseMatrix m = gram(su);
        double fro_sq = 0.0;
        for (index_t i = 0; i < d; ++i)
            for (index_t j = 0; j < d; ++j) {
                const double e = (i == j ? 1.0 : 0.0) - m(i, j);
                fro_sq += e * e;
            }
        acc += fro_sq;
    }
    return acc / outcomes;
}

} // namespace cg::reference
