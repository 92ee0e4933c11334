#include "countgauss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cg {

DenseMatrix orthonormal_basis(const DenseMatrix& x, double tol) {
    const index_t n = x.rows(), d = x.cols();
    if (n < 1 || d < 1)
        throw std::invalid_argument("orthonormal_basis: empty input");
    if (!x.all_finite())
        throw std::invalid_argument("orthonormal_basis: input has non-finite entries");

    double xnorm = frobenius_norm(x);
    if (tol < 0.0) tol = 1e-10 * xnorm;
    if (xnorm == 0.0) return DenseMatrix(n, 0);

    // Householder QR with column pivoting. The reflector for step k is
    // v = (v0, r(k+1..n-1, k)) with v0 held separately; the tail stays in the
    // subdiagonal of column k.
    DenseMatrix r = x;
    const index_t steps = std::min(n, d);
    std::vector<double> beta(static_cast<std::size_t>(steps), 0.0);
    std::vector<double> head(static_cast<std::size_t>(steps), 0.0);
    index_t rank = 0;
    for (index_t k = 0; k < steps; ++k) {
        index_t piv = k;
        double best = -1.0;
        for (index_t j = k; j < d; ++j) {
            double s = 0.0;
            for (index_t i = k; i < n; ++i) s += r(i, j) * r(i, j);
            if (s > best) { best = s; piv = j; }
        }
        if (std::sqrt(best) <= tol) break;
        if (piv != k)
            for (index_t i = 0; i < n; ++i) std::swap(r(i, k), r(i, piv));

        double alpha = std::sqrt(best);
        if (r(k, k) > 0) alpha = -alpha;
        double v0 = r(k, k) - alpha;
        double vnorm2 = v0 * v0;
        for (index_t i = k + 1; i < n; ++i) vnorm2 += r(i, k) * r(i, k);
        const double b = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;
        beta[static_cast<std::size_t>(k)] = b;
        head[static_cast<std::size_t>(k)] = v0;

        for (index_t j = k + 1; j < d; ++j) {
            double dot = v0 * r(k, j);
            for (index_t i = k + 1; i < n; ++i) dot += r(i, k) * r(i, j);
            dot *= b;
            r(k, j) -= dot * v0;
            for (index_t i = k + 1; i < n; ++i) r(i, j) -= dot * r(i, k);
        }
        r(k, k) = alpha;
        ++rank;
    }

    // Q's first `rank` columns: apply reflectors to I in reverse order.
    DenseMatrix q(n, rank);
    for (index_t j = 0; j < rank; ++j) q(j, j) = 1.0;
    for (index_t k = rank - 1; k >= 0; --k) {
        const double b = beta[static_cast<std::size_t>(k)];
        if (b == 0.0) continue;
        const double v0 = head[static_cast<std::size_t>(k)];
        for (index_t j = 0; j < rank; ++j) {
            double dot = v0 * q(k, j);
            for (index_t i = k + 1; i < n; ++i) dot += r(i, k) * q(i, j);
            dot *= b;
            q(k, j) -= dot * v0;
            for (index_t i = k + 1; i < n; ++i) q(i, j) -= dot * r(i, k);
        }
    }
    return q;
}

SpectralNormFailure::SpectralNormFailure(double est, double res)
    : std::runtime_error("spectral_norm: power iteration did not converge (estimate " +
                         std::to_string(est) + ", residual " + std::to_string(res) + ")"),
      estimate(est), residual(res) {}

double spectral_norm(const DenseMatrix& a, int max_iters, double tol) {
    const index_t n = a.rows(), d = a.cols();
    if (n < 1 || d < 1)
        throw std::invalid_argument("spectral_norm: empty matrix");
    if (max_iters < 1)
        throw std::invalid_argument("spectral_norm: max_iters must be >= 1");

    SeededRng rng(0x5eed5eedULL);
    std::vector<double> v(static_cast<std::size_t>(d));
    double vn = 0.0;
    for (auto& vi : v) { vi = rng.next_normal(); vn += vi * vi; }
    vn = std::sqrt(vn);
    for (auto& vi : v) vi /= vn;

    std::vector<double> av(static_cast<std::size_t>(n));
    double sigma = 0.0;
    double delta = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        // av = A v
        for (index_t i = 0; i < n; ++i) av[static_cast<std::size_t>(i)] = 0.0;
        for (index_t j = 0; j < d; ++j) {
            const double vj = v[static_cast<std::size_t>(j)];
            if (vj == 0.0) continue;
            const double* aj = a.col(j);
            for (index_t i = 0; i < n; ++i) av[static_cast<std::size_t>(i)] += aj[i] * vj;
        }
        double s = 0.0;
        for (double e : av) s += e * e;
        double sigma_new = std::sqrt(s);
        if (sigma_new == 0.0) return 0.0;
        // v = A^T av, renormalized
        double wn = 0.0;
        for (index_t j = 0; j < d; ++j) {
            const double* aj = a.col(j);
            double dot = 0.0;
            for (index_t i = 0; i < n; ++i) dot += aj[i] * av[static_cast<std::size_t>(i)];
            v[static_cast<std::size_t>(j)] = dot;
            wn += dot * dot;
        }
        wn = std::sqrt(wn);
        for (auto& vj : v) vj /= wn;
        delta = std::abs(sigma_new - sigma);
        if (delta <= tol * sigma_new) return sigma_new;
        sigma = sigma_new;
    }
    throw SpectralNormFailure(sigma, delta);
}

bool cholesky(const DenseMatrix& a, DenseMatrix& lower) {
    const index_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("cholesky: matrix must be square");
    lower = DenseMatrix(n, n);
    for (index_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (index_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag)) return false;
        double ljj = std::sqrt(diag);
        lower(j, j) = ljj;
        for (index_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (index_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / ljj;
        }
    }
    return true;
}

} // namespace cg
