#ifndef COUNTGAUSS_NMF_HPP
#define COUNTGAUSS_NMF_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/rng.hpp"

namespace cg {

// A d x n data matrix whose columns all lie in the convex hull of the k anchor
// columns (exactly when noise_sigma == 0).
struct SeparableInstance {
    DenseMatrix x; // d x n
    std::vector<index_t> anchors;
    std::optional<DenseMatrix> h_true; // k x n, nonnegative
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Synthetic separable data: W is d x k uniform [0,1]; the mixing rows are the
// identity for the first k columns and uniform [0,1] otherwise, each row scaled
// to sum 1 so that every non-anchor column is a strict convex combination of
// the anchors. anchors = {0..k-1}.
SeparableInstance generate_separable(index_t d, index_t n, index_t k, SeededRng& rng);

// k uniform [0,1] vertex columns followed by the k(k-1)/2 pairwise midpoints,
// with N(0, sigma^2) noise added to every entry.
SeparableInstance generate_noisy_polytope(index_t d, index_t k, double sigma, SeededRng& rng);

// Row-wise argmax/argmin column indices of a projected matrix; ties break to
// the lowest column index. `unioned` is the sorted union; `tie_rows` counts
// rows whose extreme value was attained at more than one column (measure zero
// for continuous projections, positive for duplicated columns).
struct AnchorSet {
    std::vector<index_t> i_max;
    std::vector<index_t> i_min;
    std::vector<index_t> unioned;
    index_t tie_rows = 0;

    bool contains_all(const std::vector<index_t>& wanted) const;
    bool subset_of(const std::vector<index_t>& allowed) const;
};

// Anchor extraction through the two-stage sketch: Z = G*(S*X) with a fresh
// transform drawn from rng, then per-row extremes. buckets < 1 selects the
// default 5*m.
AnchorSet cg_nmf(const DenseMatrix& x, index_t m, index_t buckets, SeededRng& rng);
AnchorSet cg_nmf(const SparseMatrix& x, index_t m, index_t buckets, SeededRng& rng);

// Baseline: Z = G~ * X with a dense m x d Gaussian.
AnchorSet gp_nmf(const DenseMatrix& x, index_t m, SeededRng& rng);

struct SpaRankDeficiency : std::runtime_error {
    SpaRankDeficiency(std::vector<index_t> found, std::string msg);
    std::vector<index_t> selected;
};

// Successive projection: repeatedly take the largest-norm column and project
// the matrix onto its orthogonal complement. Exact on noiseless separable data.
std::vector<index_t> spa(const DenseMatrix& x, index_t k);

struct XrayResult {
    std::vector<index_t> indices;
    bool truncated = false; // residual vanished before k picks
};

// Greedy conical-hull expansion for nonnegative X: each step scores columns
// against the largest-norm residual column r by  r^T x_j / (1^T x_j)  and
// refits H over the selected anchors by NNLS. The linear denominator keeps the
// argmax on an extreme ray, which makes the selection exact on noiseless
// separable data.
XrayResult xray(const DenseMatrix& x, index_t k);

struct NnlsFailure : std::runtime_error {
    NnlsFailure(double residual, std::string msg);
    double kkt_residual;
};

// Column-wise nonnegative least squares min_{h>=0} ||A h - y|| by projected
// gradient with a Barzilai-Borwein step and monotone backtracking. Stops when
// the projected-gradient KKT residual falls under tol * max(1, ||A^T y||_inf).
DenseMatrix nnls_solve(const DenseMatrix& a, const DenseMatrix& y, double tol = 1e-8,
                       int max_iters = 5000);

// ||X - X_I H||_F / ||X||_F.
double relative_error(const DenseMatrix& x, const std::vector<index_t>& anchors,
                      const DenseMatrix& h);

} // namespace cg

#endif
