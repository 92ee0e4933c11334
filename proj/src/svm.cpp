#include "countgauss/svm.hpp"

#include "countgauss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cg {

bool SvmProblem::one_class() const {
    bool pos = false, neg = false;
    for (double yi : y) (yi > 0 ? pos : neg) = true;
    return !(pos && neg);
}

void SvmProblem::validate() const {
    if (x.rows() < 1)
        throw std::invalid_argument("SvmProblem: needs at least one sample");
    if (static_cast<index_t>(y.size()) != x.rows())
        throw std::invalid_argument("SvmProblem: label count does not match sample count");
    for (double yi : y)
        if (yi != 1.0 && yi != -1.0)
            throw std::invalid_argument("SvmProblem: labels must be -1 or +1");
    if (!(c > 0.0))
        throw std::invalid_argument("SvmProblem: C must be positive");
}

SvmConvergenceFailure::SvmConvergenceFailure(double violation, std::string msg)
    : std::runtime_error(std::move(msg)), max_violation(violation) {}

SvmSolution svm_dual_solve(const SvmProblem& p, double tol, int max_passes) {
    p.validate();
    const index_t n = p.x.rows(), d = p.x.cols();

    // Samples transposed once so each sits contiguously.
    DenseMatrix xt = transpose(p.x); // d x N
    std::vector<double> qdiag(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
        const double* xi = xt.col(i);
        double s = 0.0;
        for (index_t j = 0; j < d; ++j) s += xi[j] * xi[j];
        qdiag[static_cast<std::size_t>(i)] = s;
    }

    SvmSolution sol;
    sol.alpha.assign(static_cast<std::size_t>(n), 0.0);
    sol.w.assign(static_cast<std::size_t>(d), 0.0);

    double violation = std::numeric_limits<double>::infinity();
    int pass = 0;
    for (; pass < max_passes; ++pass) {
        violation = 0.0;
        for (index_t i = 0; i < n; ++i) {
            const double* xi = xt.col(i);
            const double yi = p.y[static_cast<std::size_t>(i)];
            double wx = 0.0;
            for (index_t j = 0; j < d; ++j) wx += sol.w[static_cast<std::size_t>(j)] * xi[j];
            const double grad = yi * wx - 1.0;
            const double a = sol.alpha[static_cast<std::size_t>(i)];

            double pg;
            if (a <= 0.0)
                pg = std::min(grad, 0.0);
            else if (a >= p.c)
                pg = std::max(grad, 0.0);
            else
                pg = grad;
            violation = std::max(violation, std::abs(pg));
            if (pg == 0.0) continue;

            double a_new;
            if (qdiag[static_cast<std::size_t>(i)] > 0.0)
                a_new = std::clamp(a - grad / qdiag[static_cast<std::size_t>(i)], 0.0, p.c);
            else
                a_new = grad < 0.0 ? p.c : 0.0; // zero sample: gradient is constant
            const double delta = a_new - a;
            if (delta == 0.0) continue;
            sol.alpha[static_cast<std::size_t>(i)] = a_new;
            const double dy = delta * yi;
            for (index_t j = 0; j < d; ++j) sol.w[static_cast<std::size_t>(j)] += dy * xi[j];
        }
        if (violation <= tol) break;
    }
    if (violation > tol)
        throw SvmConvergenceFailure(violation,
                                    "svm_dual_solve: KKT violation " + std::to_string(violation) +
                                        " after " + std::to_string(max_passes) + " passes");

    sol.passes = pass + 1;
    sol.max_kkt_violation = violation;
    double asum = 0.0;
    for (double a : sol.alpha) asum += a;
    double wsq = 0.0;
    for (double wj : sol.w) wsq += wj * wj;
    sol.objective = asum - 0.5 * wsq;
    sol.margin = sol.objective > 0.0 ? 1.0 / std::sqrt(2.0 * sol.objective)
                                     : std::numeric_limits<double>::infinity();
    return sol;
}

double embedding_error(const DenseMatrix& x, const DenseMatrix& r) {
    if (x.rows() < 1 || x.cols() < 1)
        throw std::invalid_argument("embedding_error: empty data matrix");
    if (max_abs(x) == 0.0)
        throw std::invalid_argument("embedding_error: X is identically zero");
    if (r.rows() != x.cols())
        throw std::invalid_argument("embedding_error: R must have " + std::to_string(x.cols()) +
                                    " rows");

    DenseMatrix v = orthonormal_basis(transpose(x)); // d x rho
    DenseMatrix rtv = gemm(transpose(r), v);          // r x rho
    DenseMatrix gramm = gram(rtv);                    // V^T R R^T V
    const index_t rho = v.cols();
    DenseMatrix e(rho, rho);
    for (index_t i = 0; i < rho; ++i)
        for (index_t j = 0; j < rho; ++j) e(i, j) = (i == j ? 1.0 : 0.0) - gramm(i, j);
    if (max_abs(e) == 0.0) return 0.0;
    return spectral_norm(e);
}

EmbeddingTooLossy::EmbeddingTooLossy(double err)
    : std::runtime_error("margin_preservation_check: embedding error " + std::to_string(err) +
                         " >= 1/2, the bound denominators are not positive"),
      error(err) {}

MarginReport margin_preservation_check(const SvmProblem& p, const DenseMatrix& r, double tol,
                                       int max_passes) {
    MarginReport rep;
    rep.e = embedding_error(p.x, r);
    if (rep.e >= 0.5) throw EmbeddingTooLossy(rep.e);

    SvmSolution orig = svm_dual_solve(p, tol, max_passes);
    SvmProblem projected{gemm(p.x, r), p.y, p.c};
    SvmSolution proj = svm_dual_solve(projected, tol, max_passes);

    rep.gamma_orig = orig.margin;
    rep.gamma_proj = proj.margin;
    rep.z_orig = orig.objective;
    rep.z_proj = proj.objective;

    const double g2 = orig.margin * orig.margin;
    const double gp2 = proj.margin * proj.margin;
    rep.lower = (1.0 - rep.e / (1.0 - rep.e)) * g2;
    rep.upper = g2 / (1.0 - rep.e);
    const double slack = 1e-8 * std::max(g2, gp2); // solver tolerance allowance
    rep.pass = (gp2 >= rep.lower - slack) && (gp2 <= rep.upper + slack);
    return rep;
}

SvmProblem make_blobs(index_t samples, index_t dim, index_t subspace_rank, double separation,
                      double noise, double c, SeededRng& rng) {
    if (samples < 2 || dim < 1 || subspace_rank < 1 || subspace_rank > dim)
        throw std::invalid_argument("make_blobs: bad shape arguments");
    DenseMatrix basis = orthonormal_basis(gaussian_matrix(dim, subspace_rank, rng));
    SvmProblem p;
    p.c = c;
    p.x = DenseMatrix(samples, dim);
    p.y.resize(static_cast<std::size_t>(samples));
    std::vector<double> coeff(static_cast<std::size_t>(subspace_rank));
    for (index_t i = 0; i < samples; ++i) {
        const double yi = (i % 2 == 0) ? 1.0 : -1.0;
        p.y[static_cast<std::size_t>(i)] = yi;
        coeff[0] = yi * separation + noise * rng.next_normal();
        for (index_t l = 1; l < subspace_rank; ++l)
            coeff[static_cast<std::size_t>(l)] = noise * rng.next_normal();
        for (index_t j = 0; j < dim; ++j) {
            double v = 0.0;
            for (index_t l = 0; l < subspace_rank; ++l)
                v += basis(j, l) * coeff[static_cast<std::size_t>(l)];
            p.x(i, j) = v;
        }
    }
    return p;
}

} // namespace cg
