#ifndef COUNTGAUSS_SVM_HPP
#define COUNTGAUSS_SVM_HPP

#include <stdexcept>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/rng.hpp"

namespace cg {

// Soft-margin linear SVM instance; rows of x are samples. The dual has no bias
// term, so a single-class problem is degenerate but representable.
struct SvmProblem {
    DenseMatrix x;         // N x d
    std::vector<double> y; // labels in {-1, +1}
    double c = 1.0;        // box constraint

    bool one_class() const;
    void validate() const;
};

struct SvmSolution {
    std::vector<double> alpha;
    double objective = 0.0; // 1^T a - 1/2 ||sum a_i y_i x_i||^2
    double margin = 0.0;    // 1/sqrt(2 * objective) when objective > 0
    std::vector<double> w;
    int passes = 0;
    double max_kkt_violation = 0.0;
};

struct SvmConvergenceFailure : std::runtime_error {
    SvmConvergenceFailure(double violation, std::string msg);
    double max_violation;
};

// Dual coordinate ascent over the box [0, C]^N in deterministic cyclic order;
// stops when the largest projected-gradient violation in a pass is <= tol.
SvmSolution svm_dual_solve(const SvmProblem& p, double tol = 1e-10, int max_passes = 20000);

// ||I_rho - V^T R R^T V||_2 where V spans the row space of X (right singular
// subspace at numerical rank). Zero X is rejected.
double embedding_error(const DenseMatrix& x, const DenseMatrix& r);

struct EmbeddingTooLossy : std::runtime_error {
    explicit EmbeddingTooLossy(double e);
    double error;
};

struct MarginReport {
    double gamma_orig = 0.0;
    double gamma_proj = 0.0;
    double z_orig = 0.0;
    double z_proj = 0.0;
    double e = 0.0;
    double lower = 0.0; // (1 - e/(1-e)) * gamma^2
    double upper = 0.0; // gamma^2 / (1-e)
    bool pass = false;
};

// Solves the original problem and the projected one (X -> X*R) and checks the
// margin-preservation interval. Requires embedding_error < 1/2 so both bound
// denominators stay positive; throws EmbeddingTooLossy otherwise.
MarginReport margin_preservation_check(const SvmProblem& p, const DenseMatrix& r,
                                       double tol = 1e-10, int max_passes = 20000);

// Two-class blobs living in a random `subspace_rank`-dimensional subspace of
// R^dim: class means at +-separation along one basis direction, isotropic
// N(0, noise^2) spread inside the subspace. Low rank keeps embedding_error
// meaningful for projections with r far below dim.
SvmProblem make_blobs(index_t samples, index_t dim, index_t subspace_rank, double separation,
                      double noise, double c, SeededRng& rng);

} // namespace cg

#endif
