#ifndef COUNTGAUSS_LINALG_HPP
#define COUNTGAUSS_LINALG_HPP

#include <stdexcept>

#include "countgauss/matrix.hpp"

namespace cg {

// Orthonormal basis of range(X) via Householder QR with column pivoting.
// tol < 0 selects the default rank threshold 1e-10 * ||X||_F. An all-zero input
// yields a matrix with zero columns; non-finite entries are rejected.
DenseMatrix orthonormal_basis(const DenseMatrix& x, double tol = -1.0);

struct SpectralNormFailure : std::runtime_error {
    SpectralNormFailure(double estimate, double residual);
    double estimate;
    double residual;
};

// Largest singular value by power iteration on A^T A from a deterministic
// seeded start; throws SpectralNormFailure if max_iters passes without the
// estimate settling to relative tolerance tol.
double spectral_norm(const DenseMatrix& a, int max_iters = 2000, double tol = 1e-12);

// Cholesky factor L (lower) of a symmetric positive definite matrix; returns
// false if the pivot sequence breaks down (matrix not SPD).
bool cholesky(const DenseMatrix& a, DenseMatrix& lower);

} // namespace cg

#endif
