#ifndef COUNTGAUSS_REFERENCE_HPP
#define COUNTGAUSS_REFERENCE_HPP

#include "countgauss/matrix.hpp"
#include "countgauss/sketch.hpp"

#include <vector>

namespace cg::reference {

// Serial triple-loop dense product. Reference implementation for the parallel
// gemm kernel and for the benchmark target.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// Serial sparse-dense product.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

// Materializes the B x n CountSketch matrix densely.
DenseMatrix materialize(const CountSketchMap& map);

// Serial CountSketch application (scatter loop, ascending input row).
DenseMatrix countsketch_apply(const CountSketchMap& map, const SparseMatrix& x);
DenseMatrix countsketch_apply(const CountSketchMap& map, const DenseMatrix& x);

// Singular values by one-sided Jacobi, descending order. Desk-scale oracle.
std::vector<double> jacobi_singular_values(const DenseMatrix& a, int max_sweeps = 60,
                                           double tol = 1e-14);

// KL divergence D(N(0,I) || N(0,Sigma)) by composite-Simpson quadrature of
// integral p ln(p/q); supports d in {1, 2}.
double kl_quadrature(const DenseMatrix& sigma);

// Exact E_S ||I - U^T S^T S U||_F^2 by enumerating every (hash, sign) outcome
// of a B-bucket CountSketch on n inputs; (2B)^n outcomes, small cases only.
double expected_gram_deviation_exhaustive(const DenseMatrix& u, index_t buckets);

} // namespace cg::reference

#endif
