#ifndef COUNTGAUSS_SKETCH_HPP
#define COUNTGAUSS_SKETCH_HPP

#include <cstdint>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/rng.hpp"

namespace cg {

// Hash-and-sign description of a buckets x input_dim CountSketch matrix: every
// input column owns exactly one (bucket, sign) pair. The dense matrix is never
// formed on the hot path.
struct CountSketchMap {
    index_t buckets = 0;
    index_t input_dim = 0;
    std::vector<index_t> hash; // per input, bucket in [0, buckets)
    std::vector<double> sign;  // per input, -1 or +1
    std::uint64_t seed = 0;
};

// Fresh map: per input one 64-bit draw reduced modulo `buckets` for the bucket
// and one bit of an independent draw for the sign.
CountSketchMap countsketch_new(index_t buckets, index_t input_dim, SeededRng& rng);

// Map whose buckets are sampled without replacement (all distinct); requires
// buckets >= input_dim. In this regime S^T S = I and sketching is a signed
// row selection, which makes the sketched and unsketched row distributions
// exactly equal.
CountSketchMap countsketch_injective(index_t buckets, index_t input_dim, SeededRng& rng);

// S*X in Theta(nnz(X)) operations. Parallel, deterministic: dense inputs split
// by output column (inputs scanned ascending); sparse inputs stream in
// fixed-size row chunks whose partial results reduce in ascending chunk order.
// Chunk boundaries depend only on the input shape, never the thread count.
DenseMatrix countsketch_apply(const CountSketchMap& map, const DenseMatrix& x);
DenseMatrix countsketch_apply(const CountSketchMap& map, const SparseMatrix& x);

// Composite transform T = G*S with G an m x buckets Gaussian matrix. T itself
// is never materialized; application is the two-stage S*X then G*(S*X).
struct CountGaussTransform {
    CountSketchMap cs;
    DenseMatrix g; // m x buckets
    index_t m = 0;
    std::uint64_t seed = 0;
};

CountGaussTransform countgauss_new(index_t m, index_t buckets, index_t input_dim, SeededRng& rng);
// Default bucket sizing buckets = 5*m.
CountGaussTransform countgauss_new(index_t m, index_t input_dim, SeededRng& rng);

DenseMatrix countgauss_apply(const CountGaussTransform& t, const DenseMatrix& x);
DenseMatrix countgauss_apply(const CountGaussTransform& t, const SparseMatrix& x);

// Subsampled randomized Hadamard transform P*H*D: `selected_rows` is the row
// subset picked by P, `signs` the diagonal of D; dim must be a power of two.
// Every entry of a materialized row lies in {-1/sqrt(dim), +1/sqrt(dim)}.
struct SrhtSpec {
    index_t m = 0;
    index_t dim = 0;
    std::vector<index_t> selected_rows;
    std::vector<double> signs;
    std::uint64_t seed = 0;
};

SrhtSpec srht_new(index_t m, index_t dim, SeededRng& rng);

// The m selected rows, scaled by 1/sqrt(dim), in the natural (Sylvester)
// Hadamard ordering.
DenseMatrix srht_rows(const SrhtSpec& spec);

} // namespace cg

#endif
