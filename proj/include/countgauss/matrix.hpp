#ifndef COUNTGAUSS_MATRIX_HPP
#define COUNTGAUSS_MATRIX_HPP

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "countgauss/rng.hpp"

namespace cg {

using index_t = std::int64_t;

// Column-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t rows, index_t cols);

    static DenseMatrix identity(index_t n);

    index_t rows() const noexcept { return rows_; }
    index_t cols() const noexcept { return cols_; }
    index_t size() const noexcept { return rows_ * cols_; }

    double& operator()(index_t i, index_t j) noexcept { return data_[j * rows_ + i]; }
    double operator()(index_t i, index_t j) const noexcept { return data_[j * rows_ + i]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    double* col(index_t j) noexcept { return data_.data() + j * rows_; }
    const double* col(index_t j) const noexcept { return data_.data() + j * rows_; }

    bool all_finite() const noexcept;

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

// Compressed-sparse-row matrix. row_offsets has length rows+1 and is monotone;
// col_indices are strictly increasing within each row.
struct SparseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<index_t> row_offsets{0};
    std::vector<index_t> col_indices;
    std::vector<double> values;

    index_t nnz() const noexcept { return static_cast<index_t>(values.size()); }

    // Builds CSR from (row, col, value) triplets; duplicates are summed.
    static SparseMatrix from_triplets(index_t rows, index_t cols,
                                      std::vector<std::tuple<index_t, index_t, double>> triplets);
    static SparseMatrix from_dense(const DenseMatrix& x, double drop_tol = 0.0);

    DenseMatrix to_dense() const;
    void validate() const; // throws std::invalid_argument on a broken invariant
};

// Dense product A*B. Parallel over output columns; each output entry accumulates
// over the inner index in ascending order, so results are identical for every
// thread count.
DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b);

// Sparse-dense product A*B in Theta(nnz(A)*cols(B)) operations. Parallel over
// rows of A; per row the accumulation runs over stored entries in ascending
// column order (bit-reproducible).
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

// A^T * A, symmetric; same deterministic accumulation contract as gemm.
DenseMatrix gram(const DenseMatrix& a);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix take_columns(const DenseMatrix& x, std::span<const index_t> indices);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

// rows x cols matrix of i.i.d. N(0,1) entries drawn column-major from rng.
DenseMatrix gaussian_matrix(index_t rows, index_t cols, SeededRng& rng);

// CSR matrix with `per_row` uniform(-1,1) entries at distinct random columns
// of every row; nnz = rows * per_row.
SparseMatrix random_sparse(index_t rows, index_t cols, index_t per_row, SeededRng& rng);

} // namespace cg

#endif
