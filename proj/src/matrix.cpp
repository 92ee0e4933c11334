#include "countgauss/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace cg {

DenseMatrix::DenseMatrix(index_t rows, index_t cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("DenseMatrix: negative dimension");
    if (rows > 0 && cols > std::numeric_limits<index_t>::max() / std::max<index_t>(rows, 1))
        throw std::length_error("DenseMatrix: rows*cols exceeds addressable size");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

DenseMatrix DenseMatrix::identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool DenseMatrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

SparseMatrix SparseMatrix::from_triplets(index_t rows, index_t cols,
                                         std::vector<std::tuple<index_t, index_t, double>> triplets) {
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("SparseMatrix: negative dimension");
    for (const auto& [i, j, v] : triplets) {
        (void)v;
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw std::invalid_argument("SparseMatrix: triplet index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    SparseMatrix s;
    s.rows = rows;
    s.cols = cols;
    s.row_offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::size_t t = 0; t < triplets.size();) {
        auto [i, j, v] = triplets[t];
        std::size_t u = t + 1;
        while (u < triplets.size() && std::get<0>(triplets[u]) == i && std::get<1>(triplets[u]) == j) {
            v += std::get<2>(triplets[u]);
            ++u;
        }
        s.col_indices.push_back(j);
        s.values.push_back(v);
        ++s.row_offsets[static_cast<std::size_t>(i) + 1];
        t = u;
    }
    for (index_t i = 0; i < rows; ++i)
        s.row_offsets[static_cast<std::size_t>(i) + 1] += s.row_offsets[static_cast<std::size_t>(i)];
    return s;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& x, double drop_tol) {
    SparseMatrix s;
    s.rows = x.rows();
    s.cols = x.cols();
    s.row_offsets.assign(static_cast<std::size_t>(x.rows()) + 1, 0);
    for (index_t i = 0; i < x.rows(); ++i) {
        for (index_t j = 0; j < x.cols(); ++j) {
            double v = x(i, j);
            if (std::abs(v) > drop_tol) {
                s.col_indices.push_back(j);
                s.values.push_back(v);
            }
        }
        s.row_offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(s.values.size());
    }
    return s;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows, cols);
    for (index_t i = 0; i < rows; ++i)
        for (index_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
            d(i, col_indices[p]) = values[p];
    return d;
}

void SparseMatrix::validate() const {
    if (static_cast<index_t>(row_offsets.size()) != rows + 1)
        throw std::invalid_argument("SparseMatrix: row_offsets length must be rows+1");
    if (row_offsets.front() != 0 || row_offsets.back() != nnz())
        throw std::invalid_argument("SparseMatrix: row_offsets must start at 0 and end at nnz");
    if (col_indices.size() != values.size())
        throw std::invalid_argument("SparseMatrix: col_indices/values length mismatch");
    for (index_t i = 0; i < rows; ++i) {
        if (row_offsets[i] > row_offsets[i + 1])
            throw std::invalid_argument("SparseMatrix: row_offsets not monotone");
        for (index_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
            if (col_indices[p] < 0 || col_indices[p] >= cols)
                throw std::invalid_argument("SparseMatrix: column index out of range");
            if (p > row_offsets[i] && col_indices[p] <= col_indices[p - 1])
                throw std::invalid_argument("SparseMatrix: column indices not strictly increasing in row");
        }
    }
}

DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("gemm: inner dimensions mismatch (" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + ")");
    DenseMatrix c(a.rows(), b.cols());
    const index_t n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < m; ++j) {
        double* cj = c.col(j);
        const double* bj = b.col(j);
        for (index_t l = 0; l < k; ++l) {
            const double blj = bj[l];
            if (blj == 0.0) continue;
            const double* al = a.col(l);
            for (index_t i = 0; i < n; ++i) cj[i] += al[i] * blj;
        }
    }
    return c;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows())
        throw std::invalid_argument("spmm: inner dimensions mismatch (" + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.rows()) + ")");
    DenseMatrix c(a.rows, b.cols());
    const index_t m = b.cols();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < a.rows; ++i) {
        for (index_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            const index_t k = a.col_indices[p];
            const double v = a.values[p];
            const double* bk = b.col(0) + k;
            for (index_t j = 0; j < m; ++j) c(i, j) += v * bk[j * b.rows()];
        }
    }
    return c;
}

DenseMatrix gram(const DenseMatrix& a) {
    const index_t n = a.rows(), d = a.cols();
    DenseMatrix g(d, d);
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < d; ++j) {
        for (index_t i = 0; i <= j; ++i) {
            const double* ai = a.col(i);
            const double* aj = a.col(j);
            double s = 0.0;
            for (index_t l = 0; l < n; ++l) s += ai[l] * aj[l];
            g(i, j) = s;
        }
    }
    for (index_t j = 0; j < d; ++j)
        for (index_t i = j + 1; i < d; ++i) g(i, j) = g(j, i);
    return g;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (index_t j = 0; j < a.cols(); ++j)
        for (index_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

DenseMatrix take_columns(const DenseMatrix& x, std::span<const index_t> indices) {
    DenseMatrix r(x.rows(), static_cast<index_t>(indices.size()));
    for (index_t j = 0; j < r.cols(); ++j) {
        index_t src = indices[static_cast<std::size_t>(j)];
        if (src < 0 || src >= x.cols())
            throw std::invalid_argument("take_columns: index out of range");
        std::copy(x.col(src), x.col(src) + x.rows(), r.col(j));
    }
    return r;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    const double* p = a.data();
    for (index_t i = 0; i < a.size(); ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    const double* p = a.data();
    for (index_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

DenseMatrix gaussian_matrix(index_t rows, index_t cols, SeededRng& rng) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("gaussian_matrix: dimensions must be positive");
    DenseMatrix g(rows, cols);
    double* p = g.data();
    const index_t total = g.size();
    for (index_t i = 0; i < total; ++i) p[i] = rng.next_normal();
    return g;
}

SparseMatrix random_sparse(index_t rows, index_t cols, index_t per_row, SeededRng& rng) {
    if (rows < 1 || cols < 1 || per_row < 1 || per_row > cols)
        throw std::invalid_argument("random_sparse: need 1 <= per_row <= cols");
    SparseMatrix s;
    s.rows = rows;
    s.cols = cols;
    s.row_offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
    s.col_indices.reserve(static_cast<std::size_t>(rows * per_row));
    s.values.reserve(static_cast<std::size_t>(rows * per_row));
    std::vector<index_t> pool(static_cast<std::size_t>(cols));
    for (index_t i = 0; i < rows; ++i) {
        std::iota(pool.begin(), pool.end(), index_t{0});
        for (index_t t = 0; t < per_row; ++t) {
            index_t j = t + static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(cols - t)));
            std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
        }
        std::sort(pool.begin(), pool.begin() + per_row);
        for (index_t t = 0; t < per_row; ++t) {
            s.col_indices.push_back(pool[static_cast<std::size_t>(t)]);
            s.values.push_back(2.0 * rng.next_uniform() - 1.0);
        }
        s.row_offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(s.values.size());
    }
    return s;
}

} // namespace cg
