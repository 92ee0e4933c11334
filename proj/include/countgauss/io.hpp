#ifndef COUNTGAUSS_IO_HPP
#define COUNTGAUSS_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/nmf.hpp"
#include "countgauss/svm.hpp"

namespace cg {

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line;
    std::size_t column;
};

// Matrix Market: coordinate (sparse, 1-based, duplicates summed) and array
// (dense, column-major) formats, real general only.
SparseMatrix read_matrix_market_sparse(std::istream& in);
DenseMatrix read_matrix_market_dense(std::istream& in);
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(std::ostream& out, const DenseMatrix& m);

// Detects coordinate vs array from the header and returns a dense matrix.
DenseMatrix read_matrix_market_any(std::istream& in);

// Comma-separated numeric rows; a non-numeric first line is treated as a
// header and skipped. Values are written with enough digits to round-trip.
DenseMatrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const DenseMatrix& m);

// Loads a dense matrix from a path by extension (.mtx / .csv); "auto" sniffs.
DenseMatrix load_matrix(const std::string& path, const std::string& format = "auto");

// LIBSVM text: one sample per line, "label idx:val idx:val ..." with 1-based
// indices. dim = 0 infers the dimension from the largest index seen.
SvmProblem read_libsvm(std::istream& in, double c, index_t dim = 0);

// Dense CSV with the label in the first column and features in the rest.
SvmProblem svm_problem_from_csv(std::istream& in, double c);

// Directory serialization of a generated instance: the data matrix as X.mtx
// (format "mtx") or X.csv, plus anchors and metadata in instance.json.
void save_instance(const SeparableInstance& inst, const std::string& dir,
                   const std::string& format = "mtx");
SeparableInstance load_instance(const std::string& dir);

} // namespace cg

#endif
