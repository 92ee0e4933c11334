#include "doctest.h"

#include "countgauss/io.hpp"
#include "countgauss/nmf.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace cg;

namespace {

DenseMatrix sample_dense() {
    DenseMatrix m(3, 2);
    m(0, 0) = 1.25;
    m(1, 0) = -3.5;
    m(2, 1) = 1e-17;
    m(0, 1) = 123456.789;
    return m;
}

} // namespace

TEST_CASE("matrix market sparse round trip") {
    SparseMatrix s = SparseMatrix::from_dense(sample_dense());
    std::stringstream buf;
    write_matrix_market(buf, s);
    SparseMatrix back = read_matrix_market_sparse(buf);
    back.validate();
    REQUIRE(back.nnz() == s.nnz());
    for (index_t i = 0; i < s.nnz(); ++i) {
        CHECK(back.col_indices[i] == s.col_indices[i]);
        CHECK(back.values[i] == s.values[i]);
    }
}

TEST_CASE("matrix market dense round trip and auto detection") {
    DenseMatrix m = sample_dense();
    std::stringstream buf;
    write_matrix_market(buf, m);
    DenseMatrix back = read_matrix_market_any(buf);
    REQUIRE(back.rows() == m.rows());
    for (index_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);
}

TEST_CASE("matrix market parse errors carry line positions") {
    std::stringstream empty("");
    CHECK_THROWS_AS(read_matrix_market_sparse(empty), ParseError);

    std::stringstream bad_banner("%%MatrixMarket tensor coordinate real general\n1 1 0\n");
    CHECK_THROWS_AS(read_matrix_market_sparse(bad_banner), ParseError);

    std::stringstream out_of_range("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    try {
        read_matrix_market_sparse(out_of_range);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }

    std::stringstream short_file("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
    CHECK_THROWS_AS(read_matrix_market_sparse(short_file), ParseError);
}

TEST_CASE("csv round trip, header skipping, ragged rejection") {
    DenseMatrix m = sample_dense();
    std::stringstream buf;
    write_csv(buf, m);
    DenseMatrix back = read_csv(buf);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (index_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);

    std::stringstream with_header("a,b\n1.5,2\n3,4\n");
    DenseMatrix h = read_csv(with_header);
    CHECK(h.rows() == 2);
    CHECK(h(0, 0) == 1.5);

    std::stringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_csv(ragged), ParseError);

    std::stringstream nothing("\n\n");
    CHECK_THROWS_AS(read_csv(nothing), ParseError);
}

TEST_CASE("svm problem from CSV: label first, features after") {
    std::stringstream in("1,0.5,2\n-1,1.25,0\n");
    SvmProblem p = svm_problem_from_csv(in, 10.0);
    REQUIRE(p.x.rows() == 2);
    REQUIRE(p.x.cols() == 2);
    CHECK(p.y[0] == 1.0);
    CHECK(p.y[1] == -1.0);
    CHECK(p.x(0, 0) == 0.5);
    CHECK(p.x(1, 0) == 1.25);

    std::stringstream narrow("1\n-1\n");
    CHECK_THROWS_AS(svm_problem_from_csv(narrow, 1.0), ParseError);
}

TEST_CASE("separable instance directory round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "countgauss_io_test";
    fs::remove_all(dir);

    SeededRng rng(314);
    auto inst = generate_separable(8, 14, 3, rng);
    for (const std::string format : {"mtx", "csv"}) {
        save_instance(inst, dir.string(), format);
        auto back = load_instance(dir.string());
        CHECK(back.anchors == inst.anchors);
        CHECK(back.noise_sigma == inst.noise_sigma);
        CHECK(back.seed == inst.seed);
        REQUIRE(back.x.rows() == inst.x.rows());
        REQUIRE(back.x.cols() == inst.x.cols());
        for (index_t i = 0; i < inst.x.size(); ++i)
            CHECK(back.x.data()[i] == inst.x.data()[i]);
        REQUIRE(back.h_true.has_value());
        for (index_t i = 0; i < inst.h_true->size(); ++i)
            CHECK(back.h_true->data()[i] == inst.h_true->data()[i]);
    }
    fs::remove_all(dir);
}

TEST_CASE("libsvm reader") {
    std::stringstream in("+1 1:0.5 3:2\n-1 2:1.25\n");
    SvmProblem p = read_libsvm(in, 500.0);
    REQUIRE(p.x.rows() == 2);
    REQUIRE(p.x.cols() == 3);
    CHECK(p.y[0] == 1.0);
    CHECK(p.y[1] == -1.0);
    CHECK(p.x(0, 0) == 0.5);
    CHECK(p.x(0, 2) == 2.0);
    CHECK(p.x(1, 1) == 1.25);
    CHECK(p.c == 500.0);

    std::stringstream bad("1 0:1.0\n");
    CHECK_THROWS_AS(read_libsvm(bad, 1.0), ParseError);
    std::stringstream bad2("1 2-3\n");
    CHECK_THROWS_AS(read_libsvm(bad2, 1.0), ParseError);
    std::stringstream none("\n");
    CHECK_THROWS_AS(read_libsvm(none, 1.0), ParseError);
}
