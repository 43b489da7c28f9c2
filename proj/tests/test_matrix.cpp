#include <catch2/catch_amalgamated.hpp>

#include "zorb/matrix.hpp"
#include "zorb/rng.hpp"

using namespace zorb;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

} // namespace

TEST_CASE("matmul identity", "[matrix]") {
    Rng rng(1);
    Matrix a = random_matrix(4, 3, rng);
    CHECK(max_abs_diff(matmul(Matrix::identity(4), a), a) == 0.0);
    CHECK(max_abs_diff(matmul(a, Matrix::identity(3)), a) == 0.0);
}

TEST_CASE("matmul against hand-computed 2x2", "[matrix]") {
    Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    Matrix b{{5.0, 6.0}, {7.0, 8.0}};
    Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 19.0);
    CHECK(c(0, 1) == 22.0);
    CHECK(c(1, 0) == 43.0);
    CHECK(c(1, 1) == 50.0);
}

TEST_CASE("matmul shape mismatch throws", "[matrix]") {
    Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), DimError);
}

TEST_CASE("transpose is an involution", "[matrix]") {
    Rng rng(7);
    Matrix a = random_matrix(5, 2, rng);
    CHECK(transpose(transpose(a)) == a);
}

TEST_CASE("hstack_ones appends a ones row", "[matrix]") {
    Matrix x(2, 3);
    Matrix y = hstack_ones(x);
    REQUIRE(y.rows() == 3);
    REQUIRE(y.cols() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(y(2, j) == 1.0);
        CHECK(y(0, j) == 0.0);
        CHECK(y(1, j) == 0.0);
    }
}

TEST_CASE("column broadcast add", "[matrix]") {
    Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    Matrix b{{10.0}, {20.0}};
    Matrix c = add_col_broadcast(a, b);
    CHECK(c(0, 1) == 12.0);
    CHECK(c(1, 0) == 23.0);
}

TEST_CASE("frobenius norm", "[matrix]") {
    Matrix a{{3.0, 0.0}, {0.0, 4.0}};
    CHECK(frobenius_norm(a) == Catch::Approx(5.0));
}

TEST_CASE("rng is reproducible and bounded", "[matrix]") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform(-1.0, 1.0);
        CHECK(x == b.uniform(-1.0, 1.0));
        CHECK(x >= -1.0);
        CHECK(x < 1.0);
    }
}
