#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zorb/linalg.hpp"
#include "zorb/rng.hpp"

using namespace zorb;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

// test-only oracle: Gauss-Jordan inverse with partial pivoting,
// independent of the SVD code path
Matrix gauss_inverse(Matrix a) {
    const std::size_t n = a.rows();
    REQUIRE(a.cols() == n);
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        REQUIRE(std::abs(a(pivot, col)) > 1e-12);
        for (std::size_t c = 0; c < n; ++c) {
            std::swap(a(col, c), a(pivot, c));
            std::swap(inv(col, c), inv(pivot, c));
        }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

double rel_fro(const Matrix& diff, const Matrix& ref) {
    const double denom = std::max(frobenius_norm(ref), 1e-300);
    return frobenius_norm(diff) / denom;
}

} // namespace

TEST_CASE("svd of identity", "[linalg]") {
    SvdResult r = svd(Matrix::identity(3));
    REQUIRE(r.s.size() == 3);
    for (double s : r.s) CHECK(s == Catch::Approx(1.0).margin(1e-12));
    // columns of U and V agree up to sign
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(r.u(i, j) * r.v(i, j) >= -1e-12);
}

TEST_CASE("svd of diag(3,2)", "[linalg]") {
    Matrix a{{3.0, 0.0}, {0.0, 2.0}};
    SvdResult r = svd(a);
    CHECK(r.s[0] == Catch::Approx(3.0).margin(1e-12));
    CHECK(r.s[1] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("svd reconstruction oracle", "[linalg]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + rng.below(8);
        const std::size_t n = 1 + rng.below(8);
        Matrix a = random_matrix(m, n, rng);
        SvdResult r = svd(a);

        REQUIRE(r.s.size() == std::min(m, n));
        for (std::size_t i = 1; i < r.s.size(); ++i) CHECK(r.s[i - 1] >= r.s[i]);
        for (double s : r.s) CHECK(s >= 0.0);

        Matrix usvt = r.u;
        for (std::size_t j = 0; j < r.s.size(); ++j)
            for (std::size_t i = 0; i < usvt.rows(); ++i) usvt(i, j) *= r.s[j];
        usvt = matmul(usvt, transpose(r.v));
        CHECK(rel_fro(usvt - a, a) < 1e-10);

        Matrix utu = matmul(transpose(r.u), r.u);
        Matrix vtv = matmul(transpose(r.v), r.v);
        CHECK(max_abs_diff(utu, Matrix::identity(r.s.size())) < 1e-10);
        CHECK(max_abs_diff(vtv, Matrix::identity(r.s.size())) < 1e-10);
    }
}

TEST_CASE("svd reconstruction for seeded 4x3", "[linalg]") {
    Rng rng(4);
    Matrix a = random_matrix(4, 3, rng);
    SvdResult r = svd(a);
    Matrix usvt = r.u;
    for (std::size_t j = 0; j < r.s.size(); ++j)
        for (std::size_t i = 0; i < usvt.rows(); ++i) usvt(i, j) *= r.s[j];
    CHECK(rel_fro(matmul(usvt, transpose(r.v)) - a, a) < 1e-10);
}

TEST_CASE("svd handles rank deficiency with orthonormal completion", "[linalg]") {
    Matrix a{{1.0, 0.0}, {0.0, 0.0}};
    SvdResult r = svd(a);
    CHECK(r.s[0] == Catch::Approx(1.0));
    CHECK(r.s[1] == 0.0);
    CHECK(max_abs_diff(matmul(transpose(r.u), r.u), Matrix::identity(2)) < 1e-12);
}

TEST_CASE("pinv of identity", "[linalg]") {
    CHECK(max_abs_diff(pinv(Matrix::identity(2), 1e-15), Matrix::identity(2)) < 1e-12);
}

TEST_CASE("pinv drops singular values below the cutoff", "[linalg]") {
    Matrix a{{1.0, 0.0}, {0.0, 0.0}};
    Matrix p = pinv(a, 1e-15);
    CHECK(max_abs_diff(p, a) < 1e-12);

    // rcond large enough to drop the second value of diag(1, 1e-6)
    Matrix b{{1.0, 0.0}, {0.0, 1e-6}};
    Matrix pb = pinv(b, 1e-3);
    CHECK(pb(1, 1) == 0.0);
    CHECK(pb(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("pinv matches the normal-equations oracle on full-rank 3x2", "[linalg]") {
    Rng rng(21);
    Matrix a = random_matrix(3, 2, rng);
    // oracle: (A^T A)^-1 A^T via explicit inversion
    Matrix oracle = matmul(gauss_inverse(matmul(transpose(a), a)), transpose(a));
    CHECK(max_abs_diff(pinv(a, 1e-15), oracle) < 1e-10);
}

TEST_CASE("Penrose conditions on seeded matrices", "[linalg]") {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng.below(20);
        const std::size_t n = 1 + rng.below(20);
        Matrix a = random_matrix(m, n, rng);
        Matrix ap = pinv(a, 1e-15);

        Matrix aapa = matmul(matmul(a, ap), a);
        Matrix apaap = matmul(matmul(ap, a), ap);
        CHECK(frobenius_norm(aapa - a) <= 1e-8 * frobenius_norm(a));
        CHECK(frobenius_norm(apaap - ap) <= 1e-8 * frobenius_norm(ap));

        Matrix aap = matmul(a, ap);
        Matrix apa = matmul(ap, a);
        CHECK(frobenius_norm(aap - transpose(aap)) <=
              1e-8 * std::max(1.0, frobenius_norm(aap)));
        CHECK(frobenius_norm(apa - transpose(apa)) <=
              1e-8 * std::max(1.0, frobenius_norm(apa)));
    }
}

TEST_CASE("pinv is an involution on full-rank matrices", "[linalg]") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = random_matrix(3 + rng.below(4), 3, rng);
        Matrix back = pinv(pinv(a, 1e-15), 1e-15);
        CHECK(rel_fro(back - a, a) < 1e-8);
    }
}

TEST_CASE("lstsq identity system", "[linalg]") {
    Rng rng(9);
    Matrix y = random_matrix(2, 4, rng);
    CHECK(max_abs_diff(lstsq_solve(Matrix::identity(4), y, 1e-15), y) < 1e-12);
}

TEST_CASE("lstsq on invertible square system matches the direct inverse", "[linalg]") {
    Rng rng(17);
    Matrix x{{1.0, 2.0}, {3.0, 5.0}}; // invertible
    Matrix y = random_matrix(1, 2, rng);
    Matrix w = lstsq_solve(x, y, 1e-15);
    Matrix oracle = matmul(y, gauss_inverse(x));
    CHECK(max_abs_diff(w, oracle) < 1e-10);
    CHECK(frobenius_norm(matmul(w, x) - y) < 1e-10);
}

TEST_CASE("lstsq residual is minimal under perturbation", "[linalg]") {
    Rng rng(29);
    Matrix x = random_matrix(2, 50, rng);
    Matrix w_true = random_matrix(1, 2, rng);
    Matrix y = matmul(w_true, x);
    for (std::size_t j = 0; j < y.cols(); ++j) y(0, j) += 0.01 * rng.uniform(-1.0, 1.0);

    Matrix w = lstsq_solve(x, y, 1e-15);
    const double base = frobenius_norm(matmul(w, x) - y);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix wp = w;
        for (std::size_t j = 0; j < wp.cols(); ++j) wp(0, j) += 0.05 * rng.uniform(-1.0, 1.0);
        CHECK(frobenius_norm(matmul(wp, x) - y) >= base - 1e-12);
    }
}

TEST_CASE("lstsq minimality across many seeded instances", "[linalg]") {
    Rng rng(101);
    for (int instance = 0; instance < 200; ++instance) {
        const std::size_t d = 1 + rng.below(5);
        const std::size_t k = 1 + rng.below(3);
        const std::size_t n = d + 1 + rng.below(20);
        Matrix x = random_matrix(d, n, rng);
        Matrix y = random_matrix(k, n, rng);
        Matrix w = lstsq_solve(x, y, 1e-15);
        const double base = frobenius_norm(matmul(w, x) - y);
        const double wnorm = frobenius_norm(w);
        bool minimal = true;
        for (int p = 0; p < 10; ++p) {
            Matrix wp = w;
            const double mag = 0.1 * wnorm * rng.uniform();
            for (std::size_t i = 0; i < wp.rows(); ++i)
                for (std::size_t j = 0; j < wp.cols(); ++j)
                    wp(i, j) += mag * rng.uniform(-1.0, 1.0);
            if (frobenius_norm(matmul(wp, x) - y) < base - 1e-12) minimal = false;
        }
        CHECK(minimal);
    }
}

TEST_CASE("lstsq returns the minimum-norm exact solution when underdetermined", "[linalg]") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 6, n = 3, k = 2; // rank(X) <= 3 < d
        Matrix x = random_matrix(d, n, rng);
        Matrix y = random_matrix(k, n, rng);
        Matrix w = lstsq_solve(x, y, 1e-15);
        CHECK(frobenius_norm(matmul(w, x) - y) < 1e-8); // exact interpolation

        // other exact solutions: W' = W + N (I - X X+)
        Matrix null_proj = Matrix::identity(d) - matmul(x, pinv(x, 1e-15));
        for (int p = 0; p < 20; ++p) {
            Matrix noise = random_matrix(k, d, rng);
            Matrix wp = w + matmul(noise, null_proj);
            REQUIRE(frobenius_norm(matmul(wp, x) - y) < 1e-8);
            CHECK(frobenius_norm(w) <= frobenius_norm(wp) + 1e-12);
        }
    }
}

TEST_CASE("lstsq dimension mismatch throws", "[linalg]") {
    CHECK_THROWS_AS(lstsq_solve(Matrix(2, 5), Matrix(1, 4), 1e-15), DimError);
}
