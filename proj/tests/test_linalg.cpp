#include <doctest.h>

#include <cmath>

#include "hmg/linalg.hpp"
#include "test_util.hpp"

using namespace hmg;
using hmg::test::max_abs_diff;
using hmg::test::random_matrix;
using hmg::test::spectra_distance;

TEST_CASE("qr_decompose on the identity") {
    const Mat a = Mat::identity(3);
    const QrResult f = qr_decompose(a);
    CHECK(max_abs_diff(f.q, Mat::identity(3)) == 0.0);
    CHECK(max_abs_diff(f.r, Mat::identity(3)) == 0.0);
}

TEST_CASE("qr_decompose of an orthogonal input gives a signed permutation") {
    const Mat a{{0, 1}, {1, 0}};
    const QrResult f = qr_decompose(a);
    CHECK(std::abs(std::abs(f.r(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(f.r(1, 1)) - 1.0) < 1e-14);
    CHECK(std::abs(f.r(0, 1)) < 1e-14);
    CHECK(max_abs_diff(f.q.transpose() * f.q, Mat::identity(2)) < 1e-14);
}

TEST_CASE("qr_decompose reconstruction and orthogonality on random input") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        const Mat a = random_matrix(rng, 4, 3);
        const QrResult f = qr_decompose(a);
        CHECK(max_abs_diff(f.q * f.r, a) <= 1e-12 * std::max(1.0, a.norm_inf()));
        CHECK(max_abs_diff(f.q.transpose() * f.q, Mat::identity(4)) <= 1e-12);
        for (std::size_t i = 1; i < 4; ++i)
            for (std::size_t j = 0; j < std::min<std::size_t>(i, 3); ++j)
                CHECK(f.r(i, j) == 0.0);
    }
}

TEST_CASE("qr_decompose tolerates rank deficiency") {
    Mat a(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = 2.0;
        a(i, 2) = 2.0; // column 2 = column 1
    }
    const QrResult f = qr_decompose(a);
    CHECK(max_abs_diff(f.q * f.r, a) < 1e-12 * a.norm_inf());
}

TEST_CASE("hessenberg leaves a 2x2 untouched") {
    const Mat a{{1, 2}, {3, 4}};
    const HessenbergResult f = hessenberg(a);
    CHECK(max_abs_diff(f.h, a) == 0.0);
    CHECK(max_abs_diff(f.q, Mat::identity(2)) == 0.0);
}

TEST_CASE("hessenberg of a symmetric matrix is tridiagonal") {
    std::mt19937_64 rng(11);
    Mat a = random_matrix(rng, 4, 4);
    a = (a + a.transpose()) * 0.5;
    const HessenbergResult f = hessenberg(a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i > j + 1 || j > i + 1) CHECK(std::abs(f.h(i, j)) < 1e-13 * a.norm_inf());
}

TEST_CASE("hessenberg similarity h = q^T a q and exact subdiagonal zeros") {
    std::mt19937_64 rng(13);
    const Mat a = random_matrix(rng, 5, 5);
    const HessenbergResult f = hessenberg(a);
    CHECK(max_abs_diff(f.h, f.q.transpose() * a * f.q) <= 1e-12 * a.norm_inf());
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) CHECK(f.h(i, j) == 0.0);
    // spectrum preserved, checked through the characteristic-polynomial oracle
    const auto ea = companion_roots(char_poly(a).p);
    const auto eh = companion_roots(char_poly(f.h).p);
    CHECK(spectra_distance(eh, ea) < 1e-8);
}

TEST_CASE("eig_qr on a diagonal matrix") {
    Mat a(3, 3);
    a(0, 0) = -1.0;
    a(1, 1) = -2.0;
    a(2, 2) = -3.0;
    const auto e = eig_qr(a);
    CHECK(spectra_distance(e, {{-1.0, 0.0}, {-2.0, 0.0}, {-3.0, 0.0}}) < 1e-14);
}

TEST_CASE("eig_qr returns exact conjugates for a rotation generator") {
    const Mat a{{0, 1}, {-1, 0}};
    const auto e = eig_qr(a);
    REQUIRE(e.size() == 2);
    CHECK(e[0].real() == e[1].real());
    CHECK(e[0].imag() == -e[1].imag());
    CHECK(std::abs(std::abs(e[0].imag()) - 1.0) < 1e-14);
    CHECK(std::abs(e[0].real()) < 1e-14);
}

TEST_CASE("eig_qr matches the companion-polynomial oracle on random matrices") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 7);
        const Mat a = random_matrix(rng, n, n);
        const auto e1 = eig_qr(a);
        const auto e2 = companion_roots(char_poly(a).p);
        REQUIRE(e1.size() == n);
        CHECK(spectra_distance(e1, e2) < 1e-7);
    }
}

TEST_CASE("eig_qr trace and determinant consistency") {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 7);
        const Mat a = random_matrix(rng, n, n);
        const auto e = eig_qr(a);
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
        Complex sum = 0.0, prod = 1.0;
        for (const Complex& l : e) { sum += l; prod *= l; }
        CHECK(std::abs(sum.real() - tr) <= 1e-8 * static_cast<double>(n) * std::max(1.0, a.norm_inf()));
        CHECK(std::abs(sum.imag()) < 1e-10);
        const Poly p = char_poly(a).p;
        const double det = (n % 2 ? -1.0 : 1.0) * p.coeffs.back();
        if (std::abs(det) > 1e-6)
            CHECK(std::abs(prod.real() - det) <= 1e-6 * std::abs(det) + 1e-9);
    }
}

TEST_CASE("eig_qr survives structured stress cases") {
    // Jordan block
    const Mat j3{{2, 1, 0}, {0, 2, 1}, {0, 0, 2}};
    CHECK(spectra_distance(eig_qr(j3), {{2, 0}, {2, 0}, {2, 0}}) < 1e-4);
    // cyclic permutation: eigenvalues on the unit circle
    Mat p4(4, 4);
    p4(0, 1) = p4(1, 2) = p4(2, 3) = p4(3, 0) = 1.0;
    const auto e = eig_qr(p4);
    for (const Complex& l : e) CHECK(std::abs(std::abs(l) - 1.0) < 1e-12);
    // clustered complex pairs with a huge real offset (shift flip-flop case)
    Mat cl(4, 4);
    cl(0, 0) = -1.1783e6; cl(0, 1) = 313.7;
    cl(1, 0) = -313.7; cl(1, 1) = -1.1783e6;
    cl(2, 2) = -1.1449e6; cl(2, 3) = 313.7;
    cl(3, 2) = -313.7; cl(3, 3) = -1.1449e6;
    std::mt19937_64 rng(23);
    const Mat s = random_matrix(rng, 4, 4, -0.1, 0.1) + Mat::identity(4);
    const Mat m = solve_linear(s, cl * s); // similarity, same spectrum
    CHECK(spectra_distance(eig_qr(m), eig_qr(cl), 1.0) < 1e-6);
}

TEST_CASE("char_poly on small closed forms") {
    const Mat a{{2, 0}, {0, 3}};
    const CharPolyResult f = char_poly(a);
    REQUIRE(f.p.coeffs.size() == 3);
    CHECK(f.p.coeffs[0] == 1.0);
    CHECK(f.p.coeffs[1] == doctest::Approx(-5.0));
    CHECK(f.p.coeffs[2] == doctest::Approx(6.0));

    const Mat s{{4.0}};
    const CharPolyResult g = char_poly(s);
    CHECK(g.p.coeffs[0] == 1.0);
    CHECK(g.p.coeffs[1] == -4.0);
    REQUIRE(g.adj_coeffs.size() == 1);
    CHECK(g.adj_coeffs[0](0, 0) == 1.0);
}

TEST_CASE("char_poly vanishes at the eigenvalues") {
    std::mt19937_64 rng(29);
    const Mat a = random_matrix(rng, 4, 4);
    const CharPolyResult f = char_poly(a);
    const double bound = 1e-8 * std::pow(std::max(1.0, a.norm_inf()), 4.0);
    for (const Complex& l : eig_qr(a)) CHECK(std::abs(f.p.evaluate(l)) <= bound);
}

TEST_CASE("char_poly size limit") {
    CHECK_THROWS_AS((void)char_poly(Mat::identity(61)), SizeLimit);
    CHECK_NOTHROW((void)char_poly(Mat::identity(60)));
}

TEST_CASE("companion_roots on quadratics and linears") {
    CHECK(spectra_distance(companion_roots(Poly{{1, 3, 2}}), {{-1, 0}, {-2, 0}}) < 1e-12);
    CHECK(spectra_distance(companion_roots(Poly{{1, 0, 1}}), {{0, 1}, {0, -1}}) < 1e-12);
    CHECK(spectra_distance(companion_roots(Poly{{2, -6}}), {{3, 0}}) < 1e-14);
    CHECK_THROWS_AS((void)companion_roots(Poly{{0.0, 0.0}}), ZeroPolynomial);
}

TEST_CASE("solve_linear identity, diagonal, and singular cases") {
    const Mat b{{2}, {8}};
    CHECK(max_abs_diff(solve_linear(Mat::identity(2), b), b) == 0.0);
    const Mat d{{2, 0}, {0, 4}};
    const Mat x = solve_linear(d, b);
    CHECK(x(0, 0) == doctest::Approx(1.0));
    CHECK(x(1, 0) == doctest::Approx(2.0));
    const Mat s{{1, 1}, {1, 1}};
    CHECK_THROWS_AS((void)solve_linear(s, Mat{{1}, {0}}), Singular);
}

TEST_CASE("solve_linear residual bound on random systems") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        const Mat a = random_matrix(rng, 6, 6) + Mat::identity(6) * 3.0;
        const Mat b = random_matrix(rng, 6, 2);
        const Mat x = solve_linear(a, b);
        CHECK(max_abs_diff(a * x, b) <= 1e-10 * a.norm_inf() * std::max(1.0, x.max_abs()));
    }
}

TEST_CASE("nullspace_basis single constraint and full rank") {
    const Mat m{{1, 0}};
    const Mat ns = nullspace_basis(m, 1e-10);
    REQUIRE(ns.cols() == 1);
    CHECK(std::abs(ns(0, 0)) < 1e-14);
    CHECK(std::abs(std::abs(ns(1, 0)) - 1.0) < 1e-14);
    CHECK(nullspace_basis(Mat::identity(2), 1e-10).cols() == 0);
}

TEST_CASE("nullspace_basis residual and orthogonality on a wide random matrix") {
    std::mt19937_64 rng(37);
    const Mat m = random_matrix(rng, 3, 6);
    const Mat ns = nullspace_basis(m, 1e-10);
    REQUIRE(ns.cols() == 3);
    CHECK((m * ns).max_abs() < 1e-10 * std::max(1.0, m.norm_inf()));
    CHECK(max_abs_diff(ns.transpose() * ns, Mat::identity(3)) <= 1e-12);
}

TEST_CASE("expm_scaled closed forms") {
    Mat z(2, 2);
    CHECK(max_abs_diff(expm_scaled(z, 1.0), Mat::identity(2)) == 0.0);
    const Mat nil{{0, 1}, {0, 0}};
    const Mat e = expm_scaled(nil, 1.0);
    CHECK(max_abs_diff(e, Mat{{1, 1}, {0, 1}}) < 1e-15);
    const Mat s{{-1.0}};
    CHECK(std::abs(expm_scaled(s, 1.0)(0, 0) - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("expm_scaled semigroup property") {
    std::mt19937_64 rng(41);
    const Mat a = random_matrix(rng, 4, 4, -2.0, 2.0);
    const double s = 0.4, t = 0.8;
    const Mat lhs = expm_scaled(a, s + t);
    const Mat rhs = expm_scaled(a, s) * expm_scaled(a, t);
    CHECK(max_abs_diff(lhs, rhs) < 1e-9 * std::max(1.0, lhs.max_abs()));
}

TEST_CASE("eig_qr oracle agreement sweep, n <= 8") {
    std::mt19937_64 rng(43);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 8);
        const Mat a = random_matrix(rng, n, n);
        worst = std::max(worst, spectra_distance(eig_qr(a), companion_roots(char_poly(a).p)));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("eig_qr conjugate pairing is bitwise") {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 40; ++t) {
        const Mat a = random_matrix(rng, 6, 6);
        auto e = eig_qr(a);
        for (const Complex& l : e) {
            if (l.imag() <= 0.0) continue;
            bool found = false;
            for (const Complex& m : e)
                if (m.real() == l.real() && m.imag() == -l.imag()) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("eig_qr rejects bad input") {
    CHECK_THROWS_AS((void)eig_qr(Mat(2, 3)), DimensionMismatch);
    Mat nan2(2, 2);
    nan2(0, 0) = std::nan("");
    CHECK_THROWS_AS((void)eig_qr(nan2), DimensionMismatch);
}
