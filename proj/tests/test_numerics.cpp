#include <doctest.h>

#include <cmath>
#include <vector>

#include "rbrm/errors.hpp"
#include "rbrm/numerics.hpp"
#include "test_support.hpp"

using namespace rbrm;

namespace {

// Characteristic polynomial of a 3x3 matrix: det(A - x I).
double char_poly3(const Mat& a, double x) {
    Mat m = a - x * Mat::Identity(3, 3);
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Roots of the characteristic polynomial by sign-change scan plus bisection.
// Independent of the Jacobi path under test.
std::vector<double> char_poly_roots3(const Mat& a) {
    double radius = 0.0;
    for (int r = 0; r < 3; ++r) {
        double row = 0.0;
        for (int c = 0; c < 3; ++c) row += std::abs(a(r, c));
        radius = std::max(radius, row);
    }
    const double lo = -radius - 1.0, hi = radius + 1.0;
    const int grid = 200000;
    std::vector<double> roots;
    double prev_x = lo, prev_f = char_poly3(a, lo);
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * i / grid;
        const double f = char_poly3(a, x);
        if ((prev_f < 0.0 && f > 0.0) || (prev_f > 0.0 && f < 0.0)) {
            double xl = prev_x, xh = x, fl = prev_f;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (xl + xh);
                const double fm = char_poly3(a, mid);
                if ((fl < 0.0) == (fm < 0.0)) {
                    xl = mid;
                    fl = fm;
                } else {
                    xh = mid;
                }
            }
            roots.push_back(0.5 * (xl + xh));
        }
        prev_x = x;
        prev_f = f;
    }
    return roots;
}

}  // namespace

TEST_CASE("eig_extremes identity and diagonal") {
    CHECK(eig_extremes(Mat::Identity(3, 3)).lambda_min == 1.0);
    CHECK(eig_extremes(Mat::Identity(3, 3)).lambda_max == 1.0);

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 5.0;
    const auto e = eig_extremes(d);
    CHECK(e.lambda_min == 2.0);
    CHECK(e.lambda_max == 5.0);
}

TEST_CASE("eig_extremes matches characteristic polynomial roots (3x3, fixed seed)") {
    Rng rng = make_rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const Mat a = test::random_symmetric(rng, 3, 2.0);
        const auto roots = char_poly_roots3(a);
        REQUIRE(roots.size() == 3);
        const auto e = eig_extremes(a);
        CHECK(e.lambda_min == doctest::Approx(roots.front()).epsilon(1e-8));
        CHECK(e.lambda_max == doctest::Approx(roots.back()).epsilon(1e-8));
    }
}

TEST_CASE("eig_extremes on diagonal matrices is exact") {
    Rng rng = make_rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 6);
        Mat d = Mat::Zero(n, n);
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < n; ++i) {
            d(i, i) = u(rng);
            lo = std::min(lo, d(i, i));
            hi = std::max(hi, d(i, i));
        }
        const auto e = eig_extremes(d);
        CHECK(e.lambda_min == lo);
        CHECK(e.lambda_max == hi);

        const Vec all = eigenvalues(d);
        CHECK(all[0] == lo);
        CHECK(all[n - 1] == hi);
        for (int i = 0; i + 1 < n; ++i) CHECK(all[i] <= all[i + 1]);
    }
}

TEST_CASE("eig_extremes input validation") {
    Mat bad(2, 2);
    bad << 1.0, 2.0, 3.0, 1.0;  // asymmetric
    CHECK_THROWS_AS(eig_extremes(bad), InvalidInputError);

    Mat nan_mat = Mat::Identity(2, 2);
    nan_mat(0, 0) = std::nan("");
    CHECK_THROWS_AS(eig_extremes(nan_mat), InvalidInputError);
}

TEST_CASE("eigenvalue sum/product inequalities on random PSD pairs") {
    Rng rng = make_rng(1234);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const Mat x = test::random_psd(rng, n);
        const Mat y = test::random_psd(rng, n);
        const auto ex = eig_extremes(x);
        const auto ey = eig_extremes(y);
        const auto exy = eig_extremes(Mat(x + y));

        // Minimum eigenvalues are superadditive, maxima subadditive.
        CHECK(exy.lambda_min >= ex.lambda_min + ey.lambda_min - 1e-10);
        CHECK(exy.lambda_max <= ex.lambda_max + ey.lambda_max + 1e-10);

        // lambda_max(XY) <= lambda_max(X) lambda_max(Y); XY is similar to the
        // symmetric X^(1/2) Y X^(1/2), which eig_extremes can take.
        Vec vals;
        Mat vecs;
        eig_decompose(x, vals, vecs);
        Mat sqrt_x = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            sqrt_x += std::sqrt(std::max(vals[i], 0.0)) * vecs.col(i) * vecs.col(i).transpose();
        }
        const Mat prod = symmetrized(sqrt_x * y * sqrt_x);
        CHECK(eig_extremes(prod).lambda_max <=
              ex.lambda_max * ey.lambda_max + 1e-9 * (1.0 + ex.lambda_max * ey.lambda_max));
    }
}

TEST_CASE("invert_pd basics") {
    CHECK((invert_pd(Mat::Identity(2, 2)) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const Mat inv = invert_pd(d);
    CHECK(inv(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(inv(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(inv(0, 1) == 0.0);
}

TEST_CASE("invert_pd residual on random SPD (fixed seed)") {
    Rng rng = make_rng(99);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const Mat m = test::random_spd(rng, n);
        const Mat residual = m * invert_pd(m) - Mat::Identity(n, n);
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("invert_pd rejects singular and indefinite input") {
    Mat singular = Mat::Zero(2, 2);
    singular(0, 0) = 1.0;
    CHECK_THROWS_AS(invert_pd(singular), SingularMatrixError);

    Mat indefinite = Mat::Identity(2, 2);
    indefinite(1, 1) = -1.0;
    CHECK_THROWS_AS(invert_pd(indefinite), SingularMatrixError);
}

TEST_CASE("is_psd") {
    CHECK(is_psd(Mat::Zero(3, 3), 1e-9));

    Mat neg = Mat::Identity(2, 2);
    neg(1, 1) = -0.1;
    CHECK_FALSE(is_psd(neg, 1e-9));

    // Gram forms H' R^-1 H are PSD for any H and SPD R.
    Rng rng = make_rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int rows = 1 + static_cast<int>(rng() % 3);
        Mat h(rows, 2);
        for (int r = 0; r < rows; ++r) {
            h(r, 0) = u(rng);
            h(r, 1) = u(rng);
        }
        const Mat r_mat = test::random_spd(rng, rows);
        const Mat info = symmetrized(h.transpose() * invert_pd(r_mat) * h);
        CHECK(is_psd(info, 1e-9));
    }
}

TEST_CASE("clamp_psd restores roundoff-negative eigenvalues and rejects worse") {
    Mat slightly_negative = Mat::Identity(2, 2);
    slightly_negative(1, 1) = -5e-11;
    const Mat fixed = clamp_psd(slightly_negative);
    CHECK(eig_extremes(fixed).lambda_min >= 0.0);

    Mat bad = Mat::Identity(2, 2);
    bad(1, 1) = -1e-6;
    CHECK_THROWS_AS(clamp_psd(bad), NumericalFailureError);
}

TEST_CASE("symmetrized averages transpose asymmetry") {
    Mat m(2, 2);
    m << 1.0, 2.0, 4.0, 3.0;
    const Mat s = symmetrized(m);
    CHECK(s(0, 1) == 3.0);
    CHECK(s(1, 0) == 3.0);
    CHECK(is_symmetric(s));
}
