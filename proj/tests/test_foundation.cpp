#include <cmath>
#include <complex>

#include "doctest.h"
#include "quantsurf/cech.hpp"
#include "quantsurf/errors.hpp"
#include "quantsurf/expr.hpp"
#include "quantsurf/flatmodel.hpp"
#include "quantsurf/geometry.hpp"
#include "quantsurf/linalg.hpp"
#include "quantsurf/rational.hpp"
#include "quantsurf/series.hpp"

using namespace quantsurf;

TEST_CASE("expression parsing and evaluation") {
    Expr e = Expr::parse("sin(x)*(a + cos(y)) + x^2/2", {{"a", 2.0}});
    CHECK(e(0.3, 0.7) ==
          doctest::Approx(std::sin(0.3) * (2 + std::cos(0.7)) + 0.09 / 2).epsilon(1e-14));
    CHECK_THROWS_AS(Expr::parse("x + unknown", {}), ParseError);
    CHECK_THROWS_AS(Expr::parse("x + * y", {}), ParseError);
    CHECK(Expr::parse("pi", {})(0, 0) == doctest::Approx(3.14159265358979).epsilon(1e-14));
    CHECK(Expr::parse("(-2)^3", {})(0, 0) == doctest::Approx(-8.0));
    CHECK(Expr::parse("x^-2", {})(2, 0) == doctest::Approx(0.25));
}

TEST_CASE("expression jets match finite differences") {
    Expr e = Expr::parse("exp(x*y) + sqrt(1 + x^2) * cos(y)", {});
    double x = 0.4, y = -0.8, h = 1e-5;
    Jet2 j = e.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
    CHECK(j.v == doctest::Approx(e(x, y)).epsilon(1e-14));
    CHECK(j.dx == doctest::Approx((e(x + h, y) - e(x - h, y)) / (2 * h)).epsilon(1e-8));
    CHECK(j.dy == doctest::Approx((e(x, y + h) - e(x, y - h)) / (2 * h)).epsilon(1e-8));
    CHECK(j.dxx ==
          doctest::Approx((e(x + h, y) - 2 * e(x, y) + e(x - h, y)) / (h * h)).epsilon(1e-4));
    CHECK(j.dxy == doctest::Approx((e(x + h, y + h) - e(x + h, y - h) - e(x - h, y + h) +
                                    e(x - h, y - h)) /
                                   (4 * h * h))
                       .epsilon(1e-4));
}

TEST_CASE("series exp recurrence against closed form") {
    // exp(i(a t + b t^2)) coefficients via direct expansion at order 4
    CSeries arg(4);
    double a = 0.7, b = -0.3;
    arg[1] = Complex(0, a);
    arg[2] = Complex(0, b);
    CSeries e = CSeries::exp_nonconst(arg);
    CHECK(std::abs(e[0] - Complex(1, 0)) < 1e-15);
    CHECK(std::abs(e[1] - Complex(0, a)) < 1e-15);
    CHECK(std::abs(e[2] - (Complex(0, b) - a * a / 2.0)) < 1e-14);
    // t^3: i^3 a^3/6 + i a * i b = -i a^3/6 - a b
    CHECK(std::abs(e[3] - (Complex(0, -a * a * a / 6.0) + Complex(-a * b, 0))) < 1e-14);
}

TEST_CASE("two-variable series arithmetic") {
    Series2 x = Series2::variable_x(6, 0.3);
    Series2 y = Series2::variable_y(6, -0.2);
    Series2 s = sin(x * y) + exp(x) * cos(y);
    // compare a few Taylor coefficients with finite differences of the function
    auto f = [](double u, double v) {
        return std::sin((0.3 + u) * (-0.2 + v)) + std::exp(0.3 + u) * std::cos(-0.2 + v);
    };
    CHECK(s.at(0, 0) == doctest::Approx(f(0, 0)).epsilon(1e-13));
    double h = 1e-5;
    CHECK(s.at(1, 0) == doctest::Approx((f(h, 0) - f(-h, 0)) / (2 * h)).epsilon(1e-8));
    CHECK(s.at(0, 1) == doctest::Approx((f(0, h) - f(0, -h)) / (2 * h)).epsilon(1e-8));
    CHECK(2 * s.at(2, 0) ==
          doctest::Approx((f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / (h * h)).epsilon(1e-4));
}

TEST_CASE("rational arithmetic is exact") {
    Rational a(1, 3), b(2, 5);
    CHECK((a + b) == Rational(11, 15));
    CHECK((a * b) == Rational(2, 15));
    CHECK((a / b) == Rational(5, 6));
    GaussianRational u(Rational(3, 5), Rational(4, 5));
    GaussianRational prod = u * (GaussianRational(1) / u);
    CHECK(prod == GaussianRational(1));
}

TEST_CASE("numeric rank and exact rank agree on a known matrix") {
    CMatrix m(3, 3);
    // rank-2 matrix: third row is the sum of the first two
    double rows[2][3] = {{1, 2, 3}, {0, 1, -1}};
    for (int j = 0; j < 3; ++j) {
        m(0, j) = rows[0][j];
        m(1, j) = rows[1][j];
        m(2, j) = rows[0][j] + rows[1][j];
    }
    RankInfo info = numeric_rank(m);
    CHECK(info.rank == 2);

    Matrix<Rational> r(3, 3);
    for (int j = 0; j < 3; ++j) {
        r(0, j) = Rational(static_cast<long long>(rows[0][j]));
        r(1, j) = Rational(static_cast<long long>(rows[1][j]));
        r(2, j) = r(0, j) + r(1, j);
    }
    CHECK(exact_rank(r) == 2);
}

TEST_CASE("singular values of a diagonal-ish complex matrix") {
    CMatrix m(2, 2);
    m(0, 0) = Complex(0, 3);
    m(1, 1) = Complex(4, 0);
    auto sv = singular_values(m);
    CHECK(sv[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sv[1] == doctest::Approx(3.0).epsilon(1e-12));
}
