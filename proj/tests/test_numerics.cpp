#include "doctest.h"
#include "levydam/numerics.hpp"
#include "levydam/piecewise_polynomial.hpp"
#include "levydam/errors.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <random>

using namespace levydam;

TEST_CASE("talbot inverts elementary transforms") {
    // 1/(s+1) -> e^{-t}; 1/s^2 -> t
    auto exp_t = [](cld s) { return 1.0L / (s + 1.0L); };
    auto ramp = [](cld s) { return 1.0L / (s * s); };
    for (double t : {0.1, 1.0, 5.0}) {
        CHECK(std::abs(talbot_invert(exp_t, t, 0.0, 32) - std::exp(-t)) < 1e-13);
        CHECK(talbot_invert(ramp, t, 0.0, 32) == doctest::Approx(t).epsilon(1e-13));
        // default node count trades some roundoff for the wider contour
        CHECK(std::abs(talbot_invert(exp_t, t) - std::exp(-t)) < 1e-8);
        CHECK(talbot_invert(ramp, t) == doctest::Approx(t).epsilon(1e-9));
    }
    // singularity at s = 2 needs the shift
    const double t = 3.0;
    CHECK(talbot_invert([](cld s) { return 1.0L / (s - 2.0L); }, t, 2.0, 32) ==
          doctest::Approx(std::exp(2 * t)).epsilon(1e-13));
    CHECK_THROWS_AS(talbot_invert(exp_t, 0.0), DomainError);
}

TEST_CASE("adaptive quadrature on finite and infinite ranges") {
    CHECK(integrate([](double x) { return std::exp(-x); }, 0, kInf) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
    const double kink = integrate_pieces([](double x) { return std::abs(x - 0.3); }, {0.0, 0.3, 1.0});
    CHECK(kink == doctest::Approx(0.045 + 0.245).epsilon(1e-13));
    CHECK(gauss_legendre([](double x) { return x * x * x * x; }, 0, 2, 8) == doctest::Approx(32.0 / 5).epsilon(1e-14));
}

TEST_CASE("merge_breaks clips, sorts and dedups") {
    auto b = merge_breaks({3.0, -1.0, 0.5, 0.5, kInf, 2.0}, 0.0, 2.5);
    REQUIRE(b.size() == 4);
    CHECK(b.front() == 0.0);
    CHECK(b[1] == 0.5);
    CHECK(b[2] == 2.0);
    CHECK(b.back() == 2.5);
}

TEST_CASE("bisect_root") {
    CHECK(bisect_root([](double x) { return x * x - 2; }, 0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("pairwise_sum is insensitive to ordering") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> v(10001);
    for (auto& x : v) x = u(g);
    v.push_back(1e-3);
    const double a = pairwise_sum(v);
    std::shuffle(v.begin(), v.end(), g);
    CHECK(std::abs(pairwise_sum(v) - a) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(a));
    CHECK(pairwise_sum(std::vector<double>{1e16, 1.0, -1e16}) == 1.0);
}

TEST_CASE("piecewise Chebyshev reproduces smooth functions") {
    PiecewiseChebyshev c([](double x) { return std::exp(-x) * std::cos(3 * x); }, {0.0, 1.0, 4.0});
    for (double x = 0; x <= 4; x += 0.137) CHECK(c(x) == doctest::Approx(std::exp(-x) * std::cos(3 * x)).epsilon(1e-11));
    CHECK(c(-1.0) == doctest::Approx(c(0.0)));
}

TEST_CASE("piecewise polynomial") {
    auto p = PiecewisePolynomial::piecewise_linear({0, 1, 3}, {1, 3, -1});
    CHECK(p(0.5) == doctest::Approx(2.0));
    CHECK(p(2.0) == doctest::Approx(1.0));
    CHECK(p(-5) == 1.0);
    CHECK(p(7) == -1.0);
    CHECK(p.bound() == doctest::Approx(3.0));
    CHECK_FALSE(p.is_zero());
    CHECK(PiecewisePolynomial::constant(0.0).is_zero());
    CHECK_THROWS_AS(PiecewisePolynomial::piecewise_linear({0, 0}, {1, 2}), DomainError);
}
