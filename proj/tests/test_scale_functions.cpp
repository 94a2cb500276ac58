#include "doctest.h"
#include "levydam/errors.hpp"
#include "levydam/scale_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <vector>

using namespace levydam;

namespace {

// Closed form for Brownian input: (2/delta) e^{mu x/s2} sinh(x delta/s2).
double brownian_w(double mu, double s2, double alpha, double x) {
    const double d = std::sqrt(mu * mu + 2 * alpha * s2);
    return 2.0 / d * std::exp(mu * x / s2) * std::sinh(x * d / s2);
}

// Compound Poisson with Exp(b) jumps: 1/(phi - alpha) has two simple poles.
double cp_exp_w(double zeta, double rate, double b, double alpha, double x) {
    const double B = zeta * b - rate - alpha;
    const double disc = std::sqrt(B * B + 4 * zeta * alpha * b);
    const double t1 = (-B + disc) / (2 * zeta), t2 = (-B - disc) / (2 * zeta);
    if (alpha == 0 && std::abs(t2) < 1e-300) return 0.0;
    return ((t1 + b) / (t1 - t2) * std::exp(t1 * x) + (t2 + b) / (t2 - t1) * std::exp(t2 * x)) / zeta;
}

// Truncated at X = x_max; the tail uses W(x) ~ W(X) e^{eta (x - X)}.
double laplace_of_w(const ScaleFunctionSet& s, double beta) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto f = [&](double x) { return std::exp(-beta * x) * s.w(x); };
    const double X = s.x_max();
    double v = 0.0;
    const double pts[] = {0.0, 1e-6, 1e-4, 1e-2, 0.1, 1.0, 3.0, 8.0, 14.0, X};
    for (std::size_t i = 0; i + 1 < std::size(pts); ++i) v += GK::integrate(f, pts[i], pts[i + 1], 12, 1e-13);
    return v + s.w(X) * std::exp(-beta * X) / (beta - s.eta());
}

// W^(alpha) = (1/zeta)(1 + int_0^x W^(alpha)(x - y)(nu[y, inf) + alpha) dy),
// solved by trapezoid stepping at h and h/2 with one Richardson step.
double volterra_w(const std::function<double(double)>& nubar, double zeta, double alpha, double x) {
    auto solve = [&](std::size_t n) {
        const double h = x / static_cast<double>(n);
        std::vector<double> k(n + 1), w(n + 1);
        for (std::size_t j = 0; j <= n; ++j) k[j] = nubar(static_cast<double>(j) * h) + alpha;
        w[0] = 1.0 / zeta;
        for (std::size_t i = 1; i <= n; ++i) {
            double s = 0.5 * w[0] * k[i];
            for (std::size_t j = 1; j < i; ++j) s += w[i - j] * k[j];
            w[i] = (1.0 + h * s) / (zeta - 0.5 * h * k[0]);
        }
        return w[n];
    };
    const std::size_t n = static_cast<std::size_t>(std::ceil(x / 1e-3));
    return (4.0 * solve(2 * n) - solve(n)) / 3.0;
}

}  // namespace

TEST_CASE("Brownian: Laplace inversion matches the closed form") {
    for (auto [mu, s2] : {std::pair{1.0, 2.0}, {0.5, 1.0}, {-0.4, 1.0}})
        for (double a : {0.0, 0.5}) {
            if (mu <= 0 && a == 0) continue;
            const auto m = LevyModel::brownian(mu, s2);
            ScaleOptions o;
            o.method = ScaleMethod::LaplaceInversion;
            const auto L = ScaleFunctionSet::build(m, a, o);
            const auto C = ScaleFunctionSet::build(m, a);
            CHECK(C.method() == ScaleMethod::ClosedFormBrownian);
            for (double x : {0.01, 0.3, 1.0, 4.0, 9.5}) {
                CHECK(C.w(x) == doctest::Approx(brownian_w(mu, s2, a, x)).epsilon(1e-13));
                CHECK(L.w(x) == doctest::Approx(brownian_w(mu, s2, a, x)).epsilon(1e-7));
                CHECK(L.w_prime(x) == doctest::Approx(C.w_prime(x)).epsilon(1e-7));
                CHECK(L.w_bar(x) == doctest::Approx(C.w_bar(x)).epsilon(1e-7));
            }
            CHECK(C.w(0.0) == 0.0);
            CHECK(C.w_prime(0.0) == doctest::Approx(2.0 / s2));
        }
}

TEST_CASE("Brownian with zero drift and alpha = 0 is linear") {
    const auto s = ScaleFunctionSet::build(LevyModel::brownian(0.0, 2.0), 0.0);
    for (double x : {0.0, 0.5, 3.0}) {
        CHECK(s.w(x) == doctest::Approx(x).epsilon(1e-13));
        CHECK(s.w_bar(x) == doctest::Approx(x * x / 2).epsilon(1e-13));
        CHECK(s.z(x) == 1.0);
    }
}

TEST_CASE("compound Poisson with exponential jumps: both numerical methods") {
    const double zeta = 2.0, rate = 1.0, b = 1.0;
    const auto m = LevyModel::compound_poisson(zeta, rate, JumpDistribution::exponential(b));
    for (double a : {0.0, 0.3}) {
        ScaleOptions lap, ser;
        lap.method = ScaleMethod::LaplaceInversion;
        ser.method = ScaleMethod::ConvolutionSeries;
        ser.x_max = lap.x_max = 10.0;
        const auto L = ScaleFunctionSet::build(m, a, lap);
        const auto S = ScaleFunctionSet::build(m, a, ser);
        for (double x : {0.0, 0.05, 1.0, 4.0, 9.0}) {
            CAPTURE(a);
            CAPTURE(x);
            const double w = cp_exp_w(zeta, rate, b, a, x);
            CHECK(L.w(x) == doctest::Approx(w).epsilon(1e-8));
            CHECK(S.w(x) == doctest::Approx(w).epsilon(1e-6));
        }
        CHECK(L.w(0.0) == doctest::Approx(1.0 / zeta).epsilon(1e-12));
        CHECK(L.w_prime(0.0) == doctest::Approx((rate + a) / (zeta * zeta)).epsilon(1e-10));
        CHECK_THROWS_AS(S.w(10.5), DomainError);
        CHECK_NOTHROW(L.w(25.0));
    }
}

TEST_CASE("Laplace transform of W^(alpha) is 1/(phi - alpha)") {
    const std::vector<LevyModel> models = {
        LevyModel::brownian(0.5, 1.0),
        LevyModel::compound_poisson(2.0, 1.0, JumpDistribution::exponential(1.0)),
        LevyModel::compound_poisson(1.0, 0.8, JumpDistribution::gamma(2.0, 1.5)),
        LevyModel::gamma(1.5, 1.0, 1.0),
        LevyModel::inverse_gaussian(1.2, 1.0, 1.5),
        LevyModel::generic_bounded_variation(1.0, LevyMeasure::tabulated({0.0, 0.5, 2.0}, {0.2, 1.0, 0.0})),
        LevyModel::generic_bounded_variation(0.5, LevyMeasure::tabulated({0.0, 0.5, 2.0}, {0.2, 1.0, 0.0}))};
    for (const auto& m : models) {
        CAPTURE(m.describe());
        const double a = 0.5;
        ScaleOptions o;
        if (m.kind() != LevyKind::GenericBoundedVariation) o.method = ScaleMethod::LaplaceInversion;
        const auto s = ScaleFunctionSet::build(m, a, o);
        for (double db : {1.5, 3.0, 6.0}) {
            const double beta = s.eta() + db;
            CHECK(laplace_of_w(s, beta) == doctest::Approx(1.0 / (m.phi(beta) - a)).epsilon(1e-6));
        }
    }
}

TEST_CASE("structural properties of the scale functions") {
    const std::vector<LevyModel> models = {
        LevyModel::brownian(-0.3, 1.0),
        LevyModel::compound_poisson(1.0, 2.0, JumpDistribution::exponential(1.5)),
        LevyModel::gamma(1.0, 2.0, 1.0),
        LevyModel::inverse_gaussian(1.0, 0.8, 2.0),
        LevyModel::generic_bounded_variation(2.0, LevyMeasure::tabulated({0.0, 1.0, 1.5}, {1.0, 0.5, 0.0}))};
    for (const auto& m : models)
        for (double a : {0.0, 0.7}) {
            CAPTURE(m.describe());
            CAPTURE(a);
            ScaleOptions o;
            o.x_max = 8.0;
            const auto s = ScaleFunctionSet::build(m, a, o);
            CHECK(s.w(0.0) == doctest::Approx(m.w_at_zero()).epsilon(1e-10));
            double prev = s.w(0.0);
            for (double x = 0.05; x <= 7.9; x += 0.35) {
                const double w = s.w(x);
                CHECK(w >= prev * (1 - 1e-8));
                prev = w;
                CHECK(s.z(x) == doctest::Approx(1.0 + a * s.w_bar(x)).epsilon(1e-13));
                const double h = 1e-4;
                CHECK(s.w_prime(x) == doctest::Approx((s.w(x + h) - s.w(x - h)) / (2 * h)).epsilon(2e-5));
                CHECK(s.w_bar(x + h) - s.w_bar(x - h) == doctest::Approx(2 * h * w).epsilon(1e-5));
            }
            CHECK(s.w(-1.0) == 0.0);
            CHECK(s.z(-1.0) == 1.0);
        }
}

TEST_CASE("exponential growth rate is eta") {
    // W(x) e^{-eta x} -> 1/phi'(eta) when phi'(eta) > 0
    for (const auto& m : {LevyModel::compound_poisson(1.0, 2.0, JumpDistribution::exponential(1.5)),
                          LevyModel::gamma(1.0, 2.0, 1.0)}) {
        const auto s = ScaleFunctionSet::build(m, 0.2);
        const double e = s.eta();
        CHECK(s.w(18.0) * std::exp(-e * 18.0) == doctest::Approx(1.0 / m.phi_prime(e)).epsilon(1e-5));
    }
}

TEST_CASE("series grid converges under refinement") {
    const auto m = LevyModel::generic_bounded_variation(2.0, LevyMeasure::tabulated({0.0, 1.0}, {1.0, 0.0}));
    CHECK(m.rho() < 1.0);
    const auto s = ScaleFunctionSet::build(m, 0.4);
    CHECK(s.method() == ScaleMethod::ConvolutionSeries);
    const double exact = volterra_w([](double y) { return y < 1 ? 0.5 * (1 - y) * (1 - y) : 0.0; }, 2.0, 0.4, 3.0);
    const auto coarse = series_scale_grid(m, 0.4, 0.01, 300, 1e-14, false);
    const auto fine = series_scale_grid(m, 0.4, 0.005, 600, 1e-14, false);
    const auto direct = series_scale_grid(m, 0.4, 0.01, 300, 1e-14, false, SeriesKernel::Direct);
    for (std::size_t i = 0; i <= 300; ++i) CHECK(coarse[i] == doctest::Approx(direct[i]).epsilon(1e-12));
    CHECK(std::abs(fine[600] - exact) < std::abs(coarse[300] - exact));
    CHECK(s.w(3.0) == doctest::Approx(exact).epsilon(1e-7));
    // parallel and serial kernels agree bit for bit
    CHECK(series_scale_grid(m, 0.4, 0.01, 300, 1e-14, true, SeriesKernel::Direct) == direct);
}

TEST_CASE("generic measures with rho >= 1 use the tilted series") {
    // nu = 1.2 (1 - x) on [0, 1]: mass 0.6, mean 0.2, so rho = 2 at zeta = 0.1
    const auto m = LevyModel::generic_bounded_variation(0.1, LevyMeasure::tabulated({0.0, 1.0}, {1.2, 0.0}));
    CHECK(m.rho() == doctest::Approx(2.0));
    auto nubar = [](double y) { return y < 1 ? 0.6 * (1 - y) * (1 - y) : 0.0; };
    for (double a : {0.0, 0.3}) {
        CAPTURE(a);
        ScaleOptions o;
        o.x_max = 4.0;
        const auto s = ScaleFunctionSet::build(m, a, o);
        CHECK(s.method() == ScaleMethod::ConvolutionSeries);
        for (double x : {0.5, 1.5, 3.0})
            CHECK(s.w(x) == doctest::Approx(volterra_w(nubar, 0.1, a, x)).epsilon(1e-6));
        o.method = ScaleMethod::ConvolutionSeries;
        CHECK_THROWS_AS(ScaleFunctionSet::build(m, a, o), DomainError);
    }
}

TEST_CASE("Laplace inversion of a bounded-support measure fails its residual check") {
    const auto m = LevyModel::generic_bounded_variation(1.0, LevyMeasure::tabulated({0.0, 0.5, 2.0}, {0.2, 1.0, 0.0}));
    ScaleOptions o;
    o.method = ScaleMethod::LaplaceInversion;
    CHECK_THROWS_AS(ScaleFunctionSet::build(m, 0.5, o), NumericalError);
}

TEST_CASE("series value is bounded by 1/(zeta - mu F(x)) when rho < 1") {
    for (const auto& m : {LevyModel::compound_poisson(2.0, 1.0, JumpDistribution::exponential(1.0)),
                          LevyModel::generic_bounded_variation(2.0, LevyMeasure::tabulated({0.0, 1.0, 1.5}, {1.0, 0.5, 0.0})),
                          LevyModel::gamma(2.0, 1.0, 1.0)}) {
        CAPTURE(m.describe());
        ScaleOptions o;
        o.method = ScaleMethod::ConvolutionSeries;
        o.x_max = 6.0;
        const auto s = ScaleFunctionSet::build(m, 0.0, o);
        for (double x = 0.0; x <= 6.0; x += 0.25)
            CHECK(s.w(x) <= 1.0 / (m.zeta() - m.jump_mean() * m.integrated_tail_cdf(x)) * (1 + 1e-9));
    }
}

TEST_CASE("Z/W tends to alpha/eta") {
    for (const auto& m : {LevyModel::compound_poisson(2.0, 1.0, JumpDistribution::exponential(1.0)),
                          LevyModel::brownian(0.5, 1.0), LevyModel::inverse_gaussian(1.2, 1.0, 1.5)}) {
        CAPTURE(m.describe());
        const double a = 0.5;
        const auto s = ScaleFunctionSet::build(m, a);
        CHECK(s.z(20.0) / s.w(20.0) == doctest::Approx(a / s.eta()).epsilon(0.05));
        CHECK(s.w(20.0) * m.phi_prime(s.eta()) * std::exp(-s.eta() * 20.0) == doctest::Approx(1.0).epsilon(0.05));
        double prev = 1.0;
        for (double x = 0.0; x <= 20.0; x += 0.5) {
            CHECK(s.z(x) >= prev);
            prev = s.z(x);
        }
    }
}

TEST_CASE("invalid scale requests") {
    const auto m = LevyModel::brownian(1.0, 1.0);
    CHECK_THROWS_AS(ScaleFunctionSet::build(m, -0.1), DomainError);
    ScaleOptions o;
    o.grid_step = 0.0;
    CHECK_THROWS_AS(ScaleFunctionSet::build(m, 0.1, o), DomainError);
    o = {};
    o.method = ScaleMethod::ClosedFormBrownian;
    CHECK_THROWS_AS(ScaleFunctionSet::build(LevyModel::gamma(1, 1, 1), 0.1, o), DomainError);
}
