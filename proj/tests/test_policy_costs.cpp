#include "doctest.h"
#include "levydam/errors.hpp"
#include "levydam/policy_costs.hpp"

#include <cmath>
#include <vector>

using namespace levydam;

namespace {

LevyModel cp_model() { return LevyModel::compound_poisson(2.0, 1.0, JumpDistribution::exponential(1.0)); }
LevyModel bm_model() { return LevyModel::brownian(0.5, 1.0); }

CostSpec full_costs() {
    CostSpec c;
    c.K1 = 1.0;
    c.K2 = 0.5;
    c.R = 0.3;
    c.g = PiecewisePolynomial::piecewise_linear({0, 1, 2}, {0.2, 1, 0.5});
    c.g_star = PiecewisePolynomial::piecewise_linear({0.5, 2, 4}, {1, 0.4, 2});
    return c;
}

struct Config {
    LevyModel model;
    PolicyParams policy;
    InputMode mode;
};

std::vector<Config> configs() {
    return {{cp_model(), {2.0, 0.5, 1.0, 4.0}, InputMode::Reflected},
            {bm_model(), {1.5, 0.5, 1.0, 3.0}, InputMode::Reflected},
            {LevyModel::compound_poisson(1.0, 1.5, JumpDistribution::exponential(1.0)), {2.0, 0.5, 1.0, 4.0},
             InputMode::Plain}};
}

}  // namespace

TEST_CASE("all-zero costs give zero everywhere") {
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const PolicyEvaluator ev(c.model, c.policy, CostSpec{}, c.mode, 0.5);
        for (double x : {0.0, 0.5, 1.2, c.policy.lambda, 2.5})
            if (x <= c.policy.V) {
                CHECK(ev.fill_cost(x) == 0.0);
                CHECK(ev.release_cost(x) == 0.0);
                CHECK(ev.cycle_cost(x) == 0.0);
                CHECK(ev.total_discounted_cost(x) == 0.0);
            }
        CHECK(long_run_average_cost(c.model, c.policy, CostSpec{}, c.mode) == 0.0);
    }
}

TEST_CASE("unit rates reproduce the exit transforms") {
    const double alpha = 0.5;
    CostSpec ones;
    ones.g = PiecewisePolynomial::constant(1.0);
    ones.g_star = PiecewisePolynomial::constant(1.0);
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const PolicyEvaluator ev(c.model, c.policy, ones, c.mode, alpha);
        const auto& p = c.policy;
        for (double x : {0.0, 0.4, 1.1, 1.45}) {
            const double e = c.mode == InputMode::Reflected ? exit_lt_reflected(ev.scale(), x, p.lambda)
                                                             : exit_lt_up(ev.scale(), x, p.lambda);
            CHECK(ev.fill_cost(x) == doctest::Approx((1 - e) / alpha).epsilon(1e-7));
        }
        for (double x : {0.6, 1.7, p.V}) {
            const double e = release_exit_lt(ev.release_scale(), x, p.tau, p.V);
            CHECK(ev.release_cost(x) == doctest::Approx((1 - e) / alpha).epsilon(1e-7));
            CHECK(ev.release_length(x) == doctest::Approx((1 - e) / alpha).epsilon(1e-9));
        }
    }
}

TEST_CASE("fixed charges only: cycle cost is M (K2 + K1 E e^{-alpha T-hat})") {
    CostSpec k;
    k.K1 = 1.3;
    k.K2 = 0.4;
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const PolicyEvaluator ev(c.model, c.policy, k, c.mode, 0.5);
        for (double x : {0.0, 0.7, 1.4}) {
            const double e = c.mode == InputMode::Reflected ? exit_lt_reflected(ev.scale(), x, c.policy.lambda)
                                                             : exit_lt_up(ev.scale(), x, c.policy.lambda);
            CHECK(ev.cycle_cost(x) == doctest::Approx(c.policy.M * (k.K2 + k.K1 * e)).epsilon(1e-10));
        }
        // above lambda the release starts at once: only the opening charge
        CHECK(ev.cycle_cost(c.policy.lambda + 0.1) == doctest::Approx(c.policy.M * k.K1).epsilon(1e-14));
    }
}

TEST_CASE("continuous input: the release term reduces to E e^{-alpha T-hat} times the cost from lambda") {
    CostSpec c;
    c.g_star = PiecewisePolynomial::piecewise_linear({0.5, 2, 4}, {1, 0.4, 2});
    const PolicyParams p{1.5, 0.5, 1.0, 3.0};
    for (auto mode : {InputMode::Plain, InputMode::Reflected}) {
        const PolicyEvaluator ev(bm_model(), p, c, mode, 0.5);
        for (double x : {0.0, 0.8}) {
            const double e = mode == InputMode::Reflected ? exit_lt_reflected(ev.scale(), x, p.lambda)
                                                           : exit_lt_up(ev.scale(), x, p.lambda);
            CHECK(ev.cycle_cost(x) == doctest::Approx(e * ev.release_cost(p.lambda)).epsilon(1e-8));
        }
    }
}

TEST_CASE("total discounted cost from tau is the geometric sum of cycles") {
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const PolicyEvaluator ev(c.model, c.policy, full_costs(), c.mode, 0.5);
        const double tau = c.policy.tau;
        const double q = ev.cycle_end_lt(tau);
        CHECK(ev.total_discounted_cost(tau) == doctest::Approx(ev.cycle_cost(tau) / (1 - q)).epsilon(1e-9));
        // from any x: first cycle, then the stationary sum from tau
        const double x = 1.0;
        CHECK(ev.total_discounted_cost(x) ==
              doctest::Approx(ev.cycle_cost(x) + ev.cycle_end_lt(x) * ev.total_discounted_cost(tau)).epsilon(1e-9));
        // the transform agrees with the overshoot-integrated one
        for (double x0 : {0.0, tau, 1.5})
            CHECK(ev.cycle_end_lt(x0) == doctest::Approx(cycle_end_lt(ev.scale(), ev.release_scale(), x0,
                                                                       c.policy.lambda, tau, c.policy.V,
                                                                       c.mode == InputMode::Reflected))
                                             .epsilon(1e-7));
    }
}

TEST_CASE("costs are linear in (K1, K2, R, g, g*)") {
    CostSpec a, b, ab;
    a.K1 = 0.7;
    a.g = PiecewisePolynomial::piecewise_linear({0, 2}, {0, 1});
    b.K2 = 0.3;
    b.R = 0.2;
    b.g_star = PiecewisePolynomial::constant(0.5);
    ab.K1 = 0.7;
    ab.K2 = 0.3;
    ab.R = 0.2;
    ab.g = a.g;
    ab.g_star = b.g_star;
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const PolicyEvaluator base(c.model, c.policy, CostSpec{}, c.mode, 0.5);
        const PolicyEvaluator ea(base.scale(), base.release_scale(), c.policy, a, c.mode),
            eb(base.scale(), base.release_scale(), c.policy, b, c.mode),
            eab(base.scale(), base.release_scale(), c.policy, ab, c.mode);
        for (double x : {0.0, 1.0, 2.5})
            CHECK(eab.total_discounted_cost(x) ==
                  doctest::Approx(ea.total_discounted_cost(x) + eb.total_discounted_cost(x)).epsilon(1e-9));
    }
}

TEST_CASE("raising K1 strictly raises the total discounted cost") {
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        auto lo = full_costs(), hi = full_costs();
        hi.K1 += 0.25;
        const PolicyEvaluator el(c.model, c.policy, lo, c.mode, 0.5);
        const PolicyEvaluator eh(el.scale(), el.release_scale(), c.policy, hi, c.mode);
        for (double x : {0.0, 1.0, 2.5}) CHECK(eh.total_discounted_cost(x) > el.total_discounted_cost(x));
    }
}

TEST_CASE("long-run average: constant rates and start independence") {
    CostSpec ones;
    ones.g = PiecewisePolynomial::constant(1.0);
    ones.g_star = PiecewisePolynomial::constant(1.0);
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        CHECK(long_run_average_cost(c.model, c.policy, ones, c.mode) == doctest::Approx(1.0).epsilon(1e-8));
        // reward only: -R M times the long-run fraction of time spent releasing
        CostSpec r;
        r.R = 1.0;
        const PolicyEvaluator ev(c.model, c.policy, r, c.mode, 0.0);
        const double tau = c.policy.tau;
        const double frac = (ev.cycle_length(tau) - fill_discounted_length(ev.scale(), tau, c.policy.lambda,
                                                                           c.mode == InputMode::Reflected)) /
                            ev.cycle_length(tau);
        CHECK(long_run_average_cost(ev) == doctest::Approx(-c.policy.M * frac).epsilon(1e-9));
        // the regenerative ratio is the same whichever cycle epoch it is read from
        const PolicyEvaluator full(c.model, c.policy, full_costs(), c.mode, 0.0);
        const double a1 = full.cycle_cost_any(tau) / full.cycle_length(tau);
        CHECK(long_run_average_cost(full) == doctest::Approx(a1).epsilon(1e-12));
    }
}

TEST_CASE("Abelian limit: alpha C_alpha(tau) tends to the long-run average") {
    for (const auto& c : configs()) {
        CAPTURE(c.model.describe());
        const double target = long_run_average_cost(c.model, c.policy, full_costs(), c.mode);
        std::vector<double> f;
        for (double alpha : {1e-2, 1e-3, 1e-4}) {
            const PolicyEvaluator ev(c.model, c.policy, full_costs(), c.mode, alpha);
            f.push_back(alpha * ev.total_discounted_cost(c.policy.tau));
        }
        const double rich = (10 * f[2] - f[1]) / 9;
        CHECK(rich == doctest::Approx(target).epsilon(1e-3));
        CHECK(std::abs(f[2] - target) < std::abs(f[0] - target));
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(PolicyParams({1.0, 1.0, 1.0, 2.0}).validate(), DomainError);
    CHECK_THROWS_AS(PolicyParams({1.0, -0.1, 1.0, 2.0}).validate(), DomainError);
    CHECK_THROWS_AS(PolicyParams({3.0, 0.5, 1.0, 2.0}).validate(), DomainError);
    CHECK_THROWS_AS(PolicyParams({2.0, 0.5, 0.0, 3.0}).validate(), DomainError);
    CHECK_NOTHROW(PolicyParams({2.0, 0.0, 1.0, kInf}).validate());
    CostSpec neg;
    neg.K2 = -1.0;
    CHECK_THROWS_AS(neg.validate(), DomainError);
    CHECK_THROWS(PiecewisePolynomial({0.0, 1.0}, {{0.0, kInf}}));

    const auto cp = cp_model();
    CHECK_THROWS_AS(PolicyEvaluator(cp, {2.0, 0.5, 1.0, kInf}, full_costs(), InputMode::Reflected, 0.5), DomainError);
    // M <= E I_1 with no cap: the release never ends
    const auto heavy = LevyModel::compound_poisson(0.5, 3.0, JumpDistribution::exponential(1.0));
    CHECK_THROWS_AS(PolicyEvaluator(heavy, {2.0, 0.5, 1.0, kInf}, full_costs(), InputMode::Reflected, 0.5),
                    InfiniteMeanError);
    const PolicyEvaluator ev0(cp, {2.0, 0.5, 1.0, 4.0}, full_costs(), InputMode::Reflected, 0.0);
    CHECK_THROWS_AS(ev0.cycle_cost(0.5), DomainError);
    CHECK_THROWS_AS(ev0.total_discounted_cost(0.5), DomainError);
    CHECK_NOTHROW(ev0.cycle_cost_any(0.5));
    // plain input drifting down never refills on average
    CHECK_THROWS_AS(long_run_average_cost(cp, {2.0, 0.5, 1.0, 4.0}, full_costs(), InputMode::Plain), InfiniteMeanError);
    const PolicyEvaluator ev(cp, {2.0, 0.5, 1.0, 4.0}, full_costs(), InputMode::Reflected, 0.5);
    CHECK_THROWS_AS(ev.cycle_cost(4.5), DomainError);
    CHECK_THROWS_AS(long_run_average_cost(ev), DomainError);
}
