#include "levydam/policy_costs.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <cmath>

namespace levydam {

void PolicyParams::validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(tau) || !(tau >= 0) || !(tau < lambda))
        throw DomainError("policy: need 0 <= tau < lambda");
    if (!(lambda <= V)) throw DomainError("policy: need lambda <= V");
    if (!(M > 0) || !std::isfinite(M)) throw DomainError("policy: need M > 0");
}

void CostSpec::validate() const {
    if (!(K1 >= 0) || !(K2 >= 0) || !(R >= 0)) throw DomainError("costs: K1, K2, R must be >= 0");
    if (!std::isfinite(K1 + K2 + R)) throw DomainError("costs: K1, K2, R must be finite");
    if (!std::isfinite(g.bound()) || !std::isfinite(g_star.bound())) throw DomainError("costs: g, g* must be bounded");
}

bool CostSpec::is_zero() const { return K1 == 0 && K2 == 0 && R == 0 && g.is_zero() && g_star.is_zero(); }

std::string to_string(InputMode m) { return m == InputMode::Plain ? "plain" : "reflected"; }

ScaleOptions scale_options_for(const PolicyParams& policy, ScaleOptions base) {
    const double need = std::isfinite(policy.V) ? policy.V : policy.lambda;
    base.x_max = std::max(base.x_max, std::ceil(need + 1.0));
    return base;
}

PolicyEvaluator::PolicyEvaluator(const LevyModel& model, PolicyParams policy, CostSpec costs, InputMode mode,
                                 double alpha, ScaleOptions opts)
    : s_(ScaleFunctionSet::build(model, alpha, scale_options_for(policy, opts))),
      s_M_(ScaleFunctionSet::build(model.shifted(policy.M), alpha, scale_options_for(policy, opts))),
      p_(policy),
      c_(std::move(costs)),
      mode_(mode) {
    init();
}

PolicyEvaluator::PolicyEvaluator(ScaleFunctionSet s, ScaleFunctionSet s_M, PolicyParams policy, CostSpec costs,
                                 InputMode mode)
    : s_(std::move(s)), s_M_(std::move(s_M)), p_(policy), c_(std::move(costs)), mode_(mode) {
    if (s_.alpha() != s_M_.alpha()) throw DomainError("PolicyEvaluator: scale sets disagree on alpha");
    init();
}

void PolicyEvaluator::init() {
    p_.validate();
    c_.validate();
    if (!std::isfinite(p_.V)) {
        const double drift = s_M_.model().mean_input();
        if (!(drift < 0))
            throw InfiniteMeanError("PolicyEvaluator: V = inf with M <= E I_1, release phase never ends");
        throw DomainError("PolicyEvaluator: cost evaluation needs a finite capacity V");
    }
    if (s_M_.method() == ScaleMethod::ConvolutionSeries && s_M_.x_max() < p_.V - p_.tau)
        throw DomainError("PolicyEvaluator: release scale grid does not cover V - tau");
    if (c_.g_star.is_zero()) return;
    std::vector<double> br;
    for (double b : c_.g_star.breakpoints())
        if (b > p_.lambda && b < p_.V) br.push_back(b);
    auto breaks = merge_breaks(br, p_.lambda, p_.V);
    release_table_ = std::make_shared<PiecewiseChebyshev>([this](double z) { return release_cost(z); }, breaks, 24);
}

double PolicyEvaluator::fill_cost(double x) const {
    if (x >= p_.lambda || c_.g.is_zero()) return 0.0;
    const auto U = mode_ == InputMode::Reflected ? potential_reflected(s_, p_.lambda) : potential_up_killed(s_, p_.lambda);
    if (mode_ == InputMode::Plain && s_.alpha() == 0.0 && !(s_.eta() > 0))
        throw InfiniteMeanError("fill_cost: plain fill phase has infinite expected length");
    return U.integrate(x, [this](double y) { return c_.g(y); }, c_.g.breakpoints());
}

double PolicyEvaluator::release_cost(double x) const {
    if (c_.g_star.is_zero() || x <= p_.tau) return 0.0;
    const auto U = potential_release(s_M_, p_.tau, p_.V);
    return U.integrate(std::min(x, p_.V), [this](double y) { return c_.g_star(y); }, c_.g_star.breakpoints());
}

double PolicyEvaluator::release_length(double x) const {
    return release_discounted_length(s_M_, std::clamp(x, p_.tau, p_.V), p_.tau, p_.V);
}

double PolicyEvaluator::release_net(double z) const {
    z = std::min(z, p_.V);
    double v = -c_.R * p_.M * release_length(z);
    if (release_table_) v += (*release_table_)(z);
    return v;
}

OvershootLaw PolicyEvaluator::fill_law(double x) const {
    return mode_ == InputMode::Reflected ? overshoot_reflected(s_, x, p_.lambda) : overshoot_up(s_, x, p_.lambda);
}

double PolicyEvaluator::cycle_end_lt(double x) const {
    // E e^{-alpha T} = 1 - alpha E int_0^T e^{-alpha t} dt keeps the
    // transform and the discounted length consistent to rounding.
    if (s_.alpha() > 0 && x <= p_.V) return 1.0 - s_.alpha() * cycle_length(x);
    return levydam::cycle_end_lt(s_, s_M_, x, p_.lambda, p_.tau, p_.V, mode_ == InputMode::Reflected);
}

double PolicyEvaluator::cycle_length(double x) const {
    if (x > p_.V) throw DomainError("cycle_length: need x <= V");
    if (x >= p_.lambda) return release_length(x);
    const bool refl = mode_ == InputMode::Reflected;
    if (!refl && s_.alpha() == 0.0 && !(s_.eta() > 0))
        throw InfiniteMeanError("cycle_length: plain fill phase has infinite expected length");
    const double fill = fill_discounted_length(s_, x, p_.lambda, refl);
    const auto law = fill_law(x);
    return fill + law.expect([this](double z) { return release_length(z); }, p_.V);
}

double PolicyEvaluator::cycle_cost_any(double x) const {
    if (x > p_.V) throw DomainError("cycle_cost: need x <= V");
    const double M = p_.M;
    if (x > p_.lambda) return M * c_.K1 + release_net(x);
    if (x == p_.lambda) return M * c_.K2 + M * c_.K1 + release_net(x);
    if (mode_ == InputMode::Plain && s_.alpha() == 0.0 && !(s_.eta() > 0))
        throw InfiniteMeanError("cycle_cost: plain fill phase has infinite expected length");
    const auto law = fill_law(x);
    const bool net_zero = !release_table_ && c_.R == 0.0;
    const double tail = net_zero ? 0.0
                                 : law.expect([this](double z) { return release_net(z); }, p_.V,
                                              c_.g_star.breakpoints());
    return M * c_.K2 + M * c_.K1 * law.exit_transform() + fill_cost(x) + tail;
}

double PolicyEvaluator::cycle_cost(double x) const {
    if (!(s_.alpha() > 0)) throw DomainError("cycle_cost: alpha must be positive (use long_run_average_cost)");
    return cycle_cost_any(x);
}

double PolicyEvaluator::total_discounted_cost(double x) const {
    const double alpha = s_.alpha();
    if (!(alpha > 0)) throw DomainError("total_discounted_cost: alpha must be positive");
    const double denom = 1.0 - cycle_end_lt(p_.tau);
    if (!(denom > 1e-12)) throw NumericalError("total_discounted_cost: E_tau exp(-alpha T*_0) >= 1 - 1e-12");
    const double c_tau = cycle_cost_any(p_.tau);
    if (x == p_.tau) return c_tau / denom;
    return cycle_cost_any(x) + cycle_end_lt(x) * c_tau / denom;
}

CycleSummary PolicyEvaluator::summary(double x) const {
    CycleSummary out;
    out.start = x;
    if (x < p_.lambda) {
        const auto law = fill_law(x);
        out.fill_transform = law.exit_transform();
        out.overshoot_atom = law.atom_at_lambda();
        out.overshoot_jump_mass = law.jump_mass();
        const bool refl = mode_ == InputMode::Reflected;
        out.fill_length = (!refl && s_.alpha() == 0.0 && !(s_.eta() > 0))
                              ? kInf
                              : fill_discounted_length(s_, x, p_.lambda, refl);
        out.fill_cost = std::isfinite(out.fill_length) ? fill_cost(x) : kInf;
    }
    out.cycle_end_lt = cycle_end_lt(x);
    if (std::isfinite(out.fill_length)) {
        out.cycle_length = cycle_length(x);
        out.cycle_cost = cycle_cost_any(x);
    } else {
        out.cycle_length = kInf;
        out.cycle_cost = kInf;
    }
    return out;
}

double long_run_average_cost(const PolicyEvaluator& ev) {
    if (ev.alpha() != 0.0) throw DomainError("long_run_average_cost: evaluator must be built at alpha = 0");
    const double tau = ev.policy().tau;
    const double len = ev.cycle_length(tau);
    if (!std::isfinite(len) || !(len > 0)) throw InfiniteMeanError("long_run_average_cost: infinite mean cycle length");
    return ev.cycle_cost_any(tau) / len;
}

double long_run_average_cost(const LevyModel& model, const PolicyParams& policy, const CostSpec& costs,
                             InputMode mode, ScaleOptions opts) {
    if (mode == InputMode::Plain && !(model.mean_input() > 0))
        throw InfiniteMeanError("long_run_average_cost: plain input with E I_1 <= 0 never refills on average");
    return long_run_average_cost(PolicyEvaluator(model, policy, costs, mode, 0.0, opts));
}

}  // namespace levydam
