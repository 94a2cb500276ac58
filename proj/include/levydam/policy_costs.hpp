#pragma once

#include "levydam/exit_analysis.hpp"
#include "levydam/piecewise_polynomial.hpp"

#include <memory>
#include <string>

namespace levydam {

/// P^M_{lambda,tau}: idle until the content reaches lambda, then release at
/// rate M until it falls to tau. V is the capacity (+inf allowed for the
/// release-phase exit results only).
struct PolicyParams {
    double lambda = 1.0;
    double tau = 0.0;
    double M = 1.0;
    double V = kInf;

    void validate() const;
};

struct CostSpec {
    double K1 = 0.0;  // opening cost per unit rate
    double K2 = 0.0;  // closing cost per unit rate
    double R = 0.0;   // reward per unit released
    PiecewisePolynomial g = PiecewisePolynomial::constant(0.0);       // fill-phase rate
    PiecewisePolynomial g_star = PiecewisePolynomial::constant(0.0);  // release-phase rate

    void validate() const;
    bool is_zero() const;
};

enum class InputMode { Plain, Reflected };

std::string to_string(InputMode m);

/// Analytic quantities of one cycle from a given start point.
struct CycleSummary {
    double start = 0.0;
    double fill_transform = 1.0;   // E e^{-alpha T-hat}
    double fill_length = 0.0;      // discounted length of the fill phase
    double overshoot_atom = 0.0;
    double overshoot_jump_mass = 0.0;
    double cycle_end_lt = 1.0;     // E e^{-alpha T*_0}
    double cycle_length = 0.0;     // (1 - cycle_end_lt)/alpha, or the mean at alpha = 0
    double fill_cost = 0.0;
    double cycle_cost = 0.0;
};

/// Evaluates the cost functionals of one policy at one discount rate.
/// alpha = 0 gives undiscounted cycle quantities.
class PolicyEvaluator {
public:
    PolicyEvaluator(const LevyModel& model, PolicyParams policy, CostSpec costs, InputMode mode, double alpha,
                    ScaleOptions opts = {});
    /// Reuse prebuilt scale functions (s on the model, s_M on model.shifted(M),
    /// same alpha); both must cover [0, V].
    PolicyEvaluator(ScaleFunctionSet s, ScaleFunctionSet s_M, PolicyParams policy, CostSpec costs, InputMode mode);

    double alpha() const { return s_.alpha(); }
    const PolicyParams& policy() const { return p_; }
    const CostSpec& costs() const { return c_; }
    InputMode mode() const { return mode_; }
    const ScaleFunctionSet& scale() const { return s_; }
    const ScaleFunctionSet& release_scale() const { return s_M_; }

    /// E_x int_0^{T-hat} e^{-alpha t} g(Z_t) dt.
    double fill_cost(double x) const;
    /// E_x int_0^{T*} e^{-alpha t} g*(Z_t) dt for the release phase from x.
    double release_cost(double x) const;
    double release_length(double x) const;
    double cycle_end_lt(double x) const;
    double cycle_length(double x) const;
    /// First-cycle discounted cost; alpha must be positive.
    double cycle_cost(double x) const;
    /// Same functional at any alpha >= 0 (undiscounted when alpha = 0).
    double cycle_cost_any(double x) const;
    double total_discounted_cost(double x) const;
    CycleSummary summary(double x) const;

private:
    void init();
    OvershootLaw fill_law(double x) const;
    double release_net(double z) const;  // release_cost(z) - R M release_length(z)

    ScaleFunctionSet s_, s_M_;
    PolicyParams p_;
    CostSpec c_;
    InputMode mode_;
    std::shared_ptr<const PiecewiseChebyshev> release_table_;
};

/// Renewal-reward long-run average: undiscounted cycle cost from tau over
/// the mean cycle length.
double long_run_average_cost(const LevyModel& model, const PolicyParams& policy, const CostSpec& costs,
                             InputMode mode, ScaleOptions opts = {});
double long_run_average_cost(const PolicyEvaluator& undiscounted);

/// Grid range needed for a policy (covers V and lambda with margin).
ScaleOptions scale_options_for(const PolicyParams& policy, ScaleOptions base = {});

}  // namespace levydam
