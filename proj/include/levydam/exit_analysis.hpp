#pragma once

#include "levydam/scale_functions.hpp"

#include <functional>
#include <string>
#include <vector>

namespace levydam {

enum class PotentialKind { TwoSidedKilled, UpKilled, ReflectedInfimum, ReleasePhase };

std::string to_string(PotentialKind k);

/// alpha-potential measure U(x, dy) of a killed process: an absolutely
/// continuous part u(x, y) dy plus, for the reflected fill phase, an atom at 0.
class PotentialDensity {
public:
    PotentialKind kind() const { return kind_; }
    double density(double x, double y) const;
    double atom_at_zero(double x) const;
    /// Support in y (and admissible starting points x).
    double lower() const { return lo_; }
    double upper() const { return hi_; }

    /// int f(y) U(x, dy) including the atom. `breaks` lists points where f is
    /// not smooth.
    double integrate(double x, const std::function<double(double)>& f, const std::vector<double>& breaks = {},
                     double rel_tol = 1e-11) const;
    /// U(x, domain) from scale-function identities (no quadrature).
    double total_mass(double x) const;
    /// Laplace transform of the killing time implied by the same identities.
    double exit_transform(double x) const;

    const ScaleFunctionSet& scale() const { return s_; }

private:
    friend PotentialDensity potential_two_sided(const ScaleFunctionSet&, double, double);
    friend PotentialDensity potential_up_killed(const ScaleFunctionSet&, double);
    friend PotentialDensity potential_reflected(const ScaleFunctionSet&, double);
    friend PotentialDensity potential_release(const ScaleFunctionSet&, double, double);
    PotentialDensity(PotentialKind k, ScaleFunctionSet s, double lo, double hi)
        : kind_(k), s_(std::move(s)), lo_(lo), hi_(hi) {}
    void check_x(double x) const;

    PotentialKind kind_;
    ScaleFunctionSet s_;
    double lo_, hi_;
    // cached per kind
    double c1_ = 0.0;  // 1/W(lambda-a), eta, 1/W'(lambda), 1/Z_M(V-tau)
};

/// Killed at exit from [a, lambda].
PotentialDensity potential_two_sided(const ScaleFunctionSet& s, double a, double lambda);
/// Killed at first passage above lambda.
PotentialDensity potential_up_killed(const ScaleFunctionSet& s, double lambda);
/// Input reflected at its infimum, killed above lambda.
PotentialDensity potential_reflected(const ScaleFunctionSet& s, double lambda);
/// Release phase: input minus M t reflected at V, killed below tau. s_M is
/// built on model.shifted(M).
PotentialDensity potential_release(const ScaleFunctionSet& s_M, double tau, double V);

// Exit transforms and means. Discounting uses s.alpha(); the *_mean functions
// need a set built at alpha = 0.

double exit_lt_two_sided(const ScaleFunctionSet& s, double x, double a, double lambda);
/// E_x exp(-alpha T_lambda^+) for the plain input.
double exit_lt_up(const ScaleFunctionSet& s, double x, double lambda);
/// E_x T_lambda^+, +inf when eta(0) = 0.
double exit_mean_up(const ScaleFunctionSet& s0, double x, double lambda);
/// E_x exp(-alpha tau_lambda) for the input reflected at its infimum.
double exit_lt_reflected(const ScaleFunctionSet& s, double x, double lambda);
double exit_mean_reflected(const ScaleFunctionSet& s0, double x, double lambda);
/// E_x exp(-alpha T*_tau^-) in the release phase; V may be +inf.
double release_exit_lt(const ScaleFunctionSet& s_M, double x, double tau, double V);
/// E_x T*_tau^-; V may be +inf.
double release_exit_mean(const ScaleFunctionSet& s_M0, double x, double tau, double V);

/// (1 - E e^{-alpha T})/alpha for the three phases, written so that it stays
/// accurate as alpha -> 0 (equals the mean at alpha = 0).
double fill_discounted_length(const ScaleFunctionSet& s, double x, double lambda, bool reflected);
double release_discounted_length(const ScaleFunctionSet& s_M, double x, double tau, double V);

/// Law of (discounted) level at the end of the fill phase:
/// E_x[e^{-alpha T}; Z_T in dz] for z >= lambda.
class OvershootLaw {
public:
    double lambda() const { return lambda_; }
    double start() const { return x_; }
    bool reflected() const { return reflected_; }

    /// Density in z of the jump part, z > lambda.
    double transform_density(double z) const;
    /// Jump-part mass on [z, inf), z >= lambda.
    double tail(double z) const;
    double jump_mass() const { return jump_mass_; }
    /// Mass at z = lambda (creeping); zero for models that cannot creep.
    double atom_at_lambda() const { return atom_; }
    double total_mass() const { return atom_ + jump_mass_; }
    /// Exit transform minus jump mass; the creeping mass implied by the
    /// identities, which is only numerical noise for bounded variation.
    double residual_atom() const { return exit_transform_ - jump_mass_; }
    double exit_transform() const { return exit_transform_; }

    /// E_x[e^{-alpha T} h(min(Z_T, cap))]; h must be smooth on [lambda, cap]
    /// apart from h_breaks.
    double expect(const std::function<double(double)>& h, double cap, const std::vector<double>& h_breaks = {}) const;

    // Reflected-phase building blocks l_alpha(x, dz)/dz, L_alpha(z), V_alpha(lambda).
    double l_alpha(double z) const;
    double L_alpha(double z) const;
    double V_alpha() const;

private:
    friend OvershootLaw overshoot_up(const ScaleFunctionSet&, double, double);
    friend OvershootLaw overshoot_reflected(const ScaleFunctionSet&, double, double);
    OvershootLaw(PotentialDensity U, double x, double lambda, bool reflected);
    std::vector<double> outer_breaks(double z_lo, double z_hi) const;

    PotentialDensity U_;
    double x_, lambda_;
    bool reflected_;
    double exit_transform_ = 0.0;
    double jump_mass_ = 0.0;
    double atom_ = 0.0;
};

OvershootLaw overshoot_up(const ScaleFunctionSet& s, double x, double lambda);
OvershootLaw overshoot_reflected(const ScaleFunctionSet& s, double x, double lambda);

/// E_x exp(-alpha T*_0): fill (plain or reflected) to lambda, then release
/// from min(Z, V) down to tau. For lambda <= x <= V only the release phase runs.
double cycle_end_lt(const ScaleFunctionSet& s, const ScaleFunctionSet& s_M, double x, double lambda, double tau,
                    double V, bool reflected);

}  // namespace levydam
