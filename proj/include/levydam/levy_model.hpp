#pragma once

#include "levydam/numerics.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace levydam {

enum class LevyKind {
    BrownianDrift,
    CompoundPoissonDrift,
    GammaDrift,
    InverseGaussianDrift,
    GenericBoundedVariation
};

std::string to_string(LevyKind k);

/// Jump-size law of a compound Poisson input.
struct JumpDistribution {
    enum class Family { Exponential, Gamma } family = Family::Exponential;
    double shape = 1.0;  // Gamma shape k (1 for Exponential)
    double rate = 1.0;   // rate b

    static JumpDistribution exponential(double rate) { return {Family::Exponential, 1.0, rate}; }
    static JumpDistribution gamma(double shape, double rate) { return {Family::Gamma, shape, rate}; }

    double mean() const { return shape / rate; }
    double pdf(double x) const;
    double survival(double x) const;
};

/// Jump measure nu on (0, inf) given as (density, tail, mean). The
/// tabulated constructor keeps a piecewise-linear density with closed-form
/// transforms and an exact sampler.
class LevyMeasure {
public:
    using Fn = std::function<double(double)>;
    using ComplexFn = std::function<cld(cld)>;

    LevyMeasure() = default;

    /// laplace_exponent, if given, must return int (1 - e^{-s x}) nu(dx).
    /// total_mass may be left NaN, in which case it is probed from the tail.
    static LevyMeasure from_functions(Fn density, Fn tail, double mean,
                                      ComplexFn laplace_exponent = {},
                                      double total_mass = std::numeric_limits<double>::quiet_NaN());
    /// Piecewise-linear density through (xs[i], densities[i]), zero outside.
    static LevyMeasure tabulated(std::vector<double> xs, std::vector<double> densities);

    double density(double x) const { return x > 0 && density_ ? density_(x) : 0.0; }
    double tail(double x) const;
    double mean() const { return mean_; }
    /// nu((0, inf)), +inf for infinite activity.
    double total_mass() const { return total_mass_; }
    bool is_tabulated() const { return !knots_.empty(); }
    bool has_laplace_exponent() const { return static_cast<bool>(laplace_); }
    cld laplace_exponent(cld s) const;
    /// 1 / laplace_exponent(s), finite even where the exponent overflows
    /// (tabulated measures far left in the complex plane).
    cld reciprocal_laplace_exponent(cld s) const;
    /// int (1 - e^{-theta x}) nu(dx) and int x e^{-theta x} nu(dx) for real theta.
    double laplace_exponent(double theta) const;
    double laplace_exponent_derivative(double theta) const;
    /// Points where the density is not smooth; quadrature splits there.
    const std::vector<double>& breakpoints() const { return knots_; }
    /// Inverse-CDF draw of a jump from nu / total_mass (tabulated only).
    double sample_jump(double u) const;

private:
    Fn density_;
    Fn tail_;
    ComplexFn laplace_;
    ComplexFn recip_laplace_;
    double mean_ = 0.0;
    double total_mass_ = 0.0;
    std::vector<double> knots_, dens_, cum_;
};

class LevyModel {
public:
    static LevyModel brownian(double drift, double sigma2);
    static LevyModel compound_poisson(double zeta, double rate, JumpDistribution jumps);
    /// nu(dx) = a e^{-bx}/x dx
    static LevyModel gamma(double zeta, double a, double b);
    /// nu(dx) = (2 pi x^3)^{-1/2} sigma^{-1} e^{-x c^2 / 2 sigma^2} dx
    static LevyModel inverse_gaussian(double zeta, double sigma, double c);
    static LevyModel generic_bounded_variation(double zeta, LevyMeasure measure);

    LevyKind kind() const { return kind_; }
    bool bounded_variation() const { return kind_ != LevyKind::BrownianDrift; }
    bool has_jumps() const { return kind_ != LevyKind::BrownianDrift; }
    /// Exponent available for complex arguments without quadrature.
    bool has_analytic_exponent() const;

    /// Laplace exponent: E exp(-theta I_t) = exp(t phi(theta)).
    double phi(double theta) const;
    double phi_prime(double theta) const;
    cld phi(cld s) const;

    /// E I_1 = -phi'(0+); +inf when the jump mean is infinite.
    double mean_input() const;
    /// Largest root of phi(theta) = alpha.
    double eta(double alpha) const;
    /// Model of I - M t: phi_M(theta) = phi(theta) + M theta.
    LevyModel shifted(double M) const;

    double sigma2() const { return sigma2_; }
    /// Brownian drift mu (a in the exponent); 0 for bounded-variation kinds.
    double drift() const { return drift_; }
    double zeta() const { return zeta_; }
    /// mu / zeta for bounded-variation kinds.
    double rho() const;
    const LevyMeasure& measure() const { return measure_; }
    double jump_density(double x) const { return measure_.density(x); }
    double jump_tail(double x) const { return measure_.tail(x); }
    double jump_mean() const { return measure_.mean(); }

    /// F(x) = (1/mu) int_0^x nu([y, inf)) dy, the integrated-tail law.
    double integrated_tail_cdf(double x) const;
    /// W(0+): 1/zeta for bounded variation, 0 otherwise.
    double w_at_zero() const { return bounded_variation() ? 1.0 / zeta_ : 0.0; }

    // Family parameters for samplers.
    struct Brownian {};
    struct CompoundPoisson { double rate; JumpDistribution jumps; };
    struct Gamma { double a, b; };
    struct InverseGaussian { double sigma, c; };
    struct Generic {};
    using Params = std::variant<Brownian, CompoundPoisson, Gamma, InverseGaussian, Generic>;
    const Params& params() const { return params_; }

    std::string describe() const;

private:
    LevyModel() = default;
    LevyKind kind_ = LevyKind::BrownianDrift;
    double drift_ = 0.0;
    double sigma2_ = 0.0;
    double zeta_ = 0.0;
    LevyMeasure measure_;
    Params params_;
};

}  // namespace levydam
