#include "levydam/levy_model.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace levydam {

namespace {

double e1(double x) { return x > 700.0 ? 0.0 : boost::math::expint(1, x); }

// (e^z - 1)/z and int_0^1 v e^{zv} dv, stable near z = 0.
cld expm1_over(cld z) {
    if (std::abs(z) < 0.5L) {
        cld term = 1.0L, sum = 1.0L;
        for (int k = 1; k < 25; ++k) {
            term *= z / static_cast<long double>(k + 1);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0L) / z;
}

cld first_moment_kernel(cld z) {
    if (std::abs(z) < 0.5L) {
        cld term = 1.0L, sum = 0.5L;
        for (int k = 1; k < 25; ++k) {
            term *= z / static_cast<long double>(k);
            sum += term / static_cast<long double>(k + 2);
        }
        return sum;
    }
    return (std::exp(z) * (z - 1.0L) + 1.0L) / (z * z);
}

}  // namespace

std::string to_string(LevyKind k) {
    switch (k) {
        case LevyKind::BrownianDrift: return "brownian";
        case LevyKind::CompoundPoissonDrift: return "compound_poisson";
        case LevyKind::GammaDrift: return "gamma";
        case LevyKind::InverseGaussianDrift: return "inverse_gaussian";
        case LevyKind::GenericBoundedVariation: return "generic";
    }
    return "unknown";
}

double JumpDistribution::pdf(double x) const {
    if (x <= 0) return 0.0;
    if (family == Family::Exponential) return rate * std::exp(-rate * x);
    return rate * boost::math::gamma_p_derivative(shape, rate * x);
}

double JumpDistribution::survival(double x) const {
    if (x <= 0) return 1.0;
    if (family == Family::Exponential) return std::exp(-rate * x);
    return boost::math::gamma_q(shape, rate * x);
}

// ---------------------------------------------------------------------------

LevyMeasure LevyMeasure::from_functions(Fn density, Fn tail, double mean, ComplexFn laplace_exponent,
                                        double total_mass) {
    if (!density || !tail) throw DomainError("LevyMeasure: density and tail are required");
    if (!(mean >= 0)) throw DomainError("LevyMeasure: mean must be nonnegative");
    LevyMeasure m;
    m.density_ = std::move(density);
    m.tail_ = std::move(tail);
    m.laplace_ = std::move(laplace_exponent);
    m.mean_ = mean;
    // int (x^2 ^ 1) nu(dx) must be finite; the tail handles [1, inf).
    // Quadrature alone can return a finite number for a divergent integrand,
    // so also require the contribution of (0, 1e-8] to be negligible.
    auto x2nu = [&](double x) { return x * x * m.density_(x); };
    const double small = integrate(x2nu, 1e-8, 1.0, {1e-8, 12});
    const double tiny = integrate(x2nu, 1e-16, 1e-8, {1e-6, 12});
    if (!std::isfinite(small) || !std::isfinite(tiny) || tiny > 1e-3 * std::max(small, 1e-300) + 1e-12 ||
        !std::isfinite(m.tail_(1.0)))
        throw DomainError("LevyMeasure: int (x^2 ^ 1) nu(dx) is not finite");
    if (std::isnan(total_mass)) {
        const double t1 = m.tail_(1e-12), t2 = m.tail_(1e-200);
        total_mass = (std::isfinite(t2) && t2 <= t1 * (1.0 + 1e-9)) ? t2 : kInf;
    }
    m.total_mass_ = total_mass;
    return m;
}

LevyMeasure LevyMeasure::tabulated(std::vector<double> xs, std::vector<double> densities) {
    if (xs.size() < 2 || xs.size() != densities.size())
        throw DomainError("LevyMeasure::tabulated: need matching knots and densities (>= 2)");
    if (xs.front() < 0) throw DomainError("LevyMeasure::tabulated: knots must be >= 0");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(densities[i] >= 0) || !std::isfinite(densities[i]))
            throw DomainError("LevyMeasure::tabulated: densities must be finite and >= 0");
        if (i && !(xs[i] > xs[i - 1])) throw DomainError("LevyMeasure::tabulated: knots must increase");
    }
    LevyMeasure m;
    m.knots_ = std::move(xs);
    m.dens_ = std::move(densities);
    const auto& k = m.knots_;
    const auto& d = m.dens_;
    const std::size_t n = k.size();
    m.cum_.assign(n, 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = k[i + 1] - k[i];
        m.cum_[i + 1] = m.cum_[i] + 0.5 * h * (d[i] + d[i + 1]);
        mean += h * (d[i] * (2 * k[i] + k[i + 1]) + d[i + 1] * (k[i] + 2 * k[i + 1])) / 6.0;
    }
    if (!(m.cum_.back() > 0)) throw DomainError("LevyMeasure::tabulated: zero total mass");
    m.total_mass_ = m.cum_.back();
    m.mean_ = mean;

    auto knots = m.knots_;
    auto dens = m.dens_;
    m.density_ = [knots, dens](double x) {
        if (x < knots.front() || x > knots.back()) return 0.0;
        auto it = std::upper_bound(knots.begin(), knots.end(), x);
        std::size_t i = it == knots.end() ? knots.size() - 2 : static_cast<std::size_t>(it - knots.begin()) - 1;
        const double w = (x - knots[i]) / (knots[i + 1] - knots[i]);
        return dens[i] + w * (dens[i + 1] - dens[i]);
    };
    auto cum = m.cum_;
    m.tail_ = [knots, dens, cum](double x) {
        if (x <= knots.front()) return cum.back();
        if (x >= knots.back()) return 0.0;
        auto it = std::upper_bound(knots.begin(), knots.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
        const double u = x - knots[i];
        const double slope = (dens[i + 1] - dens[i]) / (knots[i + 1] - knots[i]);
        return cum.back() - (cum[i] + dens[i] * u + 0.5 * slope * u * u);
    };
    const double total = m.total_mass_;
    m.laplace_ = [knots, dens, total](cld s) {
        // total - int e^{-sx} nu(dx), segment by segment.
        cld lt = 0.0L;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const long double h = knots[i + 1] - knots[i];
            const long double slope = (dens[i + 1] - dens[i]) / h;
            const cld z = -s * h;
            const cld i0 = h * expm1_over(z);
            const cld i1 = h * h * first_moment_kernel(z);
            lt += std::exp(-s * static_cast<long double>(knots[i])) *
                  (static_cast<long double>(dens[i]) * i0 + slope * i1);
        }
        return static_cast<long double>(total) - lt;
    };
    m.recip_laplace_ = [knots, dens, total](cld s) {
        // Same integral with every exponential scaled by e^{-E}, E the
        // largest exponent over the knots.
        long double E = -1e300L;
        for (double k : knots) E = std::max(E, (-s * static_cast<long double>(k)).real());
        cld lt = 0.0L;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const long double h = knots[i + 1] - knots[i];
            const long double slope = (dens[i + 1] - dens[i]) / h;
            const cld u = std::exp(-s * static_cast<long double>(knots[i]) - E);
            const cld v = std::exp(-s * static_cast<long double>(knots[i + 1]) - E);
            lt += static_cast<long double>(dens[i]) * (u - v) / s + slope * ((u - v) / (s * s) - h * v / s);
        }
        return std::exp(-E) / (static_cast<long double>(total) * std::exp(-E) - lt);
    };
    return m;
}

double LevyMeasure::tail(double x) const {
    if (!tail_) return 0.0;
    if (x <= 0) return total_mass_;
    return tail_(x);
}

cld LevyMeasure::reciprocal_laplace_exponent(cld s) const {
    if (recip_laplace_) return recip_laplace_(s);
    return 1.0L / laplace_exponent(s);
}

cld LevyMeasure::laplace_exponent(cld s) const {
    if (laplace_) return laplace_(s);
    if (!density_) return 0.0L;
    auto part = [&](bool imag) {
        auto f = [&](double x) {
            const cld v = (1.0L - std::exp(-s * static_cast<long double>(x))) * static_cast<long double>(density_(x));
            return static_cast<double>(imag ? v.imag() : v.real());
        };
        return integrate(f, 0.0, 1.0, {1e-10, 15}) + integrate(f, 1.0, kInf, {1e-10, 15});
    };
    return cld(part(false), part(true));
}

double LevyMeasure::laplace_exponent(double theta) const {
    if (theta == 0.0) return 0.0;
    if (laplace_) return static_cast<double>(laplace_(cld(theta, 0)).real());
    if (!density_) return 0.0;
    auto f = [&](double x) { return -std::expm1(-theta * x) * density_(x); };
    std::vector<double> pts{0.0, 1.0};
    double v = integrate_pieces(f, pts, {1e-12, 15});
    return v + integrate(f, 1.0, kInf, {1e-12, 15});
}

double LevyMeasure::laplace_exponent_derivative(double theta) const {
    if (!density_) return 0.0;
    if (theta == 0.0) return mean_;
    auto f = [&](double x) { return x * std::exp(-theta * x) * density_(x); };
    if (is_tabulated()) return integrate_pieces(f, knots_, {1e-12, 15});
    return integrate(f, 0.0, 1.0, {1e-12, 15}) + integrate(f, 1.0, kInf, {1e-12, 15});
}

double LevyMeasure::sample_jump(double u) const {
    if (!is_tabulated()) throw DomainError("LevyMeasure::sample_jump: only tabulated measures can be sampled");
    const double target = std::clamp(u, 0.0, 1.0) * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    if (i + 1 >= knots_.size()) i = knots_.size() - 2;
    const double h = knots_[i + 1] - knots_[i];
    const double slope = (dens_[i + 1] - dens_[i]) / h;
    const double r = target - cum_[i];
    // d u + slope u^2 / 2 = r
    double x;
    if (std::abs(slope) < 1e-14 * std::max(dens_[i], 1.0)) {
        x = dens_[i] > 0 ? r / dens_[i] : 0.5 * h;
    } else {
        const double disc = std::max(0.0, dens_[i] * dens_[i] + 2.0 * slope * r);
        x = 2.0 * r / (dens_[i] + std::sqrt(disc));
    }
    return knots_[i] + std::clamp(x, 0.0, h);
}

// ---------------------------------------------------------------------------

LevyModel LevyModel::brownian(double drift, double sigma2) {
    if (!(sigma2 > 0) || !std::isfinite(drift))
        throw DomainError("brownian: need sigma2 > 0 and finite drift");
    LevyModel m;
    m.kind_ = LevyKind::BrownianDrift;
    m.drift_ = drift;
    m.sigma2_ = sigma2;
    m.params_ = Brownian{};
    return m;
}

LevyModel LevyModel::compound_poisson(double zeta, double rate, JumpDistribution jumps) {
    if (!(zeta > 0) || !(rate > 0) || !(jumps.rate > 0) || !(jumps.shape > 0))
        throw DomainError("compound_poisson: zeta, rate and jump parameters must be positive");
    LevyModel m;
    m.kind_ = LevyKind::CompoundPoissonDrift;
    m.zeta_ = zeta;
    m.params_ = CompoundPoisson{rate, jumps};
    const double k = jumps.shape, b = jumps.rate;
    auto dens = [rate, jumps](double x) { return rate * jumps.pdf(x); };
    auto tail = [rate, jumps](double x) { return rate * jumps.survival(x); };
    auto lap = [rate, k, b](cld s) {
        const long double kl = k, bl = b;
        if (k == 1.0) return static_cast<long double>(rate) * s / (bl + s);
        return static_cast<long double>(rate) * (1.0L - std::exp(-kl * std::log(1.0L + s / bl)));
    };
    m.measure_ = LevyMeasure::from_functions(dens, tail, rate * jumps.mean(), lap, rate);
    return m;
}

LevyModel LevyModel::gamma(double zeta, double a, double b) {
    if (!(zeta > 0) || !(a > 0) || !(b > 0)) throw DomainError("gamma: zeta, a, b must be positive");
    LevyModel m;
    m.kind_ = LevyKind::GammaDrift;
    m.zeta_ = zeta;
    m.params_ = Gamma{a, b};
    auto dens = [a, b](double x) { return a * std::exp(-b * x) / x; };
    auto tail = [a, b](double x) { return a * e1(b * x); };
    auto lap = [a, b](cld s) {
        return static_cast<long double>(a) * std::log(1.0L + s / static_cast<long double>(b));
    };
    m.measure_ = LevyMeasure::from_functions(dens, tail, a / b, lap, kInf);
    return m;
}

LevyModel LevyModel::inverse_gaussian(double zeta, double sigma, double c) {
    if (!(zeta > 0) || !(sigma > 0) || !(c > 0))
        throw DomainError("inverse_gaussian: zeta, sigma, c must be positive");
    LevyModel m;
    m.kind_ = LevyKind::InverseGaussianDrift;
    m.zeta_ = zeta;
    m.params_ = InverseGaussian{sigma, c};
    const double A = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    const double B = c * c / (2.0 * sigma * sigma);
    auto dens = [A, B](double x) { return A * std::pow(x, -1.5) * std::exp(-B * x); };
    auto tail = [A, B](double x) {
        return 2.0 * A * (std::exp(-B * x) / std::sqrt(x) -
                          std::sqrt(std::numbers::pi * B) * std::erfc(std::sqrt(B * x)));
    };
    auto lap = [sigma, B](cld s) {
        const long double Bl = B;
        return (std::sqrt(2.0L) / static_cast<long double>(sigma)) * (std::sqrt(s + Bl) - std::sqrt(Bl));
    };
    m.measure_ = LevyMeasure::from_functions(dens, tail, 1.0 / c, lap, kInf);
    return m;
}

LevyModel LevyModel::generic_bounded_variation(double zeta, LevyMeasure measure) {
    if (!(zeta > 0)) throw DomainError("generic_bounded_variation: zeta must be positive");
    LevyModel m;
    m.kind_ = LevyKind::GenericBoundedVariation;
    m.zeta_ = zeta;
    m.params_ = Generic{};
    m.measure_ = std::move(measure);
    return m;
}

bool LevyModel::has_analytic_exponent() const {
    return kind_ == LevyKind::BrownianDrift || measure_.has_laplace_exponent();
}

double LevyModel::phi(double theta) const {
    if (theta < 0 || std::isnan(theta)) throw DomainError("phi: theta must be >= 0");
    if (theta == 0.0) return 0.0;
    switch (kind_) {
        case LevyKind::BrownianDrift: return -drift_ * theta + 0.5 * sigma2_ * theta * theta;
        case LevyKind::GammaDrift: {
            const auto& p = std::get<Gamma>(params_);
            return zeta_ * theta - p.a * std::log1p(theta / p.b);
        }
        case LevyKind::CompoundPoissonDrift: {
            const auto& p = std::get<CompoundPoisson>(params_);
            const double k = p.jumps.shape, b = p.jumps.rate;
            return zeta_ * theta + p.rate * std::expm1(-k * std::log1p(theta / b));
        }
        default: return zeta_ * theta - measure_.laplace_exponent(theta);
    }
}

double LevyModel::phi_prime(double theta) const {
    if (theta < 0 || std::isnan(theta)) throw DomainError("phi_prime: theta must be >= 0");
    switch (kind_) {
        case LevyKind::BrownianDrift: return -drift_ + sigma2_ * theta;
        case LevyKind::GammaDrift: {
            const auto& p = std::get<Gamma>(params_);
            return zeta_ - p.a / (p.b + theta);
        }
        case LevyKind::CompoundPoissonDrift: {
            const auto& p = std::get<CompoundPoisson>(params_);
            const double k = p.jumps.shape, b = p.jumps.rate;
            return zeta_ - p.rate * (k / b) * std::pow(b / (b + theta), k + 1.0);
        }
        case LevyKind::InverseGaussianDrift: {
            const auto& p = std::get<InverseGaussian>(params_);
            const double B = p.c * p.c / (2.0 * p.sigma * p.sigma);
            return zeta_ - 1.0 / (p.sigma * std::sqrt(2.0 * (theta + B)));
        }
        default: return zeta_ - measure_.laplace_exponent_derivative(theta);
    }
}

cld LevyModel::phi(cld s) const {
    if (kind_ == LevyKind::BrownianDrift)
        return -static_cast<long double>(drift_) * s + 0.5L * static_cast<long double>(sigma2_) * s * s;
    return static_cast<long double>(zeta_) * s - measure_.laplace_exponent(s);
}

double LevyModel::mean_input() const {
    if (kind_ == LevyKind::BrownianDrift) return drift_;
    const double mu = measure_.mean();
    return std::isfinite(mu) ? mu - zeta_ : kInf;
}

double LevyModel::rho() const {
    if (!bounded_variation()) throw DomainError("rho: defined for bounded-variation models only");
    return measure_.mean() / zeta_;
}

double LevyModel::eta(double alpha) const {
    if (alpha < 0 || std::isnan(alpha)) throw DomainError("eta: alpha must be >= 0");
    if (kind_ == LevyKind::BrownianDrift) {
        const double d = std::sqrt(2.0 * alpha * sigma2_ + drift_ * drift_);
        if (drift_ >= 0) return (d + drift_) / sigma2_;
        // (d + mu) cancels when mu < 0; use 2 alpha / (d - mu).
        return 2.0 * alpha / (d - drift_);
    }
    double lo = 0.0;
    if (alpha == 0.0) {
        if (!(mean_input() > 0)) return 0.0;
        double t = 1.0;
        int guard = 0;
        while (phi(t) >= 0.0) {
            t *= 0.5;
            if (++guard > 1074) throw ConvergenceError("eta: no negative value of phi near 0");
        }
        lo = t;
    }
    double hi = std::max(1.0, 2.0 * lo);
    int expansions = 0;
    while (phi(hi) <= alpha) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 200) throw ConvergenceError("eta: bracket expansion failed");
    }
    auto g = [&](double t) { return phi(t) - alpha; };
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0) hi = mid;
        else lo = mid;
    }
    double root = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double d = phi_prime(root);
        if (!(d > 0)) break;
        const double next = root - g(root) / d;
        if (!(next > 0) || std::abs(g(next)) > std::abs(g(root))) break;
        root = next;
    }
    return root;
}

LevyModel LevyModel::shifted(double M) const {
    if (!(M > 0)) throw DomainError("shifted: M must be positive");
    LevyModel m = *this;
    if (kind_ == LevyKind::BrownianDrift) m.drift_ = drift_ - M;
    else m.zeta_ = zeta_ + M;
    return m;
}

double LevyModel::integrated_tail_cdf(double x) const {
    if (!bounded_variation()) throw DomainError("integrated_tail_cdf: model has no jumps");
    if (x <= 0) return 0.0;
    switch (kind_) {
        case LevyKind::CompoundPoissonDrift: {
            const auto& j = std::get<CompoundPoisson>(params_).jumps;
            if (j.family == JumpDistribution::Family::Exponential) return -std::expm1(-j.rate * x);
            const double bx = j.rate * x;
            return (x * boost::math::gamma_q(j.shape, bx) +
                    j.mean() * boost::math::gamma_p(j.shape + 1.0, bx)) / j.mean();
        }
        case LevyKind::GammaDrift: {
            const auto& p = std::get<Gamma>(params_);
            const double bx = p.b * x;
            return -std::expm1(-bx) + bx * e1(bx);
        }
        case LevyKind::InverseGaussianDrift: {
            const auto& p = std::get<InverseGaussian>(params_);
            const double B = p.c * p.c / (2.0 * p.sigma * p.sigma);
            return std::erf(std::sqrt(B * x)) + p.c * x * measure_.tail(x);
        }
        default: {
            const double mu = measure_.mean();
            if (!(mu > 0) || !std::isfinite(mu)) throw DomainError("integrated_tail_cdf: need 0 < mu < inf");
            auto pts = merge_breaks(measure_.breakpoints(), 0.0, x);
            const double v = integrate_pieces([&](double y) { return measure_.tail(y); }, pts, {1e-12, 15});
            return std::min(1.0, v / mu);
        }
    }
}

std::string LevyModel::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind_);
    if (kind_ == LevyKind::BrownianDrift) {
        os << "(drift=" << drift_ << ", sigma2=" << sigma2_ << ")";
        return os.str();
    }
    os << "(zeta=" << zeta_;
    if (auto p = std::get_if<CompoundPoisson>(&params_))
        os << ", rate=" << p->rate << ", jump_shape=" << p->jumps.shape << ", jump_rate=" << p->jumps.rate;
    if (auto p = std::get_if<Gamma>(&params_)) os << ", a=" << p->a << ", b=" << p->b;
    if (auto p = std::get_if<InverseGaussian>(&params_)) os << ", sigma=" << p->sigma << ", c=" << p->c;
    os << ")";
    return os.str();
}

}  // namespace levydam
