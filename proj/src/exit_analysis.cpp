#include "levydam/exit_analysis.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <cmath>

namespace levydam {

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::TwoSidedKilled: return "two_sided_killed";
        case PotentialKind::UpKilled: return "up_killed";
        case PotentialKind::ReflectedInfimum: return "reflected_infimum";
        case PotentialKind::ReleasePhase: return "release_phase";
    }
    return "unknown";
}

PotentialDensity potential_two_sided(const ScaleFunctionSet& s, double a, double lambda) {
    if (!(a < lambda)) throw DomainError("potential_two_sided: need a < lambda");
    PotentialDensity p(PotentialKind::TwoSidedKilled, s, a, lambda);
    p.c1_ = 1.0 / s.w(lambda - a);
    return p;
}

PotentialDensity potential_up_killed(const ScaleFunctionSet& s, double lambda) {
    if (!std::isfinite(lambda)) throw DomainError("potential_up_killed: lambda must be finite");
    PotentialDensity p(PotentialKind::UpKilled, s, -kInf, lambda);
    p.c1_ = s.eta();
    return p;
}

PotentialDensity potential_reflected(const ScaleFunctionSet& s, double lambda) {
    if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("potential_reflected: need lambda > 0");
    PotentialDensity p(PotentialKind::ReflectedInfimum, s, 0.0, lambda);
    p.c1_ = 1.0 / s.w_prime(lambda);
    return p;
}

PotentialDensity potential_release(const ScaleFunctionSet& s_M, double tau, double V) {
    if (!(tau < V)) throw DomainError("potential_release: need tau < V");
    if (!std::isfinite(V)) throw DomainError("potential_release: V must be finite");
    PotentialDensity p(PotentialKind::ReleasePhase, s_M, tau, V);
    p.c1_ = 1.0 / s_M.z(V - tau);
    return p;
}

void PotentialDensity::check_x(double x) const {
    if (std::isnan(x) || x < lo_ || x > hi_)
        throw DomainError("potential (" + to_string(kind_) + "): start point " + std::to_string(x) + " outside domain");
}

double PotentialDensity::density(double x, double y) const {
    if (y < lo_ || y > hi_) return 0.0;
    const auto& s = s_;
    switch (kind_) {
        case PotentialKind::TwoSidedKilled:
            return s.w(hi_ - x) * s.w(y - lo_) * c1_ - s.w(y - x);
        case PotentialKind::UpKilled:
            return s.w(hi_ - x) * std::exp(-c1_ * (hi_ - y)) - s.w(y - x);
        case PotentialKind::ReflectedInfimum:
            if (y >= hi_) return 0.0;
            return s.w(hi_ - x) * s.w_prime(y) * c1_ - s.w(y - x);
        case PotentialKind::ReleasePhase:
            if (y <= lo_) return 0.0;
            return s.z(hi_ - x) * s.w(y - lo_) * c1_ - s.w(y - x);
    }
    return 0.0;
}

double PotentialDensity::atom_at_zero(double x) const {
    if (kind_ != PotentialKind::ReflectedInfimum) return 0.0;
    return s_.model().w_at_zero() * s_.w(hi_ - x) * c1_;
}

double PotentialDensity::integrate(double x, const std::function<double(double)>& f,
                                   const std::vector<double>& breaks, double rel_tol) const {
    check_x(x);
    std::vector<double> pts = breaks;
    pts.push_back(x);
    const double lo_fin = std::isfinite(lo_) ? lo_ : std::min({x, hi_}) - 1.0;
    auto g = [&](double y) {
        const double v = f(y);
        return v == 0.0 ? 0.0 : v * density(x, y);
    };
    auto fin = merge_breaks(pts, lo_fin, hi_);
    QuadratureOptions q{rel_tol, 15};
    double total = 0.0;
    if (std::isinf(s_.model().measure().total_mass())) {
        // W' and the jump kernels blow up at piece ends for infinite activity.
        for (std::size_t i = 0; i + 1 < fin.size(); ++i) total += integrate_smoothstep(g, fin[i], fin[i + 1], q);
    } else {
        total = integrate_pieces(g, fin, q);
    }
    if (!std::isfinite(lo_)) total += levydam::integrate(g, -kInf, lo_fin, q);
    if (kind_ == PotentialKind::ReflectedInfimum) total += atom_at_zero(x) * f(0.0);
    return total;
}

double PotentialDensity::total_mass(double x) const {
    check_x(x);
    const auto& s = s_;
    switch (kind_) {
        case PotentialKind::TwoSidedKilled:
            return s.w(hi_ - x) * s.w_bar(hi_ - lo_) * c1_ - s.w_bar(hi_ - x);
        case PotentialKind::UpKilled:
            if (!(c1_ > 0)) return kInf;
            return s.w(hi_ - x) / c1_ - s.w_bar(hi_ - x);
        case PotentialKind::ReflectedInfimum:
            return s.w(hi_ - x) * s.w(hi_) * c1_ - s.w_bar(hi_ - x);
        case PotentialKind::ReleasePhase:
            return (s.w_bar(hi_ - lo_) - s.w_bar(hi_ - x)) * c1_;
    }
    return 0.0;
}

double PotentialDensity::exit_transform(double x) const {
    check_x(x);
    switch (kind_) {
        case PotentialKind::TwoSidedKilled: return exit_lt_two_sided(s_, x, lo_, hi_);
        case PotentialKind::UpKilled: return exit_lt_up(s_, x, hi_);
        case PotentialKind::ReflectedInfimum: return exit_lt_reflected(s_, x, hi_);
        case PotentialKind::ReleasePhase: return release_exit_lt(s_, x, lo_, hi_);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

double exit_lt_two_sided(const ScaleFunctionSet& s, double x, double a, double lambda) {
    if (!(a < lambda) || x < a || x > lambda) throw DomainError("exit_lt_two_sided: need a <= x <= lambda, a < lambda");
    const double r = s.w(lambda - x) / s.w(lambda - a);
    return s.z(lambda - x) - s.z(lambda - a) * r + r;
}

double exit_lt_up(const ScaleFunctionSet& s, double x, double lambda) {
    if (x >= lambda) return 1.0;
    const double alpha = s.alpha(), eta = s.eta();
    if (alpha == 0.0) {
        if (eta > 0) return 1.0;
        // alpha/eta(alpha) -> phi'(0+) as alpha -> 0 when eta(0) = 0
        return std::clamp(1.0 - s.model().phi_prime(0.0) * s.w(lambda - x), 0.0, 1.0);
    }
    return s.z(lambda - x) - (alpha / eta) * s.w(lambda - x);
}

double exit_mean_up(const ScaleFunctionSet& s0, double x, double lambda) {
    if (s0.alpha() != 0.0) throw DomainError("exit_mean_up: scale functions must be built at alpha = 0");
    if (x >= lambda) return 0.0;
    if (!(s0.eta() > 0)) return kInf;
    return s0.w(lambda - x) / s0.eta() - s0.w_bar(lambda - x);
}

double exit_lt_reflected(const ScaleFunctionSet& s, double x, double lambda) {
    if (x < 0) throw DomainError("exit_lt_reflected: x must be >= 0");
    if (x >= lambda) return 1.0;
    const double alpha = s.alpha();
    if (alpha == 0.0) return 1.0;
    return s.z(lambda - x) - s.w(lambda - x) * alpha * s.w(lambda) / s.w_prime(lambda);
}

double exit_mean_reflected(const ScaleFunctionSet& s0, double x, double lambda) {
    if (s0.alpha() != 0.0) throw DomainError("exit_mean_reflected: scale functions must be built at alpha = 0");
    if (x < 0) throw DomainError("exit_mean_reflected: x must be >= 0");
    if (x >= lambda) return 0.0;
    return s0.w(lambda - x) * s0.w(lambda) / s0.w_prime(lambda) - s0.w_bar(lambda - x);
}

double release_exit_lt(const ScaleFunctionSet& s_M, double x, double tau, double V) {
    if (!(tau <= x && x <= V)) throw DomainError("release_exit_lt: need tau <= x <= V");
    if (x == tau) return 1.0;
    if (!std::isfinite(V)) return std::exp(-s_M.eta() * (x - tau));
    if (s_M.alpha() == 0.0) return 1.0;
    return s_M.z(V - x) / s_M.z(V - tau);
}

double release_exit_mean(const ScaleFunctionSet& s_M0, double x, double tau, double V) {
    if (s_M0.alpha() != 0.0) throw DomainError("release_exit_mean: scale functions must be built at alpha = 0");
    if (!(tau <= x && x <= V)) throw DomainError("release_exit_mean: need tau <= x <= V");
    if (x == tau) return 0.0;
    if (!std::isfinite(V)) {
        const double drift = s_M0.model().mean_input();  // E I_1 - M
        return drift < 0 ? (x - tau) / (-drift) : kInf;
    }
    return s_M0.w_bar(V - tau) - s_M0.w_bar(V - x);
}

double fill_discounted_length(const ScaleFunctionSet& s, double x, double lambda, bool reflected) {
    if (x >= lambda) return 0.0;
    return reflected ? potential_reflected(s, lambda).total_mass(x) : potential_up_killed(s, lambda).total_mass(x);
}

double release_discounted_length(const ScaleFunctionSet& s_M, double x, double tau, double V) {
    if (!(tau <= x && x <= V)) throw DomainError("release_discounted_length: need tau <= x <= V");
    if (x == tau) return 0.0;
    if (!std::isfinite(V)) {
        if (s_M.alpha() == 0.0) return release_exit_mean(s_M, x, tau, V);
        return -std::expm1(-s_M.eta() * (x - tau)) / s_M.alpha();
    }
    return potential_release(s_M, tau, V).total_mass(x);
}

// ---------------------------------------------------------------------------

OvershootLaw::OvershootLaw(PotentialDensity U, double x, double lambda, bool reflected)
    : U_(std::move(U)), x_(x), lambda_(lambda), reflected_(reflected) {
    const auto& s = U_.scale();
    exit_transform_ = reflected ? exit_lt_reflected(s, x, lambda) : exit_lt_up(s, x, lambda);
    jump_mass_ = s.model().has_jumps() ? tail(lambda) : 0.0;
    if (s.model().sigma2() > 0) {
        atom_ = reflected ? (V_alpha() - L_alpha(lambda)) / s.w_prime(lambda) : exit_transform_ - jump_mass_;
        atom_ = std::max(0.0, atom_);
    }
}

std::vector<double> OvershootLaw::outer_breaks(double z_lo, double z_hi) const {
    std::vector<double> out;
    for (double k : U_.scale().model().measure().breakpoints()) {
        out.push_back(z_lo - k);
        if (std::isfinite(z_hi)) out.push_back(z_hi - k);
    }
    return out;
}

double OvershootLaw::transform_density(double z) const {
    if (z <= lambda_) return 0.0;
    const auto& m = U_.scale().model();
    if (!m.has_jumps()) return 0.0;
    return U_.integrate(x_, [&](double y) { return m.jump_density(z - y); }, outer_breaks(z, z), 1e-10);
}

double OvershootLaw::tail(double z) const {
    const auto& m = U_.scale().model();
    if (!m.has_jumps()) return 0.0;
    z = std::max(z, lambda_);
    return U_.integrate(x_, [&](double y) { return m.jump_tail(z - y); }, outer_breaks(z, z), 1e-10);
}

double OvershootLaw::expect(const std::function<double(double)>& h, double cap,
                            const std::vector<double>& h_breaks) const {
    if (!(cap >= lambda_)) throw DomainError("OvershootLaw::expect: cap must be >= lambda");
    const auto& m = U_.scale().model();
    const double hl = h(lambda_);
    double total = atom_ * hl;
    if (!m.has_jumps()) return total;
    const double hcap = std::isfinite(cap) ? h(cap) : 0.0;
    const auto& knots = m.measure().breakpoints();
    const bool finite_cap = std::isfinite(cap);
    const double z_hi = finite_cap ? cap : lambda_ + 1.0;

    auto kernel = [&](double y) {
        // int_lambda^cap h(z) nu(z-y) dz + h(cap) nu([cap-y, inf)), with h(lambda)
        // pulled out so the integrand stays bounded as y -> lambda.
        auto g = [&](double z) { return (h(z) - hl) * m.jump_density(z - y); };
        std::vector<double> pts = h_breaks;
        for (double k : knots) pts.push_back(y + k);
        auto fin = merge_breaks(pts, lambda_, z_hi);
        double v = integrate_pieces(g, fin, {1e-10, 15});
        if (!finite_cap) v += integrate(g, z_hi, kInf, {1e-10, 15});
        v += hl * m.jump_tail(lambda_ - y);
        if (finite_cap) v += (hcap - hl) * m.jump_tail(cap - y);
        return v;
    };
    total += U_.integrate(x_, kernel, outer_breaks(lambda_, cap), 1e-10);
    return total;
}

double OvershootLaw::l_alpha(double z) const {
    return U_.scale().w_prime(lambda_) * transform_density(z);
}

double OvershootLaw::L_alpha(double z) const { return U_.scale().w_prime(lambda_) * tail(z); }

double OvershootLaw::V_alpha() const {
    const auto& s = U_.scale();
    return s.w_prime(lambda_) * s.z(lambda_ - x_) - s.alpha() * s.w(lambda_ - x_) * s.w(lambda_);
}

OvershootLaw overshoot_up(const ScaleFunctionSet& s, double x, double lambda) {
    if (x > lambda) throw DomainError("overshoot_up: need x <= lambda");
    return OvershootLaw(potential_up_killed(s, lambda), x, lambda, false);
}

OvershootLaw overshoot_reflected(const ScaleFunctionSet& s, double x, double lambda) {
    if (x < 0 || x > lambda) throw DomainError("overshoot_reflected: need 0 <= x <= lambda");
    return OvershootLaw(potential_reflected(s, lambda), x, lambda, true);
}

double cycle_end_lt(const ScaleFunctionSet& s, const ScaleFunctionSet& s_M, double x, double lambda, double tau,
                    double V, bool reflected) {
    if (!(tau < lambda) || !(lambda <= V)) throw DomainError("cycle_end_lt: need tau < lambda <= V");
    if (x > V) throw DomainError("cycle_end_lt: need x <= V");
    if (x >= lambda) return release_exit_lt(s_M, x, tau, V);
    if (s.alpha() == 0.0 && s_M.alpha() == 0.0 && std::isfinite(V)) {
        // A finite-capacity release phase ends almost surely; only a plain
        // fill phase may fail to reach lambda.
        return reflected ? 1.0 : exit_lt_up(s, x, lambda);
    }
    const auto law = reflected ? overshoot_reflected(s, x, lambda) : overshoot_up(s, x, lambda);
    return law.expect([&](double z) { return release_exit_lt(s_M, z, tau, V); }, V);
}

}  // namespace levydam
