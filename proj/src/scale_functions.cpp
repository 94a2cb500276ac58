#include "levydam/scale_functions.hpp"

#include "levydam/errors.hpp"
#include "scale_internal.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace levydam {

namespace detail {

// Cubic Hermite in u with dW/du = 2u W'.
double HermiteTable::sqrt_w(std::size_t i, double u) const {
    const double u0 = std::sqrt(x[i]), u1 = std::sqrt(x[i + 1]), du = u1 - u0;
    const double s = (u - u0) / du, s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * w[i] + (s3 - 2 * s2 + s) * du * 2 * u0 * d[i] + (-2 * s3 + 3 * s2) * w[i + 1] +
           (s3 - s2) * du * 2 * u1 * d[i + 1];
}

// int_{x_i}^t W dy = int 2u W(u) du; the integrand is a quartic in u.
double HermiteTable::sqrt_int(std::size_t i, double t) const {
    static const double g[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double a = std::sqrt(x[i]), b = std::sqrt(t), c = 0.5 * (a + b), r = 0.5 * (b - a);
    double v = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double u = c + r * g[k];
        v += gw[k] * 2 * u * sqrt_w(i, u);
    }
    return r * v;
}

void HermiteTable::finish() {
    wbar.assign(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double dx = x[i] - x[i - 1];
        double cellint = 0.5 * dx * (w[i - 1] + w[i]);
        if (in_sqrt(i - 1)) cellint = sqrt_int(i - 1, x[i]);
        else if (!(i == 1 && linear_first_cell)) cellint += dx * dx * (d[i - 1] - d[i]) / 12.0;
        wbar[i] = wbar[i - 1] + cellint;
    }
}

std::size_t HermiteTable::cell(double t) const {
    if (t >= x[uniform_from]) {
        const auto k = static_cast<std::size_t>((t - x[uniform_from]) / h);
        return std::min(uniform_from + k, x.size() - 2);
    }
    auto it = std::upper_bound(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(uniform_from) + 1, t);
    const auto i = static_cast<std::size_t>(it - x.begin());
    return i == 0 ? 0 : i - 1;
}

double HermiteTable::eval_w(double t) const {
    const std::size_t i = cell(t);
    const double dx = x[i + 1] - x[i];
    const double s = (t - x[i]) / dx;
    if (i == 0 && linear_first_cell) return w[0] + s * (w[1] - w[0]);
    if (in_sqrt(i)) return sqrt_w(i, std::sqrt(t));
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * w[i] + (s3 - 2 * s2 + s) * dx * d[i] + (-2 * s3 + 3 * s2) * w[i + 1] +
           (s3 - s2) * dx * d[i + 1];
}

double HermiteTable::eval_d(double t) const {
    const std::size_t i = cell(t);
    const double dx = x[i + 1] - x[i];
    const double s = (t - x[i]) / dx;
    if (i == 0 && linear_first_cell) return (w[1] - w[0]) / dx;
    if (in_sqrt(i)) {
        const double u0 = std::sqrt(x[i]), u1 = std::sqrt(x[i + 1]), du = u1 - u0, u = std::sqrt(t);
        const double q = (u - u0) / du, q2 = q * q;
        const double dwdu = ((6 * q2 - 6 * q) * (w[i] - w[i + 1])) / du + (3 * q2 - 4 * q + 1) * 2 * u0 * d[i] +
                            (3 * q2 - 2 * q) * 2 * u1 * d[i + 1];
        return dwdu / (2 * u);
    }
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * w[i] + (-6 * s2 + 6 * s) * w[i + 1]) / dx + (3 * s2 - 4 * s + 1) * d[i] +
           (3 * s2 - 2 * s) * d[i + 1];
}

double HermiteTable::eval_wbar(double t) const {
    const std::size_t i = cell(t);
    const double dx = x[i + 1] - x[i];
    const double s = (t - x[i]) / dx;
    if (i == 0 && linear_first_cell) return wbar[0] + dx * (s * w[0] + 0.5 * s * s * (w[1] - w[0]));
    if (in_sqrt(i)) return wbar[i] + sqrt_int(i, t);
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return wbar[i] + dx * ((0.5 * s4 - s3 + s) * w[i] + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * dx * d[i] +
                           (-0.5 * s4 + s3) * w[i + 1] + (0.25 * s4 - s3 / 3.0) * dx * d[i + 1]);
}

std::vector<double> fd_derivative(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 5) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = i == 0 ? 0 : i - 1, b = std::min(n - 1, i + 1);
            d[i] = (f[b] - f[a]) / (h * static_cast<double>(b - a));
        }
        return d;
    }
    for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / (12 * h);
    auto fwd = [&](std::size_t i) { return (-25 * f[i] + 48 * f[i + 1] - 36 * f[i + 2] + 16 * f[i + 3] - 3 * f[i + 4]) / (12 * h); };
    auto bwd = [&](std::size_t i) { return (25 * f[i] - 48 * f[i - 1] + 36 * f[i - 2] - 16 * f[i - 3] + 3 * f[i - 4]) / (12 * h); };
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 1] = bwd(n - 1);
    d[n - 2] = bwd(n - 2);
    return d;
}

}  // namespace detail

std::string to_string(ScaleMethod m) {
    switch (m) {
        case ScaleMethod::ClosedFormBrownian: return "closed_form_brownian";
        case ScaleMethod::ConvolutionSeries: return "convolution_series";
        case ScaleMethod::LaplaceInversion: return "laplace_inversion";
    }
    return "unknown";
}

struct ScaleFunctionSet::Impl {
    LevyModel model;
    double alpha = 0.0;
    double eta = 0.0;
    ScaleMethod method = ScaleMethod::LaplaceInversion;
    ScaleOptions opts;
    detail::HermiteTable table;
    // Brownian closed form: W = e^{m x} x (2/sigma2) e1(2 delta x / sigma2)
    double mu = 0.0, s2 = 1.0, delta = 0.0, p = 0.0, m = 0.0;

    double cf_w(double x) const;
    double cf_wp(double x) const;
    double cf_wbar(double x) const;
    double inv_w(double x) const;
    double inv_wp(double x) const;
    double inv_wbar(double x) const;
};

namespace {

double e1m(double u) { return std::abs(u) < 1e-300 ? 1.0 : std::expm1(u) / u; }

}  // namespace

double ScaleFunctionSet::Impl::cf_w(double x) const {
    return std::exp(m * x) * x * (2.0 / s2) * e1m(2.0 * delta * x / s2);
}

double ScaleFunctionSet::Impl::cf_wp(double x) const {
    return (mu / s2) * cf_w(x) + (2.0 / s2) * std::exp(mu * x / s2) * std::cosh(x * delta / s2);
}

double ScaleFunctionSet::Impl::cf_wbar(double x) const {
    if (x <= 0) return 0.0;
    if (2.0 * delta * x / s2 < 1e-4) return gauss_legendre([&](double y) { return cf_w(y); }, 0.0, x, 20);
    return (x / delta) * (e1m(p * x) - e1m(m * x));
}

namespace {

bool finite(cld z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// 1/(phi(s) - alpha) and (J(s) + alpha)/(zeta (phi(s) - alpha)); the second
// is s/(phi - alpha) - 1/zeta rearranged so nothing cancels at large |s|.
// Where J overflows both are taken through 1/J.
cld w_transform(const LevyModel& m, long double a, cld s) {
    if (!m.bounded_variation()) return 1.0L / (m.phi(s) - a);
    const long double zeta = m.zeta();
    const cld J = m.measure().laplace_exponent(s);
    if (finite(J)) return 1.0L / (zeta * s - J - a);
    const cld q = m.measure().reciprocal_laplace_exponent(s);
    return q / ((zeta * s - a) * q - 1.0L);
}

cld w_prime_transform(const LevyModel& m, long double a, cld s) {
    if (!m.bounded_variation()) return s / (m.phi(s) - a);
    const long double zeta = m.zeta();
    const cld J = m.measure().laplace_exponent(s);
    if (finite(J)) return (J + a) / (zeta * (zeta * s - J - a));
    const cld q = m.measure().reciprocal_laplace_exponent(s);
    return (1.0L + a * q) / (zeta * ((zeta * s - a) * q - 1.0L));
}

}  // namespace

double ScaleFunctionSet::Impl::inv_w(double x) const {
    return talbot_invert([&](cld s) { return w_transform(model, alpha, s); }, x, eta, opts.talbot_nodes);
}

double ScaleFunctionSet::Impl::inv_wp(double x) const {
    return talbot_invert([&](cld s) { return w_prime_transform(model, alpha, s); }, x, eta, opts.talbot_nodes);
}

double ScaleFunctionSet::Impl::inv_wbar(double x) const {
    return talbot_invert([&](cld s) { return w_transform(model, alpha, s) / s; }, x, eta, opts.talbot_nodes);
}

double invert_scale(const LevyModel& model, double alpha, double x, int nodes) {
    if (x < 0) return 0.0;
    if (x == 0) return model.w_at_zero();
    const double eta = model.eta(alpha);
    return talbot_invert([&](cld s) { return w_transform(model, alpha, s); }, x, eta, nodes);
}

namespace {

void check_table(const detail::HermiteTable& t, const char* what) {
    double worst = 0.0;
    std::size_t where = 0;
    for (std::size_t i = 1; i < t.w.size(); ++i) {
        const double drop = (t.w[i - 1] - t.w[i]) / std::max(1.0, std::abs(t.w[i]));
        if (drop > worst) {
            worst = drop;
            where = i;
        }
    }
    if (worst > 1e-7 || !std::isfinite(t.w.back()))
        throw NumericalError(std::string(what) + ": scale function not monotone, residual " +
                             std::to_string(worst) + " at x=" + std::to_string(t.x[where]));
}

// int_0^inf e^{-beta x} W(x) dx against 1/(phi(beta) - alpha) at three beta.
void check_laplace_residual(const detail::HermiteTable& t, const LevyModel& model, double alpha, double eta,
                            double tol) {
    const double X = t.upper();
    const double c = std::max(0.5, 20.0 / X);
    for (double k : {1.0, 2.0, 4.0}) {
        const double beta = eta + c * k;
        double v = 0.0;
        for (std::size_t i = 0; i + 1 < t.x.size(); ++i)
            v += gauss_legendre([&](double x) { return std::exp(-beta * x) * t.eval_w(x); }, t.x[i], t.x[i + 1], 8);
        v += t.w.back() * std::exp(-beta * X) / (beta - eta);
        const double target = 1.0 / (model.phi(beta) - alpha);
        const double r = std::abs(v - target) / std::abs(target);
        if (!(r <= tol))
            throw NumericalError("LaplaceInversion: transform residual " + std::to_string(r) + " at beta=" +
                                 std::to_string(beta));
    }
}

}  // namespace

ScaleFunctionSet ScaleFunctionSet::build(const LevyModel& model, double alpha, const ScaleOptions& opts) {
    if (alpha < 0 || std::isnan(alpha)) throw DomainError("ScaleFunctionSet: alpha must be >= 0");
    if (!(opts.x_max > 0) || !(opts.grid_step > 0) || opts.grid_step > opts.x_max)
        throw DomainError("ScaleFunctionSet: need 0 < grid_step <= x_max");
    auto impl = std::make_shared<Impl>(Impl{model, alpha, model.eta(alpha), ScaleMethod::LaplaceInversion, opts, {}});

    ScaleMethod method;
    bool tilted = false;
    if (opts.method) {
        method = *opts.method;
    } else if (model.kind() == LevyKind::BrownianDrift) {
        method = ScaleMethod::ClosedFormBrownian;
    } else if (model.kind() == LevyKind::GenericBoundedVariation && model.rho() < 1.0) {
        method = ScaleMethod::ConvolutionSeries;
    } else if (model.kind() == LevyKind::GenericBoundedVariation && impl->eta > 0) {
        // Bounded-support measures defeat contour inversion; the series of the
        // tilted measure e^{-eta x} nu always converges.
        method = ScaleMethod::ConvolutionSeries;
        tilted = true;
    } else {
        method = ScaleMethod::LaplaceInversion;
    }
    impl->method = method;

    switch (method) {
        case ScaleMethod::ClosedFormBrownian: {
            if (model.kind() != LevyKind::BrownianDrift)
                throw DomainError("ScaleFunctionSet: closed form is only available for Brownian input");
            impl->mu = model.drift();
            impl->s2 = model.sigma2();
            impl->delta = std::sqrt(2.0 * alpha * impl->s2 + impl->mu * impl->mu);
            impl->p = (impl->mu + impl->delta) / impl->s2;
            impl->m = (impl->mu - impl->delta) / impl->s2;
            break;
        }
        case ScaleMethod::LaplaceInversion: {
            if (!model.has_analytic_exponent() && model.kind() != LevyKind::GenericBoundedVariation)
                throw DomainError("ScaleFunctionSet: no exponent available for inversion");
            auto& t = impl->table;
            const double h = opts.grid_step;
            const std::size_t nu = static_cast<std::size_t>(std::ceil(opts.x_max / h - 1e-9));
            // Geometric nodes (ratio 2^(1/4)) up to 8h, uniform beyond.
            const std::size_t first = nu >= 8 ? 8 : 1;
            const int extra = first == 8 ? 6 : 0;
            t.x.push_back(0.0);
            for (int k = 4 * opts.near_zero_levels + 2 * extra; k >= 1; --k)
                t.x.push_back(static_cast<double>(first) * h * std::exp2(-0.25 * k));
            t.uniform_from = t.x.size();
            t.h = h;
            for (std::size_t i = first; i <= nu; ++i) t.x.push_back(static_cast<double>(i) * h);
            const std::size_t n = t.x.size();
            t.w.assign(n, 0.0);
            t.d.assign(n, 0.0);
            t.w[0] = model.w_at_zero();
            const Impl& im = *impl;
            const long par = opts.parallel ? 1 : 0;
            std::exception_ptr err;
#pragma omp parallel for schedule(static) if (par)
            for (std::size_t i = 1; i < n; ++i) {
                try {
                    t.w[i] = im.inv_w(t.x[i]);
                    t.d[i] = im.inv_wp(t.x[i]);
                } catch (...) {
#pragma omp critical(levydam_scale_error)
                    if (!err) err = std::current_exception();
                }
            }
            if (err) std::rethrow_exception(err);
            t.d[0] = model.bounded_variation()
                         ? (model.measure().total_mass() + alpha) / (model.zeta() * model.zeta())
                         : 2.0 / model.sigma2();
            // Keep the exact dichotomy at 0 and strip inversion noise from the
            // smallest nodes.
            t.linear_first_cell = true;
            if (!std::isfinite(t.d[0])) t.sqrt_top = t.x[t.uniform_from];
            t.finish();
            check_table(t, "LaplaceInversion");
            check_laplace_residual(t, model, alpha, impl->eta, opts.laplace_residual_tol);
            break;
        }
        case ScaleMethod::ConvolutionSeries: {
            if (!model.bounded_variation())
                throw DomainError("ScaleFunctionSet: convolution series needs a bounded-variation model");
            const double rho = model.rho();
            if (!tilted && !(rho < 1.0))
                throw DomainError("ScaleFunctionSet: convolution series needs rho < 1 (rho=" + std::to_string(rho) + ")");
            double h = opts.series_step > 0 ? opts.series_step : 1e-3 * opts.x_max;
            std::size_t n = static_cast<std::size_t>(std::ceil(opts.x_max / h - 1e-9));
            h = opts.x_max / static_cast<double>(n);
            auto grid = [&](double step, std::size_t count) {
                return tilted ? tilted_series_scale_grid(model, alpha, step, count, opts.series_term_tol, opts.parallel,
                                                         opts.series_kernel)
                              : series_scale_grid(model, alpha, step, count, opts.series_term_tol, opts.parallel,
                                                  opts.series_kernel);
            };
            auto coarse = grid(h, n);
            auto fine = grid(h / 2, 2 * n);
            auto richardson = [](const std::vector<double>& c, const std::vector<double>& f) {
                std::vector<double> r(c.size());
                for (std::size_t i = 0; i < c.size(); ++i) r[i] = (4.0 * f[2 * i] - c[i]) / 3.0;
                return r;
            };
            std::vector<double> best = richardson(coarse, fine);
            double best_h = h;
            for (int k = 0; k < opts.series_max_refinements; ++k) {
                const std::size_t n2 = 2 * n;
                auto finer = grid(h / 4, 4 * n);
                auto next = richardson(fine, finer);
                double diff = 0.0, sup = 0.0;
                for (std::size_t i = 0; i < best.size(); ++i) {
                    diff = std::max(diff, std::abs(next[2 * i] - best[i]));
                    sup = std::max(sup, std::abs(next[2 * i]));
                }
                best = std::move(next);
                h /= 2;
                best_h = h;
                n = n2;
                fine = std::move(finer);
                if (diff < opts.series_refine_tol * std::max(sup, 1e-300)) break;
            }
            auto& t = impl->table;
            t.x.resize(best.size());
            for (std::size_t i = 0; i < best.size(); ++i) t.x[i] = static_cast<double>(i) * best_h;
            t.w = best;
            t.w[0] = model.w_at_zero();
            t.d = detail::fd_derivative(t.w, best_h);
            t.uniform_from = 0;
            t.h = best_h;
            t.linear_first_cell = false;
            t.finish();
            check_table(t, "ConvolutionSeries");
            break;
        }
    }
    return ScaleFunctionSet(std::move(impl));
}

double ScaleFunctionSet::w(double x) const {
    const Impl& im = *impl_;
    if (x < 0 || std::isnan(x)) return 0.0;
    if (x == 0) return im.model.w_at_zero();
    switch (im.method) {
        case ScaleMethod::ClosedFormBrownian: return im.cf_w(x);
        case ScaleMethod::LaplaceInversion:
            return x <= im.table.upper() ? im.table.eval_w(x) : im.inv_w(x);
        case ScaleMethod::ConvolutionSeries:
            if (x > im.table.upper() * (1 + 1e-12))
                throw DomainError("ScaleFunctionSet: x beyond series grid (x_max=" + std::to_string(im.table.upper()) + ")");
            return im.table.eval_w(std::min(x, im.table.upper()));
    }
    return 0.0;
}

double ScaleFunctionSet::w_prime(double x) const {
    const Impl& im = *impl_;
    if (x < 0) return 0.0;
    switch (im.method) {
        case ScaleMethod::ClosedFormBrownian: return im.cf_wp(x);
        case ScaleMethod::LaplaceInversion:
            if (x <= im.table.upper()) {
                // Interpolating the derivative table directly keeps W'_+ at the
                // inversion accuracy.
                const auto& t = im.table;
                const std::size_t i = t.cell(x);
                if (x == 0) return t.d[0];
                if (i == 0) return im.inv_wp(x);
                // With infinite activity W'(y) ~ nu[y, inf)/zeta^2 near 0; only
                // the bounded remainder is interpolated.
                const bool singular = !std::isfinite(t.d[0]);
                const double z2 = singular ? im.model.zeta() * im.model.zeta() : 1.0;
                auto lead = [&](double y) { return singular ? im.model.jump_tail(y) / z2 : 0.0; };
                // Cubic through four derivative nodes around the cell.
                std::size_t k = std::max<std::size_t>(i, 2) - 1;
                if (k + 3 >= t.x.size()) k = t.x.size() - 4;
                // ... and the remainder is smooth in sqrt(y) rather than y.
                auto u = [&](double y) { return singular ? std::sqrt(y) : y; };
                double out = 0.0;
                for (std::size_t a = k; a < k + 4; ++a) {
                    double l = 1.0;
                    for (std::size_t b = k; b < k + 4; ++b)
                        if (b != a) l *= (u(x) - u(t.x[b])) / (u(t.x[a]) - u(t.x[b]));
                    out += l * (t.d[a] - lead(t.x[a]));
                }
                return out + lead(x);
            }
            return im.inv_wp(x);
        case ScaleMethod::ConvolutionSeries:
            if (x > im.table.upper() * (1 + 1e-12)) throw DomainError("ScaleFunctionSet: x beyond series grid");
            return im.table.eval_d(std::min(x, im.table.upper()));
    }
    return 0.0;
}

double ScaleFunctionSet::w_bar(double x) const {
    const Impl& im = *impl_;
    if (x <= 0 || std::isnan(x)) return 0.0;
    switch (im.method) {
        case ScaleMethod::ClosedFormBrownian: return im.cf_wbar(x);
        case ScaleMethod::LaplaceInversion:
            return x <= im.table.upper() ? im.table.eval_wbar(x) : im.inv_wbar(x);
        case ScaleMethod::ConvolutionSeries:
            if (x > im.table.upper() * (1 + 1e-12)) throw DomainError("ScaleFunctionSet: x beyond series grid");
            return im.table.eval_wbar(std::min(x, im.table.upper()));
    }
    return 0.0;
}

double ScaleFunctionSet::z(double x) const {
    if (x <= 0) return 1.0;
    const double a = impl_->alpha;
    return a == 0.0 ? 1.0 : 1.0 + a * w_bar(x);
}

double ScaleFunctionSet::alpha() const { return impl_->alpha; }
double ScaleFunctionSet::eta() const { return impl_->eta; }
ScaleMethod ScaleFunctionSet::method() const { return impl_->method; }
const LevyModel& ScaleFunctionSet::model() const { return impl_->model; }
const ScaleOptions& ScaleFunctionSet::options() const { return impl_->opts; }
std::size_t ScaleFunctionSet::grid_size() const { return impl_->table.x.size(); }
double ScaleFunctionSet::x_max() const {
    return impl_->method == ScaleMethod::ClosedFormBrownian ? kInf : impl_->table.upper();
}

}  // namespace levydam
