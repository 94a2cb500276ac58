#include "levydam/numerics.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

namespace levydam {

double talbot_invert(const std::function<cld(cld)>& F, double t, double shift, int nodes) {
    if (!(t > 0.0)) throw DomainError("talbot_invert: t must be positive");
    if (nodes < 8) throw DomainError("talbot_invert: need at least 8 nodes");
    using L = long double;
    const L pi = std::numbers::pi_v<L>;
    const L tl = t;
    const L sh = shift;
    const L r = L(2) * nodes / (L(5) * tl);

    cld sum = L(0.5) * std::exp(r * tl) * F(cld(r + sh, 0));
    for (int k = 1; k < nodes; ++k) {
        const L th = k * pi / nodes;
        const L cot = std::cos(th) / std::sin(th);
        const cld s(r * th * cot, r * th);
        const L sigma = th + (th * cot - 1) * cot;
        const cld f = F(s + cld(sh, 0));
        if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
            throw NumericalError("talbot_invert: transform not finite at t=" + std::to_string(t));
        sum += std::exp(s * tl) * f * cld(1, sigma);
    }
    const L out = (r / nodes) * sum.real() * std::exp(sh * tl);
    if (!std::isfinite(static_cast<double>(out)))
        throw NumericalError("talbot_invert: non-finite result at t=" + std::to_string(t));
    return static_cast<double>(out);
}

double integrate(const std::function<double(double)>& f, double a, double b, QuadratureOptions opts) {
    if (a == b) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, opts.max_depth,
                                                                        opts.rel_tol, &err);
}

double integrate_smoothstep(const std::function<double(double)>& f, double a, double b, QuadratureOptions opts) {
    if (a == b) return 0.0;
    const double L = b - a;
    auto g = [&](double u) {
        const double y = a + L * u * u * (3.0 - 2.0 * u);
        const double v = f(y);
        return v == 0.0 ? 0.0 : v * 6.0 * L * u * (1.0 - u);
    };
    return integrate(g, 0.0, 1.0, opts);
}

double integrate_pieces(const std::function<double(double)>& f, std::vector<double> points,
                        QuadratureOptions opts) {
    if (points.size() < 2) return 0.0;
    const double lo = points.front(), hi = points.back();
    std::sort(points.begin(), points.end());
    double total = 0.0;
    double prev = lo;
    for (double p : points) {
        if (p <= prev || p > hi) continue;
        total += integrate(f, prev, p, opts);
        prev = p;
    }
    return total;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
    using namespace boost::math::quadrature;
    switch (n) {
        case 8: return gauss<double, 8>::integrate(f, a, b);
        case 16: return gauss<double, 16>::integrate(f, a, b);
        case 20: return gauss<double, 20>::integrate(f, a, b);
        default: throw DomainError("gauss_legendre: unsupported order");
    }
}

std::vector<double> merge_breaks(std::vector<double> pts, double lo, double hi) {
    pts.push_back(lo);
    pts.push_back(hi);
    std::vector<double> out;
    std::sort(pts.begin(), pts.end());
    const double scale = std::max({1.0, std::isfinite(lo) ? std::abs(lo) : 0.0,
                                   std::isfinite(hi) ? std::abs(hi) : 0.0});
    for (double p : pts) {
        if (std::isnan(p) || p < lo || p > hi) continue;
        if (!out.empty() && std::abs(p - out.back()) <= 1e-13 * scale) continue;
        out.push_back(p);
    }
    return out;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, int steps) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw ConvergenceError("bisect_root: no sign change");
    for (int i = 0; i < steps && hi - lo > 0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0, c = 0.0;
        for (double x : v) {
            const double t = s + x;
            c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
            s = t;
        }
        return s + c;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

PiecewiseChebyshev::PiecewiseChebyshev(const std::function<double(double)>& f,
                                       std::vector<double> breaks, int nodes_per_segment)
    : breaks_(std::move(breaks)), n_(nodes_per_segment) {
    if (breaks_.size() < 2 || n_ < 2) throw DomainError("PiecewiseChebyshev: bad layout");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1])) throw DomainError("PiecewiseChebyshev: breaks not increasing");
    const int m = n_ - 1;
    unit_nodes_.resize(n_);
    weights_.resize(n_);
    for (int j = 0; j < n_; ++j) {
        unit_nodes_[j] = -std::cos(std::numbers::pi * j / m);
        weights_[j] = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == m) ? 0.5 : 1.0);
    }
    const std::size_t segs = breaks_.size() - 1;
    values_.resize(segs * n_);
    for (std::size_t s = 0; s < segs; ++s) {
        const double a = breaks_[s], b = breaks_[s + 1];
        for (int j = 0; j < n_; ++j) {
            double x = 0.5 * (a + b) + 0.5 * (b - a) * unit_nodes_[j];
            if (j == 0) x = a;
            if (j == m) x = b;
            values_[s * n_ + j] = f(x);
        }
    }
}

double PiecewiseChebyshev::operator()(double x) const {
    if (breaks_.empty()) throw DomainError("PiecewiseChebyshev: empty table");
    x = std::clamp(x, breaks_.front(), breaks_.back());
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t s = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (s >= breaks_.size() - 1) s = breaks_.size() - 2;
    const double a = breaks_[s], b = breaks_[s + 1];
    const double u = (2.0 * x - a - b) / (b - a);
    const double* v = &values_[s * n_];
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n_; ++j) {
        const double d = u - unit_nodes_[j];
        if (d == 0.0) return v[j];
        const double w = weights_[j] / d;
        num += w * v[j];
        den += w;
    }
    return num / den;
}

}  // namespace levydam
