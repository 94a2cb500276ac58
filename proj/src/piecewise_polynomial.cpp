#include "levydam/piecewise_polynomial.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <cmath>

namespace levydam {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> coefficients)
    : breaks_(std::move(breaks)), coef_(std::move(coefficients)) {
    if (breaks_.size() < 2 || coef_.size() + 1 != breaks_.size())
        throw DomainError("PiecewisePolynomial: need n+1 breakpoints for n pieces");
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (!std::isfinite(breaks_[i])) throw DomainError("PiecewisePolynomial: breakpoints must be finite");
        if (i && !(breaks_[i] > breaks_[i - 1])) throw DomainError("PiecewisePolynomial: breakpoints must be sorted");
    }
    for (const auto& c : coef_) {
        if (c.empty()) throw DomainError("PiecewisePolynomial: empty coefficient list");
        for (double v : c)
            if (!std::isfinite(v)) throw DomainError("PiecewisePolynomial: coefficients must be finite");
    }
}

PiecewisePolynomial PiecewisePolynomial::constant(double c) { return PiecewisePolynomial({0.0, 1.0}, {{c}}); }

PiecewisePolynomial PiecewisePolynomial::piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw DomainError("piecewise_linear: need matching points");
    if (xs.size() == 1) return constant(ys[0]);
    std::vector<std::vector<double>> c;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i + 1] > xs[i])) throw DomainError("piecewise_linear: x values must increase");
        c.push_back({ys[i], (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])});
    }
    return PiecewisePolynomial(xs, std::move(c));
}

double PiecewisePolynomial::operator()(double x) const {
    std::size_t i;
    double u;
    if (x <= breaks_.front()) {
        i = 0;
        u = 0.0;
    } else if (x >= breaks_.back()) {
        i = coef_.size() - 1;
        u = breaks_.back() - breaks_[i];
    } else {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
        u = x - breaks_[i];
    }
    const auto& c = coef_[i];
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * u + c[k];
    return v;
}

double PiecewisePolynomial::bound() const {
    double b = 0.0;
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        const double a = breaks_[i], len = breaks_[i + 1] - a;
        for (int k = 0; k <= 256; ++k) b = std::max(b, std::abs((*this)(a + len * k / 256.0)));
    }
    return b;
}

bool PiecewisePolynomial::is_zero() const {
    for (const auto& c : coef_)
        for (double v : c)
            if (v != 0.0) return false;
    return true;
}

}  // namespace levydam
