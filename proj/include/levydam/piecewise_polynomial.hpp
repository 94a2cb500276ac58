#pragma once

#include <vector>

namespace levydam {

/// Piecewise polynomial on [b_0, b_n]; piece i is sum_k c[i][k] (x - b_i)^k.
/// Extended by the end values outside the breakpoint range, so it is bounded
/// on the whole line.
class PiecewisePolynomial {
public:
    PiecewisePolynomial() : PiecewisePolynomial(constant(0.0)) {}
    PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> coefficients);

    static PiecewisePolynomial constant(double c);
    /// Linear interpolation through (xs[i], ys[i]).
    static PiecewisePolynomial piecewise_linear(const std::vector<double>& xs, const std::vector<double>& ys);

    double operator()(double x) const;
    /// Interior breakpoints plus ends, where the function may not be smooth.
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<std::vector<double>>& coefficients() const { return coef_; }
    /// sup |p| (sampled finely on every piece plus the end values).
    double bound() const;
    bool is_zero() const;

private:
    std::vector<double> breaks_;
    std::vector<std::vector<double>> coef_;
};

}  // namespace levydam
