#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace levydam {

using cld = std::complex<long double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Fixed-Talbot inversion of F at t > 0. The contour is laid around
/// Re(s) = shift, so F is sampled at s + shift and the result multiplied back
/// by e^{shift*t}; pass the abscissa of the rightmost singularity as shift.
double talbot_invert(const std::function<cld(cld)>& F, double t, double shift = 0.0,
                     int nodes = 64);

struct QuadratureOptions {
    double rel_tol = 1e-12;
    unsigned max_depth = 15;
};

/// Adaptive Gauss-Kronrod (31 points). Either bound may be infinite.
double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureOptions opts = {});

/// integrate on finite [a,b] after y = a + (b-a) u^2 (3 - 2u), which absorbs
/// integrable power and log singularities at both ends.
double integrate_smoothstep(const std::function<double(double)>& f, double a, double b,
                            QuadratureOptions opts = {});

/// Same as integrate, summed over consecutive pieces [p0,p1], [p1,p2], ...
/// Points outside the span of the first/last entries are ignored; pieces of
/// zero length are skipped.
double integrate_pieces(const std::function<double(double)>& f, std::vector<double> points,
                        QuadratureOptions opts = {});

/// Fixed Gauss-Legendre rule on [a,b] with n in {8, 16, 20}.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n = 16);

/// Sort, drop non-finite and near-duplicate values, clip to [lo,hi] and make
/// sure both ends are present.
std::vector<double> merge_breaks(std::vector<double> pts, double lo, double hi);

/// Bisection on a sign change of f over [lo,hi].
double bisect_root(const std::function<double(double)>& f, double lo, double hi, int steps = 200);

/// Neumaier-compensated sum, order independent up to rounding of the inputs.
double pairwise_sum(std::span<const double> v);

/// Barycentric interpolant on Chebyshev points of the second kind, one
/// polynomial per segment between consecutive breaks.
class PiecewiseChebyshev {
public:
    PiecewiseChebyshev() = default;
    PiecewiseChebyshev(const std::function<double(double)>& f, std::vector<double> breaks,
                       int nodes_per_segment = 24);

    double operator()(double x) const;
    double lower() const { return breaks_.front(); }
    double upper() const { return breaks_.back(); }
    bool empty() const { return breaks_.empty(); }

private:
    std::vector<double> breaks_;
    int n_ = 0;
    std::vector<double> values_;  // segment-major, n_ values each
    std::vector<double> unit_nodes_;
    std::vector<double> weights_;
};

}  // namespace levydam
