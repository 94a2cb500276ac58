#include "levydam/errors.hpp"
#include "levydam/numerics.hpp"
#include "levydam/scale_functions.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fftw3.h>
#include <functional>
#include <memory>
#include <mutex>

namespace levydam {

namespace {

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Causal linear convolution with a fixed kernel: out_i = sum_{j<=i} k_j in_{i-j}
// for i < n, via real FFTs of length >= 2n.
class FftConvolver {
public:
    explicit FftConvolver(const std::vector<double>& kernel) : n_(kernel.size()) {
        m_ = 1;
        while (m_ < 2 * n_) m_ <<= 1;
        const std::size_t nc = m_ / 2 + 1;
        real_ = fftw_alloc_real(m_);
        spec_ = fftw_alloc_complex(nc);
        kspec_.resize(nc);
        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(m_), real_, spec_, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(m_), spec_, real_, FFTW_ESTIMATE);
        }
        load(kernel);
        fftw_execute(fwd_);
        for (std::size_t i = 0; i < nc; ++i) kspec_[i] = {spec_[i][0], spec_[i][1]};
    }
    FftConvolver(const FftConvolver&) = delete;
    FftConvolver& operator=(const FftConvolver&) = delete;
    ~FftConvolver() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    void apply(const std::vector<double>& in, std::vector<double>& out) {
        load(in);
        fftw_execute(fwd_);
        for (std::size_t i = 0; i < kspec_.size(); ++i) {
            const std::complex<double> v = std::complex<double>(spec_[i][0], spec_[i][1]) * kspec_[i];
            spec_[i][0] = v.real();
            spec_[i][1] = v.imag();
        }
        fftw_execute(inv_);
        const double scale = 1.0 / static_cast<double>(m_);
        out.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
    }

private:
    void load(const std::vector<double>& v) {
        std::fill(real_, real_ + m_, 0.0);
        std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), n_)), real_);
    }

    std::size_t n_, m_ = 1;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    std::vector<std::complex<double>> kspec_;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

// out_i = sum_{j<i} mass_j * (prev_{i-j} + prev_{i-j-1}) / 2
void stieltjes_step(const std::vector<double>& mass, const std::vector<double>& prev, std::vector<double>& out,
                    bool parallel) {
    const std::size_t n = prev.size();
    const long par = parallel ? 1 : 0;
#pragma omp parallel for schedule(dynamic, 64) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < i; ++j) s += mass[j] * (prev[i - j] + prev[i - j - 1]);
        out[i] = 0.5 * s;
    }
}

// out_i = h * trapezoid sum_j a_{i-j} b_j
void trapezoid_convolve(const std::vector<double>& a, const std::vector<double>& b, double h,
                        std::vector<double>& out, bool parallel) {
    const std::size_t n = a.size();
    const long par = parallel ? 1 : 0;
#pragma omp parallel for schedule(dynamic, 64) if (par)
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            out[0] = 0.0;
            continue;
        }
        double s = 0.5 * (a[i] * b[0] + a[0] * b[i]);
        for (std::size_t j = 1; j < i; ++j) s += a[i - j] * b[j];
        out[i] = h * s;
    }
}

// W = (1/zeta) sum_n rho^n F^(n) on the grid carrying F.
std::vector<double> zero_scale_series(double zeta, double rho, const std::vector<double>& F, double term_tol,
                                      bool parallel, SeriesKernel kernel) {
    const std::size_t npts = F.size();
    std::vector<double> mass(npts, 0.0);
    for (std::size_t j = 0; j + 1 < npts; ++j) mass[j] = F[j + 1] - F[j];
    std::vector<double> w(npts, 1.0 / zeta);
    std::vector<double> term = F, next(npts);
    std::unique_ptr<FftConvolver> fft;
    std::vector<double> q;
    if (kernel == SeriesKernel::Fft) {
        fft = std::make_unique<FftConvolver>(mass);
        q.assign(npts, 0.0);
    }
    double weight = rho / zeta;
    // Certified cap from sup F^(n) <= 1.
    const double cap_terms = rho > 0 ? std::log(term_tol * zeta * (1.0 - rho)) / std::log(rho) : 1.0;
    const std::size_t max_terms = static_cast<std::size_t>(std::max(2.0, std::ceil(cap_terms))) + 1;
    for (std::size_t k = 1; k <= max_terms; ++k) {
        double sup = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            w[i] += weight * term[i];
            sup = std::max(sup, term[i]);
        }
        weight *= rho;
        if (weight * sup < term_tol) break;
        if (fft) {
            for (std::size_t i = 1; i < npts; ++i) q[i] = term[i] + term[i - 1];
            fft->apply(q, next);
            for (auto& v : next) v *= 0.5;
        } else {
            stieltjes_step(mass, term, next, parallel);
        }
        term.swap(next);
    }
    return w;
}

}  // namespace

std::vector<double> series_scale_grid(const LevyModel& model, double alpha, double h, std::size_t n,
                                      double term_tol, bool parallel, SeriesKernel kernel) {
    if (!model.bounded_variation()) throw DomainError("series_scale_grid: bounded-variation model required");
    const double rho = model.rho();
    if (!(rho < 1.0)) throw DomainError("series_scale_grid: rho must be < 1");
    std::vector<double> F(n + 1);
    for (std::size_t i = 0; i <= n; ++i) F[i] = model.integrated_tail_cdf(static_cast<double>(i) * h);
    const auto w = zero_scale_series(model.zeta(), rho, F, term_tol, parallel, kernel);
    const std::size_t npts = n + 1;
    if (alpha == 0.0) return w;

    // W^alpha = sum_k alpha^k W^{*(k+1)}.
    std::vector<double> wa = w, conv = w, out(npts);
    std::unique_ptr<FftConvolver> fft;
    if (kernel == SeriesKernel::Fft) fft = std::make_unique<FftConvolver>(w);
    double ak = 1.0;
    for (int k = 1; k < 100000; ++k) {
        if (fft) {
            fft->apply(conv, out);
            out[0] = 0.0;
            for (std::size_t i = 1; i < npts; ++i) out[i] = h * (out[i] - 0.5 * (conv[i] * w[0] + conv[0] * w[i]));
        } else {
            trapezoid_convolve(conv, w, h, out, parallel);
        }
        conv.swap(out);
        ak *= alpha;
        double sup = 0.0, supw = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            wa[i] += ak * conv[i];
            sup = std::max(sup, ak * conv[i]);
            supw = std::max(supw, wa[i]);
        }
        if (!std::isfinite(sup)) throw NumericalError("series_scale_grid: series overflow");
        if (sup < term_tol * supw) return wa;
    }
    throw ConvergenceError("series_scale_grid: alpha series did not converge");
}

std::vector<double> tilted_series_scale_grid(const LevyModel& model, double alpha, double h, std::size_t n,
                                             double term_tol, bool parallel, SeriesKernel kernel) {
    if (!model.bounded_variation()) throw DomainError("tilted_series_scale_grid: bounded-variation model required");
    const double eta = model.eta(alpha);
    if (!(eta > 0)) throw DomainError("tilted_series_scale_grid: needs eta(alpha) > 0");
    const LevyMeasure& nu = model.measure();
    const auto& knots = nu.breakpoints();
    // Cells are short and the integrands smooth between knots.
    auto piece = [&](const std::function<double(double)>& f, double a, double b) {
        const auto pts = merge_breaks(knots, a, b);
        double v = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (pts[i + 1] > pts[i]) v += gauss_legendre(f, pts[i], pts[i + 1], 16);
        return v;
    };
    auto dens = [&](double u) { return std::exp(-eta * u) * nu.density(u); };
    auto first = [&](double u) { return u * std::exp(-eta * u) * nu.density(u); };

    // G(x) = int_x^inf e^{-eta u} nu(du), M(x) = int_0^x u e^{-eta u} nu(du);
    // the tilted integrated tail is F(x) = (x G(x) + M(x)) / mu_eta.
    const double xn = static_cast<double>(n) * h;
    double top = xn + 60.0 / eta;
    if (nu.is_tabulated()) top = std::min(top, knots.back());
    const std::size_t npts = n + 1;
    std::vector<double> G(npts, 0.0), M(npts, 0.0);
    const QuadratureOptions q{1e-12, 15};
    G[n] = top > xn ? integrate_pieces(dens, merge_breaks(knots, xn, top), q) : 0.0;
    const double m_tail = top > xn ? integrate_pieces(first, merge_breaks(knots, xn, top), q) : 0.0;
    for (std::size_t i = n; i-- > 1;) G[i] = G[i + 1] + piece(dens, static_cast<double>(i) * h, static_cast<double>(i + 1) * h);
    for (std::size_t i = 1; i <= n; ++i)
        M[i] = M[i - 1] + piece(first, static_cast<double>(i - 1) * h, static_cast<double>(i) * h);
    const double mu = M[n] + m_tail;
    const double zeta = model.zeta();
    const double rho = mu / zeta;
    if (!(mu > 0) || !(rho < 1.0)) throw NumericalError("tilted_series_scale_grid: tilted rho not below 1");
    std::vector<double> F(npts, 0.0);
    for (std::size_t i = 1; i <= n; ++i) F[i] = std::min(1.0, (static_cast<double>(i) * h * G[i] + M[i]) / mu);

    auto w = zero_scale_series(zeta, rho, F, term_tol, parallel, kernel);
    for (std::size_t i = 0; i < npts; ++i) w[i] *= std::exp(eta * static_cast<double>(i) * h);
    return w;
}

}  // namespace levydam
