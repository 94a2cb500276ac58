#pragma once

#include "levydam/levy_model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace levydam {

enum class ScaleMethod { ClosedFormBrownian, ConvolutionSeries, LaplaceInversion };

std::string to_string(ScaleMethod m);

/// Convolution kernel for the series: direct O(n^2) sums (OpenMP when
/// parallel) or FFT.
enum class SeriesKernel { Direct, Fft };

struct ScaleOptions {
    /// Unset: closed form for Brownian input, series for generic measures
    /// (tilted when rho >= 1), Laplace inversion otherwise.
    std::optional<ScaleMethod> method;
    /// Tabulation range; Laplace-inversion sets evaluate beyond it directly,
    /// series sets throw.
    double x_max = 20.0;
    double grid_step = 0.01;
    int talbot_nodes = 64;
    /// Laplace tables: geometric nodes (ratio 2^(1/4)) reach down to about
    /// grid_step / 2^levels.
    int near_zero_levels = 30;
    /// Laplace tables are rejected when the transform of the table misses
    /// 1/(phi - alpha) by more than this (relative).
    double laplace_residual_tol = 1e-5;
    /// Series: absolute cutoff on the next term's sup over the grid.
    double series_term_tol = 1e-12;
    /// Series: grid halving stops once successive Richardson values differ by
    /// less than this (relative to sup W).
    double series_refine_tol = 1e-7;
    int series_max_refinements = 3;
    /// Series base step; 0 means 1e-3 * x_max.
    double series_step = 0.0;
    SeriesKernel series_kernel = SeriesKernel::Fft;
    bool parallel = true;
};

/// W^(alpha), Z^(alpha), W-bar^(alpha) = int_0^x W^(alpha) and W'_+ for one
/// model and discount rate. Immutable and cheap to copy.
class ScaleFunctionSet {
public:
    static ScaleFunctionSet build(const LevyModel& model, double alpha, const ScaleOptions& opts = {});

    double w(double x) const;
    double z(double x) const;
    double w_bar(double x) const;
    double w_prime(double x) const;

    double alpha() const;
    double eta() const;
    ScaleMethod method() const;
    const LevyModel& model() const;
    /// Upper end of the cached grid.
    double x_max() const;
    const ScaleOptions& options() const;
    /// Number of cached nodes (0 for closed forms).
    std::size_t grid_size() const;

    struct Impl;

private:
    explicit ScaleFunctionSet(std::shared_ptr<const Impl> p) : impl_(std::move(p)) {}
    std::shared_ptr<const Impl> impl_;
};

/// W^(alpha) on the uniform grid {0, h, ..., n h} from the convolution series,
/// without Richardson extrapolation. Exposed for tests and benchmarks.
std::vector<double> series_scale_grid(const LevyModel& model, double alpha, double h, std::size_t n,
                                      double term_tol, bool parallel, SeriesKernel kernel = SeriesKernel::Fft);

/// Same grid from the series of the measure tilted by e^{-eta x}, eta =
/// eta(alpha) > 0, times e^{eta x}. Needs no condition on rho.
std::vector<double> tilted_series_scale_grid(const LevyModel& model, double alpha, double h, std::size_t n,
                                             double term_tol, bool parallel, SeriesKernel kernel = SeriesKernel::Fft);

/// Direct inversion of 1/(phi(s) - alpha) at x > 0.
double invert_scale(const LevyModel& model, double alpha, double x, int nodes = 64);

}  // namespace levydam
