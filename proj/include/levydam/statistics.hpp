#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

namespace levydam {

struct SimulationEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
    std::string quantity_tag;

    /// |value - mean| in standard errors (inf if SE = 0 and they differ).
    double z_score(double value) const;
    bool agrees(double value, double k_se = 3.0) const;
};

/// Sample mean and standard error; needs at least 2 values.
SimulationEstimate estimate_mean(std::span<const double> values, std::string tag);
/// sum(num)/sum(den) with delta-method standard error.
SimulationEstimate estimate_ratio(std::span<const double> num, std::span<const double> den, std::string tag);
/// mean(c) / (1 - mean(q)): total discounted cost from i.i.d. cycles with
/// discounted cost c_i and end transform q_i = e^{-alpha T_i}.
SimulationEstimate estimate_regenerative(std::span<const double> c, std::span<const double> q, std::string tag);

/// Kolmogorov-Smirnov distance of the sample against a continuous CDF.
/// Sorts a copy.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
/// Asymptotic critical value at level 0.01 (or 0.05), with the usual
/// small-sample correction.
double ks_critical(std::size_t n, double level = 0.01);

/// Pearson chi-square goodness of fit of integer counts against a Poisson
/// law. Cells with expected count < 5 are pooled. Returns the p-value.
double poisson_chi_square_pvalue(std::span<const long> counts, double mean);

}  // namespace levydam
