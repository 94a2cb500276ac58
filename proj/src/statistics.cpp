#include "levydam/statistics.hpp"

#include "levydam/errors.hpp"
#include "levydam/numerics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <vector>

namespace levydam {

double SimulationEstimate::z_score(double value) const {
    const double d = std::abs(value - mean);
    if (std_error > 0) return d / std_error;
    return d == 0.0 ? 0.0 : kInf;
}

bool SimulationEstimate::agrees(double value, double k_se) const { return z_score(value) <= k_se; }

namespace {

double mean_of(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

double centered_cross(std::span<const double> a, double ma, std::span<const double> b, double mb) {
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t[i] = (a[i] - ma) * (b[i] - mb);
    return pairwise_sum(t) / static_cast<double>(a.size() - 1);
}

void need(std::size_t n) {
    if (n < 2) throw InsufficientDataError("estimate: need at least 2 completed cycles");
}

}  // namespace

SimulationEstimate estimate_mean(std::span<const double> values, std::string tag) {
    need(values.size());
    const double m = mean_of(values);
    const double var = std::max(0.0, centered_cross(values, m, values, m));
    return {m, std::sqrt(var / static_cast<double>(values.size())), values.size(), std::move(tag)};
}

SimulationEstimate estimate_ratio(std::span<const double> num, std::span<const double> den, std::string tag) {
    if (num.size() != den.size()) throw DomainError("estimate_ratio: size mismatch");
    need(num.size());
    const double mn = mean_of(num), md = mean_of(den);
    if (!(md != 0.0)) throw NumericalError("estimate_ratio: zero denominator mean");
    const double r = mn / md;
    std::vector<double> resid(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) resid[i] = num[i] - r * den[i];
    const double mres = mean_of(resid);
    const double var = std::max(0.0, centered_cross(resid, mres, resid, mres));
    const double se = std::sqrt(var / static_cast<double>(num.size())) / std::abs(md);
    return {r, se, num.size(), std::move(tag)};
}

SimulationEstimate estimate_regenerative(std::span<const double> c, std::span<const double> q, std::string tag) {
    if (c.size() != q.size()) throw DomainError("estimate_regenerative: size mismatch");
    need(c.size());
    const double mc = mean_of(c), mq = mean_of(q);
    const double d = 1.0 - mq;
    if (!(d > 0)) throw NumericalError("estimate_regenerative: mean end transform >= 1");
    const double g1 = 1.0 / d, g2 = mc / (d * d);
    const double vc = centered_cross(c, mc, c, mc), vq = centered_cross(q, mq, q, mq), cv = centered_cross(c, mc, q, mq);
    const double var = std::max(0.0, g1 * g1 * vc + g2 * g2 * vq + 2.0 * g1 * g2 * cv);
    return {mc / d, std::sqrt(var / static_cast<double>(c.size())), c.size(), std::move(tag)};
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

double ks_critical(std::size_t n, double level) {
    double c;
    if (level == 0.01) c = 1.628;
    else if (level == 0.05) c = 1.358;
    else throw DomainError("ks_critical: level must be 0.01 or 0.05");
    const double rn = std::sqrt(static_cast<double>(n));
    return c / (rn + 0.12 + 0.11 / rn);
}

double poisson_chi_square_pvalue(std::span<const long> counts, double mean) {
    if (counts.size() < 2) throw InsufficientDataError("chi-square: need at least 2 observations");
    const double n = static_cast<double>(counts.size());
    boost::math::poisson_distribution<double> pois(mean);
    long kmax = 0;
    for (long c : counts) kmax = std::max(kmax, c);
    std::vector<double> observed(static_cast<std::size_t>(kmax) + 1, 0.0);
    for (long c : counts) observed[static_cast<std::size_t>(c)] += 1.0;

    // Pool from the left until each cell expects >= 5, last cell takes the tail.
    std::vector<double> obs_cells, exp_cells;
    double o = 0.0, e = 0.0;
    for (long k = 0; k <= kmax; ++k) {
        o += observed[static_cast<std::size_t>(k)];
        e += n * boost::math::pdf(pois, static_cast<double>(k));
        if (e >= 5.0) {
            obs_cells.push_back(o);
            exp_cells.push_back(e);
            o = e = 0.0;
        }
    }
    const double tail_e = n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(kmax)));
    o += 0.0;
    e += tail_e;
    if (!exp_cells.empty()) {
        obs_cells.back() += o;
        exp_cells.back() += e;
    } else {
        obs_cells.push_back(o);
        exp_cells.push_back(e);
    }
    if (obs_cells.size() < 2) return 1.0;
    double chi = 0.0;
    for (std::size_t i = 0; i < obs_cells.size(); ++i) chi += (obs_cells[i] - exp_cells[i]) * (obs_cells[i] - exp_cells[i]) / exp_cells[i];
    boost::math::chi_squared_distribution<double> dist(static_cast<double>(obs_cells.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi));
}

}  // namespace levydam
