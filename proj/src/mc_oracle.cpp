#include "levydam/mc_oracle.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include "json.hpp"
#include <random>

namespace levydam {

void PathConfig::validate() const {
    if (!(time_step > 0) || !std::isfinite(time_step)) throw DomainError("path config: time_step must be > 0");
    if (n_paths < 1) throw DomainError("path config: n_paths must be >= 1");
    if (!(horizon > 0)) throw DomainError("path config: horizon must be > 0");
    if (!(small_jump_cutoff >= 0)) throw DomainError("path config: small_jump_cutoff must be >= 0");
}

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t a = seed;
    std::uint64_t b = stream ^ 0xd1b54a32d192ed03ULL;
    state_ = splitmix(a) ^ (splitmix(b) * 0xff51afd7ed558ccdULL);
}

StreamRng::result_type StreamRng::operator()() { return splitmix(state_); }

double StreamRng::uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

double sample_inverse_gaussian(double mean, double shape, StreamRng& rng) {
    std::normal_distribution<double> nd;
    const double n = nd(rng);
    const double y = n * n;
    const double my = mean * y;
    const double x = mean - 2.0 * mean * my / (my + std::sqrt(4.0 * mean * shape * y + my * my));
    if (rng.uniform() <= mean / (mean + x)) return x;
    return mean * mean / x;
}

namespace {

// Accumulates int e^{-alpha t} g(z(t)) dt for every alpha along a path.
class CostAccumulator {
public:
    CostAccumulator(const PiecewisePolynomial& g, std::span<const double> alphas)
        : g_(g), alphas_(alphas), zero_(g.is_zero()), breaks_(g.breakpoints()), disc_(alphas.size(), 0.0) {}

    // z(t) = z0 + slope (t - t0) on [t0, t1].
    void linear(double t0, double t1, double z0, double slope) {
        if (zero_ || !(t1 > t0)) return;
        if (slope == 0.0) {
            constant(t0, t1, z0);
            return;
        }
        cuts_.clear();
        cuts_.push_back(t0);
        const double z1 = z0 + slope * (t1 - t0);
        const double lo = std::min(z0, z1), hi = std::max(z0, z1);
        for (double b : breaks_)
            if (b > lo && b < hi) cuts_.push_back(t0 + (b - z0) / slope);
        cuts_.push_back(t1);
        std::sort(cuts_.begin(), cuts_.end());
        for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
            const double a = cuts_[i], b = cuts_[i + 1];
            const int chunks = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
            const double w = (b - a) / chunks;
            for (int c = 0; c < chunks; ++c) gl_chunk(a + c * w, a + (c + 1) * w, t0, z0, slope);
        }
    }

    void constant(double t0, double t1, double z) {
        if (zero_ || !(t1 > t0)) return;
        const double gz = g_(z);
        cost0_ += gz * (t1 - t0);
        for (std::size_t k = 0; k < alphas_.size(); ++k) {
            const double a = alphas_[k];
            const double len = a == 0.0 ? t1 - t0 : std::exp(-a * t0) * -std::expm1(-a * (t1 - t0)) / a;
            disc_[k] += gz * len;
        }
    }

    void trapezoid(double t0, double t1, double z0, double z1) {
        if (zero_ || !(t1 > t0)) return;
        const double g0 = g_(z0), g1 = g_(z1), h = 0.5 * (t1 - t0);
        cost0_ += h * (g0 + g1);
        for (std::size_t k = 0; k < alphas_.size(); ++k)
            disc_[k] += h * (std::exp(-alphas_[k] * t0) * g0 + std::exp(-alphas_[k] * t1) * g1);
    }

    void finish(PhaseRecord& r) {
        r.discounted_cost = disc_;
        r.cost0 = cost0_;
    }

private:
    void gl_chunk(double a, double b, double t0, double z0, double slope) {
        static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                        0.9602898564975363};
        static constexpr double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                        0.1012285362903763};
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < 4; ++i)
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const double t = c + sgn * h * x[i];
                const double gz = g_(z0 + slope * (t - t0)) * h * w[i];
                cost0_ += gz;
                for (std::size_t k = 0; k < alphas_.size(); ++k) disc_[k] += gz * std::exp(-alphas_[k] * t);
            }
    }

    const PiecewisePolynomial& g_;
    std::span<const double> alphas_;
    bool zero_;
    std::vector<double> breaks_;
    std::vector<double> disc_;
    std::vector<double> cuts_;
    double cost0_ = 0.0;
};

// Jump source for bounded-variation models: either exact compound-Poisson
// events or exact increments on the time grid.
class JumpSource {
public:
    JumpSource(const LevyModel& m, double dt) : m_(m), dt_(dt) {
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, LevyModel::CompoundPoisson>) {
                    rate_ = p.rate;
                    jumps_ = p.jumps;
                    kind_ = Kind::CP;
                } else if constexpr (std::is_same_v<P, LevyModel::Gamma>) {
                    a_ = p.a;
                    b_ = p.b;
                    kind_ = Kind::Gamma;
                } else if constexpr (std::is_same_v<P, LevyModel::InverseGaussian>) {
                    a_ = dt / p.c;
                    b_ = dt * dt / (p.sigma * p.sigma);
                    kind_ = Kind::IG;
                } else if constexpr (std::is_same_v<P, LevyModel::Generic>) {
                    rate_ = m.measure().total_mass();
                    if (!std::isfinite(rate_) || !m.measure().is_tabulated())
                        throw DomainError("simulation: generic measure must be tabulated with finite mass");
                    kind_ = Kind::Tabulated;
                } else {
                    throw DomainError("simulation: Brownian input has no jump source");
                }
            },
            m.params());
    }

    // Waiting time to the next event and the jump size there.
    std::pair<double, double> next(StreamRng& rng) const {
        switch (kind_) {
        case Kind::CP: {
            const double w = -std::log(rng.uniform()) / rate_;
            double j;
            if (jumps_.family == JumpDistribution::Family::Exponential) {
                j = -std::log(rng.uniform()) / jumps_.rate;
            } else {
                std::gamma_distribution<double> gd(jumps_.shape, 1.0 / jumps_.rate);
                j = gd(rng);
            }
            return {w, j};
        }
        case Kind::Tabulated:
            return {-std::log(rng.uniform()) / rate_, m_.measure().sample_jump(rng.uniform())};
        case Kind::Gamma: {
            std::gamma_distribution<double> gd(a_ * dt_, 1.0 / b_);
            return {dt_, gd(rng)};
        }
        case Kind::IG:
            return {dt_, sample_inverse_gaussian(a_, b_, rng)};
        }
        return {dt_, 0.0};
    }

private:
    enum class Kind { CP, Tabulated, Gamma, IG };
    const LevyModel& m_;
    double dt_;
    Kind kind_ = Kind::CP;
    double rate_ = 0.0, a_ = 0.0, b_ = 0.0;
    JumpDistribution jumps_{};
};

double bridge_min(double b, double var, StreamRng& rng) {
    return 0.5 * (b - std::sqrt(b * b - 2.0 * var * std::log(rng.uniform())));
}

double bridge_max(double b, double var, StreamRng& rng) {
    return 0.5 * (b + std::sqrt(b * b - 2.0 * var * std::log(rng.uniform())));
}

// Probability that a Brownian bridge from a to b (both on the same side of
// the level) touches the level within a step of variance var.
double bridge_cross(double a, double b, double level, double var) {
    const double e = 2.0 * (level - a) * (level - b) / var;
    return e > 50.0 ? 0.0 : std::exp(-e);
}

PhaseRecord fill_brownian(const LevyModel& m, InputMode mode, double x, double lambda, CostAccumulator& acc,
                          const PathConfig& cfg, StreamRng& rng) {
    std::normal_distribution<double> nd;
    const double dt = cfg.time_step, var = m.sigma2() * dt, sd = std::sqrt(var), mu = m.drift() * dt;
    const bool refl = mode == InputMode::Reflected;
    PhaseRecord r;
    double t = 0.0, z = x;
    while (t < cfg.horizon) {
        const double dx = mu + sd * nd(rng);
        double z1 = z + dx;
        if (refl) z1 = std::max(z1, dx - bridge_min(dx, var, rng));
        if (z1 >= lambda) {
            const double f = (lambda - z) / (z1 - z);
            acc.trapezoid(t, t + f * dt, z, lambda);
            r.duration = t + f * dt;
            r.completed = true;
            break;
        }
        if (rng.uniform() < bridge_cross(z, z1, lambda, var)) {
            acc.trapezoid(t, t + 0.5 * dt, z, lambda);
            r.duration = t + 0.5 * dt;
            r.completed = true;
            break;
        }
        acc.trapezoid(t, t + dt, z, z1);
        t += dt;
        z = z1;
    }
    if (!r.completed) r.duration = t;
    r.end_level = r.completed ? lambda : z;
    return r;
}

PhaseRecord release_brownian(const LevyModel& m, double M, double x, double tau, double V, CostAccumulator& acc,
                             const PathConfig& cfg, StreamRng& rng) {
    std::normal_distribution<double> nd;
    const double dt = cfg.time_step, var = m.sigma2() * dt, sd = std::sqrt(var), mu = (m.drift() - M) * dt;
    const bool capped = std::isfinite(V);
    PhaseRecord r;
    double t = 0.0, z = x;
    while (t < cfg.horizon) {
        const double dx = mu + sd * nd(rng);
        double z1 = z + dx;
        if (capped) z1 = std::min({z1, V - (bridge_max(dx, var, rng) - dx), V});
        if (z1 <= tau) {
            const double f = (z - tau) / (z - z1);
            acc.trapezoid(t, t + f * dt, z, tau);
            r.duration = t + f * dt;
            r.completed = true;
            break;
        }
        if (rng.uniform() < bridge_cross(z, z1, tau, var)) {
            acc.trapezoid(t, t + 0.5 * dt, z, tau);
            r.duration = t + 0.5 * dt;
            r.completed = true;
            break;
        }
        acc.trapezoid(t, t + dt, z, z1);
        t += dt;
        z = z1;
    }
    if (!r.completed) r.duration = t;
    r.end_level = r.completed ? tau : z;
    return r;
}

PhaseRecord fill_jumps(const LevyModel& m, InputMode mode, double x, double lambda, CostAccumulator& acc,
                       const PathConfig& cfg, StreamRng& rng) {
    const JumpSource src(m, cfg.time_step);
    const double zeta = m.zeta();
    const bool refl = mode == InputMode::Reflected;
    PhaseRecord r;
    double t = 0.0, z = x;
    while (t < cfg.horizon) {
        const auto [w, j] = src.next(rng);
        double zm = z - zeta * w;
        if (refl && zm < 0.0) {
            const double s0 = z / zeta;
            acc.linear(t, t + s0, z, -zeta);
            acc.constant(t + s0, t + w, 0.0);
            zm = 0.0;
        } else {
            acc.linear(t, t + w, z, -zeta);
        }
        t += w;
        z = zm + j;
        if (z >= lambda) {
            r.duration = t;
            r.completed = true;
            break;
        }
    }
    if (!r.completed) r.duration = t;
    r.end_level = z;
    r.overshoot = z - lambda;
    return r;
}

PhaseRecord release_jumps(const LevyModel& m, double M, double x, double tau, double V, CostAccumulator& acc,
                          const PathConfig& cfg, StreamRng& rng) {
    const JumpSource src(m, cfg.time_step);
    const double rate = m.zeta() + M;
    PhaseRecord r;
    double t = 0.0, z = x;
    while (t < cfg.horizon) {
        const auto [w, j] = src.next(rng);
        const double hit = (z - tau) / rate;
        if (w >= hit) {
            acc.linear(t, t + hit, z, -rate);
            r.duration = t + hit;
            r.completed = true;
            break;
        }
        acc.linear(t, t + w, z, -rate);
        t += w;
        z = std::min(z - rate * w + j, V);
    }
    if (!r.completed) r.duration = t;
    r.end_level = r.completed ? tau : z;
    return r;
}

}  // namespace

PhaseRecord simulate_fill_phase(const LevyModel& model, InputMode mode, double x, double lambda,
                                const PiecewisePolynomial& g, std::span<const double> alphas,
                                const PathConfig& config, StreamRng& rng) {
    if (!(x < lambda)) throw DomainError("fill phase: need x < lambda");
    if (mode == InputMode::Reflected && x < 0) throw DomainError("fill phase: reflected start must be >= 0");
    CostAccumulator acc(g, alphas);
    PhaseRecord r = model.bounded_variation() ? fill_jumps(model, mode, x, lambda, acc, config, rng)
                                              : fill_brownian(model, mode, x, lambda, acc, config, rng);
    if (!model.bounded_variation()) r.overshoot = 0.0;
    acc.finish(r);
    return r;
}

PhaseRecord simulate_release_phase(const LevyModel& model, double M, double x, double tau, double V,
                                   const PiecewisePolynomial& g_star, std::span<const double> alphas,
                                   const PathConfig& config, StreamRng& rng) {
    if (!(x > tau) || !(x <= V)) throw DomainError("release phase: need tau < x <= V");
    if (!(M > 0)) throw DomainError("release phase: M must be > 0");
    CostAccumulator acc(g_star, alphas);
    PhaseRecord r = model.bounded_variation() ? release_jumps(model, M, x, tau, V, acc, config, rng)
                                              : release_brownian(model, M, x, tau, V, acc, config, rng);
    acc.finish(r);
    return r;
}

InputPath simulate_input_path(const LevyModel& model, const PathConfig& config, double t_end,
                              std::uint64_t path_index) {
    config.validate();
    if (!(t_end >= 0) || t_end > config.horizon) throw DomainError("input path: need 0 <= t_end <= horizon");
    StreamRng rng(config.seed, path_index);
    InputPath p;
    const double dt = config.time_step;
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    p.grid_times.reserve(n + 1);
    for (std::size_t k = 0; k < n; ++k) p.grid_times.push_back(static_cast<double>(k) * dt);
    p.grid_times.push_back(t_end);
    p.grid_values.assign(p.grid_times.size(), 0.0);

    if (!model.bounded_variation()) {
        std::normal_distribution<double> nd;
        for (std::size_t k = 1; k < p.grid_times.size(); ++k) {
            const double h = p.grid_times[k] - p.grid_times[k - 1];
            p.grid_values[k] = p.grid_values[k - 1] + model.drift() * h + std::sqrt(model.sigma2() * h) * nd(rng);
        }
        return p;
    }
    const bool grid_kind = std::holds_alternative<LevyModel::Gamma>(model.params()) ||
                           std::holds_alternative<LevyModel::InverseGaussian>(model.params());
    if (grid_kind) {
        for (std::size_t k = 1; k < p.grid_times.size(); ++k) {
            const double h = p.grid_times[k] - p.grid_times[k - 1];
            const JumpSource src(model, h);
            const double j = src.next(rng).second;
            p.grid_values[k] = p.grid_values[k - 1] - model.zeta() * h + j;
        }
        return p;
    }
    const JumpSource src(model, dt);
    double t = 0.0;
    while (true) {
        const auto [w, j] = src.next(rng);
        t += w;
        if (t > t_end) break;
        p.jump_times.push_back(t);
        p.jump_sizes.push_back(j);
    }
    double cum = 0.0;
    std::size_t e = 0;
    for (std::size_t k = 0; k < p.grid_times.size(); ++k) {
        while (e < p.jump_times.size() && p.jump_times[e] <= p.grid_times[k]) cum += p.jump_sizes[e++];
        p.grid_values[k] = cum - model.zeta() * p.grid_times[k];
    }
    return p;
}

std::size_t CycleBatch::completed() const {
    return static_cast<std::size_t>(std::count_if(cycles.begin(), cycles.end(), [](const CycleRecord& c) { return c.completed; }));
}

namespace {

CycleRecord one_cycle(const LevyModel& model, const PolicyParams& p, const CostSpec& c, const PathConfig& cfg,
                      InputMode mode, std::span<const double> alphas, double start, std::uint64_t index) {
    StreamRng rng(cfg.seed, index);
    CycleRecord rec;
    rec.index = index;
    const std::size_t na = alphas.size();
    rec.discounted_cost.assign(na, 0.0);
    rec.end_transform.assign(na, 1.0);
    rec.fill_transform.assign(na, 1.0);
    const double M = p.M;

    double release_from = start;
    double k2 = start <= p.lambda ? M * c.K2 : 0.0;
    if (start < p.lambda) {
        const PhaseRecord f = simulate_fill_phase(model, mode, start, p.lambda, c.g, alphas, cfg, rng);
        rec.fill_time = f.duration;
        rec.overshoot = f.overshoot;
        if (!f.completed) return rec;
        release_from = std::min(f.end_level, p.V);
        for (std::size_t k = 0; k < na; ++k) {
            rec.fill_transform[k] = std::exp(-alphas[k] * f.duration);
            rec.discounted_cost[k] = f.discounted_cost[k];
        }
        rec.undiscounted_cost = f.cost0;
    }
    const PhaseRecord r = simulate_release_phase(model, M, release_from, p.tau, p.V, c.g_star, alphas, cfg, rng);
    rec.release_time = r.duration;
    if (!r.completed) return rec;
    rec.completed = true;
    rec.output_volume = M * r.duration;
    for (std::size_t k = 0; k < na; ++k) {
        const double a = alphas[k];
        const double len = a == 0.0 ? r.duration : -std::expm1(-a * r.duration) / a;
        const double q = rec.fill_transform[k];
        rec.discounted_cost[k] += k2 + M * c.K1 * q + q * (r.discounted_cost[k] - c.R * M * len);
        rec.end_transform[k] = q * std::exp(-a * r.duration);
    }
    rec.undiscounted_cost += k2 + M * c.K1 + r.cost0 - c.R * rec.output_volume;
    return rec;
}

}  // namespace

CycleBatch run_policy_cycles(const LevyModel& model, const PolicyParams& policy, const CostSpec& costs,
                             const PathConfig& config, InputMode mode, std::vector<double> alphas, double start,
                             Execution exec) {
    config.validate();
    policy.validate();
    costs.validate();
    for (double a : alphas)
        if (!(a >= 0)) throw DomainError("simulation: alphas must be >= 0");
    if (!(start >= 0) && mode == InputMode::Reflected) throw DomainError("simulation: reflected start must be >= 0");
    if (!(start <= policy.V)) throw DomainError("simulation: start must be <= V");

    CycleBatch b;
    b.alphas = std::move(alphas);
    b.start = start;
    b.cycles.resize(config.n_paths);
    const auto n = static_cast<std::int64_t>(config.n_paths);
    const std::span<const double> al(b.alphas);
    const bool par = exec == Execution::Parallel;
    if (model.bounded_variation()) JumpSource probe(model, config.time_step);  // rejects unsupported measures
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64) if (par)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            b.cycles[static_cast<std::size_t>(i)] =
                one_cycle(model, policy, costs, config, mode, al, start, static_cast<std::uint64_t>(i));
        } catch (...) {
#pragma omp critical(levydam_mc_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return b;
}

SimulationEstimate estimate(const std::string& tag, const CycleBatch& batch, std::size_t alpha_index) {
    const bool per_alpha = tag == "discounted_cost" || tag == "end_transform" || tag == "fill_transform" ||
                           tag == "total_discounted";
    static const char* const known[] = {"fill_time",      "release_time",      "cycle_length",   "overshoot",
                                        "undiscounted_cost", "output_volume", "discounted_cost", "end_transform",
                                        "fill_transform", "long_run_average", "total_discounted"};
    if (std::find(std::begin(known), std::end(known), tag) == std::end(known))
        throw DomainError("estimate: unknown quantity tag '" + tag + "'");
    if (per_alpha && alpha_index >= batch.alphas.size()) throw DomainError("estimate: alpha index out of range");
    std::vector<double> a, b;
    a.reserve(batch.cycles.size());
    for (const CycleRecord& c : batch.cycles) {
        if (!c.completed) continue;
        if (tag == "fill_time") a.push_back(c.fill_time);
        else if (tag == "release_time") a.push_back(c.release_time);
        else if (tag == "cycle_length") a.push_back(c.length());
        else if (tag == "overshoot") a.push_back(c.overshoot);
        else if (tag == "undiscounted_cost") a.push_back(c.undiscounted_cost);
        else if (tag == "output_volume") a.push_back(c.output_volume);
        else if (tag == "discounted_cost") a.push_back(c.discounted_cost[alpha_index]);
        else if (tag == "end_transform") a.push_back(c.end_transform[alpha_index]);
        else if (tag == "fill_transform") a.push_back(c.fill_transform[alpha_index]);
        else if (tag == "long_run_average") {
            a.push_back(c.undiscounted_cost);
            b.push_back(c.length());
        } else if (tag == "total_discounted") {
            a.push_back(c.discounted_cost[alpha_index]);
            b.push_back(c.end_transform[alpha_index]);
        } else {
            throw DomainError("estimate: unknown quantity tag '" + tag + "'");
        }
    }
    if (tag == "long_run_average") return estimate_ratio(a, b, tag);
    if (tag == "total_discounted") return estimate_regenerative(a, b, tag);
    return estimate_mean(a, tag);
}

void write_cycle_records(const std::string& path, const CycleBatch& batch) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open cycle dump '" + path + "'");
    for (const CycleRecord& c : batch.cycles) {
        nlohmann::ordered_json j;
        j["index"] = c.index;
        j["completed"] = c.completed;
        j["fill_time"] = c.fill_time;
        j["release_time"] = c.release_time;
        j["overshoot"] = c.overshoot;
        j["undiscounted_cost"] = c.undiscounted_cost;
        j["output_volume"] = c.output_volume;
        j["alphas"] = batch.alphas;
        j["discounted_cost"] = c.discounted_cost;
        j["end_transform"] = c.end_transform;
        out << j.dump() << '\n';
    }
}

}  // namespace levydam
