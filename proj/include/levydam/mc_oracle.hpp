#pragma once

#include "levydam/policy_costs.hpp"
#include "levydam/statistics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace levydam {

struct PathConfig {
    double time_step = 1e-3;
    std::uint64_t n_paths = 10000;
    std::uint64_t seed = 1;
    double horizon = 1e5;
    /// Kept for config compatibility; gamma and IG increments are sampled
    /// exactly on the grid, so no jumps are truncated.
    double small_jump_cutoff = 0.0;

    void validate() const;
};

/// SplitMix64 keyed by (seed, stream). Each stream is a fixed sequence,
/// independent of how streams are scheduled across threads.
class StreamRng {
public:
    using result_type = std::uint64_t;
    StreamRng(std::uint64_t seed, std::uint64_t stream);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();
    /// Uniform on the open interval (0, 1).
    double uniform();

private:
    std::uint64_t state_;
};

enum class Execution { Serial, Parallel };

/// Raw input path on [0, t_end]. Compound-Poisson parts are recorded as exact
/// events; grid values hold L at k * time_step (and t_end), including all
/// jumps up to that time.
struct InputPath {
    std::vector<double> jump_times;
    std::vector<double> jump_sizes;
    std::vector<double> grid_times;
    std::vector<double> grid_values;

    double value_at_end() const { return grid_values.empty() ? 0.0 : grid_values.back(); }
};

InputPath simulate_input_path(const LevyModel& model, const PathConfig& config, double t_end,
                              std::uint64_t path_index);

/// One phase of the content process. Costs are integrated from the phase
/// start, one entry per discount rate; cost0 is the undiscounted integral.
struct PhaseRecord {
    double duration = 0.0;
    double end_level = 0.0;   // content at the exit time (before any cap)
    double overshoot = 0.0;   // end_level - lambda for the fill phase
    bool completed = false;
    std::vector<double> discounted_cost;
    double cost0 = 0.0;
};

/// Fill phase from x < lambda until the content first reaches lambda.
PhaseRecord simulate_fill_phase(const LevyModel& model, InputMode mode, double x, double lambda,
                                const PiecewisePolynomial& g, std::span<const double> alphas,
                                const PathConfig& config, StreamRng& rng);
/// Release phase from x > tau: input minus M, reflected at V (V may be inf),
/// until the content falls to tau.
PhaseRecord simulate_release_phase(const LevyModel& model, double M, double x, double tau, double V,
                                   const PiecewisePolynomial& g_star, std::span<const double> alphas,
                                   const PathConfig& config, StreamRng& rng);

struct CycleRecord {
    std::uint64_t index = 0;
    double fill_time = 0.0;
    double release_time = 0.0;
    double overshoot = 0.0;
    bool completed = false;
    std::vector<double> discounted_cost;  // per alpha
    std::vector<double> end_transform;    // e^{-alpha T*} per alpha
    std::vector<double> fill_transform;   // e^{-alpha T-hat} per alpha
    double undiscounted_cost = 0.0;
    double output_volume = 0.0;

    double length() const { return fill_time + release_time; }
};

struct CycleBatch {
    std::vector<double> alphas;
    double start = 0.0;
    std::vector<CycleRecord> cycles;

    std::size_t completed() const;
    std::size_t partial() const { return cycles.size() - completed(); }
};

/// n_paths independent cycles from `start`, cycle i driven by stream i.
CycleBatch run_policy_cycles(const LevyModel& model, const PolicyParams& policy, const CostSpec& costs,
                             const PathConfig& config, InputMode mode, std::vector<double> alphas, double start,
                             Execution exec = Execution::Parallel);

/// Tags: fill_time, release_time, cycle_length, overshoot, undiscounted_cost,
/// output_volume, discounted_cost, fill_transform, end_transform,
/// long_run_average (ratio), total_discounted (regenerative; the batch must
/// start at tau). alpha_index selects the discount rate where relevant.
/// Only completed cycles enter.
SimulationEstimate estimate(const std::string& quantity_tag, const CycleBatch& batch, std::size_t alpha_index = 0);

/// One JSON object per line per cycle.
void write_cycle_records(const std::string& path, const CycleBatch& batch);

/// Michael-Schucany-Haas inverse Gaussian sampler, cancellation-free form.
double sample_inverse_gaussian(double mean, double shape, StreamRng& rng);

}  // namespace levydam
