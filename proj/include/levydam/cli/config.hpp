#pragma once

#include "levydam/mc_oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levydam::cli {

/// Either a single value or an inclusive linear range with `steps` points.
struct Axis {
    std::vector<double> values;
    bool swept() const { return values.size() > 1 || range; }
    bool range = false;
    double lo = 0.0, hi = 0.0;
};

struct VerificationSpec {
    bool present = false;
    PathConfig paths;
    double k_se = 3.0;
    std::string dump;  // per-cycle JSONL, empty for none
    std::string perturb_quantity;  // test hook: shifts one analytic value
    double perturb_delta = 0.0;
};

struct OptimizeSpec {
    std::string objective = "long_run_average";  // or "discounted"
    double alpha = 0.0;                           // for "discounted"
    int refine_rounds = 2;
};

struct RunConfig {
    int schema_version = 1;
    LevyModel model = LevyModel::brownian(1.0, 1.0);
    InputMode mode = InputMode::Reflected;
    Axis lambda, tau;
    double M = 1.0;
    double V = kInf;
    CostSpec costs;
    std::vector<double> alphas;
    std::optional<double> start;
    ScaleOptions numerics;
    VerificationSpec verification;
    OptimizeSpec optimize;
    std::string out_dir = "out";

    bool fixed_policy() const { return !lambda.swept() && !tau.swept(); }
    PolicyParams policy() const;  // requires a fixed policy
};

inline constexpr int kSchemaVersion = 1;

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace levydam::cli
