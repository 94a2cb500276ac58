#pragma once

#include "levydam/cli/config.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace levydam::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kVerificationFailure = 2, kNumericalFailure = 3 };

/// One analytic quantity; value is NaN when undefined (reported as null).
struct Quantity {
    std::string name;
    double alpha = 0.0;
    double value = 0.0;
};

struct Report {
    std::string verb;
    nlohmann::ordered_json summary;
    std::string csv_name;
    std::string csv;
    int exit_code = kOk;
};

/// Analytic quantities of the fixed policy from x (ordered, deterministic).
std::vector<Quantity> analytic_quantities(const RunConfig& cfg, double x);

Report cmd_evaluate(const RunConfig& cfg);
Report cmd_verify(const RunConfig& cfg);
Report cmd_optimize(const RunConfig& cfg);

/// Writes <verb>.csv and summary.json into dir (created if needed).
void write_report(const Report& r, const std::string& dir);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace levydam::cli
