#include "doctest.h"
#include "levydam/cli/commands.hpp"
#include "levydam/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace levydam;
using namespace levydam::cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(LEVYDAM_SOURCE_DIR) + "/configs/";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("levydam_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "levydam");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -100;
}

const char* kBase = R"(schema_version: 1
model: {kind: brownian, drift: 0.5, sigma2: 1.0}
input: reflected
policy: {lambda: 1.5, tau: 0.5, M: 1.0, V: 3.0}
)";

double value_of(const std::vector<Quantity>& qs, const std::string& name, double alpha) {
    for (const auto& q : qs)
        if (q.name == name && q.alpha == alpha) return q.value;
    FAIL("missing quantity " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("shipped configs parse") {
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        CAPTURE(e.path().string());
        CHECK_NOTHROW(load_config(e.path().string()));
    }
    const auto c = load_config(kConfigs + "cp_optimize.yaml");
    CHECK_FALSE(c.fixed_policy());
    CHECK(c.lambda.values == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK_THROWS_AS(c.policy(), ConfigError);
}

TEST_CASE("schema violations point at the offending line") {
    CHECK(error_line(std::string(kBase) + "costs: {K1: 1, K3: 2}\n") == 5);
    CHECK(error_line(std::string(kBase) + "alphas: [0.5, -1]\n") == 5);
    CHECK(error_line(std::string(kBase) + "verification:\n  n_paths: 10\n  seed: abc\n") == 7);
    CHECK(error_line("schema_version: 2\nmodel: {kind: brownian, drift: 1, sigma2: 1}\n") == 1);
    CHECK(error_line("schema_version: 1\nmodel:\n  kind: levy_stable\n") == 3);
    CHECK(error_line("schema_version: 1\nmodel: {kind: brownian, drift: 1, sigma2: 1}\npolicy: {lambda: 1, tau: 2, M: 1}\n") == 3);
    CHECK(error_line("schema_version: 1\nmodel: {kind: gamma, zeta: 1, a: -2, b: 1}\n") == 2);
    CHECK(error_line("schema_version: 1\nmodel: [1, 2\n") >= 2);
    CHECK(error_line(std::string(kBase) + "optimize: {objective: discounted}\n") == 5);
    try {
        parse_config(std::string(kBase) + "costs: {K1: 1, K3: 2}\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 5: costs: unknown key 'K3'") == 0);
    }
}

TEST_CASE("evaluate: zero costs and the Wiener mean") {
    const auto zero = parse_config(std::string(kBase) + "alphas: [0.5]\n");
    const auto r = cmd_evaluate(zero);
    for (const char* k : {"cycle_cost", "total_discounted_cost", "fill_cost"})
        CHECK(r.summary["results"]["alpha=0.5"][k].get<double>() == 0.0);
    for (const char* k : {"undiscounted_cycle_cost", "long_run_average_cost"})
        CHECK(r.summary["results"]["undiscounted"][k].get<double>() == 0.0);

    auto w = load_config(kConfigs + "wiener_plain.yaml");
    const auto qs = analytic_quantities(w, 0.0);
    CHECK(value_of(qs, "mean_fill_time", 0.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(value_of(qs, "fill_probability", 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    w.start = 0.5;
    CHECK(value_of(analytic_quantities(w, 0.5), "mean_fill_time", 0.0) == doctest::Approx(1.5).epsilon(1e-10));
    // plain input drifting down: undiscounted quantities are left out
    const auto down = parse_config(
        "schema_version: 1\nmodel: {kind: brownian, drift: -1, sigma2: 1}\ninput: plain\n"
        "policy: {lambda: 1, tau: 0, M: 1, V: 2}\nalphas: [1]\n");
    for (const auto& q : analytic_quantities(down, 0.0)) CHECK(q.alpha == 1.0);
}

TEST_CASE("reports are byte-identical across runs") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& d : {a, b}) {
        CHECK(run_cli({"evaluate", "--config", kConfigs + "cp_reflected.yaml", "--out", d.string(), "--quiet"}) == kOk);
        CHECK(run_cli({"verify", "--config", kConfigs + "cp_reflected.yaml", "--out", (d / "v").string(), "--paths",
                       "500", "--quiet"}) == kOk);
    }
    CHECK(slurp(a / "evaluate.csv") == slurp(b / "evaluate.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "v" / "verify.csv") == slurp(b / "v" / "verify.csv"));
    CHECK(slurp(a / "v" / "summary.json") == slurp(b / "v" / "summary.json"));
    CHECK_FALSE(slurp(a / "evaluate.csv").empty());
}

TEST_CASE("verify: outcome is stable across seeds and a corrupted value fails") {
    auto cfg = load_config(kConfigs + "brownian_reflected.yaml");
    cfg.verification.paths.n_paths = 2000;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CAPTURE(seed);
        cfg.verification.paths.seed = seed;
        const auto r = cmd_verify(cfg);
        CHECK(r.summary["status"] == "pass");
        CHECK(r.exit_code == kOk);
        CHECK(r.summary["checks"].size() >= 6);
    }
    cfg.verification.perturb_quantity = "total_discounted_cost";
    cfg.verification.perturb_delta = 0.5;
    const auto bad = cmd_verify(cfg);
    CHECK(bad.summary["status"] == "fail");
    CHECK(bad.exit_code == kVerificationFailure);

    const auto d = scratch("perturb");
    std::string text = slurp(kConfigs + "brownian_reflected.yaml");
    text.replace(text.find("k_se: 3"), 7, "k_se: 3, test_perturb: {quantity: cycle_cost, delta: 1.0}");
    std::ofstream(d / "c.yaml") << text;
    CHECK(run_cli({"verify", "--config", (d / "c.yaml").string(), "--out", d.string(), "--paths", "500", "--quiet"}) ==
          kVerificationFailure);
    const auto verify_out = slurp(d / "summary.json");
    CHECK(verify_out.find("\"status\": \"fail\"") != std::string::npos);
    CHECK(verify_out.find("\"n_paths\": 500") != std::string::npos);
    CHECK(run_cli({"verify", "--config", (d / "c.yaml").string(), "--out", d.string(), "--paths", "500", "--seed",
                   "77", "--quiet"}) == kVerificationFailure);
    CHECK(slurp(d / "summary.json").find("\"seed\": 77") != std::string::npos);
}

TEST_CASE("optimize: tie-break, single point and infeasible grids") {
    // all costs zero: every objective is 0, so the first (lambda, tau) wins
    const auto flat = parse_config(
        "schema_version: 1\nmodel: {kind: brownian, drift: 0.5, sigma2: 1}\n"
        "policy: {lambda: [2.0, 1.0], tau: {from: 0, to: 0.5, steps: 2}, M: 1, V: 3}\n"
        "optimize: {refine_rounds: 0}\n");
    auto r = cmd_optimize(flat);
    CHECK(r.summary["argmin"]["lambda"].get<double>() == 1.0);
    CHECK(r.summary["argmin"]["tau"].get<double>() == 0.0);
    CHECK(r.summary["grid"].size() == 4);

    const auto single = parse_config(
        "schema_version: 1\nmodel: {kind: brownian, drift: 0.5, sigma2: 1}\n"
        "policy: {lambda: 1.5, tau: 0.5, M: 1, V: 3}\ncosts: {K1: 1, g: 1}\n");
    r = cmd_optimize(single);
    CHECK(r.summary["grid"].size() == 1);
    CHECK(r.summary["argmin"]["lambda"].get<double>() == 1.5);
    CHECK(r.summary["argmin"]["tau"].get<double>() == 0.5);

    CHECK_THROWS_AS(parse_config("schema_version: 1\nmodel: {kind: brownian, drift: 0.5, sigma2: 1}\n"
                                 "policy: {lambda: [1, 2], tau: [2, 3], M: 1, V: 3}\n"),
                    ConfigError);
    const auto d = scratch("infeasible");
    std::ofstream(d / "c.yaml") << "schema_version: 1\nmodel: {kind: brownian, drift: 0.5, sigma2: 1}\n"
                                   "policy: {lambda: [1, 2], tau: [2, 3], M: 1, V: 3}\n";
    CHECK(run_cli({"optimize", "--config", (d / "c.yaml").string(), "--out", d.string(), "--quiet"}) == kConfigError);
}

TEST_CASE("optimize: the coarse argmin lies within one cell of the refined one") {
    const auto cfg = load_config(kConfigs + "cp_optimize.yaml");
    const auto r = cmd_optimize(cfg);
    const auto& c = r.summary["coarse_argmin"];
    const auto& f = r.summary["argmin"];
    CHECK(std::abs(c["lambda"].get<double>() - f["lambda"].get<double>()) <= 0.5 + 1e-12);
    CHECK(std::abs(c["tau"].get<double>() - f["tau"].get<double>()) <= 0.25 + 1e-12);
    CHECK(f["objective"].get<double>() <= c["objective"].get<double>());
    for (const auto& g : r.summary["grid"]) CHECK(g["objective"].get<double>() >= f["objective"].get<double>());
}

TEST_CASE("command line: exit codes") {
    CHECK(run_cli({"evaluate"}) == kConfigError);
    CHECK(run_cli({"frobnicate", "--config", "x"}) == kConfigError);
    CHECK(run_cli({"evaluate", "--config", "/nonexistent/levydam.yaml", "--quiet"}) == kConfigError);
    const auto d = scratch("codes");
    std::ofstream(d / "nover.yaml") << kBase;
    CHECK(run_cli({"verify", "--config", (d / "nover.yaml").string(), "--out", d.string(), "--quiet"}) == kConfigError);
    // a Laplace build that cannot meet its own residual check is a numerical failure
    std::ofstream(d / "num.yaml") << "schema_version: 1\n"
                                     "model: {kind: generic, zeta: 1, measure: {x: [0, 0.5, 2], density: [0.2, 1, 0]}}\n"
                                     "policy: {lambda: 1.5, tau: 0.5, M: 1, V: 3}\nalphas: [0.5]\n"
                                     "numerics: {method: laplace}\n";
    CHECK(run_cli({"evaluate", "--config", (d / "num.yaml").string(), "--out", d.string(), "--quiet"}) ==
          kNumericalFailure);
}
