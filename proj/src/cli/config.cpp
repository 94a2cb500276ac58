#include "levydam/cli/config.hpp"

#include "levydam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace levydam::cli {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw ConfigError(msg, line_of(n)); }

void check_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) fail(n, where + ": expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) fail(kv.first, where + ": unknown key '" + key + "'");
    }
}

YAML::Node need(const YAML::Node& parent, const char* key, const std::string& where) {
    YAML::Node n = parent[key];
    if (!n) fail(parent, where + ": missing required key '" + key + "'");
    return n;
}

double num(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected a number");
    const auto s = n.as<std::string>();
    if (s == "inf" || s == ".inf" || s == "infinity") return kInf;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(n, what + ": expected a number, got '" + s + "'");
    }
}

double num_key(const YAML::Node& parent, const char* key, const std::string& where) {
    return num(need(parent, key, where), where + "." + key);
}

double num_or(const YAML::Node& parent, const char* key, double dflt, const std::string& where) {
    const YAML::Node n = parent[key];
    return n ? num(n, where + "." + key) : dflt;
}

std::string str(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected a string");
    return n.as<std::string>();
}

std::uint64_t uint_of(const YAML::Node& n, const std::string& what) {
    const double v = num(n, what);
    if (!(v >= 0) || v != std::floor(v) || v > 1.8e19) fail(n, what + ": expected a non-negative integer");
    try {
        return n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
        return static_cast<std::uint64_t>(v);
    }
}

std::vector<double> num_list(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + ": expected a list of numbers");
    std::vector<double> v;
    for (const auto& e : n) v.push_back(num(e, what));
    return v;
}

Axis axis(const YAML::Node& n, const std::string& what) {
    Axis a;
    if (n.IsScalar()) {
        a.values = {num(n, what)};
    } else if (n.IsSequence()) {
        a.values = num_list(n, what);
        if (a.values.empty()) fail(n, what + ": empty list");
        std::sort(a.values.begin(), a.values.end());
    } else {
        check_keys(n, what, {"from", "to", "steps"});
        const double lo = num_key(n, "from", what), hi = num_key(n, "to", what);
        const double steps = num_key(n, "steps", what);
        if (!(hi >= lo)) fail(n, what + ": need from <= to");
        if (!(steps >= 1) || steps != std::floor(steps)) fail(n, what + ": steps must be a positive integer");
        const int k = static_cast<int>(steps);
        for (int i = 0; i < k; ++i) a.values.push_back(k == 1 ? lo : lo + (hi - lo) * i / (k - 1));
        a.range = true;
        a.lo = lo;
        a.hi = hi;
    }
    if (!a.range) {
        a.lo = a.values.front();
        a.hi = a.values.back();
    }
    return a;
}

PiecewisePolynomial rate_fn(const YAML::Node& n, const std::string& what) {
    if (n.IsScalar()) return PiecewisePolynomial::constant(num(n, what));
    check_keys(n, what, {"x", "y"});
    auto xs = num_list(need(n, "x", what), what + ".x");
    auto ys = num_list(need(n, "y", what), what + ".y");
    if (xs.size() != ys.size() || xs.empty()) fail(n, what + ": x and y must be non-empty and of equal length");
    try {
        return PiecewisePolynomial::piecewise_linear(std::move(xs), std::move(ys));
    } catch (const DomainError& e) {
        fail(n, what + ": " + e.what());
    }
}

LevyModel model_of(const YAML::Node& n) {
    const std::string w = "model";
    if (!n.IsMap()) fail(n, "model: expected a mapping");
    const std::string kind = str(need(n, "kind", w), "model.kind");
    try {
        if (kind == "brownian") {
            check_keys(n, w, {"kind", "drift", "sigma2"});
            return LevyModel::brownian(num_key(n, "drift", w), num_key(n, "sigma2", w));
        }
        if (kind == "compound_poisson") {
            check_keys(n, w, {"kind", "zeta", "rate", "jumps"});
            const YAML::Node j = need(n, "jumps", w);
            check_keys(j, "model.jumps", {"family", "rate", "shape"});
            const std::string fam = str(need(j, "family", "model.jumps"), "model.jumps.family");
            JumpDistribution d;
            if (fam == "exponential") {
                if (j["shape"]) fail(j["shape"], "model.jumps: exponential takes no shape");
                d = JumpDistribution::exponential(num_key(j, "rate", "model.jumps"));
            } else if (fam == "gamma") {
                d = JumpDistribution::gamma(num_key(j, "shape", "model.jumps"), num_key(j, "rate", "model.jumps"));
            } else {
                fail(j["family"], "model.jumps.family: expected exponential or gamma");
            }
            return LevyModel::compound_poisson(num_key(n, "zeta", w), num_key(n, "rate", w), d);
        }
        if (kind == "gamma") {
            check_keys(n, w, {"kind", "zeta", "a", "b"});
            return LevyModel::gamma(num_key(n, "zeta", w), num_key(n, "a", w), num_key(n, "b", w));
        }
        if (kind == "inverse_gaussian") {
            check_keys(n, w, {"kind", "zeta", "sigma", "c"});
            return LevyModel::inverse_gaussian(num_key(n, "zeta", w), num_key(n, "sigma", w), num_key(n, "c", w));
        }
        if (kind == "generic") {
            check_keys(n, w, {"kind", "zeta", "measure"});
            const YAML::Node m = need(n, "measure", w);
            check_keys(m, "model.measure", {"x", "density"});
            return LevyModel::generic_bounded_variation(
                num_key(n, "zeta", w),
                LevyMeasure::tabulated(num_list(need(m, "x", "model.measure"), "model.measure.x"),
                                       num_list(need(m, "density", "model.measure"), "model.measure.density")));
        }
    } catch (const DomainError& e) {
        fail(n, std::string("model: ") + e.what());
    }
    fail(n["kind"], "model.kind: unknown kind '" + kind + "'");
}

void parse_numerics(const YAML::Node& n, ScaleOptions& o) {
    check_keys(n, "numerics", {"method", "x_max", "grid_step", "talbot_nodes"});
    if (n["method"]) {
        const std::string m = str(n["method"], "numerics.method");
        if (m == "closed_form") o.method = ScaleMethod::ClosedFormBrownian;
        else if (m == "laplace") o.method = ScaleMethod::LaplaceInversion;
        else if (m == "series") o.method = ScaleMethod::ConvolutionSeries;
        else fail(n["method"], "numerics.method: expected closed_form, laplace or series");
    }
    o.x_max = num_or(n, "x_max", o.x_max, "numerics");
    o.grid_step = num_or(n, "grid_step", o.grid_step, "numerics");
    if (n["talbot_nodes"]) o.talbot_nodes = static_cast<int>(uint_of(n["talbot_nodes"], "numerics.talbot_nodes"));
    if (!(o.x_max > 0) || !(o.grid_step > 0) || o.grid_step > o.x_max)
        fail(n, "numerics: need 0 < grid_step <= x_max");
}

void parse_verification(const YAML::Node& n, VerificationSpec& v) {
    check_keys(n, "verification", {"n_paths", "seed", "k_se", "time_step", "horizon", "dump", "test_perturb"});
    v.present = true;
    if (n["n_paths"]) v.paths.n_paths = uint_of(n["n_paths"], "verification.n_paths");
    if (n["seed"]) v.paths.seed = uint_of(n["seed"], "verification.seed");
    v.k_se = num_or(n, "k_se", v.k_se, "verification");
    v.paths.time_step = num_or(n, "time_step", v.paths.time_step, "verification");
    v.paths.horizon = num_or(n, "horizon", v.paths.horizon, "verification");
    if (n["dump"]) v.dump = str(n["dump"], "verification.dump");
    if (n["test_perturb"]) {
        const YAML::Node p = n["test_perturb"];
        check_keys(p, "verification.test_perturb", {"quantity", "delta"});
        v.perturb_quantity = str(need(p, "quantity", "verification.test_perturb"), "test_perturb.quantity");
        v.perturb_delta = num_key(p, "delta", "verification.test_perturb");
    }
    if (!(v.k_se > 0)) fail(n, "verification: k_se must be > 0");
    try {
        v.paths.validate();
    } catch (const DomainError& e) {
        fail(n, std::string("verification: ") + e.what());
    }
}

void parse_optimize(const YAML::Node& n, OptimizeSpec& o) {
    check_keys(n, "optimize", {"objective", "alpha", "refine_rounds"});
    if (n["objective"]) {
        o.objective = str(n["objective"], "optimize.objective");
        if (o.objective != "long_run_average" && o.objective != "discounted")
            fail(n["objective"], "optimize.objective: expected long_run_average or discounted");
    }
    o.alpha = num_or(n, "alpha", o.alpha, "optimize");
    if (n["refine_rounds"]) o.refine_rounds = static_cast<int>(uint_of(n["refine_rounds"], "optimize.refine_rounds"));
    if (o.refine_rounds > 2) fail(n["refine_rounds"], "optimize.refine_rounds: at most 2");
    if (o.objective == "discounted" && !(o.alpha > 0)) fail(n, "optimize: discounted objective needs alpha > 0");
}

}  // namespace

PolicyParams RunConfig::policy() const {
    if (!fixed_policy()) throw ConfigError("policy: a single (lambda, tau) is required here");
    return {lambda.values.front(), tau.values.front(), M, V};
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("YAML syntax: " + e.msg, e.mark.line + 1);
    }
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping", 1);
    check_keys(root, "config",
               {"schema_version", "model", "input", "policy", "costs", "alphas", "start", "numerics",
                "verification", "optimize", "output"});
    RunConfig c;
    const YAML::Node sv = need(root, "schema_version", "config");
    c.schema_version = static_cast<int>(uint_of(sv, "schema_version"));
    if (c.schema_version != kSchemaVersion)
        fail(sv, "schema_version: unsupported version " + std::to_string(c.schema_version));

    c.model = model_of(need(root, "model", "config"));

    if (root["input"]) {
        const std::string in = str(root["input"], "input");
        if (in == "plain") c.mode = InputMode::Plain;
        else if (in == "reflected") c.mode = InputMode::Reflected;
        else fail(root["input"], "input: expected plain or reflected");
    }

    const YAML::Node pol = need(root, "policy", "config");
    check_keys(pol, "policy", {"lambda", "tau", "M", "V"});
    c.lambda = axis(need(pol, "lambda", "policy"), "policy.lambda");
    c.tau = axis(need(pol, "tau", "policy"), "policy.tau");
    c.M = num_key(pol, "M", "policy");
    c.V = num_or(pol, "V", kInf, "policy");
    if (!(c.M > 0)) fail(pol["M"], "policy.M: must be > 0");
    bool any = false;
    for (double l : c.lambda.values)
        for (double t : c.tau.values) any = any || (t >= 0 && t < l && l <= c.V);
    if (!any) fail(pol, "policy: no grid point satisfies 0 <= tau < lambda <= V");
    if (c.fixed_policy()) {
        try {
            c.policy().validate();
        } catch (const DomainError& e) {
            fail(pol, std::string("policy: ") + e.what());
        }
    }

    if (root["costs"]) {
        const YAML::Node cs = root["costs"];
        check_keys(cs, "costs", {"K1", "K2", "R", "g", "g_star"});
        c.costs.K1 = num_or(cs, "K1", 0.0, "costs");
        c.costs.K2 = num_or(cs, "K2", 0.0, "costs");
        c.costs.R = num_or(cs, "R", 0.0, "costs");
        if (cs["g"]) c.costs.g = rate_fn(cs["g"], "costs.g");
        if (cs["g_star"]) c.costs.g_star = rate_fn(cs["g_star"], "costs.g_star");
        try {
            c.costs.validate();
        } catch (const DomainError& e) {
            fail(cs, std::string("costs: ") + e.what());
        }
    }

    if (root["alphas"]) {
        c.alphas = num_list(root["alphas"], "alphas");
        for (double a : c.alphas)
            if (!(a > 0) || !std::isfinite(a)) fail(root["alphas"], "alphas: each discount rate must be > 0");
    }
    if (root["start"]) {
        c.start = num(root["start"], "start");
        if (c.mode == InputMode::Reflected && *c.start < 0) fail(root["start"], "start: must be >= 0 for reflected input");
        if (*c.start > c.V) fail(root["start"], "start: must be <= V");
    }
    if (root["numerics"]) parse_numerics(root["numerics"], c.numerics);
    if (root["verification"]) parse_verification(root["verification"], c.verification);
    if (root["optimize"]) parse_optimize(root["optimize"], c.optimize);
    if (root["output"]) {
        check_keys(root["output"], "output", {"dir"});
        if (root["output"]["dir"]) c.out_dir = str(root["output"]["dir"], "output.dir");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace levydam::cli
