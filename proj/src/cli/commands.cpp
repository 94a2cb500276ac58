#include "levydam/cli/commands.hpp"

#include "levydam/errors.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace levydam::cli {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    if (v == 0.0) v = 0.0;  // no negative zero in reports
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json jnum(double v) {
    if (!std::isfinite(v)) return nullptr;
    if (v == 0.0) return 0.0;
    return std::stod(fmt(v));
}

double start_of(const RunConfig& cfg, const PolicyParams& p) { return cfg.start.value_or(p.tau); }

bool undiscounted_defined(const RunConfig& cfg) {
    return cfg.mode == InputMode::Reflected || cfg.model.mean_input() > 0;
}

// Scale sets for one discount rate: on the model and on the release model.
struct ScalePair {
    ScaleFunctionSet s, s_M;
};

ScalePair scales(const RunConfig& cfg, double alpha, double x_cover) {
    ScaleOptions o = cfg.numerics;
    o.x_max = std::max(o.x_max, std::ceil(x_cover + 1.0));
    return {ScaleFunctionSet::build(cfg.model, alpha, o), ScaleFunctionSet::build(cfg.model.shifted(cfg.M), alpha, o)};
}

// Quantities that do not need the cost machinery.
void exit_block(std::vector<Quantity>& out, const RunConfig& cfg, const PolicyParams& p, const ScalePair& sp,
                double alpha, double x) {
    const bool refl = cfg.mode == InputMode::Reflected;
    const bool filling = x < p.lambda;
    auto add = [&](const char* n, double v) { out.push_back({n, alpha, v}); };
    if (alpha > 0) {
        add("fill_exit_transform", !filling ? 1.0 : refl ? exit_lt_reflected(sp.s, x, p.lambda) : exit_lt_up(sp.s, x, p.lambda));
        add("release_exit_transform_from_lambda", release_exit_lt(sp.s_M, p.lambda, p.tau, p.V));
        add("cycle_end_transform", x >= p.lambda ? release_exit_lt(sp.s_M, std::min(x, p.V), p.tau, p.V)
                                                 : cycle_end_lt(sp.s, sp.s_M, x, p.lambda, p.tau, p.V, refl));
    } else {
        add("fill_probability", !filling ? 1.0 : refl ? 1.0 : exit_lt_up(sp.s, x, p.lambda));
        double mean_fill = NAN;
        if (!filling) mean_fill = 0.0;
        else if (refl) mean_fill = exit_mean_reflected(sp.s, x, p.lambda);
        else if (cfg.model.mean_input() > 0) mean_fill = exit_mean_up(sp.s, x, p.lambda);
        add("mean_fill_time", mean_fill);
        add("mean_release_time_from_lambda", release_exit_mean(sp.s_M, p.lambda, p.tau, p.V));
    }
    if (filling && cfg.model.has_jumps()) {
        const OvershootLaw law = refl ? overshoot_reflected(sp.s, x, p.lambda) : overshoot_up(sp.s, x, p.lambda);
        add("overshoot_jump_mass", law.jump_mass());
        add("overshoot_atom", law.atom_at_lambda());
        if (alpha == 0.0 && law.total_mass() > 0) {
            const double lam = p.lambda;
            add("mean_overshoot", law.expect([lam](double z) { return z - lam; }, kInf) / law.total_mass());
        }
    }
}

void cost_block(std::vector<Quantity>& out, const RunConfig& cfg, const PolicyParams& p, const ScalePair& sp,
                double alpha, double x) {
    const PolicyEvaluator ev(sp.s, sp.s_M, p, cfg.costs, cfg.mode);
    auto add = [&](const char* n, double v) { out.push_back({n, alpha, v}); };
    if (alpha > 0) {
        add("cycle_discounted_length", ev.cycle_length(x));
        add("fill_cost", x < p.lambda ? ev.fill_cost(x) : 0.0);
        add("cycle_cost", ev.cycle_cost(x));
        add("total_discounted_cost", ev.total_discounted_cost(x));
    } else {
        add("mean_cycle_length", ev.cycle_length(x));
        add("undiscounted_cycle_cost", ev.cycle_cost_any(x));
        add("long_run_average_cost", long_run_average_cost(ev));
    }
}

std::string quantities_csv(const std::vector<Quantity>& qs) {
    std::ostringstream os;
    os << "quantity,alpha,value\n";
    for (const auto& q : qs) os << q.name << ',' << fmt(q.alpha) << ',' << fmt(q.value) << '\n';
    return os.str();
}

json config_echo(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["model"] = cfg.model.describe();
    j["input"] = to_string(cfg.mode);
    j["M"] = jnum(cfg.M);
    j["V"] = jnum(cfg.V);
    json a = json::array();
    for (double v : cfg.alphas) a.push_back(jnum(v));
    j["alphas"] = a;
    return j;
}

}  // namespace

std::vector<Quantity> analytic_quantities(const RunConfig& cfg, double x) {
    const PolicyParams p = cfg.policy();
    const double cover = std::isfinite(p.V) ? p.V : std::max(p.lambda, x);
    std::vector<Quantity> out;
    std::vector<double> alphas{0.0};
    alphas.insert(alphas.end(), cfg.alphas.begin(), cfg.alphas.end());
    for (double a : alphas) {
        if (a == 0.0 && !undiscounted_defined(cfg)) continue;
        const ScalePair sp = scales(cfg, a, cover);
        exit_block(out, cfg, p, sp, a, x);
        if (std::isfinite(p.V)) cost_block(out, cfg, p, sp, a, x);
    }
    return out;
}

Report cmd_evaluate(const RunConfig& cfg) {
    const PolicyParams p = cfg.policy();
    const double x = start_of(cfg, p);
    Report r;
    r.verb = "evaluate";
    const auto qs = analytic_quantities(cfg, x);
    r.csv_name = "evaluate.csv";
    r.csv = quantities_csv(qs);
    json s;
    s["verb"] = "evaluate";
    s["config"] = config_echo(cfg);
    s["policy"] = {{"lambda", jnum(p.lambda)}, {"tau", jnum(p.tau)}, {"M", jnum(p.M)}, {"V", jnum(p.V)}};
    s["start"] = jnum(x);
    json notes = json::array();
    if (!undiscounted_defined(cfg)) notes.push_back("plain input with non-positive mean: undiscounted quantities omitted");
    if (!std::isfinite(p.V)) notes.push_back("infinite capacity: cost functionals omitted");
    s["notes"] = notes;
    json results = json::object();
    for (const auto& q : qs) {
        const std::string key = q.alpha == 0.0 ? "undiscounted" : "alpha=" + fmt(q.alpha);
        results[key][q.name] = jnum(q.value);
    }
    s["results"] = results;
    r.summary = s;
    return r;
}

namespace {

struct Check {
    std::string name;
    double alpha;
    double analytic;
    SimulationEstimate mc;
    bool pass;
};

// Which simulated estimate corresponds to an analytic quantity.
bool mc_tag(const std::string& name, std::string& tag, bool& from_tau) {
    static const std::map<std::string, std::pair<std::string, bool>> m = {
        {"fill_exit_transform", {"fill_transform", false}},
        {"cycle_end_transform", {"end_transform", false}},
        {"cycle_cost", {"discounted_cost", false}},
        {"total_discounted_cost", {"total_discounted", true}},
        {"mean_fill_time", {"fill_time", false}},
        {"mean_overshoot", {"overshoot", false}},
        {"mean_cycle_length", {"cycle_length", false}},
        {"undiscounted_cycle_cost", {"undiscounted_cost", false}},
        {"long_run_average_cost", {"long_run_average", true}},
    };
    const auto it = m.find(name);
    if (it == m.end()) return false;
    tag = it->second.first;
    from_tau = it->second.second;
    return true;
}

}  // namespace

Report cmd_verify(const RunConfig& cfg) {
    if (!cfg.verification.present) throw ConfigError("verify: the config has no verification block");
    const PolicyParams p = cfg.policy();
    const double x = start_of(cfg, p);
    const auto& vs = cfg.verification;
    auto qs = analytic_quantities(cfg, x);
    for (auto& q : qs)
        if (q.name == vs.perturb_quantity) q.value += vs.perturb_delta;

    std::vector<double> alphas = cfg.alphas;
    alphas.push_back(0.0);
    const std::size_t zero_index = alphas.size() - 1;
    auto index_of = [&](double a) {
        return a == 0.0 ? zero_index
                        : static_cast<std::size_t>(std::find(alphas.begin(), alphas.end(), a) - alphas.begin());
    };

    const CycleBatch from_x = run_policy_cycles(cfg.model, p, cfg.costs, vs.paths, cfg.mode, alphas, x);
    std::optional<CycleBatch> from_tau_batch;
    if (x != p.tau) from_tau_batch = run_policy_cycles(cfg.model, p, cfg.costs, vs.paths, cfg.mode, alphas, p.tau);
    const CycleBatch& from_tau = from_tau_batch ? *from_tau_batch : from_x;
    if (!vs.dump.empty()) write_cycle_records(vs.dump, from_x);

    Report r;
    r.verb = "verify";
    json s;
    s["verb"] = "verify";
    s["config"] = config_echo(cfg);
    s["start"] = jnum(x);
    s["n_paths"] = vs.paths.n_paths;
    s["seed"] = vs.paths.seed;
    s["k_se"] = jnum(vs.k_se);
    const std::size_t partial = from_x.partial() + (from_tau_batch ? from_tau_batch->partial() : 0);
    s["partial_cycles"] = partial;

    std::vector<Check> checks;
    for (const auto& q : qs) {
        std::string tag;
        bool use_tau = false;
        if (!mc_tag(q.name, tag, use_tau) || std::isnan(q.value)) continue;
        if (tag == "overshoot" && !cfg.model.has_jumps()) continue;
        const CycleBatch& b = use_tau ? from_tau : from_x;
        SimulationEstimate e;
        try {
            e = estimate(tag, b, index_of(q.alpha));
        } catch (const InsufficientDataError&) {
            continue;
        }
        const bool pass = e.std_error > 0 ? e.z_score(q.value) <= vs.k_se
                                          : std::abs(e.mean - q.value) <= 1e-9 * std::max(1.0, std::abs(q.value));
        checks.push_back({q.name, q.alpha, q.value, e, pass});
    }

    std::ostringstream csv;
    csv << "quantity,alpha,analytic,mc_mean,mc_se,z,pass\n";
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.pass;
        const double z = c.mc.z_score(c.analytic);
        csv << c.name << ',' << fmt(c.alpha) << ',' << fmt(c.analytic) << ',' << fmt(c.mc.mean) << ','
            << fmt(c.mc.std_error) << ',' << fmt(z) << ',' << (c.pass ? "pass" : "fail") << '\n';
        arr.push_back({{"quantity", c.name},
                       {"alpha", jnum(c.alpha)},
                       {"analytic", jnum(c.analytic)},
                       {"mc_mean", jnum(c.mc.mean)},
                       {"mc_se", jnum(c.mc.std_error)},
                       {"n", c.mc.n_effective},
                       {"z", jnum(z)},
                       {"pass", c.pass}});
    }
    s["checks"] = arr;
    std::string status = all ? "pass" : "fail";
    if (partial > 0) status = "partial_cycle_starvation";
    if (checks.empty()) status = "no_checks";
    s["status"] = status;
    r.summary = s;
    r.csv_name = "verify.csv";
    r.csv = csv.str();
    r.exit_code = status == "pass" ? kOk : kVerificationFailure;
    return r;
}

namespace {

struct GridPoint {
    double lambda, tau;
    int round;
    double objective = NAN;
    double long_run_average = NAN;
    double mean_cycle_length = NAN;
    std::vector<double> discounted;  // per alpha
};

double axis_step(const Axis& a) {
    if (a.values.size() < 2) return 0.0;
    double h = kInf;
    for (std::size_t i = 1; i < a.values.size(); ++i) h = std::min(h, a.values[i] - a.values[i - 1]);
    return h;
}

}  // namespace

Report cmd_optimize(const RunConfig& cfg) {
    const auto& os = cfg.optimize;
    const double V = cfg.V;
    if (!std::isfinite(V)) throw ConfigError("optimize: capacity V must be finite");
    const double x0 = cfg.start.value_or(0.0);
    const bool need_lra = os.objective == "long_run_average";
    if (need_lra && !undiscounted_defined(cfg))
        throw InfiniteMeanError("optimize: long-run average undefined for plain input with non-positive mean");

    std::vector<double> rates;
    if (undiscounted_defined(cfg)) rates.push_back(0.0);
    for (double a : cfg.alphas) rates.push_back(a);
    if (os.objective == "discounted" && std::find(rates.begin(), rates.end(), os.alpha) == rates.end())
        rates.push_back(os.alpha);
    std::vector<ScalePair> sps;
    for (double a : rates) sps.push_back(scales(cfg, a, std::max(V, x0)));

    std::vector<GridPoint> pts;
    auto feasible = [&](double l, double t) { return t >= 0 && t < l && l <= V; };
    auto known = [&](double l, double t) {
        return std::any_of(pts.begin(), pts.end(), [&](const GridPoint& g) {
            return std::abs(g.lambda - l) < 1e-12 && std::abs(g.tau - t) < 1e-12;
        });
    };
    auto evaluate_new = [&](std::size_t first) {
        const auto n = static_cast<std::int64_t>(pts.size() - first);
        std::vector<std::string> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) {
            GridPoint& g = pts[first + static_cast<std::size_t>(i)];
            const PolicyParams p{g.lambda, g.tau, cfg.M, V};
            try {
                for (std::size_t k = 0; k < rates.size(); ++k) {
                    const PolicyEvaluator ev(sps[k].s, sps[k].s_M, p, cfg.costs, cfg.mode);
                    if (rates[k] == 0.0) {
                        g.long_run_average = long_run_average_cost(ev);
                        g.mean_cycle_length = ev.cycle_length(p.tau);
                    } else {
                        const double v = ev.total_discounted_cost(x0);
                        if (std::find(cfg.alphas.begin(), cfg.alphas.end(), rates[k]) != cfg.alphas.end())
                            g.discounted.push_back(v);
                        if (rates[k] == os.alpha) g.objective = v;
                    }
                }
                if (need_lra) g.objective = g.long_run_average;
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
        for (const auto& e : errors)
            if (!e.empty()) throw NumericalError("optimize: " + e);
    };
    auto argmin = [&] {
        std::vector<std::size_t> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(pts[a].lambda, pts[a].tau) < std::tie(pts[b].lambda, pts[b].tau);
        });
        std::size_t best = idx.front();
        for (std::size_t i : idx)
            if (pts[i].objective < pts[best].objective) best = i;
        return best;
    };

    for (double l : cfg.lambda.values)
        for (double t : cfg.tau.values)
            if (feasible(l, t) && !known(l, t)) pts.push_back(GridPoint{l, t, 0, NAN, NAN, NAN, {}});
    if (pts.empty()) throw ConfigError("optimize: no grid point satisfies 0 <= tau < lambda <= V");
    evaluate_new(0);
    std::size_t best = argmin();
    const std::size_t coarse_best = best;

    double hl = axis_step(cfg.lambda), ht = axis_step(cfg.tau);
    for (int round = 1; round <= os.refine_rounds && (hl > 0 || ht > 0); ++round) {
        hl *= 0.5;
        ht *= 0.5;
        const double bl = pts[best].lambda, bt = pts[best].tau;
        const std::size_t first = pts.size();
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j) {
                const double l = bl + i * hl, t = bt + j * ht;
                if (l < cfg.lambda.lo - 1e-12 || l > cfg.lambda.hi + 1e-12) continue;
                if (t < cfg.tau.lo - 1e-12 || t > cfg.tau.hi + 1e-12) continue;
                if (feasible(l, t) && !known(l, t)) pts.push_back(GridPoint{l, t, round, NAN, NAN, NAN, {}});
            }
        evaluate_new(first);
        best = argmin();
    }

    Report r;
    r.verb = "optimize";
    std::ostringstream csv;
    csv << "round,lambda,tau,objective,long_run_average,mean_cycle_length";
    for (double a : cfg.alphas) csv << ",discounted_alpha=" << fmt(a);
    csv << '\n';
    json table = json::array();
    for (const auto& g : pts) {
        csv << g.round << ',' << fmt(g.lambda) << ',' << fmt(g.tau) << ',' << fmt(g.objective) << ','
            << fmt(g.long_run_average) << ',' << fmt(g.mean_cycle_length);
        json d = json::array();
        for (double v : g.discounted) {
            csv << ',' << fmt(v);
            d.push_back(jnum(v));
        }
        csv << '\n';
        table.push_back({{"round", g.round},
                         {"lambda", jnum(g.lambda)},
                         {"tau", jnum(g.tau)},
                         {"objective", jnum(g.objective)},
                         {"long_run_average", jnum(g.long_run_average)},
                         {"mean_cycle_length", jnum(g.mean_cycle_length)},
                         {"discounted", d}});
    }
    json s;
    s["verb"] = "optimize";
    s["config"] = config_echo(cfg);
    s["objective"] = os.objective;
    if (os.objective == "discounted") s["objective_alpha"] = jnum(os.alpha);
    s["start"] = jnum(x0);
    s["tie_break"] = "lexicographic (lambda, tau)";
    s["coarse_argmin"] = {{"lambda", jnum(pts[coarse_best].lambda)},
                          {"tau", jnum(pts[coarse_best].tau)},
                          {"objective", jnum(pts[coarse_best].objective)}};
    s["argmin"] = {{"lambda", jnum(pts[best].lambda)},
                   {"tau", jnum(pts[best].tau)},
                   {"objective", jnum(pts[best].objective)}};
    s["grid"] = table;
    r.summary = s;
    r.csv_name = "optimize.csv";
    r.csv = csv.str();
    return r;
}

void write_report(const Report& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / r.csv_name) << r.csv;
    std::ofstream(std::filesystem::path(dir) / "summary.json") << r.summary.dump(2) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Cost functionals and Monte Carlo verification for P^M_{lambda,tau} dam policies"};
    app.require_subcommand(1);
    std::string config_path, out;
    std::uint64_t seed = 0, paths = 0;
    bool quiet = false;
    for (const char* verb : {"evaluate", "verify", "optimize"}) {
        auto* sub = app.add_subcommand(verb);
        sub->add_option("--config", config_path, "YAML run configuration")->required();
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "verification seed override");
        sub->add_option("--paths", paths, "verification path count override");
        sub->add_flag("--quiet", quiet, "suppress the console summary");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_config(config_path);
        if (app.get_subcommands().front()->count("--seed") > 0) cfg.verification.paths.seed = seed;
        if (paths != 0) cfg.verification.paths.n_paths = paths;
        if (!out.empty()) cfg.out_dir = out;
        Report r;
        if (verb == "evaluate") r = cmd_evaluate(cfg);
        else if (verb == "verify") r = cmd_verify(cfg);
        else r = cmd_optimize(cfg);
        write_report(r, cfg.out_dir);
        if (!quiet) {
            std::cout << r.csv;
            if (r.summary.contains("status")) std::cout << "status: " << r.summary["status"].get<std::string>() << '\n';
            if (r.summary.contains("argmin")) std::cout << "argmin: " << r.summary["argmin"].dump() << '\n';
        }
        return r.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace levydam::cli
