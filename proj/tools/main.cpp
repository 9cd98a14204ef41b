#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli_support.hpp"
#include "cusplab/barriers.hpp"
#include "cusplab/diffusion.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/regularity.hpp"
#include "cusplab/reports.hpp"
#include "cusplab/scenarios.hpp"

using nlohmann::json;
using namespace cusplab;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 3;

struct Global {
    std::optional<std::string> config;
    std::uint64_t seed = 1;
    std::optional<double> tol;
    std::optional<std::string> out_dir;
    std::string format;
    int threads = 0;
    std::optional<std::string> scenario;
    std::vector<std::string> set;
};

// Objects shared by the non-scenario commands: flags first, then the selected scenario.
struct Inputs {
    std::optional<std::string> profile;
    int d = 3;
    bool d_given = false;
    std::optional<double> radius;
    bool asymmetric = false;
    std::optional<std::string> op;
    std::optional<std::string> preset;
    std::vector<std::string> preset_params;
};

json document(const std::string& command) { return {{"schema_version", kSchemaVersion}, {"command", command}}; }

cli::Format format_of(const Global& g, cli::Format fallback) {
    return g.format.empty() ? fallback : cli::parse_format(g.format);
}

QuadratureConfig quad_config(const Global& g) {
    QuadratureConfig q;
    if (g.tol) {
        if (!(*g.tol > 0.0)) throw ConfigError("--tol must be positive");
        q.rel_tol = *g.tol;
    }
    return q;
}

std::vector<Scenario> catalog(const Global& g) { return g.config ? load_catalog(*g.config) : list_scenarios(); }

struct Setup {
    ParamList params;
    std::optional<PotentialSpec> potential;
    std::optional<CuspDomain> domain;
    std::optional<LambdaField> field;
    std::string operator_label = "Laplacian";
};

Setup resolve(const Global& g, const Inputs& in, bool need_domain) {
    Setup s;
    const Scenario* sc = nullptr;
    std::vector<Scenario> cat;
    if (g.scenario || g.config) {
        cat = catalog(g);
        if (g.scenario)
            sc = &find_scenario(cat, *g.scenario);
        else if (cat.size() == 1)
            sc = &cat.front();
        else
            throw ConfigError("--config holds several scenarios; pick one with --scenario");
    }
    const ParamList overrides = cli::parse_assignments(g.set);
    s.params = sc ? effective_params(*sc, overrides) : overrides;
    if (in.preset)
        s.potential = potential_from_json(cli::preset_json(*in.preset, in.preset_params), s.params);
    else if (sc && sc->potential)
        s.potential = potential_from_json(*sc->potential, s.params);

    if (in.profile) {
        json dj = {{"d", in.d}, {"symmetric", !in.asymmetric}, {"profile", cli::profile_json(*in.profile)}};
        if (in.radius) dj["c"] = *in.radius;
        s.domain = domain_from_json(dj, s.params);
    } else if (sc && sc->domain) {
        json dj = *sc->domain;
        if (in.d_given) dj["d"] = in.d;
        if (in.radius) dj["c"] = *in.radius;
        if (in.asymmetric) dj["symmetric"] = false;
        s.domain = domain_from_json(dj, s.params);
    }
    if (need_domain && !s.domain) throw ConfigError("a domain is needed: pass --profile or --scenario");

    std::optional<SpineProfile> prof;
    if (s.domain) prof = s.domain->profile();
    if (in.op) {
        const json oj = cli::operator_json(*in.op);
        s.field = operator_from_json(oj, s.params, s.potential, prof);
    } else if (sc && sc->op) {
        s.field = operator_from_json(*sc->op, s.params, s.potential, prof);
    } else {
        s.field = LambdaField::constant(1.0);
    }
    s.operator_label = s.field->describe();
    return s;
}

void add_input_options(CLI::App* app, Inputs& in, bool domain, bool op, bool preset) {
    if (domain) {
        app->add_option("--profile", in.profile, "spine profile, e.g. exp:0.5, power:3, logpower:1,c=0.3");
        app->add_option("--d", in.d, "dimension")->check(CLI::Range(3, 64))->each([&in](const std::string&) {
            in.d_given = true;
        });
        app->add_option("--radius", in.radius, "domain radius c");
        app->add_flag("--asymmetric", in.asymmetric, "spine on the positive x1 side only");
    }
    if (op) app->add_option("--operator", in.op, "laplacian, const:LAMBDA, omega:SCALE or inline JSON");
    if (preset) {
        app->add_option("--preset", in.preset, "potential preset: lebesgue t21_d3 t21_dge4 t23_d3 t23_dge4 l71 mu_const");
        app->add_option("--param", in.preset_params, "preset parameter name=value (repeatable)");
    }
}

void emit_table_or_doc(const Global& g, const std::string& stem, cli::Format f, const json& doc,
                       const cli::Table& table) {
    switch (f) {
        case cli::Format::Json: cli::emit(g.out_dir, stem, f, doc.dump(2) + "\n"); break;
        case cli::Format::Csv: cli::emit(g.out_dir, stem, f, cli::render_csv(table)); break;
        case cli::Format::Md: cli::emit(g.out_dir, stem, f, cli::render_md(table)); break;
    }
}

std::string point_string(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + cli::number(p[i]);
    return s;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    Inputs in;
    std::string quantity = "u";
    std::string xs = "0";
    std::string rs = "1";
};

int run_eval(const Global& g, const EvalArgs& a) {
    const auto s = resolve(g, a.in, false);
    if (!s.potential) throw ConfigError("eval needs --preset or a scenario with a potential");
    const auto q = quad_config(g);
    const auto xs = cli::parse_list(a.xs), rs = cli::parse_list(a.rs);
    cli::Table t;
    json rows = json::array();
    if (a.quantity == "residual")
        t.columns = {"x", "r", "residual", "error", "u_xx", "u_rr", "u_r", "omega"};
    else if (a.quantity == "u" || a.quantity == "omega")
        t.columns = {"x", "r", a.quantity, "error"};
    else
        throw ConfigError("--quantity must be u, omega or residual");
    for (double x : xs)
        for (double r : rs) {
            if (a.quantity == "residual") {
                const auto res = pde_residual(*s.potential, x, r, q);
                t.rows.push_back({cli::number(x), cli::number(r), cli::number(res.residual), cli::number(res.error),
                                  cli::number(res.u_xx.value), cli::number(res.u_rr.value), cli::number(res.u_r.value),
                                  cli::number(res.omega.value)});
                rows.push_back({{"x", json_number(x)},
                                {"r", json_number(r)},
                                {"residual", json_number(res.residual)},
                                {"error", json_number(res.error)},
                                {"u_xx", to_json(res.u_xx)},
                                {"u_rr", to_json(res.u_rr)},
                                {"u_r", to_json(res.u_r)},
                                {"omega", to_json(res.omega)}});
            } else {
                const auto e = a.quantity == "u" ? eval_u(*s.potential, x, r, q) : eval_omega(*s.potential, x, r, q);
                t.rows.push_back({cli::number(x), cli::number(r), cli::number(e.value), cli::number(e.error)});
                rows.push_back({{"x", json_number(x)},
                                {"r", json_number(r)},
                                {"value", json_number(e.value)},
                                {"error", json_number(e.error)}});
            }
        }
    json doc = document("eval");
    doc["potential"] = potential_to_json(*s.potential);
    doc["quantity"] = a.quantity;
    doc["rows"] = rows;
    emit_table_or_doc(g, "eval", format_of(g, cli::Format::Csv), doc, t);
    return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
    std::vector<std::string> profiles;
    std::vector<int> dims = {3};
};

int run_classify(const Global& g, const ClassifyArgs& a) {
    if (a.profiles.empty()) throw ConfigError("classify needs at least one --profile");
    const ParamList params = cli::parse_assignments(g.set);
    json results = json::array();
    cli::Table t;
    t.columns = {"profile", "d", "operator", "verdict", "model", "closed form", "agrees"};
    bool inconclusive = false;
    for (const auto& ps : a.profiles) {
        const SpineProfile prof = profile_from_json(cli::profile_json(ps), params);
        for (int d : a.dims) {
            const auto v = ito_mckean_test(prof, d);
            inconclusive = inconclusive || v.verdict == Verdict::Inconclusive;
            results.push_back({{"profile", profile_to_json(prof)},
                               {"profile_label", prof.describe()},
                               {"d", d},
                               {"operator", "Laplacian"},
                               {"result", to_json(v)}});
            t.rows.push_back({prof.describe(), std::to_string(d), "Laplacian", to_string(v.verdict), v.fitted_model,
                              v.closed_form ? v.closed_form->expression : "-", v.closed_form_agrees ? "yes" : "no"});
        }
    }
    json doc = document("classify");
    doc["results"] = results;
    emit_table_or_doc(g, "classify", format_of(g, cli::Format::Json), doc, t);
    return inconclusive ? kExitInconclusive : 0;
}

// ---------------------------------------------------------------------------
// barrier / witness

cli::Table hypothesis_table(const std::vector<HypothesisCheck>& hs) {
    cli::Table t;
    t.columns = {"hypothesis", "passed", "margin", "detail"};
    for (const auto& h : hs) t.rows.push_back({h.name, h.passed ? "yes" : "no", cli::number(h.margin), h.detail});
    return t;
}

struct BarrierArgs {
    Inputs in;
    std::optional<std::string> w;
    std::optional<double> superharmonic;
    int annuli = 4;
    int density = 16;
};

int run_barrier(const Global& g, const BarrierArgs& a) {
    const bool super = a.superharmonic.has_value();
    const auto s = resolve(g, a.in, !super);
    json doc = document("barrier");
    cli::Table t;
    bool passed = false;
    if (super) {
        const int d = s.domain ? s.domain->d() : a.in.d;
        const auto rep = verify_superharmonic_blowup(*a.superharmonic, *s.field, d);
        doc["report"] = to_json(rep);
        t = hypothesis_table({rep.superharmonic, rep.blows_up});
        passed = rep.passed;
    } else {
        if (!a.w) throw ConfigError("barrier needs --w or --superharmonic");
        const auto w = field_function_from_json(cli::field_json(*a.w), s.params, s.potential);
        const BarrierCandidate cand{w, *s.field, *s.domain};
        const auto rep = verify_barrier(cand, default_annuli(*s.domain, a.annuli), a.density);
        doc["domain"] = domain_to_json(*s.domain);
        doc["report"] = to_json(rep);
        t = hypothesis_table(rep.hypotheses);
        passed = rep.passed;
    }
    doc["operator"] = operator_to_json(*s.field);
    emit_table_or_doc(g, "barrier", format_of(g, cli::Format::Json), doc, t);
    return passed ? 0 : kExitFail;
}

struct WitnessArgs {
    Inputs in;
    std::string u = "potential";
    std::optional<std::string> w;
};

int run_witness(const Global& g, const WitnessArgs& a) {
    const auto s = resolve(g, a.in, true);
    const std::string wspec = a.w ? *a.w : "inv_power:" + std::to_string(s.domain->d() - 2);
    const WitnessPair pair{field_function_from_json(cli::field_json(a.u), s.params, s.potential),
                           field_function_from_json(cli::field_json(wspec), s.params, s.potential), *s.field};
    const auto rep = irregularity_witness(pair, *s.domain);
    json doc = document("witness");
    doc["domain"] = domain_to_json(*s.domain);
    doc["operator"] = operator_to_json(*s.field);
    doc["report"] = to_json(rep);
    cli::Table t;
    t.columns = {"path", "class", "liminf", "error", "diverges", "w_blows_up"};
    for (const auto& p : rep.paths)
        t.rows.push_back({p.name, to_string(p.cls), cli::number(p.liminf), cli::number(p.error), p.diverges ? "yes" : "no",
                          p.w_blows_up ? "yes" : "no"});
    t.rows.push_back({"gap beta - alpha", "", cli::number(rep.gap), "", "", rep.valid ? "valid" : "invalid"});
    emit_table_or_doc(g, "witness", format_of(g, cli::Format::Json), doc, t);
    return rep.valid ? 0 : kExitFail;
}

// ---------------------------------------------------------------------------
// simulate / plotdata exit-histogram

struct SimArgs {
    Inputs in;
    std::vector<std::string> starts;
    long paths = 1000;
    double step = 1e-4;
    long max_steps = 2'000'000;
    std::string g = "tent:0.5";
};

SimConfig sim_config(const Global& g, const SimArgs& a) {
    SimConfig cfg;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.paths = a.paths;
    cfg.step = a.step;
    cfg.max_steps = a.max_steps;
    if (cfg.paths < 1 || !(cfg.step > 0.0) || cfg.max_steps < 1) throw ConfigError("paths, step and max-steps must be positive");
    return cfg;
}

// Boundary datum; tent:RHO is max(0, 1 - |x|/RHO), x1 is the axial coordinate, one is constant 1.
std::function<double(std::span<const double>)> boundary_datum(const std::string& spec) {
    if (spec == "x1") return [](std::span<const double> x) { return x[0]; };
    if (spec == "one") return [](std::span<const double>) { return 1.0; };
    if (spec.rfind("tent:", 0) == 0) {
        const double rho = cli::parse_list(spec.substr(5)).at(0);
        if (!(rho > 0.0)) throw ConfigError("tent radius must be positive");
        return [rho](std::span<const double> x) { return std::max(0.0, 1.0 - norm(x) / rho); };
    }
    throw ConfigError("unknown boundary datum '" + spec + "' (tent:RHO, x1, one)");
}

std::vector<Point> starts_of(const SimArgs& a, int d) {
    if (a.starts.empty()) throw ConfigError("simulate needs at least one --start");
    std::vector<Point> out;
    for (const auto& s : a.starts) {
        auto p = cli::parse_point(s);
        if (p.size() == 2 && d > 2) p.resize(static_cast<std::size_t>(d), 0.0);
        if (p.size() != static_cast<std::size_t>(d))
            throw ConfigError("start '" + s + "' needs " + std::to_string(d) + " coordinates (or 2)");
        out.push_back(p);
    }
    return out;
}

int run_simulate(const Global& g, const SimArgs& a) {
    const auto s = resolve(g, a.in, true);
    const auto cfg = sim_config(g, a);
    const auto datum = boundary_datum(a.g);
    const auto starts = starts_of(a, s.domain->d());
    json estimates = json::array();
    cli::Table samples, summary;
    samples.columns = {"start", "path"};
    for (int i = 0; i < s.domain->d(); ++i) samples.columns.push_back("exit_x" + std::to_string(i + 1));
    for (const char* c : {"exit_time", "censored", "boundary", "steps"}) samples.columns.emplace_back(c);
    summary.columns = {"start", "g_mean", "g_half_width_95", "exit_time_mean", "exit_time_half_width_95", "censored"};
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto res = simulate_paths(*s.domain, *s.field, starts[k], cfg);
        const auto gm = summarize(res, [&datum](const ExitSample& e) { return datum(e.exit_point); });
        const auto tm = summarize(res, [](const ExitSample& e) { return e.exit_time; });
        std::map<std::string, long> classes;
        for (std::size_t p = 0; p < res.size(); ++p) {
            const auto& e = res[p];
            ++classes[to_string(e.boundary_class)];
            std::vector<std::string> row{std::to_string(k), std::to_string(p)};
            for (double v : e.exit_point) row.push_back(cli::number(v));
            row.insert(row.end(), {cli::number(e.exit_time), e.censored ? "1" : "0", to_string(e.boundary_class),
                                   std::to_string(e.steps)});
            samples.rows.push_back(std::move(row));
        }
        json jp = json::array();
        for (double v : starts[k]) jp.push_back(v);
        estimates.push_back({{"start", jp},
                             {"harmonic_measure", to_json(gm)},
                             {"exit_time", to_json(tm)},
                             {"boundary_classes", classes}});
        summary.rows.push_back({point_string(starts[k]), cli::number(gm.mean), cli::number(gm.half_width_95),
                                cli::number(tm.mean), cli::number(tm.half_width_95), cli::number(gm.censoring_rate)});
    }
    json doc = document("simulate");
    doc["domain"] = domain_to_json(*s.domain);
    doc["operator"] = operator_to_json(*s.field);
    doc["datum"] = a.g;
    doc["config"] = {{"paths", cfg.paths}, {"step", cfg.step}, {"max_steps", cfg.max_steps}, {"seed", cfg.seed}};
    doc["estimates"] = estimates;
    if (g.out_dir) {
        cli::emit(g.out_dir, "samples", cli::Format::Csv, cli::render_csv(samples));
        cli::emit(g.out_dir, "estimate", cli::Format::Json, doc.dump(2) + "\n");
        return 0;
    }
    const auto f = format_of(g, cli::Format::Json);
    if (f == cli::Format::Csv)
        cli::emit(g.out_dir, "samples", f, cli::render_csv(samples));
    else
        emit_table_or_doc(g, "estimate", f, doc, summary);
    return 0;
}

// ---------------------------------------------------------------------------
// scenario

struct ScenarioArgs {
    std::vector<std::string> names;
    bool all = false;
    bool slow = false;
    std::vector<std::string> only;
    std::optional<long> paths;
};

// Leftover "--name value" or "--name=value" pairs become parameter overrides.
ParamList extra_overrides(const std::vector<std::string>& rest) {
    std::vector<std::string> kv;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        const auto& a = rest[i];
        if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            kv.push_back(a.substr(2));
        } else {
            if (i + 1 >= rest.size()) throw ConfigError("missing value for " + a);
            kv.push_back(a.substr(2) + "=" + rest[++i]);
        }
    }
    return cli::parse_assignments(kv);
}

int run_scenarios(const Global& g, const ScenarioArgs& a, const std::vector<std::string>& rest) {
    const auto cat = catalog(g);
    std::vector<const Scenario*> chosen;
    if (a.all) {
        for (const auto& s : cat) chosen.push_back(&s);
    } else {
        if (a.names.empty()) throw ConfigError("scenario run needs a name or --all");
        for (const auto& n : a.names) chosen.push_back(&find_scenario(cat, n));
    }
    RunOptions opt;
    opt.overrides = cli::parse_assignments(g.set);
    for (const auto& kv : extra_overrides(rest)) opt.overrides.push_back(kv);
    opt.seed = g.seed;
    opt.threads = g.threads;
    opt.include_slow = a.slow;
    opt.paths = a.paths;
    opt.tol = g.tol;
    opt.only = a.only;
    std::vector<ScenarioResult> results;
    for (const auto* s : chosen) {
        // Overrides naming parameters a scenario lacks apply only to the scenarios that have them.
        RunOptions o = opt;
        if (chosen.size() > 1) {
            o.overrides.clear();
            for (const auto& kv : opt.overrides)
                if (std::any_of(s->params.begin(), s->params.end(), [&kv](const auto& p) { return p.first == kv.first; }))
                    o.overrides.push_back(kv);
        }
        results.push_back(run_scenario(*s, o));
    }
    const auto f = format_of(g, cli::Format::Md);
    if (f == cli::Format::Md) {
        cli::emit(g.out_dir, "scenarios", f, results_markdown(results));
    } else if (f == cli::Format::Json) {
        json doc = document("scenario run");
        json arr = json::array();
        for (const auto& r : results) arr.push_back(result_to_json(r));
        doc["results"] = arr;
        doc["exit_code"] = combined_exit_code(results);
        cli::emit(g.out_dir, "scenarios", f, doc.dump(2) + "\n");
    } else {
        cli::Table t;
        t.columns = {"scenario", "test", "kind", "basis", "expected", "observed", "status"};
        for (const auto& r : results)
            for (const auto& x : r.results)
                t.rows.push_back({r.scenario, x.id, x.kind, to_string(x.basis), x.expect, x.observed, to_string(x.status)});
        cli::emit(g.out_dir, "scenarios", f, cli::render_csv(t));
    }
    return combined_exit_code(results);
}

int run_list(const Global& g) {
    const auto cat = catalog(g);
    for (const auto& s : cat) validate(s);
    const auto f = format_of(g, cli::Format::Md);
    if (f == cli::Format::Json) {
        json doc = document("scenario list");
        doc["catalog"] = catalog_to_json(cat);
        cli::emit(g.out_dir, "catalog", f, doc.dump(2) + "\n");
        return 0;
    }
    cli::Table t;
    t.columns = {"scenario", "parameters", "tests", "description"};
    for (const auto& s : cat) {
        std::string params, tests;
        for (const auto& [k, v] : s.params) params += (params.empty() ? "" : " ") + k + "=" + cli::number(v);
        for (const auto& x : s.tests) tests += (tests.empty() ? "" : " ") + x.id + (x.slow ? "*" : "");
        t.rows.push_back({s.name, params, tests, s.description});
    }
    cli::emit(g.out_dir, "catalog", f, f == cli::Format::Md ? cli::render_md(t) : cli::render_csv(t));
    return 0;
}

// ---------------------------------------------------------------------------
// plotdata

struct PlotArgs {
    std::string figure;
    SimArgs sim;
    std::optional<std::string> xs, rs;
    int bins = 40;
    std::string quantity = "time";
};

int run_plotdata(const Global& g, const PlotArgs& a) {
    const auto f = format_of(g, cli::Format::Csv);
    const auto q = quad_config(g);
    cli::Table t;
    json doc = document("plotdata");
    doc["figure"] = a.figure;
    if (a.figure == "potential-along-spine") {
        const auto s = resolve(g, a.sim.in, true);
        if (!s.potential) throw ConfigError("potential-along-spine needs a potential");
        const auto xs = cli::parse_list(a.xs.value_or("geo:0.1:1e-6:26"));
        t.columns = {"x", "r", "u", "u_error", "omega", "omega_error"};
        for (double x : xs) {
            const double r = s.domain->profile().value(x);
            const auto u = eval_u(*s.potential, x, r, q);
            const auto w = eval_omega(*s.potential, x, r, q);
            t.rows.push_back({cli::number(x), cli::number(r), cli::number(u.value), cli::number(u.error),
                              cli::number(w.value), cli::number(w.error)});
        }
        doc["potential"] = potential_to_json(*s.potential);
        doc["domain"] = domain_to_json(*s.domain);
    } else if (a.figure == "omega-heatmap") {
        const auto s = resolve(g, a.sim.in, false);
        if (!s.potential) throw ConfigError("omega-heatmap needs a potential");
        const auto xs = cli::parse_list(a.xs.value_or("-0.05:0.05:21"));
        const auto rs = cli::parse_list(a.rs.value_or("geo:1e-4:0.05:21"));
        t.columns = {"x", "r", "omega", "error"};
        for (double r : rs)
            for (double x : xs) {
                const auto w = eval_omega(*s.potential, x, r, q);
                t.rows.push_back({cli::number(x), cli::number(r), cli::number(w.value), cli::number(w.error)});
            }
        doc["potential"] = potential_to_json(*s.potential);
    } else if (a.figure == "exit-histogram") {
        const auto s = resolve(g, a.sim.in, true);
        const auto cfg = sim_config(g, a.sim);
        const auto starts = starts_of(a.sim, s.domain->d());
        if (a.bins < 1) throw ConfigError("--bins must be positive");
        std::function<double(const ExitSample&)> key;
        if (a.quantity == "time")
            key = [](const ExitSample& e) { return e.exit_time; };
        else if (a.quantity == "x1")
            key = [](const ExitSample& e) { return e.exit_point[0]; };
        else if (a.quantity == "norm")
            key = [](const ExitSample& e) { return norm(e.exit_point); };
        else
            throw ConfigError("--quantity must be time, x1 or norm");
        t.columns = {"start", "bin_lo", "bin_hi", "count", "density"};
        for (std::size_t k = 0; k < starts.size(); ++k) {
            const auto res = simulate_paths(*s.domain, *s.field, starts[k], cfg);
            std::vector<double> v;
            for (const auto& e : res)
                if (!e.censored) v.push_back(key(e));
            if (v.empty()) continue;
            const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
            const double lo = *mn, hi = *mx > *mn ? *mx : *mn + 1.0;
            const double width = (hi - lo) / a.bins;
            std::vector<long> counts(static_cast<std::size_t>(a.bins), 0);
            for (double x : v)
                ++counts[std::min<std::size_t>(static_cast<std::size_t>((x - lo) / width), counts.size() - 1)];
            for (int b = 0; b < a.bins; ++b) {
                const double c = static_cast<double>(counts[static_cast<std::size_t>(b)]);
                t.rows.push_back({point_string(starts[k]), cli::number(lo + b * width), cli::number(lo + (b + 1) * width),
                                  std::to_string(counts[static_cast<std::size_t>(b)]),
                                  cli::number(c / (static_cast<double>(v.size()) * width))});
            }
        }
        doc["domain"] = domain_to_json(*s.domain);
        doc["operator"] = operator_to_json(*s.field);
        doc["quantity"] = a.quantity;
    } else {
        throw ConfigError("unknown figure '" + a.figure + "' (potential-along-spine, omega-heatmap, exit-histogram)");
    }
    doc["table"] = cli::table_json(t);
    emit_table_or_doc(g, "plotdata-" + a.figure, f, doc, t);
    return 0;
}

void add_sim_options(CLI::App* app, SimArgs& a) {
    app->add_option("--start", a.starts, "start point x1,x2,... (x1,|x'| also accepted); repeatable");
    app->add_option("--paths", a.paths, "paths per start");
    app->add_option("--step", a.step, "Euler-Maruyama time step");
    app->add_option("--max-steps", a.max_steps, "steps before a path is censored");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cusplab: potentials, regularity tests and exit simulations for cusp domains"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--config", g.config, "scenario document (one scenario or a catalog)");
    app.add_option("--scenario", g.scenario, "scenario supplying defaults to non-scenario commands");
    app.add_option("--set", g.set, "scenario parameter override name=value (repeatable)");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--tol", g.tol, "relative quadrature tolerance");
    app.add_option("--out-dir", g.out_dir, "write results into this directory instead of stdout");
    app.add_option("--format", g.format, "json, csv or md")->check(CLI::IsMember({"json", "csv", "md"}));
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "evaluate u, omega or the PDE residual on an (x, r) grid");
    add_input_options(eval, ea.in, false, false, true);
    eval->add_option("--quantity", ea.quantity, "u, omega or residual");
    eval->add_option("--x", ea.xs, "axial values: list a,b,c or range lo:hi:n or geo:lo:hi:n");
    eval->add_option("--r", ea.rs, "radial values, same forms as --x");

    ClassifyArgs ca;
    auto* classify = app.add_subcommand("classify", "integral test for the Laplacian at the cusp tip");
    classify->add_option("--profile", ca.profiles, "spine profile (repeatable)")->required();
    classify->add_option("--d", ca.dims, "dimension (repeatable)")->check(CLI::Range(3, 64));

    BarrierArgs ba;
    auto* barrier = app.add_subcommand("barrier", "check a barrier candidate, or superharmonicity of |x|^{-p}");
    add_input_options(barrier, ba.in, true, true, true);
    barrier->add_option("--w", ba.w, "candidate: radial_power:K, inv_power:P, quadratic, potential_deficit, ...");
    barrier->add_option("--superharmonic", ba.superharmonic, "check |x|^{-P} instead of a barrier");
    barrier->add_option("--annuli", ba.annuli, "number of annuli")->check(CLI::Range(1, 64));
    barrier->add_option("--density", ba.density, "grid points per annulus axis")->check(CLI::Range(2, 4096));

    WitnessArgs wa;
    auto* witness = app.add_subcommand("witness", "check an irregularity witness pair (u, w)");
    add_input_options(witness, wa.in, true, true, true);
    witness->add_option("--u", wa.u, "u: potential (default), constant:V, ...");
    witness->add_option("--w", wa.w, "w, default inv_power:d-2");

    SimArgs sa;
    auto* simulate = app.add_subcommand("simulate", "exit simulations: samples CSV and estimates JSON");
    add_input_options(simulate, sa.in, true, true, true);
    add_sim_options(simulate, sa);
    simulate->add_option("--g", sa.g, "boundary datum: tent:RHO, x1 or one");

    auto* scenario = app.add_subcommand("scenario", "scenario catalog");
    scenario->require_subcommand(1);
    auto* list = scenario->add_subcommand("list", "list the catalog");
    ScenarioArgs sca;
    auto* run = scenario->add_subcommand("run", "run scenarios; unknown --name value pairs override parameters");
    run->add_option("names", sca.names, "scenario names");
    run->add_flag("--all", sca.all, "run the whole catalog");
    run->add_flag("--slow", sca.slow, "include slow (simulation) tests");
    run->add_option("--only", sca.only, "test id (repeatable)");
    run->add_option("--paths", sca.paths, "path count for probe tests");

    PlotArgs pa;
    auto* plot = app.add_subcommand("plotdata", "plot-ready CSV for a named figure");
    plot->add_option("figure", pa.figure, "potential-along-spine, omega-heatmap or exit-histogram")->required();
    add_input_options(plot, pa.sim.in, true, true, true);
    add_sim_options(plot, pa.sim);
    plot->add_option("--x", pa.xs, "axial grid");
    plot->add_option("--r", pa.rs, "radial grid");
    plot->add_option("--bins", pa.bins, "histogram bins");
    plot->add_option("--quantity", pa.quantity, "histogram of time, x1 or norm");

    // After `scenario run`, options that neither the run command nor the top level knows are
    // parameter overrides ("--eps 0.5"); pull them out before CLI11 sees them.
    std::vector<std::string> args(argv + 1, argv + argc), extras;
    {
        std::set<std::string> known;
        for (const auto* a : {&app, static_cast<CLI::App*>(run)})
            for (const auto* o : a->get_options())
                for (const auto& n : o->get_lnames()) known.insert("--" + n);
        known.insert("--help");
        const auto at = std::find(args.begin(), args.end(), "run");
        if (at != args.end() && at != args.begin() && *(at - 1) == "scenario") {
            std::vector<std::string> kept(args.begin(), at + 1);
            for (auto it = at + 1; it != args.end(); ++it) {
                const std::string name = it->substr(0, it->find('='));
                if (it->rfind("--", 0) != 0 || known.count(name)) {
                    kept.push_back(*it);
                    continue;
                }
                extras.push_back(*it);
                if (it->find('=') == std::string::npos && it + 1 != args.end()) extras.push_back(*++it);
            }
            args = kept;
        }
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (eval->parsed()) return run_eval(g, ea);
        if (classify->parsed()) return run_classify(g, ca);
        if (barrier->parsed()) return run_barrier(g, ba);
        if (witness->parsed()) return run_witness(g, wa);
        if (simulate->parsed()) return run_simulate(g, sa);
        if (list->parsed()) return run_list(g);
        if (run->parsed()) return run_scenarios(g, sca, extras);
        if (plot->parsed()) return run_plotdata(g, pa);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SerializationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return kExitUsage;
    } catch (const StartOutsideDomain& e) {
        std::cerr << "invalid start: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
