#include "cusplab/reports.hpp"

#include <cmath>
#include <limits>

#include "cusplab/errors.hpp"

namespace cusplab {

using nlohmann::json;

json json_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SerializationError("expected a number, got " + j.dump());
}

namespace {

json pairs(const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [x, y] : v) a.push_back({json_number(x), json_number(y)});
    return a;
}

json fit_json(const growth::ModelFit& f) {
    return {{"model", f.name},       {"formula", f.formula},         {"divergent", f.divergent},
            {"available", f.available}, {"A", json_number(f.A)},   {"B", json_number(f.B)},
            {"exponent", json_number(f.exponent)}, {"rms", json_number(f.rms)}};
}

}  // namespace

json to_json(const growth::Classification& c) {
    json fits = json::array();
    for (const auto& f : c.fits) fits.push_back(fit_json(f));
    return {{"result", growth::to_string(c.result)},
            {"reason", c.reason},
            {"best", fit_json(c.best)},
            {"rival", fit_json(c.rival)},
            {"margin", json_number(c.margin)},
            {"fits", fits}};
}

json to_json(const limits::LimitEstimate& e) {
    return {{"value", json_number(e.value)},
            {"error", json_number(e.error)},
            {"observed_order", json_number(e.observed_order)},
            {"certified", e.certified},
            {"certificate", e.certificate},
            {"sequence", pairs(e.sequence)}};
}

json to_json(const Estimate& e) { return {{"value", json_number(e.value)}, {"error", json_number(e.error)}}; }

json to_json(const RegularityVerdict& v) {
    json j = {{"verdict", to_string(v.verdict)},
              {"evidence", pairs(v.evidence)},
              {"fitted_model", v.fitted_model},
              {"fit", to_json(v.fit)},
              {"closed_form_agrees", v.closed_form_agrees}};
    if (v.closed_form)
        j["closed_form"] = {{"verdict", to_string(v.closed_form->verdict)}, {"expression", v.closed_form->expression}};
    else
        j["closed_form"] = nullptr;
    return j;
}

json to_json(const DiniVerdict& v) {
    json j = {{"result", to_string(v.result)}, {"evidence", pairs(v.evidence)}, {"fit", to_json(v.fit)}};
    if (v.closed_form)
        j["closed_form"] = {{"result", to_string(*v.closed_form)}, {"expression", v.closed_form_expression}};
    else
        j["closed_form"] = nullptr;
    return j;
}

json to_json(const OmegaDiniReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"x", json_number(row.x)},
                        {"deviation", json_number(row.deviation)},
                        {"lower_bound", json_number(row.lower_bound)},
                        {"error", json_number(row.error)},
                        {"holds", row.holds}});
    return {{"rows", rows},
            {"all_hold", r.all_hold},
            {"bound_integral", to_json(r.bound_integral)},
            {"bound_trace", pairs(r.bound_trace)}};
}

json to_json(const BlowupReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"x", json_number(row.x)},
                        {"r", json_number(row.r)},
                        {"q1", json_number(row.q1)},
                        {"q2", json_number(row.q2)},
                        {"u", json_number(row.u)},
                        {"u_error", json_number(row.u_error)},
                        {"bound", json_number(row.bound)},
                        {"holds", row.holds}});
    return {{"rows", rows},
            {"q1_limsup", json_number(r.q1_limsup)},
            {"q1_negative", r.q1_negative},
            {"q2_fit", to_json(r.q2_fit)},
            {"q2_diverges", r.q2_diverges},
            {"q2_tail", pairs(r.q2_tail)},
            {"bound_holds", r.bound_holds},
            {"delta", json_number(r.delta)}};
}

json to_json(const HypothesisCheck& h) {
    return {{"name", h.name}, {"passed", h.passed}, {"margin", json_number(h.margin)}, {"detail", h.detail}};
}

json to_json(const BarrierReport& r) {
    json hyps = json::array(), annuli = json::array();
    for (const auto& h : r.hypotheses) hyps.push_back(to_json(h));
    for (const auto& a : r.annuli)
        annuli.push_back({{"rho_in", json_number(a.rho_in)},
                          {"rho_out", json_number(a.rho_out)},
                          {"points", a.points},
                          {"min_w", json_number(a.min_w)},
                          {"max_Lw", json_number(a.max_Lw)}});
    return {{"candidate", r.candidate},
            {"operator", r.operator_description},
            {"hypotheses", hyps},
            {"annuli", annuli},
            {"max_Lw", json_number(r.max_Lw)},
            {"max_Lw_error", json_number(r.max_Lw_error)},
            {"Lw_method", r.lw_method},
            {"decay", pairs(r.decay)},
            {"passed", r.passed}};
}

json to_json(const SuperharmonicReport& r) {
    return {{"p", json_number(r.p)},
            {"d", r.d},
            {"operator", r.operator_description},
            {"superharmonic", to_json(r.superharmonic)},
            {"blows_up", to_json(r.blows_up)},
            {"max_Lw", json_number(r.max_Lw)},
            {"points", r.points},
            {"violations", r.violations},
            {"passed", r.passed}};
}

json to_json(const WitnessReport& r) {
    json paths = json::array(), hyps = json::array();
    for (const auto& p : r.paths)
        paths.push_back({{"name", p.name},
                         {"class", to_string(p.cls)},
                         {"samples", pairs(p.samples)},
                         {"liminf", json_number(p.liminf)},
                         {"error", json_number(p.error)},
                         {"running_min", json_number(p.running_min)},
                         {"diverges", p.diverges},
                         {"w_blows_up", p.w_blows_up}});
    for (const auto& h : r.hypotheses) hyps.push_back(to_json(h));
    return {{"paths", paths},
            {"alpha", json_number(r.alpha)},
            {"beta", json_number(r.beta)},
            {"alpha_error", json_number(r.alpha_error)},
            {"beta_error", json_number(r.beta_error)},
            {"gap", json_number(r.gap)},
            {"hypotheses", hyps},
            {"valid", r.valid},
            {"failed", r.failed},
            {"note", r.note}};
}

json to_json(const RatioReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"x", json_number(row.x)},
                        {"r", json_number(row.r)},
                        {"deficit", json_number(row.deficit)},
                        {"u1", json_number(row.u1)},
                        {"denominator", json_number(row.denominator)},
                        {"ratio", json_number(row.ratio)},
                        {"ratio_u1", json_number(row.ratio_u1)},
                        {"error", json_number(row.error)}});
    return {{"mu", json_number(r.mu)},         {"eta", json_number(r.eta)},   {"gamma", json_number(r.gamma)},
            {"N", json_number(r.N)},           {"rows", rows},                {"increasing", r.increasing},
            {"exceeds_one", r.exceeds_one},    {"passed", r.passed}};
}

json to_json(const MeasureEstimate& m) {
    return {{"mean", json_number(m.mean)},
            {"half_width_95", json_number(m.half_width_95)},
            {"n_effective", m.n_effective},
            {"censoring_rate", json_number(m.censoring_rate)}};
}

json to_json(const ProbeReport& r) {
    json rows = json::array(), esc = json::array();
    for (const auto& row : r.rows) {
        json start = json::array();
        for (double v : row.start) start.push_back(json_number(v));
        rows.push_back({{"start", start},
                        {"distance", json_number(row.distance)},
                        {"estimate", to_json(row.estimate)},
                        {"gap", json_number(row.gap)}});
    }
    for (const auto& e : r.escape)
        esc.push_back({{"t", json_number(e.t)},
                       {"frequency", json_number(e.frequency)},
                       {"half_width_95", json_number(e.half_width_95)}});
    return {{"rows", rows},
            {"escape", esc},
            {"g0", json_number(r.g0)},
            {"verdict", to_string(r.verdict)},
            {"reason", r.reason},
            {"note", r.note}};
}

}  // namespace cusplab
