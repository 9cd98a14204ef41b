#include "cusplab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cusplab/errors.hpp"

namespace cusplab {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Regular: return "Regular";
        case Verdict::Irregular: return "Irregular";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

const char* to_string(DiniKind k) {
    switch (k) {
        case DiniKind::Linear: return "Linear";
        case DiniKind::InvLog: return "InvLog";
        case DiniKind::InvLogLog: return "InvLogLog";
        case DiniKind::Custom: return "Custom";
    }
    return "?";
}

const char* to_string(DiniResult r) {
    switch (r) {
        case DiniResult::Satisfied: return "Satisfied";
        case DiniResult::Violated: return "Violated";
        case DiniResult::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

std::string describe_fit(const growth::Classification& c) {
    std::ostringstream os;
    os << c.best.name << ": " << c.best.formula << " (A=" << c.best.A << ", B=" << c.best.B;
    if (c.best.exponent != 0.0) os << ", p=" << c.best.exponent;
    os << ", rms=" << c.best.rms << ")";
    if (!c.rival.name.empty()) os << "; rival " << c.rival.name << " rms=" << c.rival.rms << ", margin=" << c.margin;
    os << "; " << c.reason;
    return os.str();
}

std::vector<std::pair<double, double>> evidence_of(const growth::Trace& t) {
    std::vector<std::pair<double, double>> e;
    for (std::size_t i = 0; i < t.delta.size(); ++i) e.emplace_back(t.delta[i], t.F[i]);
    return e;
}

}  // namespace

std::optional<ClosedForm> ito_mckean_closed_form(const SpineProfile& profile, int d) {
    const double a = profile.param();
    const int k = d - 3;
    std::ostringstream os;
    switch (profile.kind()) {
        case ProfileKind::ExpSpine:
            if (d == 3) return ClosedForm{Verdict::Irregular, "∫ dx/(eps - x ln x) < ∞"};
            return ClosedForm{Verdict::Irregular, "∫ x^{-1} (e^{-eps/x}/x)^{d-3} dx < ∞"};
        case ProfileKind::Power:
            if (d == 3) {
                if (a <= 1.0) return std::nullopt;
                os << "(eta-1)^{-1} ∫ dx/(x|ln x|) = ∞";
                return ClosedForm{Verdict::Regular, os.str()};
            }
            if (a > 1.0) return ClosedForm{Verdict::Irregular, "∫ x^{(d-3)(eta-1)-1} dx < ∞"};
            return ClosedForm{Verdict::Regular, "∫ x^{(d-3)(eta-1)-1} dx = ∞"};
        case ProfileKind::LogPower:
            if (d == 3) return ClosedForm{Verdict::Regular, "∫ dx/(eta x ln|ln x|) = ∞"};
            if (a * k > 1.0) return ClosedForm{Verdict::Irregular, "∫ dx/(x|ln x|^{eta(d-3)}) < ∞"};
            return ClosedForm{Verdict::Regular, "∫ dx/(x|ln x|^{eta(d-3)}) = ∞"};
        case ProfileKind::IterLogPower:
        case ProfileKind::DMinus3LogLog:
            if (d == 3) return ClosedForm{Verdict::Regular, "∫ dx/(p x ln(|ln x| ln|ln x|)) = ∞"};
            if (a * k > 1.0) return ClosedForm{Verdict::Irregular, "∫ dx/(x (|ln x| ln|ln x|)^{p(d-3)}) < ∞"};
            return ClosedForm{Verdict::Regular, "∫ dx/(x (|ln x| ln|ln x|)^{p(d-3)}) = ∞"};
        case ProfileKind::PowerIterLog:
            if (d == 3) return ClosedForm{Verdict::Regular, "∫ dx/(x|ln x| ln|ln x|) = ∞"};
            return ClosedForm{Verdict::Irregular, "∫ x^{(d-3)|ln|ln x||} dx/x < ∞"};
        case ProfileKind::Custom: return std::nullopt;
    }
    return std::nullopt;
}

RegularityVerdict ito_mckean_test(const SpineProfile& profile, int d, std::vector<double> probe) {
    if (d < 3) throw DomainError("dimension must be at least 3");
    const bool default_probe = probe.empty();
    double top = profile.c();
    if (default_probe) {
        // The criterion is local; start where the spine is already thinner than x/2.
        for (int i = 0; i < 60 && profile.log_ratio_w(-std::log(top)) > -std::numbers::ln2; ++i) top *= 0.5;
        probe = growth::default_probe(top);
    }
    for (double delta : probe)
        if (!(delta > 0.0 && delta <= profile.c())) throw DomainError("probe point outside (0, c]");
    std::function<double(double)> g;
    if (d == 3) {
        for (double delta : probe) {
            if (profile.log_ratio_w(-std::log(delta)) >= 0.0) {
                std::ostringstream os;
                os << "r(x) >= x at probe point x=" << delta << "; the d=3 criterion needs r(x) < x";
                throw DomainError(os.str());
            }
        }
        g = [&profile](double w) { return 1.0 / std::abs(profile.log_ratio_w(w)); };
    } else {
        const double k = d - 3.0;
        g = [&profile, k](double w) { return std::exp(k * profile.log_ratio_w(w)); };
    }
    quad::Config q;
    q.abs_tol = 1e-14;
    q.rel_tol = 1e-12;
    auto trace = growth::partial_integrals_w(g, probe, q);
    RegularityVerdict v;
    v.fit = growth::classify(trace.W, trace.F);
    // Integrands varying on ln ln scales need the longer range in w.
    if (default_probe && v.fit.result == growth::Convergence::Inconclusive) {
        trace = growth::partial_integrals_w(g, growth::deep_probe(top), q);
        v.fit = growth::classify(trace.W, trace.F);
        v.fit.reason += " (deep probe)";
    }
    v.evidence = evidence_of(trace);
    v.fitted_model = describe_fit(v.fit);
    switch (v.fit.result) {
        case growth::Convergence::Divergent: v.verdict = Verdict::Regular; break;
        case growth::Convergence::Convergent: v.verdict = Verdict::Irregular; break;
        default: v.verdict = Verdict::Inconclusive; break;
    }
    v.closed_form = ito_mckean_closed_form(profile, d);
    v.closed_form_agrees = !v.closed_form || v.closed_form->verdict == v.verdict;
    return v;
}

double DiniModulus::at_w(double w) const {
    switch (kind) {
        case DiniKind::Linear: return std::exp(-w);
        case DiniKind::InvLog: return 1.0 / w;
        case DiniKind::InvLogLog: return 1.0 / std::log(w);
        case DiniKind::Custom: return phi(std::exp(-w));
    }
    return 0.0;
}

DiniVerdict dini_test(const DiniModulus& phi, double c, bool weighted, std::vector<double> probe) {
    if (!(c > 0.0)) throw DomainError("Dini test needs c > 0");
    if (phi.kind == DiniKind::InvLog && !(c < 1.0)) throw DomainError("1/|ln t| needs c < 1");
    if (phi.kind == DiniKind::InvLogLog && !(c < std::exp(-1.0))) throw DomainError("1/ln|ln t| needs c < 1/e");
    if (probe.empty()) probe = growth::default_probe(c);
    for (double delta : probe) {
        const double v = phi.at_w(-std::log(delta));
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream os;
            os << "modulus is negative or non-finite at t=" << delta;
            throw DomainError(os.str());
        }
    }
    auto g = [&phi, weighted](double w) {
        const double v = phi.at_w(w);
        return weighted ? v / w : v;
    };
    quad::Config q;
    q.abs_tol = 1e-14;
    q.rel_tol = 1e-12;
    const auto trace = growth::partial_integrals_w(g, probe, q);
    DiniVerdict v;
    v.evidence = evidence_of(trace);
    v.fit = growth::classify(trace.W, trace.F);
    switch (v.fit.result) {
        case growth::Convergence::Convergent: v.result = DiniResult::Satisfied; break;
        case growth::Convergence::Divergent: v.result = DiniResult::Violated; break;
        default: v.result = DiniResult::Inconclusive; break;
    }
    switch (phi.kind) {
        case DiniKind::Linear:
            v.closed_form = DiniResult::Satisfied;
            v.closed_form_expression = weighted ? "∫ dt/|ln t| < ∞" : "∫ dt < ∞";
            break;
        case DiniKind::InvLog:
            v.closed_form = weighted ? DiniResult::Satisfied : DiniResult::Violated;
            v.closed_form_expression = weighted ? "∫ dt/(t ln^2 t) = 1/|ln c|" : "∫ dt/(t|ln t|) = ∞";
            break;
        case DiniKind::InvLogLog:
            v.closed_form = DiniResult::Violated;
            v.closed_form_expression = weighted ? "∫ dt/(t|ln t| ln|ln t|) = ∞" : "∫ dt/(t ln|ln t|) = ∞";
            break;
        case DiniKind::Custom: break;
    }
    return v;
}

namespace {

// Geometric grid from hi down to lo.
std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> g;
    const double a = std::log(hi), b = std::log(lo);
    for (int i = 0; i < n; ++i) g.push_back(std::exp(a + (b - a) * i / (n - 1)));
    g.front() = hi;
    return g;
}

void fail_hypothesis(const std::string& what, double x) {
    std::ostringstream os;
    os << "hypothesis violated: " << what << " at x=" << x;
    throw HypothesisError(os.str());
}

double rel_slack(double a, double b) { return 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

OmegaDiniReport omega_dini_witness(const PotentialSpec& spec, const std::vector<double>& samples,
                                   const QuadratureConfig& q) {
    if (!(spec.b == -spec.c) || !spec.even) throw HypothesisError("hypothesis violated: spec must be even with b = -c");
    if (!(spec.c < 1.0)) throw HypothesisError("hypothesis violated: c < 1");
    const auto grid = geometric_grid(std::max(spec.c * 1e-12, 1e-300), spec.c, 10000);
    // grid runs from c downward: mu and t^mu h must not increase, h must not decrease along it.
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t0 = grid[i - 1], t1 = grid[i];
        const double m0 = spec.mu(t0), m1 = spec.mu(t1);
        if (m1 > m0 + rel_slack(m0, m1)) fail_hypothesis("mu nondecreasing", t1);
        const double h0 = spec.log_h(t0), h1 = spec.log_h(t1);
        if (h1 < h0 - rel_slack(h0, h1)) fail_hypothesis("h decreasing", t1);
        const double p0 = m0 * std::log(t0) + h0, p1 = m1 * std::log(t1) + h1;
        if (p1 > p0 + rel_slack(p0, p1)) fail_hypothesis("t^mu h increasing", t1);
    }
    OmegaDiniReport rep;
    const double mu0 = spec.mu(0.0);
    for (double x : samples) {
        if (!(x > 0.0 && x <= spec.c)) throw DomainError("omega_dini_witness sample outside (0, c]");
        const auto om = eval_omega(spec, x, x, q);
        OmegaDiniRow row;
        row.x = x;
        row.deviation = std::abs(om.value - mu0);
        row.lower_bound = (spec.mu(0.5 * x) - mu0) / 3.0;
        row.error = om.error;
        row.holds = row.deviation + row.error >= row.lower_bound;
        rep.all_hold = rep.all_hold && row.holds;
        rep.rows.push_back(row);
    }
    auto g = [&spec, mu0](double w) { return (spec.mu(0.5 * std::exp(-w)) - mu0) / 3.0; };
    quad::Config qq;
    qq.abs_tol = 1e-14;
    qq.rel_tol = 1e-12;
    const auto trace = growth::partial_integrals_w(g, growth::deep_probe(spec.c), qq);
    rep.bound_trace = evidence_of(trace);
    rep.bound_integral = growth::classify(trace.W, trace.F);
    return rep;
}

void check_blowup_hypotheses(const PotentialSpec& spec, const SpineProfile& profile, double xmin, double xmax) {
    const double c = std::min(spec.c, profile.c());
    const auto grid = geometric_grid(std::max(c * 1e-12, 1e-300), c, 10000);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const double m = spec.mu(t);
        if (!(m > 1.0)) fail_hypothesis("mu > 1", t);
        if (i == 0) continue;
        const double t0 = grid[i - 1];
        const double m0 = spec.mu(t0);
        if (m > m0 + rel_slack(m0, m)) fail_hypothesis("mu nondecreasing", t);
        const double h0 = spec.log_h(t0), h1 = spec.log_h(t);
        if (h1 < h0 - rel_slack(h0, h1)) fail_hypothesis("h nonincreasing", t);
    }
    for (double t : geometric_grid(xmin, xmax, 2000))
        if (t <= profile.c() && profile.log_value(t) > std::log(0.5 * t) + 1e-12) fail_hypothesis("r(x) <= x/2", t);
}

BlowupReport blowup_check(const PotentialSpec& spec, const SpineProfile& profile, const std::vector<double>& samples,
                          const QuadratureConfig& q) {
    if (samples.size() < 6) throw DomainError("blowup_check needs at least six samples");
    std::vector<double> xs = samples;
    std::sort(xs.begin(), xs.end(), std::greater<>());
    if (!(xs.back() > 0.0) || 2.0 * xs.front() > spec.c || xs.front() > profile.c())
        throw DomainError("blowup samples must satisfy 0 < x and 2x <= c");
    check_blowup_hypotheses(spec, profile, xs.back(), xs.front());
    BlowupReport rep;
    rep.delta = std::pow(2.0, -0.5 * spec.mu(spec.c));
    std::vector<double> W, Q2;
    for (double x : xs) {
        BlowupRow row;
        row.x = x;
        const double lr = profile.log_value(x);
        row.r = std::exp(lr);
        if (!(row.r > 0.0)) {
            std::ostringstream os;
            os << "r(x) underflows at x=" << x;
            throw DomainError(os.str());
        }
        const double m = spec.mu(x);
        const double lratio = lr - std::log(x);
        row.q1 = (m - 1.0) * lratio;
        const double lq2 = lr - m * lratio + spec.log_h(2.0 * x) - std::log(m - 1.0);
        row.q2 = std::exp(lq2);
        row.bound = rep.delta * rep.delta * row.q2 * -std::expm1((m - 1.0) * lratio);
        const auto u = eval_u(spec, x, row.r, q);
        row.u = u.value;
        row.u_error = u.error;
        row.holds = row.u + row.u_error >= row.bound;
        rep.bound_holds = rep.bound_holds && row.holds;
        rep.rows.push_back(row);
        W.push_back(-std::log(x));
        Q2.push_back(row.q2);
    }
    rep.q1_limsup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = rep.rows.size() / 2; i < rep.rows.size(); ++i)
        rep.q1_limsup = std::max(rep.q1_limsup, rep.rows[i].q1);
    rep.q1_negative = rep.q1_limsup < 0.0;
    if (spec.mu_w && spec.log_th_w && profile.kind() != ProfileKind::Custom) {
        // q2 = (x/r)^{m-1} x h(2x) / (m-1), evaluated in w so the fit sees W well beyond 700.
        // Stop once cancellation between the terms costs more than about 1e-6 relative accuracy in q2.
        for (double w = W.back() * std::sqrt(10.0); w < 1e300; w *= std::sqrt(10.0)) {
            const double m = spec.mu_w(w);
            const double a = (1.0 - m) * profile.log_ratio_w(w);
            const double b = spec.log_th_w(w - std::numbers::ln2);
            const double lq2 = a + b - std::numbers::ln2 - std::log(m - 1.0);
            if (!std::isfinite(lq2) || lq2 > 700.0 || (std::abs(a) + std::abs(b)) * 1e-16 > 1e-6) break;
            rep.q2_tail.emplace_back(w, std::exp(lq2));
            W.push_back(w);
            Q2.push_back(std::exp(lq2));
        }
    }
    rep.q2_fit = growth::classify(W, Q2);
    rep.q2_diverges = rep.q2_fit.result == growth::Convergence::Divergent;
    return rep;
}

std::pair<double, double> t21_alpha_window(double eps, int d) {
    if (d < 4) throw DomainError("alpha window needs d >= 4");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("alpha window needs eps in (0,1)");
    return {1.0, ((d - 2) / eps - 1.0) / (d - 3)};
}

}  // namespace cusplab
