#include "cusplab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cusplab/errors.hpp"
#include "cusplab/limits.hpp"

namespace cusplab::growth {

const char* to_string(Convergence c) {
    switch (c) {
        case Convergence::Convergent: return "Convergent";
        case Convergence::Divergent: return "Divergent";
        case Convergence::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

struct Model {
    const char* name;
    const char* formula;
    bool divergent;
    double sign;  // F = A + sign * B * phi(W), B >= 0
    double pmin, pmax;  // exponent range; pmin = pmax = 0 for parameter-free models
    std::function<double(double, double)> phi;
};

std::vector<Model> models() {
    return {
        {"log", "A + B ln(1/delta)", true, 1.0, 0, 0, [](double w, double) { return w; }},
        {"loglog", "A + B ln ln(1/delta)", true, 1.0, 0, 0, [](double w, double) { return std::log(w); }},
        {"logloglog", "A + B ln ln ln(1/delta)", true, 1.0, 0, 0,
         [](double w, double) { return std::log(std::log(w)); }},
        // li(ln(1/delta)): partial integrals of 1/ln w.
        {"log_integral", "A + B li(ln(1/delta))", true, 1.0, 0, 0,
         [](double w, double) { return std::expint(std::log(w)); }},
        {"power_div", "A + B delta^{-p}", true, 1.0, 0.01, 30.0, [](double w, double p) { return std::exp(p * w); }},
        {"logpower_div", "A + B ln(1/delta)^q", true, 1.0, 0.02, 10.0,
         [](double w, double p) { return std::pow(w, p); }},
        {"power_conv", "A - B delta^p", false, -1.0, 0.01, 30.0, [](double w, double p) { return std::exp(-p * w); }},
        {"logpower_conv", "A - B ln(1/delta)^{-q}", false, -1.0, 0.02, 10.0,
         [](double w, double p) { return std::pow(w, -p); }},
    };
}

ModelFit fit_fixed(const Model& m, const std::vector<double>& W, const std::vector<double>& F, double p) {
    ModelFit fit{m.name, m.formula, m.divergent, true, 0, 0, p, 0};
    std::vector<std::vector<double>> rows;
    for (double w : W) rows.push_back({1.0, m.sign * m.phi(w, p)});
    for (const auto& row : rows)
        if (!std::isfinite(row[1])) {
            fit.rms = std::numeric_limits<double>::infinity();
            return fit;
        }
    auto ls = limits::least_squares(rows, F);
    if (ls.coef[1] >= 0.0) {
        fit.A = ls.coef[0];
        fit.B = ls.coef[1];
        fit.rms = ls.rms;
    } else {
        double mean = 0.0;
        for (double f : F) mean += f;
        mean /= static_cast<double>(F.size());
        double ss = 0.0;
        for (double f : F) ss += (f - mean) * (f - mean);
        fit.A = mean;
        fit.B = 0.0;
        fit.rms = std::sqrt(ss / static_cast<double>(F.size()));
    }
    return fit;
}

ModelFit fit_model(const Model& m, const std::vector<double>& W, const std::vector<double>& F) {
    if (m.pmax == 0.0) return fit_fixed(m, W, F, 0.0);
    const double wmax = *std::max_element(W.begin(), W.end());
    // Keep delta^{-p} representable.
    const double pcap = std::string(m.name) == "power_div" ? std::min(m.pmax, 600.0 / wmax) : m.pmax;
    const int n = 120;
    const double la = std::log(m.pmin), lb = std::log(std::max(pcap, m.pmin * 1.0001));
    ModelFit best;
    best.rms = std::numeric_limits<double>::infinity();
    int ibest = 0;
    for (int i = 0; i < n; ++i) {
        const double p = std::exp(la + (lb - la) * i / (n - 1));
        auto f = fit_fixed(m, W, F, p);
        if (f.rms < best.rms) {
            best = f;
            ibest = i;
        }
    }
    // Golden-section refinement in ln p around the grid minimum.
    double lo = la + (lb - la) * std::max(0, ibest - 1) / (n - 1);
    double hi = la + (lb - la) * std::min(n - 1, ibest + 1) / (n - 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    auto f1 = fit_fixed(m, W, F, std::exp(x1)), f2 = fit_fixed(m, W, F, std::exp(x2));
    for (int it = 0; it < 40; ++it) {
        if (f1.rms < f2.rms) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = fit_fixed(m, W, F, std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = fit_fixed(m, W, F, std::exp(x2));
        }
    }
    if (f1.rms < best.rms) best = f1;
    if (f2.rms < best.rms) best = f2;
    return best;
}

}  // namespace

Classification classify(const std::vector<double>& W, const std::vector<double>& F, double required_margin) {
    if (W.size() != F.size() || W.size() < 6) throw DomainError("classification needs at least six probe values");
    Classification out;
    const std::size_t n = F.size();
    double fmax = 0.0;
    for (double f : F) fmax = std::max(fmax, std::abs(f));
    const double floor = 1e-13 * std::max(fmax, 1e-300);

    // Saturated tail: the second half of the probe adds nothing at double precision.
    if (std::abs(F[n - 1] - F[n / 2]) <= 1e-13 * std::max(fmax, 1e-300)) {
        out.result = Convergence::Convergent;
        out.reason = "tail saturated at double precision (Cauchy)";
        out.best = {"saturated", "F constant", false, true, F[n - 1], 0.0, 0.0, 0.0};
        return out;
    }

    const double wmin = *std::min_element(W.begin(), W.end());
    for (const auto& m : models()) {
        const std::string name = m.name;
        if ((name == "logloglog" || name == "log_integral") && !(wmin > 1.0)) {
            ModelFit f{m.name, m.formula, m.divergent, false, 0, 0, 0, std::numeric_limits<double>::infinity()};
            out.fits.push_back(f);
            continue;
        }
        out.fits.push_back(fit_model(m, W, F));
    }
    const ModelFit* best = nullptr;
    for (const auto& f : out.fits)
        if (f.available && (!best || f.rms < best->rms)) best = &f;
    const ModelFit* rival = nullptr;
    for (const auto& f : out.fits)
        if (f.available && f.divergent != best->divergent && (!rival || f.rms < rival->rms)) rival = &f;
    out.best = *best;
    out.rival = *rival;
    out.margin = rival->rms / std::max(best->rms, floor);
    if (out.margin < required_margin) {
        out.result = Convergence::Inconclusive;
        out.reason = "best model does not beat the opposite class by the required margin";
        return out;
    }
    if (best->divergent) {
        if (!(F[n - 1] > F[n - 2])) {
            out.result = Convergence::Inconclusive;
            out.reason = "divergent model preferred but the tail is not increasing";
            return out;
        }
        out.result = Convergence::Divergent;
        out.reason = "divergent model preferred";
        return out;
    }
    // Convergent: require nonincreasing tail increments over the second half.
    for (std::size_t k = n / 2 + 1; k + 1 < n; ++k) {
        const double d0 = F[k] - F[k - 1], d1 = F[k + 1] - F[k];
        if (d1 > d0 + 1e-12 * std::max(fmax, 1e-300)) {
            out.result = Convergence::Inconclusive;
            out.reason = "convergent model preferred but tail increments are not decreasing";
            return out;
        }
    }
    out.result = Convergence::Convergent;
    out.reason = "convergent model preferred with Cauchy tail";
    return out;
}

std::vector<double> default_probe(double c, int kmax) {
    std::vector<double> d;
    for (int k = 1; k <= kmax; ++k) d.push_back(std::ldexp(c, -k));
    return d;
}

std::vector<double> deep_probe(double c, double wmax, int n) {
    const double w0 = -std::log(0.5 * c);
    if (!(wmax > w0) || n < 2) throw DomainError("deep probe needs ln(2/c) < wmax and n >= 2");
    std::vector<double> d;
    for (int k = 0; k < n; ++k) d.push_back(std::exp(-w0 * std::pow(wmax / w0, k / double(n - 1))));
    d.front() = 0.5 * c;
    return d;
}

Trace partial_integrals_w(const std::function<double(double)>& g, const std::vector<double>& deltas,
                          const quad::Config& q) {
    if (deltas.size() < 2) throw DomainError("probe needs at least two points");
    Trace t;
    t.delta = deltas;
    double acc = 0.0, err = 0.0;
    double wprev = -std::log(deltas[0]);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw DomainError("probe points must be positive");
        if (k > 0 && !(deltas[k] < deltas[k - 1])) throw DomainError("probe points must decrease");
        const double w = -std::log(deltas[k]);
        if (k > 0) {
            auto res = quad::integrate_scalar(g, wprev, w, q);
            acc += res.value[0];
            err += res.error[0];
        }
        t.W.push_back(w);
        t.F.push_back(acc);
        wprev = w;
    }
    (void)err;
    return t;
}

}  // namespace cusplab::growth
