#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cusplab/geometry.hpp"
#include "cusplab/growth.hpp"
#include "cusplab/potentials.hpp"

namespace cusplab {

enum class Verdict { Regular, Irregular, Inconclusive };
const char* to_string(Verdict v);

struct ClosedForm {
    Verdict verdict;
    std::string expression;
};

struct RegularityVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::pair<double, double>> evidence;  // (delta, partial integral)
    std::string fitted_model;
    growth::Classification fit;
    std::optional<ClosedForm> closed_form;
    bool closed_form_agrees = true;
};

// Criterion integral for the Laplacian at the tip of |x'| = r(x1):
// d = 3: ∫ dx / (x |ln(r/x)|); d >= 4: ∫ (r/x)^{d-3} dx/x. Divergent means regular.
RegularityVerdict ito_mckean_test(const SpineProfile& profile, int d, std::vector<double> probe = {});
std::optional<ClosedForm> ito_mckean_closed_form(const SpineProfile& profile, int d);

enum class DiniKind { Linear, InvLog, InvLogLog, Custom };
const char* to_string(DiniKind k);

struct DiniModulus {
    DiniKind kind = DiniKind::Custom;
    std::function<double(double)> phi;  // used for Custom
    static DiniModulus linear() { return {DiniKind::Linear, {}}; }
    static DiniModulus inv_log() { return {DiniKind::InvLog, {}}; }
    static DiniModulus inv_loglog() { return {DiniKind::InvLogLog, {}}; }
    static DiniModulus custom(std::function<double(double)> f) { return {DiniKind::Custom, std::move(f)}; }
    // phi(e^{-w})
    double at_w(double w) const;
};

enum class DiniResult { Satisfied, Violated, Inconclusive };
const char* to_string(DiniResult r);

struct DiniVerdict {
    DiniResult result = DiniResult::Inconclusive;
    std::vector<std::pair<double, double>> evidence;
    growth::Classification fit;
    std::optional<DiniResult> closed_form;
    std::string closed_form_expression;
};

// weighted = false: ∫ phi(t)/t dt; weighted = true: ∫ phi(t)/(t |ln t|) dt.
DiniVerdict dini_test(const DiniModulus& phi, double c, bool weighted, std::vector<double> probe = {});

struct OmegaDiniRow {
    double x;
    double deviation;    // |omega(x,x) - omega(0,0)|
    double lower_bound;  // (mu(x/2) - mu(0)) / 3
    double error;        // quadrature error of omega
    bool holds;
};

struct OmegaDiniReport {
    std::vector<OmegaDiniRow> rows;
    bool all_hold = true;
    growth::Classification bound_integral;  // ∫ bound(x)/x dx over [delta, c]
    std::vector<std::pair<double, double>> bound_trace;
};

OmegaDiniReport omega_dini_witness(const PotentialSpec& spec, const std::vector<double>& samples,
                                   const QuadratureConfig& q = {});

struct BlowupRow {
    double x, r;
    double q1;       // (mu(x) - 1) ln(r/x)
    double q2;       // r (x/r)^mu h(2x) / (mu - 1)
    double u, u_error;
    double bound;    // delta^2 q2 [1 - (r/x)^{mu-1}]
    bool holds;
};

struct BlowupReport {
    std::vector<BlowupRow> rows;
    double q1_limsup = 0.0;  // max of q1 over the smaller half of the samples
    bool q1_negative = false;
    growth::Classification q2_fit;
    // (w, q2) past the last sample, from the closed forms in w; empty when unavailable.
    std::vector<std::pair<double, double>> q2_tail;
    bool q2_diverges = false;
    bool bound_holds = true;
    double delta = 0.0;
};

// Samples (mu nondecreasing, h nonincreasing, mu > 1, r <= x/2) on a dense geometric grid.
void check_blowup_hypotheses(const PotentialSpec& spec, const SpineProfile& profile, double xmin, double xmax);
BlowupReport blowup_check(const PotentialSpec& spec, const SpineProfile& profile, const std::vector<double>& samples,
                          const QuadratureConfig& q = {});

// Open interval (1, ((d-2)/eps - 1)/(d-3)) of admissible alpha.
std::pair<double, double> t21_alpha_window(double eps, int d);

}  // namespace cusplab
