#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cusplab/geometry.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/potentials.hpp"

namespace cusplab {

// v and the derivatives entering L for a function v(x1, |x'|).
struct RadialJet {
    double v = 0.0;
    double v_x1x1 = 0.0;
    double v_rr = 0.0;
    double v_r = 0.0;
    double error = 0.0;
};

// Function of a d-point, optionally axisymmetric with a known radial jet.
struct FieldFunction {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::function<RadialJet(double x1, double r)> jet;  // empty when not axisymmetric
    // Closed form of Lw given lambda at the point; returns {value, rounding error}.
    std::function<Estimate(std::span<const double>, double lambda, int d)> analytic_L;

    // |x'|^k
    static FieldFunction radial_power(double k);
    // |x|^{-p}
    static FieldFunction inv_power(double p);
    // |x|^2
    static FieldFunction quadratic();
    static FieldFunction constant(double value);
    // u(x1, |x'|) for a potential, derivatives from the same quadrature.
    static FieldFunction potential(PotentialSpec spec, QuadratureConfig q = {});
    // u(0,0) - u(x1, |x'|)
    static FieldFunction potential_deficit(PotentialSpec spec, QuadratureConfig q = {});
};

struct LwValue {
    double value = 0.0;
    double error = 0.0;
    std::string method;  // "analytic", "radial", "finite-difference"
};

// L_lambda w at x: closed form when given, else the radial jet, else fourth-order differences.
LwValue apply_operator(const FieldFunction& w, const LambdaField& field, std::span<const double> x, int d);

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // signed distance from failure; positive when passed
    std::string detail;
};

struct BarrierCandidate {
    FieldFunction w;
    LambdaField field;
    CuspDomain domain;
};

struct AnnulusSummary {
    double rho_in, rho_out;
    int points;
    double min_w;
    double max_Lw;
};

struct BarrierReport {
    std::string candidate;
    std::string operator_description;
    std::vector<HypothesisCheck> hypotheses;  // (a) Lw <= 0, (b) inf w > 0 on annuli, (c) w -> 0
    std::vector<AnnulusSummary> annuli;
    double max_Lw = 0.0;
    double max_Lw_error = 0.0;
    std::string lw_method;
    std::vector<std::pair<double, double>> decay;  // (|x|, w) along the approach sequence
    bool passed = false;
};

// Geometric annuli (R 2^{-k-1}, R 2^{-k}), k = 1..n, with R the domain radius.
std::vector<std::pair<double, double>> default_annuli(const CuspDomain& domain, int n = 4);
BarrierReport verify_barrier(const BarrierCandidate& cand, const std::vector<std::pair<double, double>>& annuli,
                             int grid_density = 16);

struct SuperharmonicGrid {
    double rmin = 1e-3;
    double rmax = 1.0;
    int radii = 24;
    int angles = 24;
};

struct SuperharmonicReport {
    double p = 0.0;
    int d = 3;
    std::string operator_description;
    HypothesisCheck superharmonic;  // L|x|^{-p} <= 0 on the grid
    HypothesisCheck blows_up;       // |x|^{-p} -> inf at 0
    double max_Lw = 0.0;
    int points = 0;
    int violations = 0;
    bool passed = false;
};

SuperharmonicReport verify_superharmonic_blowup(double p, const LambdaField& field, int d,
                                                const SuperharmonicGrid& grid = {});

enum class ApproachClass { Interior, Boundary };
const char* to_string(ApproachClass c);

struct ApproachPath {
    std::string name;
    ApproachClass cls = ApproachClass::Interior;
    std::function<Point(double s)> point;
    double s0 = 0.1;
    double ratio = 0.5;
    int samples = 14;
};

// Default paths: along x' (0, s), obliquely at 45 and 135 degrees, and along the spine (s, r(s)).
std::vector<ApproachPath> default_approach_paths(const CuspDomain& domain);

struct WitnessPair {
    FieldFunction u;
    FieldFunction w;
    LambdaField field;
};

struct PathEstimate {
    std::string name;
    ApproachClass cls;
    std::vector<std::pair<double, double>> samples;  // (s, u)
    std::vector<double> w_values;
    double liminf = 0.0;  // +inf when u diverges along the path
    double error = 0.0;
    double running_min = 0.0;
    bool diverges = false;
    bool w_blows_up = false;
};

struct WitnessReport {
    std::vector<PathEstimate> paths;
    double alpha = 0.0;  // interior liminf
    double beta = 0.0;   // boundary liminf
    double alpha_error = 0.0, beta_error = 0.0;
    double gap = 0.0;    // beta - alpha
    std::vector<HypothesisCheck> hypotheses;
    bool valid = false;
    std::string failed;  // name of the first failed inequality
    std::string note;
};

WitnessReport irregularity_witness(const WitnessPair& pair, const CuspDomain& domain,
                                   const std::vector<ApproachPath>& paths);
WitnessReport irregularity_witness(const WitnessPair& pair, const CuspDomain& domain);

struct RatioRow {
    double x = 0.0;
    double r = 0.0;
    double deficit = 0.0;        // u(0,0) - u2(x, r(x))
    double u1 = 0.0;             // u1(x, r(x))
    double denominator = 0.0;    // N |ln x|^{eta(mu-1)-gamma} or N |ln x|^{-gamma/2}
    double ratio = 0.0;          // deficit / denominator
    double ratio_u1 = 0.0;       // deficit / u1
    double error = 0.0;
};

struct RatioReport {
    double mu = 0.0;
    double eta = 0.0;
    double gamma = 0.0;
    double N = 0.0;
    std::vector<RatioRow> rows;
    bool increasing = false;
    bool exceeds_one = false;   // final ratio > 1
    bool passed = false;
};

// The ratio condition for the barrier u(0,0) - u(x1, |x'|) on the domain |x'| > |x1| |ln|x1||^{-eta}.
RatioReport barrier_ratio_check(const PotentialSpec& spec, const SpineProfile& profile, int d,
                                const std::vector<double>& samples, const QuadratureConfig& q = {});

}  // namespace cusplab
