#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cusplab/geometry.hpp"
#include "cusplab/limits.hpp"
#include "cusplab/quadrature.hpp"

namespace cusplab {

enum class Preset { Custom, Lebesgue, T21_d3, T21_dge4, T23_d3, T23_dge4, L71, MuConst };
const char* to_string(Preset p);

struct PresetParams {
    double eps = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double mu0 = 0.0;
    int d = 0;
};

// Data (b, c, mu, h) of u(x,r) = ∫_b^c |t|^mu h / ((t-x)^2 + r^2)^{mu/2} dt.
struct PotentialSpec {
    double b = 0.0;
    double c = 1.0;
    std::function<double(double)> mu;
    std::function<double(double)> log_h;  // ln h(t), t != 0
    // Optional forms in w = ln(1/t) for t > 0, valid far past the double range of t.
    std::function<double(double)> mu_w;
    std::function<double(double)> log_th_w;  // ln(t h(t))
    Preset preset = Preset::Custom;
    PresetParams params;
    bool even = false;          // mu and h even and b = -c
    bool constant_mu = false;
    double mu_inf = 0.0;        // inf of mu over [b, c]
    std::optional<double> h_integral;  // closed form of ∫ h = u(0, 0)
    std::string name() const;
};

using QuadratureConfig = quad::Config;

namespace presets {
PotentialSpec lebesgue();
PotentialSpec t21_d3(double eps);
// c must satisfy c < 2 e^{-alpha} so that h is decreasing on (0, c].
PotentialSpec t21_dge4(double eps, double alpha, int d, double c = 0.1);
// c < 1/e; t^mu is increasing on (0, c] only for c below about 0.156.
PotentialSpec t23_d3(double c = 0.1);
// mu is nondecreasing on (0, c] only for c < exp(-e^e) ≈ 2.6e-7.
PotentialSpec t23_dge4(double gamma, int d, double c = 1e-7);
PotentialSpec l71(double mu0, double gamma, double c = 0.25);
PotentialSpec mu_const(double mu0, double b = 0.0, double c = 1.0);
}  // namespace presets

PotentialSpec make_custom_spec(double b, double c, std::function<double(double)> mu,
                               std::function<double(double)> h);

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

// Weights of the s-potential form: beta = mu |t|^mu h, nu = mu + 2.
double omega_beta(const PotentialSpec& spec, double t);
double omega_nu(const PotentialSpec& spec, double t);

Estimate eval_u(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});
Estimate eval_omega(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});

struct Derivatives {
    Estimate u_r;
    Estimate laplacian;  // u_xx + u_rr
};
Derivatives eval_derivatives(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});

struct Residual {
    double residual = 0.0;
    double error = 0.0;  // combined quadrature error estimate
    Estimate u_xx, u_rr, u_r, omega;
};
Residual pde_residual(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});

// u(0, 0) = ∫ h; closed form when the preset has one.
Estimate u_at_origin(const PotentialSpec& spec, const QuadratureConfig& q = {});

struct SplitU {
    Estimate u1, u2;
};
SplitU split_u(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});

// u(0,0) - u2(x, r) evaluated without cancellation.
Estimate u2_deficit(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q = {});

struct SpineDerivative {
    double x = 0.0;
    double boundary_terms = 0.0;  // both boundary terms, scaled by x|ln x|^gamma
    double g_term = 0.0;          // g(x) scaled by x|ln x|^gamma
    double total = 0.0;
    double error = 0.0;
};
SpineDerivative u2_spine_derivative(const PotentialSpec& spec, const SpineProfile& profile, double x,
                                    const QuadratureConfig& q = {});

// mu ∫_2^∞ s^{mu-1} (s-1)^{-mu-1} ds (equals 2^mu - 1).
double tail_identity(double mu);
// mu ∫_2^∞ s^{mu-1} (s+1)^{-mu-1} ds, the t < 0 half of the g limit.
double tail_negative(double mu);
// Limit of x|ln x|^gamma [u2(x, r(x))]' for r = o(x).
double spine_derivative_limit(double mu);

// Lebesgue potential: u(x1, r) - [1 + 2 x1 ln(1/r)].
Estimate lebesgue_asymptotic_gap(double x1, double r, const QuadratureConfig& q = {});
// psi(y) = y ∫_{-y}^{y} (s^2+1)^{-1/2} ds = 2 y asinh(y).
double lebesgue_psi(double y);

// Limit of u(0, r) as r -> 0 by Richardson extrapolation in r.
limits::LimitEstimate axis_limit(const PotentialSpec& spec, const QuadratureConfig& q = {});
// Limit of u(x1, e^{-eps/x1}) as x1 -> 0 (Lebesgue preset), fitted on {1, s ln s, s, s^2 ln s, s^2}.
limits::LimitEstimate lebesgue_spine_limit(double eps, const QuadratureConfig& q = {});

// ∫_b^c |t|^mu h dt, checked finite.
Estimate integrability_mass(const PotentialSpec& spec, const QuadratureConfig& q = {});

}  // namespace cusplab
