#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace cusplab::limits {

// Extrapolated limit of a sampled sequence together with the evidence used.
struct LimitEstimate {
    double value = 0.0;
    double error = 0.0;
    double observed_order = 0.0;  // from the last three raw samples; 0 if undetermined
    bool certified = false;       // monotone or Cauchy certificate present
    std::string certificate;      // "monotone", "cauchy" or "none"
    std::vector<std::pair<double, double>> sequence;  // (parameter, raw value)
};

// Polynomial extrapolation of f(h) to h = 0 through the given samples.
// Returns the Neville table; row i holds estimates using samples 0..i.
std::vector<std::vector<double>> neville_table(const std::vector<double>& h,
                                               const std::vector<double>& f);

// Samples f at h_k = h0 * ratio^k (k < n) and extrapolates to h = 0 in the
// variable h^order.
LimitEstimate richardson(const std::function<double(double)>& f, double h0, double ratio, int n,
                         double order = 1.0);

// Same, for precomputed samples; nodes are the extrapolation variable.
LimitEstimate extrapolate(const std::vector<double>& nodes, const std::vector<double>& values,
                          const std::vector<double>& params);

double observed_order(double f0, double f1, double f2, double ratio);

struct LinearFit {
    std::vector<double> coef;
    double rms = 0.0;
};

// Least squares for y ≈ Σ coef_j * rows[i][j].
LinearFit least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y);

}  // namespace cusplab::limits
