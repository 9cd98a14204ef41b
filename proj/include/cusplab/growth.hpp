#pragma once

// Convergence/divergence classification of partial integrals F(W), W = ln(1/delta),
// by competing growth models.

#include <functional>
#include <string>
#include <vector>

#include "cusplab/quadrature.hpp"

namespace cusplab::growth {

enum class Convergence { Convergent, Divergent, Inconclusive };
const char* to_string(Convergence c);

struct ModelFit {
    std::string name;
    std::string formula;
    bool divergent = false;
    bool available = true;
    double A = 0.0, B = 0.0, exponent = 0.0;
    double rms = 0.0;
};

struct Classification {
    Convergence result = Convergence::Inconclusive;
    std::vector<ModelFit> fits;
    ModelFit best, rival;  // rival: best model of the opposite class
    double margin = 0.0;   // rival.rms / best.rms (floored)
    std::string reason;
};

Classification classify(const std::vector<double>& W, const std::vector<double>& F, double required_margin = 10.0);

// delta_k = c 2^{-k}, k = 1..kmax
std::vector<double> default_probe(double c, int kmax = 40);
// ln(1/delta_k) geometric from ln(2/c) to wmax; for slowly varying integrands.
std::vector<double> deep_probe(double c, double wmax = 690.0, int n = 40);

struct Trace {
    std::vector<double> delta, W, F;
};

// F_k = ∫_{W_0}^{W_k} g(w) dw with W_k = ln(1/delta_k); the first probe point is the upper end.
Trace partial_integrals_w(const std::function<double(double)>& g, const std::vector<double>& deltas,
                          const quad::Config& q = {});

}  // namespace cusplab::growth
