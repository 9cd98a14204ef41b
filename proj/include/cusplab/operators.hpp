#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cusplab/geometry.hpp"
#include "cusplab/potentials.hpp"

namespace cusplab {

enum class LambdaKind { Constant, OmegaDerived, SmoothPatch };

// Scalar field lambda(x) of the operator L_lambda. Copies share the memo of
// an OmegaDerived field.
class LambdaField {
public:
    static LambdaField constant(double lambda0);
    // lambda(x) = scale * omega(x1, |x'|). With grid > 0 omega is evaluated
    // at (x1, |x'|) rounded to the grid and memoized.
    static LambdaField omega_derived(PotentialSpec spec, double scale, double grid = 0.0,
                                     QuadratureConfig q = {});
    // zeta * inner, with zeta = eps inside the spine over x1 < 0 (|x'| <= fraction r(|x1|)),
    // zeta = 1 outside the spine, quintic smoothstep between.
    static LambdaField smooth_patch(LambdaField inner, double eps, SpineProfile profile, double fraction = 0.5);

    LambdaKind kind() const { return kind_; }
    double operator()(std::span<const double> x) const;
    double constant_value() const { return lambda0_; }
    double scale() const { return scale_; }
    double grid() const { return grid_; }
    double eps() const { return eps_; }
    double fraction() const { return fraction_; }
    const PotentialSpec* spec() const { return spec_.get(); }
    const LambdaField* inner() const { return inner_.get(); }
    const SpineProfile* profile() const { return profile_.get(); }
    std::string describe() const;

private:
    struct Memo;
    LambdaKind kind_ = LambdaKind::Constant;
    double lambda0_ = 1.0;
    double scale_ = 1.0;
    double grid_ = 0.0;
    double eps_ = 1.0;
    double fraction_ = 0.5;
    QuadratureConfig q_{};
    std::shared_ptr<const PotentialSpec> spec_;
    std::shared_ptr<const LambdaField> inner_;
    std::shared_ptr<const SpineProfile> profile_;
    std::shared_ptr<Memo> memo_;
};

struct CoefficientMatrix {
    Eigen::MatrixXd a;
    Point x;
};

// Coefficient matrix of L_lambda for a known lambda value (no field evaluation).
Eigen::MatrixXd coefficient_matrix_for(double lambda, std::span<const double> x);
CoefficientMatrix coefficient_matrix(const LambdaField& field, std::span<const double> x, int d);

double eigen_spread(const LambdaField& field, std::span<const double> x, bool allow_axis = false);

// v_x1x1 + v_rr + lambda (d-2)/r v_r
double radial_residual(const LambdaField& field, int d, double v_x1x1, double v_rr, double v_r,
                       std::span<const double> x);

// sigma with sigma sigma^T = 2 a_lambda(x).
Eigen::MatrixXd diffusion_sqrt(const LambdaField& field, std::span<const double> x, int d);
Eigen::MatrixXd diffusion_sqrt_for(double lambda, std::span<const double> x);

// out = sigma(x) xi for a known lambda without forming the matrix.
void apply_diffusion_sqrt(double lambda, std::span<const double> x, std::span<const double> xi,
                          std::span<double> out);

struct ModulusSample {
    double radius;
    double max_deviation;  // max |lambda - 1| = ||a(x) - I|| over the sampled sphere
};
// Empirical continuity modulus of a_lambda at the origin.
std::vector<ModulusSample> empirical_modulus(const LambdaField& field, int d, const std::vector<double>& radii,
                                             int samples_per_radius);

}  // namespace cusplab
