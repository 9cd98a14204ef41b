#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cusplab {

using Point = std::vector<double>;

enum class ProfileKind { ExpSpine, Power, LogPower, IterLogPower, PowerIterLog, DMinus3LogLog, Custom };

const char* to_string(ProfileKind k);

// Cusp profile r(t) on [0, c]. Immutable.
class SpineProfile {
public:
    static SpineProfile exp_spine(double eps, double c = 1.0);
    static SpineProfile power(double eta, double c = 1.0);
    static SpineProfile log_power(double eta, double c = 0.5);
    // r(t) = t |ln t|^{-p} (ln|ln t|)^{-p}; p = 1/(d-3) in the catalog.
    static SpineProfile iter_log_power(double p, double c = 0.3);
    static SpineProfile power_iter_log(double c = 0.3);
    static SpineProfile dminus3_loglog(int d, double c = 0.3);
    static SpineProfile custom(std::function<double(double)> r, double c, std::string label = "custom");

    ProfileKind kind() const { return kind_; }
    double param() const { return param_; }
    int dim() const { return dim_; }
    double c() const { return c_; }
    const std::string& label() const { return label_; }
    // Upper end t0 of the window (0, t0) where the formula is defined and
    // increasing; +inf when unrestricted.
    double validity_end() const;

    double value(double t) const;       // r(t), checks t in [0, c]
    double log_value(double t) const;   // ln r(t) for t in (0, c]
    double derivative(double t) const;  // r'(t) for t in (0, c]
    // ln(r(x)/x) at x = e^{-w}; stays accurate for large w.
    double log_ratio_w(double w) const;
    std::string describe() const;

private:
    SpineProfile(ProfileKind k, double param, int dim, double c, std::string label);
    void check_t(double t) const;

    ProfileKind kind_;
    double param_;
    int dim_;
    double c_;
    std::string label_;
    std::shared_ptr<const std::function<double(double)>> custom_;
};

double eval_profile(const SpineProfile& profile, double t);

enum class BoundaryClass { Sphere, Spine, Origin, NotBoundary };
const char* to_string(BoundaryClass b);

class CuspDomain {
public:
    CuspDomain(int d, double c, SpineProfile profile, bool symmetric);

    int d() const { return d_; }
    double c() const { return c_; }             // requested radius
    double radius() const { return c_eff_; }    // effective radius after validity clamping
    bool clamped() const { return c_eff_ < c_; }
    const SpineProfile& profile() const { return profile_; }
    bool symmetric() const { return symmetric_; }

    // Spine radius over axial coordinate x1, or a negative value where there is no spine.
    double spine_radius(double x1) const;
    bool contains(std::span<const double> x) const;
    BoundaryClass classify_boundary(std::span<const double> x, double tol) const;
    // Cheap first-order distance estimates used for step control.
    double sphere_distance(std::span<const double> x) const;
    double spine_distance(double x1, double rho) const;

private:
    int d_;
    double c_, c_eff_;
    SpineProfile profile_;
    bool symmetric_;
};

bool contains(const CuspDomain& domain, std::span<const double> x);
BoundaryClass classify_boundary(const CuspDomain& domain, std::span<const double> x, double tol);

double radial_part(std::span<const double> x);  // |x'|
double norm(std::span<const double> x);

}  // namespace cusplab
