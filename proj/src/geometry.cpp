#include "cusplab/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cusplab/errors.hpp"

namespace cusplab {

namespace {
constexpr double kInvE = 0.36787944117144233;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}
}  // namespace

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::ExpSpine: return "ExpSpine";
        case ProfileKind::Power: return "Power";
        case ProfileKind::LogPower: return "LogPower";
        case ProfileKind::IterLogPower: return "IterLogPower";
        case ProfileKind::PowerIterLog: return "PowerIterLog";
        case ProfileKind::DMinus3LogLog: return "DMinus3LogLog";
        case ProfileKind::Custom: return "Custom";
    }
    return "?";
}

const char* to_string(BoundaryClass b) {
    switch (b) {
        case BoundaryClass::Sphere: return "Sphere";
        case BoundaryClass::Spine: return "Spine";
        case BoundaryClass::Origin: return "Origin";
        case BoundaryClass::NotBoundary: return "NotBoundary";
    }
    return "?";
}

SpineProfile::SpineProfile(ProfileKind k, double param, int dim, double c, std::string label)
    : kind_(k), param_(param), dim_(dim), c_(c), label_(std::move(label)) {
    require_positive(c, "profile domain end c");
    const double t0 = validity_end();
    if (!(c < t0)) {
        std::ostringstream os;
        os << to_string(k) << " profile is only defined and increasing on (0, " << t0 << "); c=" << c;
        throw DomainError(os.str());
    }
}

SpineProfile SpineProfile::exp_spine(double eps, double c) {
    require_positive(eps, "ExpSpine eps");
    return {ProfileKind::ExpSpine, eps, 0, c, "ExpSpine"};
}
SpineProfile SpineProfile::power(double eta, double c) {
    require_positive(eta, "Power eta");
    return {ProfileKind::Power, eta, 0, c, "Power"};
}
SpineProfile SpineProfile::log_power(double eta, double c) {
    require_positive(eta, "LogPower eta");
    return {ProfileKind::LogPower, eta, 0, c, "LogPower"};
}
SpineProfile SpineProfile::iter_log_power(double p, double c) {
    require_positive(p, "IterLogPower p");
    return {ProfileKind::IterLogPower, p, 0, c, "IterLogPower"};
}
SpineProfile SpineProfile::power_iter_log(double c) { return {ProfileKind::PowerIterLog, 0.0, 0, c, "PowerIterLog"}; }
SpineProfile SpineProfile::dminus3_loglog(int d, double c) {
    if (d < 4) throw DomainError("DMinus3LogLog needs d >= 4");
    return {ProfileKind::DMinus3LogLog, 1.0 / (d - 3), d, c, "DMinus3LogLog"};
}
SpineProfile SpineProfile::custom(std::function<double(double)> r, double c, std::string label) {
    SpineProfile p{ProfileKind::Custom, 0.0, 0, c, std::move(label)};
    p.custom_ = std::make_shared<const std::function<double(double)>>(std::move(r));
    return p;
}

double SpineProfile::validity_end() const {
    switch (kind_) {
        case ProfileKind::ExpSpine:
        case ProfileKind::Power:
        case ProfileKind::Custom: return kInf;
        case ProfileKind::LogPower: return 1.0;
        case ProfileKind::IterLogPower:
        case ProfileKind::DMinus3LogLog:
        case ProfileKind::PowerIterLog: return kInvE;
    }
    return kInf;
}

void SpineProfile::check_t(double t) const {
    if (!std::isfinite(t) || t < 0.0 || t > c_) {
        std::ostringstream os;
        os << "profile argument t=" << t << " outside [0, " << c_ << "]";
        throw DomainError(os.str());
    }
}

double SpineProfile::log_ratio_w(double w) const {
    switch (kind_) {
        case ProfileKind::ExpSpine: return w - param_ * std::exp(w);
        case ProfileKind::Power: return -(param_ - 1.0) * w;
        case ProfileKind::LogPower: return -param_ * std::log(w);
        case ProfileKind::IterLogPower:
        case ProfileKind::DMinus3LogLog: return -param_ * (std::log(w) + std::log(std::log(w)));
        case ProfileKind::PowerIterLog: return -w * std::abs(std::log(w));
        case ProfileKind::Custom: {
            const double t = std::exp(-w);
            const double r = (*custom_)(t);
            if (!std::isfinite(r) || r < 0.0) throw EvaluationError("custom profile returned invalid value");
            return std::log(r) + w;
        }
    }
    return 0.0;
}

double SpineProfile::log_value(double t) const {
    check_t(t);
    if (t == 0.0) return -kInf;
    if (kind_ == ProfileKind::ExpSpine) return -param_ / t;
    if (kind_ == ProfileKind::Power) return param_ * std::log(t);
    const double w = -std::log(t);
    return log_ratio_w(w) - w;
}

double SpineProfile::value(double t) const {
    check_t(t);
    if (t == 0.0) return 0.0;
    if (kind_ == ProfileKind::Custom) {
        const double r = (*custom_)(t);
        if (!std::isfinite(r) || r < 0.0) throw EvaluationError("custom profile returned invalid value");
        return r;
    }
    return std::exp(log_value(t));
}

double SpineProfile::derivative(double t) const {
    check_t(t);
    if (t == 0.0) throw DomainError("profile derivative requested at t=0");
    const double r = value(t);
    const double L = -std::log(t);
    switch (kind_) {
        case ProfileKind::ExpSpine: return r * param_ / (t * t);
        case ProfileKind::Power: return param_ * std::pow(t, param_ - 1.0);
        case ProfileKind::LogPower: return std::pow(L, -param_) * (1.0 + param_ / L);
        case ProfileKind::IterLogPower:
        case ProfileKind::DMinus3LogLog:
            return r / t * (1.0 + param_ / L + param_ / (L * std::log(L)));
        case ProfileKind::PowerIterLog: return r / t * (2.0 + std::log(L));
        case ProfileKind::Custom: {
            const double h = 1e-5 * t;
            const double hi = std::min(t + h, c_);
            const double lo = t - h;
            return (value(hi) - value(lo)) / (hi - lo);
        }
    }
    return 0.0;
}

std::string SpineProfile::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
        case ProfileKind::ExpSpine: os << "(eps=" << param_ << ")"; break;
        case ProfileKind::Power:
        case ProfileKind::LogPower: os << "(eta=" << param_ << ")"; break;
        case ProfileKind::IterLogPower: os << "(p=" << param_ << ")"; break;
        case ProfileKind::DMinus3LogLog: os << "(d=" << dim_ << ")"; break;
        case ProfileKind::Custom: os << "(" << label_ << ")"; break;
        default: break;
    }
    return os.str();
}

double eval_profile(const SpineProfile& profile, double t) { return profile.value(t); }

namespace {
// Euclidean norm scaled by the largest entry so tiny radii do not underflow.
double scaled_norm(std::span<const double> v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    if (m == 0.0 || !std::isfinite(m)) return m;
    double s = 0.0;
    for (double e : v) s += (e / m) * (e / m);
    return m * std::sqrt(s);
}
}  // namespace

double radial_part(std::span<const double> x) { return x.size() > 1 ? scaled_norm(x.subspan(1)) : 0.0; }

double norm(std::span<const double> x) { return scaled_norm(x); }

CuspDomain::CuspDomain(int d, double c, SpineProfile profile, bool symmetric)
    : d_(d), c_(c), c_eff_(c), profile_(std::move(profile)), symmetric_(symmetric) {
    if (d < 3) throw DomainError("dimension must be at least 3");
    require_positive(c, "domain radius c");
    c_eff_ = std::min(c, profile_.c());
}

double CuspDomain::spine_radius(double x1) const {
    const double s = symmetric_ ? std::abs(x1) : x1;
    if (s < 0.0 || s > profile_.c()) return -1.0;
    return profile_.value(s);
}

namespace {
void check_point(std::span<const double> x, int d) {
    if (static_cast<int>(x.size()) != d) throw DomainError("point has wrong dimension");
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("non-finite point coordinate");
}
}  // namespace

bool CuspDomain::contains(std::span<const double> x) const {
    check_point(x, d_);
    if (!(norm(x) < c_eff_)) return false;
    const double r = spine_radius(x[0]);
    if (r < 0.0) return true;
    return radial_part(x) > r;
}

BoundaryClass CuspDomain::classify_boundary(std::span<const double> x, double tol) const {
    if (!(tol > 0.0)) throw DomainError("classification tolerance must be positive");
    check_point(x, d_);
    const double n = norm(x);
    if (n <= tol) return BoundaryClass::Origin;
    const double s = symmetric_ ? std::abs(x[0]) : x[0];
    if (s >= -tol && s <= profile_.c() + tol && n <= c_eff_ + tol) {
        const double sc = std::clamp(s, 0.0, profile_.c());
        if (radial_part(x) <= profile_.value(sc) + tol) return BoundaryClass::Spine;
    }
    if (std::abs(n - c_eff_) <= tol) return BoundaryClass::Sphere;
    return BoundaryClass::NotBoundary;
}

double CuspDomain::sphere_distance(std::span<const double> x) const { return std::abs(c_eff_ - norm(x)); }

double CuspDomain::spine_distance(double x1, double rho) const {
    const double s = symmetric_ ? std::abs(x1) : x1;
    if (s <= 0.0) return std::hypot(s, rho);
    if (s > profile_.c()) return std::hypot(s - profile_.c(), std::max(0.0, rho - profile_.value(profile_.c())));
    const double r = profile_.value(s);
    double slope = 0.0;
    if (profile_.kind() != ProfileKind::Custom) slope = profile_.derivative(s);
    return std::min(std::abs(rho - r) / std::sqrt(1.0 + slope * slope), std::hypot(s, rho));
}

bool contains(const CuspDomain& domain, std::span<const double> x) { return domain.contains(x); }
BoundaryClass classify_boundary(const CuspDomain& domain, std::span<const double> x, double tol) {
    return domain.classify_boundary(x, tol);
}

}  // namespace cusplab
