#include "cusplab/operators.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "cusplab/errors.hpp"

namespace cusplab {

struct LambdaField::Memo {
    std::mutex m;
    std::map<std::pair<long long, long long>, double> values;
};

LambdaField LambdaField::constant(double lambda0) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw DomainError("constant lambda must be positive");
    LambdaField f;
    f.kind_ = LambdaKind::Constant;
    f.lambda0_ = lambda0;
    return f;
}

LambdaField LambdaField::omega_derived(PotentialSpec spec, double scale, double grid, QuadratureConfig q) {
    if (!(scale > 0.0)) throw DomainError("omega scale must be positive");
    if (grid < 0.0) throw DomainError("memo grid must be nonnegative");
    LambdaField f;
    f.kind_ = LambdaKind::OmegaDerived;
    f.scale_ = scale;
    f.grid_ = grid;
    f.q_ = q;
    f.spec_ = std::make_shared<const PotentialSpec>(std::move(spec));
    f.memo_ = std::make_shared<Memo>();
    return f;
}

LambdaField LambdaField::smooth_patch(LambdaField inner, double eps, SpineProfile profile, double fraction) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("smooth patch eps must lie in (0, 1]");
    if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("smooth patch fraction must lie in (0, 1)");
    LambdaField f;
    f.kind_ = LambdaKind::SmoothPatch;
    f.eps_ = eps;
    f.fraction_ = fraction;
    f.inner_ = std::make_shared<const LambdaField>(std::move(inner));
    f.profile_ = std::make_shared<const SpineProfile>(std::move(profile));
    return f;
}

double LambdaField::operator()(std::span<const double> x) const {
    double v = 0.0;
    switch (kind_) {
        case LambdaKind::Constant: v = lambda0_; break;
        case LambdaKind::OmegaDerived: {
            double x1 = x[0], r = radial_part(x);
            if (grid_ > 0.0) {
                const long long i = std::llround(x1 / grid_), j = std::llround(r / grid_);
                {
                    std::lock_guard<std::mutex> lock(memo_->m);
                    auto it = memo_->values.find({i, j});
                    if (it != memo_->values.end()) return it->second;
                }
                x1 = static_cast<double>(i) * grid_;
                r = static_cast<double>(j) * grid_;
                v = scale_ * eval_omega(*spec_, x1, r, q_).value;
                std::lock_guard<std::mutex> lock(memo_->m);
                memo_->values.emplace(std::make_pair(i, j), v);
            } else {
                v = scale_ * eval_omega(*spec_, x1, r, q_).value;
            }
            break;
        }
        case LambdaKind::SmoothPatch: {
            double zeta = 1.0;
            const double s = -x[0];
            if (s > 0.0 && s <= profile_->c()) {
                const double rr = profile_->value(s);
                const double rho = radial_part(x);
                if (rho <= fraction_ * rr) {
                    zeta = eps_;
                } else if (rho < rr) {
                    const double u = (rho - fraction_ * rr) / ((1.0 - fraction_) * rr);
                    const double step = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
                    zeta = eps_ + (1.0 - eps_) * step;
                }
            }
            v = zeta * (*inner_)(x);
            break;
        }
    }
    if (!std::isfinite(v) || !(v > 0.0)) throw EvaluationError("lambda(x) is not finite and positive");
    return v;
}

std::string LambdaField::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case LambdaKind::Constant: os << "Constant(" << lambda0_ << ")"; break;
        case LambdaKind::OmegaDerived: os << "OmegaDerived(" << spec_->name() << ", scale=" << scale_ << ")"; break;
        case LambdaKind::SmoothPatch: os << "SmoothPatch(" << inner_->describe() << ", eps=" << eps_ << ")"; break;
    }
    return os.str();
}

Eigen::MatrixXd coefficient_matrix_for(double lambda, std::span<const double> x) {
    const Eigen::Index d = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);
    const double r = radial_part(x);
    if (r == 0.0) return a;
    for (Eigen::Index i = 1; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j) {
            const double ni = x[static_cast<std::size_t>(i)] / r, nj = x[static_cast<std::size_t>(j)] / r;
            a(i, j) = a(j, i) = (i == j ? lambda : 0.0) + (1.0 - lambda) * (ni * nj);
        }
    return a;
}

CoefficientMatrix coefficient_matrix(const LambdaField& field, std::span<const double> x, int d) {
    if (static_cast<int>(x.size()) != d) throw DomainError("point has wrong dimension");
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("non-finite point");
    const double lambda = field(x);
    return {coefficient_matrix_for(lambda, x), Point(x.begin(), x.end())};
}

double eigen_spread(const LambdaField& field, std::span<const double> x, bool allow_axis) {
    if (radial_part(x) == 0.0) {
        if (allow_axis) return 1.0;
        throw DomainError("eigen spread requested on the axis x' = 0");
    }
    const double lambda = field(x);
    return lambda <= 1.0 ? lambda : 1.0 / lambda;
}

double radial_residual(const LambdaField& field, int d, double v_x1x1, double v_rr, double v_r,
                       std::span<const double> x) {
    const double r = radial_part(x);
    if (r == 0.0) throw DomainError("radial reduction is undefined on the axis");
    return v_x1x1 + v_rr + field(x) * (d - 2) / r * v_r;
}

Eigen::MatrixXd diffusion_sqrt_for(double lambda, std::span<const double> x) {
    if (!(lambda > 0.0)) throw EvaluationError("lambda must be positive");
    const Eigen::Index d = static_cast<Eigen::Index>(x.size());
    const double s2 = std::sqrt(2.0), sl = std::sqrt(2.0 * lambda);
    const double r = radial_part(x);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    s(0, 0) = s2;
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            const double ni = r > 0 ? x[static_cast<std::size_t>(i)] / r : 0.0;
            const double nj = r > 0 ? x[static_cast<std::size_t>(j)] / r : 0.0;
            const double id = i == j ? 1.0 : 0.0;
            // On the axis the matrix is the identity, so sigma = sqrt(2) I.
            s(i, j) = s(j, i) = r > 0 ? s2 * (ni * nj) + sl * (id - ni * nj) : s2 * id;
        }
    }
    return s;
}

Eigen::MatrixXd diffusion_sqrt(const LambdaField& field, std::span<const double> x, int d) {
    if (static_cast<int>(x.size()) != d) throw DomainError("point has wrong dimension");
    return diffusion_sqrt_for(field(x), x);
}

void apply_diffusion_sqrt(double lambda, std::span<const double> x, std::span<const double> xi,
                          std::span<double> out) {
    const std::size_t d = x.size();
    const double s2 = std::sqrt(2.0);
    out[0] = s2 * xi[0];
    const double r = radial_part(x);
    if (r == 0.0) {
        for (std::size_t i = 1; i < d; ++i) out[i] = s2 * xi[i];
        return;
    }
    double proj = 0.0;
    for (std::size_t i = 1; i < d; ++i) proj += xi[i] * x[i] / r;
    const double sl = std::sqrt(2.0 * lambda);
    for (std::size_t i = 1; i < d; ++i) {
        const double ni = x[i] / r;
        out[i] = s2 * proj * ni + sl * (xi[i] - proj * ni);
    }
}

std::vector<ModulusSample> empirical_modulus(const LambdaField& field, int d, const std::vector<double>& radii,
                                             int samples_per_radius) {
    std::vector<ModulusSample> out;
    for (double rho : radii) {
        double worst = 0.0;
        // Deterministic directions: angle sweep in the (x1, x2) plane, skipping the axis.
        for (int k = 0; k < samples_per_radius; ++k) {
            const double th = M_PI * (k + 0.5) / samples_per_radius;
            Point x(static_cast<std::size_t>(d), 0.0);
            x[0] = rho * std::cos(th);
            x[1] = rho * std::sin(th);
            worst = std::max(worst, std::abs(field(x) - 1.0));
        }
        out.push_back({rho, worst});
    }
    return out;
}

}  // namespace cusplab
