#include "cusplab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cusplab/errors.hpp"
#include "cusplab/growth.hpp"
#include "cusplab/limits.hpp"

namespace cusplab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

double axial_r(std::span<const double> x) { return radial_part(x); }

RadialJet negate(RadialJet j) {
    j.v = -j.v;
    j.v_x1x1 = -j.v_x1x1;
    j.v_rr = -j.v_rr;
    j.v_r = -j.v_r;
    return j;
}

Point embed(int d, double x1, double r) {
    Point x(static_cast<std::size_t>(d), 0.0);
    x[0] = x1;
    if (d > 1) x[1] = r;
    return x;
}

}  // namespace

FieldFunction FieldFunction::radial_power(double k) {
    FieldFunction f;
    std::ostringstream os;
    os << "|x'|^" << k;
    f.name = os.str();
    f.value = [k](std::span<const double> x) { return std::pow(axial_r(x), k); };
    f.jet = [k](double, double r) {
        RadialJet j;
        j.v = std::pow(r, k);
        j.v_rr = k * (k - 1.0) * std::pow(r, k - 2.0);
        j.v_r = k * std::pow(r, k - 1.0);
        return j;
    };
    f.analytic_L = [k](std::span<const double> x, double lambda, int d) {
        const double r = axial_r(x);
        const double base = k * std::pow(r, k - 2.0);
        const double bracket = (k - 1.0) + lambda * (d - 2);
        return Estimate{base * bracket, 4.0 * kEps * std::abs(base) * (std::abs(k - 1.0) + std::abs(lambda * (d - 2)))};
    };
    return f;
}

FieldFunction FieldFunction::inv_power(double p) {
    FieldFunction f;
    std::ostringstream os;
    os << "|x|^-" << p;
    f.name = os.str();
    f.value = [p](std::span<const double> x) { return std::pow(norm(x), -p); };
    f.jet = [p](double x1, double r) {
        const double R2 = x1 * x1 + r * r;
        const double a = p * std::pow(R2, -0.5 * p - 1.0);
        RadialJet j;
        j.v = std::pow(R2, -0.5 * p);
        j.v_x1x1 = -a + (p + 2.0) * a * x1 * x1 / R2;
        j.v_rr = -a + (p + 2.0) * a * r * r / R2;
        j.v_r = -a * r;
        return j;
    };
    f.analytic_L = [p](std::span<const double> x, double lambda, int d) {
        const double R = norm(x);
        const double a = p * std::pow(R, -p - 2.0);
        const double bracket = p - lambda * (d - 2);
        return Estimate{a * bracket, 4.0 * kEps * a * (p + std::abs(lambda * (d - 2)))};
    };
    return f;
}

FieldFunction FieldFunction::quadratic() {
    FieldFunction f;
    f.name = "|x|^2";
    f.value = [](std::span<const double> x) {
        const double n = norm(x);
        return n * n;
    };
    f.jet = [](double x1, double r) { return RadialJet{x1 * x1 + r * r, 2.0, 2.0, 2.0 * r, 0.0}; };
    f.analytic_L = [](std::span<const double>, double lambda, int d) {
        return Estimate{2.0 * (2.0 + lambda * (d - 2)), 0.0};
    };
    return f;
}

FieldFunction FieldFunction::constant(double value) {
    FieldFunction f;
    std::ostringstream os;
    os << "const " << value;
    f.name = os.str();
    f.value = [value](std::span<const double>) { return value; };
    f.jet = [value](double, double) { return RadialJet{value, 0.0, 0.0, 0.0, 0.0}; };
    f.analytic_L = [](std::span<const double>, double, int) { return Estimate{0.0, 0.0}; };
    return f;
}

FieldFunction FieldFunction::potential(PotentialSpec spec, QuadratureConfig q) {
    FieldFunction f;
    f.name = "u[" + spec.name() + "]";
    auto s = std::make_shared<const PotentialSpec>(std::move(spec));
    f.value = [s, q](std::span<const double> x) { return eval_u(*s, x[0], axial_r(x), q).value; };
    f.jet = [s, q](double x1, double r) {
        const auto res = pde_residual(*s, x1, r, q);
        RadialJet j;
        j.v = eval_u(*s, x1, r, q).value;
        j.v_x1x1 = res.u_xx.value;
        j.v_rr = res.u_rr.value;
        j.v_r = res.u_r.value;
        j.error = res.u_xx.error + res.u_rr.error + res.u_r.error;
        return j;
    };
    return f;
}

FieldFunction FieldFunction::potential_deficit(PotentialSpec spec, QuadratureConfig q) {
    FieldFunction f = potential(spec, q);
    f.name = "u(0,0) - u[" + spec.name() + "]";
    const double u0 = u_at_origin(spec, q).value;
    auto value = f.value;
    auto jet = f.jet;
    f.value = [value, u0](std::span<const double> x) { return u0 - value(x); };
    f.jet = [jet, u0](double x1, double r) {
        RadialJet j = negate(jet(x1, r));
        j.v += u0;
        return j;
    };
    return f;
}

namespace {

// Fourth-order central differences of sum a_ij d_ij w.
LwValue finite_difference_L(const FieldFunction& w, const LambdaField& field, std::span<const double> x, int d) {
    const double rr = axial_r(x);
    const double n = norm(x);
    double scale = n;
    if (rr > 0.0) scale = std::min(scale, rr);
    if (!(scale > 0.0)) throw EvaluationError("finite differences at the origin");
    const double lambda = field(x);
    const Eigen::MatrixXd a = coefficient_matrix_for(lambda, x);
    Point y(x.begin(), x.end());
    auto f = [&](int i, double si, int j, double sj) {
        y.assign(x.begin(), x.end());
        y[static_cast<std::size_t>(i)] += si;
        y[static_cast<std::size_t>(j)] += sj;
        return w.value(y);
    };
    const double f0 = w.value(x);
    auto L_at = [&](double h) {
        double total = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dii = (-f(i, 2 * h, i, 0) + 16 * f(i, h, i, 0) - 30 * f0 + 16 * f(i, -h, i, 0) -
                                f(i, -2 * h, i, 0)) /
                               (12 * h * h);
            total += a(i, i) * dii;
            for (int j = i + 1; j < d; ++j) {
                if (a(i, j) == 0.0) continue;
                const double dij =
                    (8 * (f(i, h, j, -2 * h) + f(i, 2 * h, j, -h) + f(i, -2 * h, j, h) + f(i, -h, j, 2 * h)) -
                     8 * (f(i, -h, j, -2 * h) + f(i, -2 * h, j, -h) + f(i, h, j, 2 * h) + f(i, 2 * h, j, h)) -
                     (f(i, 2 * h, j, -2 * h) + f(i, -2 * h, j, 2 * h) - f(i, -2 * h, j, -2 * h) -
                      f(i, 2 * h, j, 2 * h)) +
                     64 * (f(i, -h, j, -h) + f(i, h, j, h) - f(i, h, j, -h) - f(i, -h, j, h))) /
                    (144 * h * h);
                total += 2.0 * a(i, j) * dij;
            }
        }
        return total;
    };
    const double h = std::pow(kEps, 0.25) * scale;
    const double L1 = L_at(h), L2 = L_at(2.0 * h);
    LwValue out;
    out.value = L1;
    out.error = std::abs(L1 - L2) / 15.0 + 100.0 * kEps * std::abs(f0) * a.trace() / (h * h);
    out.method = "finite-difference";
    return out;
}

}  // namespace

LwValue apply_operator(const FieldFunction& w, const LambdaField& field, std::span<const double> x, int d) {
    if (static_cast<int>(x.size()) != d) throw DomainError("point has wrong dimension");
    if (w.analytic_L) {
        const auto e = w.analytic_L(x, field(x), d);
        return {e.value, e.error, "analytic"};
    }
    const double r = axial_r(x);
    if (w.jet && r > 0.0) {
        const auto j = w.jet(x[0], r);
        const double lambda = field(x);
        const double coef = lambda * (d - 2) / r;
        LwValue out;
        out.value = radial_residual(field, d, j.v_x1x1, j.v_rr, j.v_r, x);
        out.error = j.error * (1.0 + std::abs(coef)) +
                    8.0 * kEps * (std::abs(j.v_x1x1) + std::abs(j.v_rr) + std::abs(coef * j.v_r));
        out.method = "radial";
        return out;
    }
    return finite_difference_L(w, field, x, d);
}

std::vector<std::pair<double, double>> default_annuli(const CuspDomain& domain, int n) {
    std::vector<std::pair<double, double>> out;
    const double R = domain.radius();
    for (int k = 1; k <= n; ++k) out.emplace_back(std::ldexp(R, -k - 1), std::ldexp(R, -k));
    return out;
}

namespace {

// Points of the annulus inside the domain: geometric radii, angles from the x1 axis,
// x' along the diagonal or a coordinate axis, alternating.
std::vector<Point> annulus_grid(const CuspDomain& domain, double rin, double rout, int density) {
    const int d = domain.d();
    std::vector<Point> pts;
    for (int i = 0; i < density; ++i) {
        const double rho = rin * std::pow(rout / rin, (i + 0.5) / density);
        for (int j = 0; j < density; ++j) {
            const double th = std::numbers::pi * (j + 0.5) / density;
            Point x(static_cast<std::size_t>(d), 0.0);
            x[0] = rho * std::cos(th);
            const double rr = rho * std::sin(th);
            const int dir = (i + j) % d;
            if (dir == 0) {
                const double s = rr / std::sqrt(static_cast<double>(d - 1));
                for (int k = 1; k < d; ++k) x[static_cast<std::size_t>(k)] = s;
            } else {
                x[static_cast<std::size_t>(dir)] = rr;
            }
            if (domain.contains(x)) pts.push_back(std::move(x));
        }
    }
    return pts;
}

struct PathDecay {
    std::vector<std::pair<double, double>> seq;
    bool monotone = true;
    double slope = 0.0;
};

PathDecay decay_along(const FieldFunction& w, const CuspDomain& domain, double s0, double cs, double sn) {
    PathDecay out;
    for (int k = 0; k < 30; ++k) {
        const double s = std::ldexp(s0, -k);
        Point x = embed(domain.d(), cs * s, sn * s);
        if (!domain.contains(x)) continue;
        out.seq.emplace_back(s, w.value(x));
    }
    for (std::size_t i = 1; i < out.seq.size(); ++i)
        if (out.seq[i].second > out.seq[i - 1].second * (1.0 + 1e-12)) out.monotone = false;
    const std::size_t n = out.seq.size();
    if (n >= 2) {
        const auto& a = out.seq[n - 2];
        const auto& b = out.seq[n - 1];
        if (a.second > 0.0 && b.second > 0.0)
            out.slope = std::log(a.second / b.second) / std::log(a.first / b.first);
    }
    return out;
}

}  // namespace

BarrierReport verify_barrier(const BarrierCandidate& cand, const std::vector<std::pair<double, double>>& annuli,
                             int grid_density) {
    if (annuli.empty()) throw GridError("no annuli given");
    if (grid_density < 2) throw GridError("grid density must be at least 2");
    const CuspDomain& dom = cand.domain;
    const int d = dom.d();
    BarrierReport rep;
    rep.candidate = cand.w.name;
    rep.operator_description = cand.field.describe();
    double worst = -kInf, worst_err = 0.0;
    double min_w_all = kInf;
    double rmax = 0.0;
    for (auto [rin, rout] : annuli) {
        if (!(rin > 0.0 && rout > rin && rout <= dom.radius())) {
            std::ostringstream os;
            os << "annulus (" << rin << ", " << rout << ") not inside the domain ball";
            throw GridError(os.str());
        }
        rmax = std::max(rmax, rout);
        const auto pts = annulus_grid(dom, rin, rout, grid_density);
        if (pts.empty()) {
            std::ostringstream os;
            os << "annulus (" << rin << ", " << rout << ") contains no domain points";
            throw GridError(os.str());
        }
        AnnulusSummary s{rin, rout, static_cast<int>(pts.size()), kInf, -kInf};
        for (const auto& x : pts) {
            const auto lw = apply_operator(cand.w, cand.field, x, d);
            rep.lw_method = lw.method;
            s.max_Lw = std::max(s.max_Lw, lw.value);
            if (lw.value - lw.error > worst - worst_err) {
                worst = lw.value;
                worst_err = lw.error;
            }
            s.min_w = std::min(s.min_w, cand.w.value(x));
        }
        min_w_all = std::min(min_w_all, s.min_w);
        rep.annuli.push_back(s);
    }
    rep.max_Lw = worst;
    rep.max_Lw_error = worst_err;

    HypothesisCheck a{"Lw <= 0", worst <= worst_err, worst_err - worst, ""};
    {
        std::ostringstream os;
        os << "max Lw = " << worst << " (error " << worst_err << ", " << rep.lw_method << ")";
        a.detail = os.str();
    }
    HypothesisCheck b{"inf w > 0 on annuli", min_w_all > 0.0, min_w_all, ""};
    {
        std::ostringstream os;
        os << "min w over annulus grids = " << min_w_all;
        b.detail = os.str();
    }
    // Approach sequences: along x', and obliquely from both sides.
    const double h = std::sqrt(0.5);
    const std::vector<std::pair<double, double>> dirs = {{0.0, 1.0}, {h, h}, {-h, h}};
    bool decays = true;
    double margin_c = kInf;
    std::ostringstream dc;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto pd = decay_along(cand.w, dom, rmax, dirs[i].first, dirs[i].second);
        if (pd.seq.size() < 6) continue;
        if (i == 0) rep.decay = pd.seq;
        const bool ok = pd.monotone && pd.slope > 0.0 && pd.seq.back().second < pd.seq.front().second;
        decays = decays && ok;
        margin_c = std::min(margin_c, ok ? pd.slope : -1.0);
        dc << "dir(" << dirs[i].first << "," << dirs[i].second << "): last w = " << pd.seq.back().second
           << ", monotone=" << pd.monotone << ", log-log slope=" << pd.slope << "; ";
    }
    if (margin_c == kInf) throw GridError("no approach sequence with enough domain points");
    HypothesisCheck c{"w -> 0 at the origin", decays, margin_c, dc.str()};
    rep.hypotheses = {a, b, c};
    rep.passed = a.passed && b.passed && c.passed;
    return rep;
}

SuperharmonicReport verify_superharmonic_blowup(double p, const LambdaField& field, int d,
                                                const SuperharmonicGrid& grid) {
    if (!(p > 0.0)) throw DomainError("inverse power needs p > 0");
    if (d < 2) throw DomainError("dimension must be at least 2");
    if (!(grid.rmin > 0.0 && grid.rmax > grid.rmin) || grid.radii < 2 || grid.angles < 1)
        throw GridError("invalid superharmonicity grid");
    const auto w = FieldFunction::inv_power(p);
    SuperharmonicReport rep;
    rep.p = p;
    rep.d = d;
    rep.operator_description = field.describe();
    double worst_excess = -kInf;
    rep.max_Lw = -kInf;
    for (int i = 0; i < grid.radii; ++i) {
        const double rho = grid.rmin * std::pow(grid.rmax / grid.rmin, i / double(grid.radii - 1));
        for (int j = 0; j < grid.angles; ++j) {
            const double th = std::numbers::pi * (j + 0.5) / grid.angles;
            const Point x = embed(d, rho * std::cos(th), rho * std::sin(th));
            const auto lw = apply_operator(w, field, x, d);
            ++rep.points;
            rep.max_Lw = std::max(rep.max_Lw, lw.value);
            worst_excess = std::max(worst_excess, lw.value - lw.error);
            if (lw.value > lw.error) ++rep.violations;
        }
    }
    rep.superharmonic = {"L|x|^-p <= 0", rep.violations == 0, -worst_excess, ""};
    {
        std::ostringstream os;
        os << rep.violations << " of " << rep.points << " grid points violate; max L w = " << rep.max_Lw;
        rep.superharmonic.detail = os.str();
    }
    std::vector<double> W, F;
    for (int k = 1; k <= 40; ++k) {
        const double s = std::ldexp(grid.rmax, -k);
        W.push_back(-std::log(s));
        F.push_back(w.value(embed(d, 0.0, s)));
    }
    const auto cls = growth::classify(W, F);
    rep.blows_up = {"|x|^-p -> inf", cls.result == growth::Convergence::Divergent, F.back(),
                    cls.best.name + ": " + cls.reason};
    rep.passed = rep.superharmonic.passed && rep.blows_up.passed;
    return rep;
}

const char* to_string(ApproachClass c) { return c == ApproachClass::Interior ? "interior" : "boundary"; }

std::vector<ApproachPath> default_approach_paths(const CuspDomain& domain) {
    const int d = domain.d();
    const double R = domain.radius();
    const double h = std::sqrt(0.5);
    std::vector<ApproachPath> out;
    out.push_back({"x'-axis (0, s)", ApproachClass::Interior, [d](double s) { return embed(d, 0.0, s); },
                   0.1 * R, 0.5, 14});
    out.push_back({"oblique 45deg", ApproachClass::Interior, [d, h](double s) { return embed(d, h * s, h * s); },
                   0.1 * R, 0.5, 14});
    out.push_back({"oblique 135deg", ApproachClass::Interior,
                   [d, h](double s) { return embed(d, -h * s, h * s); }, 0.1 * R, 0.5, 14});
    const SpineProfile prof = domain.profile();
    const double s0 = std::min(0.04, 0.5 * std::min(R, prof.c()));
    double ratio = 0.7;
    const int n = 30;
    // Spread the samples over the part of the spine where r(s) is representable.
    if (prof.log_value(s0 * std::pow(ratio, n - 1)) < -690.0) {
        double lo = s0 * std::pow(ratio, n - 1), hi = s0;
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(lo * hi);
            (prof.log_value(mid) < -690.0 ? lo : hi) = mid;
        }
        ratio = std::pow(hi / s0, 1.0 / (n - 1));
    }
    out.push_back({"spine (s, r(s))", ApproachClass::Boundary,
                   [d, prof](double s) {
                       const double lr = prof.log_value(s);
                       if (lr < -690.0) return Point{};
                       return embed(d, s, std::exp(lr));
                   },
                   s0, ratio, n});
    return out;
}

namespace {

PathEstimate estimate_path(const ApproachPath& path, const WitnessPair& pair) {
    PathEstimate e;
    e.name = path.name;
    e.cls = path.cls;
    double s = path.s0;
    for (int k = 0; k < path.samples; ++k, s *= path.ratio) {
        const Point x = path.point(s);
        if (x.empty()) break;
        const double u = pair.u.value(x);
        e.samples.emplace_back(s, u);
        e.w_values.push_back(pair.w.value(x));
    }
    if (e.samples.size() < 6) {
        std::ostringstream os;
        os << "approach path '" << path.name << "' yields fewer than six samples";
        throw GridError(os.str());
    }
    e.running_min = kInf;
    std::vector<double> W, F, Fw;
    for (std::size_t i = 0; i < e.samples.size(); ++i) {
        e.running_min = std::min(e.running_min, e.samples[i].second);
        W.push_back(-std::log(e.samples[i].first));
        F.push_back(e.samples[i].second);
        Fw.push_back(e.w_values[i]);
    }
    const auto wc = growth::classify(W, Fw);
    e.w_blows_up = wc.result == growth::Convergence::Divergent;
    const auto uc = growth::classify(W, F);
    if (uc.result == growth::Convergence::Divergent) {
        e.diverges = true;
        e.liminf = kInf;
        return e;
    }
    // Limit fit on {1, s ln s, s, s^2 ln s, s^2}; error from dropping the first samples.
    auto fit = [&](std::size_t from) {
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        for (std::size_t i = from; i < e.samples.size(); ++i) {
            const double t = e.samples[i].first;
            rows.push_back({1.0, t * std::log(t), t, t * t * std::log(t), t * t});
            y.push_back(e.samples[i].second);
        }
        return limits::least_squares(rows, y);
    };
    const auto all = fit(0);
    const auto tail = fit(e.samples.size() >= 9 ? 3 : 0);
    e.liminf = tail.coef[0];
    e.error = std::abs(tail.coef[0] - all.coef[0]) + tail.rms + all.rms;
    return e;
}

void check_class_agreement(const std::vector<PathEstimate>& paths, ApproachClass cls, double& value, double& error) {
    const PathEstimate* first = nullptr;
    for (const auto& p : paths) {
        if (p.cls != cls) continue;
        if (!first) {
            first = &p;
            value = p.liminf;
            error = p.error;
            continue;
        }
        const bool both_inf = std::isinf(first->liminf) && std::isinf(p.liminf);
        const double tol = 10.0 * (first->error + p.error) + 1e-4 * std::max(1.0, std::abs(first->liminf));
        if (!both_inf && !(std::abs(first->liminf - p.liminf) <= tol)) {
            std::ostringstream os;
            os << to_string(cls) << " paths disagree: '" << first->name << "' gives " << first->liminf << ", '"
               << p.name << "' gives " << p.liminf;
            throw InconclusiveError(os.str());
        }
        if (p.liminf < value) value = p.liminf;
        error = std::max(error, p.error);
    }
    if (!first) throw DomainError(std::string("no ") + to_string(cls) + " approach path given");
}

HypothesisCheck grid_sign_check(const std::string& name, const FieldFunction& f, const LambdaField& field,
                                const CuspDomain& domain) {
    double worst = -kInf;
    double at = 0.0;
    int points = 0;
    for (auto [rin, rout] : default_annuli(domain, 3)) {
        for (const auto& x : annulus_grid(domain, rin, rout, 5)) {
            const auto lw = apply_operator(f, field, x, domain.d());
            ++points;
            if (lw.value - lw.error > worst) {
                worst = lw.value - lw.error;
                at = norm(x);
            }
        }
    }
    if (points == 0) throw GridError("sign check grid has no domain points");
    std::ostringstream os;
    os << points << " points; max (L - error) = " << worst << " at |x| = " << at;
    return {name, worst <= 0.0, -worst, os.str()};
}

}  // namespace

WitnessReport irregularity_witness(const WitnessPair& pair, const CuspDomain& domain,
                                   const std::vector<ApproachPath>& paths) {
    WitnessReport rep;
    rep.hypotheses.push_back(grid_sign_check("Lu <= 0", pair.u, pair.field, domain));
    rep.hypotheses.push_back(grid_sign_check("Lw <= 0", pair.w, pair.field, domain));
    for (const auto& p : paths) rep.paths.push_back(estimate_path(p, pair));
    check_class_agreement(rep.paths, ApproachClass::Interior, rep.alpha, rep.alpha_error);
    check_class_agreement(rep.paths, ApproachClass::Boundary, rep.beta, rep.beta_error);
    rep.gap = rep.beta - rep.alpha;
    const double tol = rep.alpha_error + (std::isinf(rep.beta) ? 0.0 : rep.beta_error);
    {
        std::ostringstream os;
        os << "alpha = " << rep.alpha << " +- " << rep.alpha_error << ", beta = " << rep.beta << " +- "
           << rep.beta_error;
        rep.hypotheses.push_back({"beta > alpha", rep.gap > tol, rep.gap - tol, os.str()});
    }
    bool blow = true;
    std::ostringstream ws;
    for (const auto& p : rep.paths) {
        blow = blow && p.w_blows_up;
        if (!p.w_blows_up) ws << "w stays bounded along '" << p.name << "'; ";
    }
    rep.hypotheses.push_back({"w -> inf along every path", blow, blow ? 1.0 : -1.0, ws.str()});
    rep.valid = true;
    for (const auto& h : rep.hypotheses) {
        if (!h.passed && rep.valid) {
            rep.valid = false;
            rep.failed = h.name;
        }
    }
    rep.note =
        "smoothness of u and w up to the boundary away from the origin is not verified; only evaluability "
        "and the sign of L on grids are checked";
    return rep;
}

WitnessReport irregularity_witness(const WitnessPair& pair, const CuspDomain& domain) {
    return irregularity_witness(pair, domain, default_approach_paths(domain));
}

RatioReport barrier_ratio_check(const PotentialSpec& spec, const SpineProfile& profile, int d,
                                const std::vector<double>& samples, const QuadratureConfig& q) {
    if (spec.preset != Preset::L71) throw DomainError("ratio check needs the L71 preset");
    if (profile.kind() != ProfileKind::LogPower) throw DomainError("ratio check needs a LogPower profile");
    if (samples.empty()) throw DomainError("ratio check needs samples");
    RatioReport rep;
    rep.mu = spec.params.mu0;
    rep.gamma = spec.params.gamma;
    rep.eta = profile.param();
    const double mu = rep.mu, g = rep.gamma, eta = rep.eta;
    std::ostringstream win;
    if (!(mu >= 1.0 && mu < d - 2)) {
        win << "mu = " << mu << " outside [1, d-2)";
        throw HypothesisError(win.str());
    }
    if (mu > 1.0 && !(eta * (mu - 1.0) < 1.0 && eta * (d - 3) > 1.0)) {
        win << "eta = " << eta << " violates eta(mu-1) < 1 < eta(d-3)";
        throw HypothesisError(win.str());
    }
    if (mu == 1.0 && !(g > 1.0 && g < 2.0)) {
        win << "gamma = " << g << " outside (1, 2) for mu = 1";
        throw HypothesisError(win.str());
    }
    const double c = spec.c;
    // u1 <= |ln 2x|^{-gamma} (2x)^{mu-1} ∫_{-2x}^{2x} ((t-x)^2+r^2)^{-mu/2} dt with |ln x|/|ln 2x| <= ln(c/2)/ln c.
    const double lfac = std::pow(std::log(0.5 * c) / std::log(c), g);
    if (mu > 1.0) {
        const double I = std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (mu - 1.0)) / std::tgamma(0.5 * mu);
        rep.N = std::pow(2.0, mu - 1.0) * I * lfac;
    } else {
        // ∫ ds/sqrt(s^2+1) over [-3x/r, x/r] <= 2 ln(6 |ln x|^eta + 1); absorb |ln x|^{-gamma/2}.
        double sup = 0.0;
        for (double w = std::log(2.0 / c); w < 700.0; w *= 1.01)
            sup = std::max(sup, 2.0 * std::log(6.0 * std::pow(w, eta) + 1.0) * std::pow(w, -0.5 * g));
        rep.N = lfac * sup;
    }
    std::vector<double> xs = samples;
    std::sort(xs.begin(), xs.end(), std::greater<>());
    for (double x : xs) {
        if (!(x > 0.0 && 2.0 * x <= c && x <= profile.c())) throw DomainError("ratio sample outside (0, c/2]");
        RatioRow row;
        row.x = x;
        row.r = profile.value(x);
        const auto def = u2_deficit(spec, x, row.r, q);
        const auto su = split_u(spec, x, row.r, q);
        row.deficit = def.value;
        row.u1 = su.u1.value;
        const double L = std::abs(std::log(x));
        row.denominator = rep.N * (mu > 1.0 ? std::pow(L, eta * (mu - 1.0) - g) : std::pow(L, -0.5 * g));
        row.ratio = row.deficit / row.denominator;
        row.ratio_u1 = row.deficit / row.u1;
        row.error = def.error / row.denominator;
        rep.rows.push_back(row);
    }
    rep.increasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].ratio > rep.rows[i - 1].ratio)) rep.increasing = false;
    rep.exceeds_one = rep.rows.back().ratio - rep.rows.back().error > 1.0;
    rep.passed = rep.increasing && rep.exceeds_one;
    return rep;
}

}  // namespace cusplab
