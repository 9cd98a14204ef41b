#include "cusplab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cusplab/errors.hpp"

namespace cusplab {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kTinyR = 1e-300;
constexpr double kLogCut = 700.0;  // |t| >= e^{-700} in log-mapped pieces

double log_cosh(double s) {
    const double a = std::abs(s);
    return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

enum class Map { Plain, Sinh, LogPos, LogNeg };

struct Piece {
    Map map;
    double tlo, thi;
};

struct Ctx {
    double t, mu, lnh, lnt, lnJ, lhalfD, ct, sr;
};

void add_piece(std::vector<Piece>& out, double p, double q, double x) {
    if (!(q > p)) return;
    const bool x_end = (p == x || q == x);
    const bool zero_end = (p == 0.0 || q == 0.0);
    if (x_end) {
        out.push_back({Map::Sinh, p, q});
        return;
    }
    const double len = q - p;
    const double dist = x < p ? p - x : (x > q ? x - q : 0.0);
    if (zero_end) {
        const double far = p == 0.0 ? q : p;
        if (std::abs(x - far) < 0.25 * len && dist > 0.0) {
            const double m = 0.5 * (p + q);
            add_piece(out, p, m, x);
            add_piece(out, m, q, x);
            return;
        }
        out.push_back({p == 0.0 ? Map::LogPos : Map::LogNeg, p, q});
        return;
    }
    if (dist < len) {
        out.push_back({Map::Sinh, p, q});
        return;
    }
    out.push_back({Map::Plain, p, q});
}

std::vector<Piece> build_pieces(double x, const std::vector<std::pair<double, double>>& ranges, bool split) {
    std::vector<Piece> pieces;
    for (auto [lo, hi] : ranges) {
        if (!(hi > lo)) continue;
        std::vector<double> bp{lo, hi};
        if (split) {
            if (0.0 > lo && 0.0 < hi) bp.push_back(0.0);
            if (x > lo && x < hi) bp.push_back(x);
        }
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            const double p = bp[i], q = bp[i + 1];
            const bool zero_end = (p == 0.0 || q == 0.0);
            const bool x_end = (p == x || q == x);
            if (split && zero_end && x_end && x != 0.0) {
                const double m = 0.5 * (p + q);
                add_piece(pieces, p, m, x);
                add_piece(pieces, m, q, x);
            } else {
                add_piece(pieces, p, q, x);
            }
        }
    }
    return pieces;
}

// Integrates fn(ctx) over the t-ranges with maps adapted to the kernel peak
// at t = x (scale r) and to the singular point t = 0 of |t|^mu h.
template <std::size_t N, class Fn>
quad::Result<N> integrate_kernel(const PotentialSpec& spec, double x, double r,
                                 const std::vector<std::pair<double, double>>& ranges, const quad::Config& q,
                                 Fn&& fn) {
    const double re = r > 0.0 ? r : kTinyR;
    const double ln_re = std::log(re);
    const auto pieces = build_pieces(x, ranges, q.singularity_split);

    std::vector<std::pair<double, double>> spans;
    std::vector<int> owner;
    const std::array<double, 5> marks = {1.0, 4.0, 16.0, 64.0, 256.0};
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Piece& p = pieces[i];
        double a = 0, b = 0;
        std::vector<double> cuts;
        switch (p.map) {
            case Map::Plain:
                a = p.tlo;
                b = p.thi;
                break;
            case Map::Sinh:
                a = std::asinh((p.tlo - x) / re);
                b = std::asinh((p.thi - x) / re);
                for (double m : marks) {
                    cuts.push_back(m);
                    cuts.push_back(-m);
                }
                break;
            case Map::LogPos:
            case Map::LogNeg: {
                const double edge = p.map == Map::LogPos ? p.thi : -p.tlo;
                a = -std::log(edge);
                b = std::max(kLogCut, a + 1.0);
                for (double m : marks) cuts.push_back(a + m);
                break;
            }
        }
        std::vector<double> nodes{a, b};
        for (double cpt : cuts)
            if (cpt > a && cpt < b) nodes.push_back(cpt);
        std::sort(nodes.begin(), nodes.end());
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            spans.emplace_back(nodes[k], nodes[k + 1]);
            owner.push_back(static_cast<int>(i));
        }
    }

    auto f = [&](int span, double s) -> quad::Vec<N> {
        const Piece& p = pieces[static_cast<std::size_t>(owner[static_cast<std::size_t>(span)])];
        Ctx c{};
        switch (p.map) {
            case Map::Plain: {
                c.t = s;
                c.lnJ = 0.0;
                const double hyp = std::hypot(c.t - x, r);
                c.lhalfD = std::log(hyp);
                c.ct = (c.t - x) / hyp;
                c.sr = r / hyp;
                break;
            }
            case Map::Sinh: {
                c.t = std::clamp(x + re * std::sinh(s), p.tlo, p.thi);
                c.lhalfD = ln_re + log_cosh(s);
                c.lnJ = c.lhalfD;
                c.ct = std::tanh(s);
                const double e = std::exp(-std::abs(s));
                c.sr = 2.0 * e / (1.0 + e * e);
                break;
            }
            case Map::LogPos:
            case Map::LogNeg: {
                const double mag = std::exp(-s);
                c.t = p.map == Map::LogPos ? mag : -mag;
                c.lnJ = -s;
                const double hyp = std::hypot(c.t - x, r);
                c.lhalfD = std::log(hyp);
                c.ct = (c.t - x) / hyp;
                c.sr = r / hyp;
                break;
            }
        }
        quad::Vec<N> zero{};
        if (c.t == 0.0) return zero;
        c.lnt = (p.map == Map::LogPos || p.map == Map::LogNeg) ? -s : std::log(std::abs(c.t));
        c.mu = spec.mu(c.t);
        c.lnh = spec.log_h(c.t);
        if (c.lnh == -std::numeric_limits<double>::infinity()) return zero;
        return fn(c);
    };
    return quad::integrate<N>(f, spans, q);
}

template <std::size_t N>
void require_converged(const quad::Result<N>& res, const char* what) {
    if (!res.converged) {
        std::ostringstream os;
        os << what << ": tolerance not met after " << res.intervals << " intervals (error " << res.error[0] << ")";
        throw ToleranceNotMet(os.str());
    }
}

bool on_segment(const PotentialSpec& spec, double x) { return x >= spec.b && x <= spec.c; }

void check_args(double x, double r) {
    if (!std::isfinite(x) || !std::isfinite(r) || r < 0.0) throw DomainError("potential evaluated at invalid (x, r)");
}

void require_off_segment(const PotentialSpec& spec, double x, double r) {
    check_args(x, r);
    if (r == 0.0 && on_segment(spec, x)) throw SingularPointError("point lies on the singular segment");
}

}  // namespace

const char* to_string(Preset p) {
    switch (p) {
        case Preset::Custom: return "Custom";
        case Preset::Lebesgue: return "Lebesgue";
        case Preset::T21_d3: return "T21_d3";
        case Preset::T21_dge4: return "T21_dge4";
        case Preset::T23_d3: return "T23_d3";
        case Preset::T23_dge4: return "T23_dge4";
        case Preset::L71: return "L71";
        case Preset::MuConst: return "MuConst";
    }
    return "?";
}

std::string PotentialSpec::name() const {
    std::ostringstream os;
    os << to_string(preset);
    switch (preset) {
        case Preset::T21_d3: os << "(eps=" << params.eps << ")"; break;
        case Preset::T21_dge4: os << "(eps=" << params.eps << ",alpha=" << params.alpha << ",d=" << params.d << ")"; break;
        case Preset::T23_dge4: os << "(gamma=" << params.gamma << ",d=" << params.d << ")"; break;
        case Preset::L71: os << "(mu0=" << params.mu0 << ",gamma=" << params.gamma << ")"; break;
        case Preset::MuConst: os << "(mu0=" << params.mu0 << ")"; break;
        default: break;
    }
    return os.str();
}

namespace presets {

PotentialSpec lebesgue() {
    PotentialSpec s;
    s.b = 0.0;
    s.c = 1.0;
    s.mu = [](double) { return 1.0; };
    s.log_h = [](double) { return 0.0; };
    s.mu_w = [](double) { return 1.0; };
    s.log_th_w = [](double w) { return -w; };
    s.preset = Preset::Lebesgue;
    s.constant_mu = true;
    s.mu_inf = 1.0;
    s.h_integral = 1.0;
    return s;
}

PotentialSpec t21_d3(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("T21_d3 needs eps in (0,1)");
    PotentialSpec s;
    s.b = -1.0;
    s.c = 1.0;
    const double m = 1.0 / eps;
    s.mu = [m](double) { return m; };
    s.log_h = [](double) { return 0.0; };
    s.mu_w = [m](double) { return m; };
    s.log_th_w = [](double w) { return -w; };
    s.preset = Preset::T21_d3;
    s.params.eps = eps;
    s.params.d = 3;
    s.even = true;
    s.constant_mu = true;
    s.mu_inf = m;
    s.h_integral = 2.0;
    return s;
}

PotentialSpec t21_dge4(double eps, double alpha, int d, double c) {
    if (d < 4) throw DomainError("T21_dge4 needs d >= 4");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("T21_dge4 needs eps in (0,1)");
    if (!(alpha > 1.0)) throw DomainError("T21_dge4 needs alpha > 1");
    if (!(c > 0.0 && c < 2.0 * std::exp(-alpha)))
        throw DomainError("T21_dge4 needs 0 < c < 2 exp(-alpha) for h to decrease on (0, c]");
    PotentialSpec s;
    s.b = -c;
    s.c = c;
    const double m = (d - 2) / eps;
    s.mu = [m](double) { return m; };
    s.log_h = [alpha](double t) {
        const double a = std::abs(t);
        return kLn2 - std::log(a) - alpha * std::log(std::abs(std::log(0.5 * a)));
    };
    s.mu_w = [m](double) { return m; };
    s.log_th_w = [alpha](double w) { return kLn2 - alpha * std::log(w + kLn2); };
    s.preset = Preset::T21_dge4;
    s.params.eps = eps;
    s.params.alpha = alpha;
    s.params.d = d;
    s.even = true;
    s.constant_mu = true;
    s.mu_inf = m;
    s.h_integral = 4.0 * std::pow(std::abs(std::log(0.5 * c)), 1.0 - alpha) / (alpha - 1.0);
    return s;
}

PotentialSpec t23_d3(double c) {
    if (!(c > 0.0 && c < std::exp(-1.0))) throw DomainError("T23_d3 needs 0 < c < 1/e");
    PotentialSpec s;
    s.b = -c;
    s.c = c;
    s.mu = [](double t) {
        if (t == 0.0) return 1.0;
        return 1.0 + 1.0 / std::log(std::abs(std::log(std::abs(t))));
    };
    s.log_h = [](double) { return 0.0; };
    s.mu_w = [](double w) { return 1.0 + 1.0 / std::log(w); };
    s.log_th_w = [](double w) { return -w; };
    s.preset = Preset::T23_d3;
    s.params.d = 3;
    s.even = true;
    s.mu_inf = 1.0;
    s.h_integral = 2.0 * c;
    return s;
}

PotentialSpec t23_dge4(double gamma, int d, double c) {
    if (d < 4) throw DomainError("T23_dge4 needs d >= 4");
    if (!(gamma > 0.0)) throw DomainError("T23_dge4 needs gamma > 0");
    if (!(c > 0.0 && c < std::exp(-std::exp(std::exp(1.0)))))
        throw DomainError("T23_dge4 needs 0 < c < exp(-e^e) for mu to be nondecreasing");
    PotentialSpec s;
    s.b = -c;
    s.c = c;
    const double base = d - 2.0;
    const double k = gamma * (d - 3.0);
    s.mu = [base, k](double t) {
        if (t == 0.0) return base;
        const double y = std::log(std::abs(std::log(std::abs(t))));
        return base + k * std::log(y) / y;
    };
    s.log_h = [](double t) {
        const double a = std::abs(t);
        const double l = std::abs(std::log(0.5 * a));
        return kLn2 - std::log(a) - std::log(l) - 2.0 * std::log(std::log(l));
    };
    s.mu_w = [base, k](double w) {
        const double y = std::log(w);
        return base + k * std::log(y) / y;
    };
    s.log_th_w = [](double w) {
        const double l = w + kLn2;
        return kLn2 - std::log(l) - 2.0 * std::log(std::log(l));
    };
    s.preset = Preset::T23_dge4;
    s.params.gamma = gamma;
    s.params.d = d;
    s.even = true;
    s.mu_inf = base;
    s.h_integral = 4.0 / std::log(std::abs(std::log(0.5 * c)));
    return s;
}

PotentialSpec l71(double mu0, double gamma, double c) {
    if (!(mu0 > 0.0)) throw DomainError("L71 needs mu0 > 0");
    if (!(gamma > 1.0)) throw DomainError("L71 needs gamma > 1");
    if (!(c > 0.0 && c < 1.0)) throw DomainError("L71 needs 0 < c < 1");
    PotentialSpec s;
    s.b = -c;
    s.c = c;
    s.mu = [mu0](double) { return mu0; };
    s.log_h = [gamma](double t) {
        const double a = std::abs(t);
        return -std::log(a) - gamma * std::log(std::abs(std::log(a)));
    };
    s.mu_w = [mu0](double) { return mu0; };
    s.log_th_w = [gamma](double w) { return -gamma * std::log(w); };
    s.preset = Preset::L71;
    s.params.mu0 = mu0;
    s.params.gamma = gamma;
    s.even = true;
    s.constant_mu = true;
    s.mu_inf = mu0;
    s.h_integral = 2.0 * std::pow(std::abs(std::log(c)), 1.0 - gamma) / (gamma - 1.0);
    return s;
}

PotentialSpec mu_const(double mu0, double b, double c) {
    if (!(mu0 > 0.0)) throw DomainError("mu_const needs mu0 > 0");
    if (!(b <= 0.0 && c > 0.0)) throw DomainError("mu_const needs b <= 0 < c");
    PotentialSpec s;
    s.b = b;
    s.c = c;
    s.mu = [mu0](double) { return mu0; };
    s.log_h = [](double) { return 0.0; };
    s.mu_w = [mu0](double) { return mu0; };
    s.log_th_w = [](double w) { return -w; };
    s.preset = Preset::MuConst;
    s.params.mu0 = mu0;
    s.even = (b == -c);
    s.constant_mu = true;
    s.mu_inf = mu0;
    s.h_integral = c - b;
    return s;
}

}  // namespace presets

PotentialSpec make_custom_spec(double b, double c, std::function<double(double)> mu, std::function<double(double)> h) {
    if (!(b <= 0.0 && c > 0.0)) throw DomainError("custom potential needs b <= 0 < c");
    PotentialSpec s;
    s.b = b;
    s.c = c;
    s.mu = [mu](double t) {
        const double v = mu(t);
        if (!std::isfinite(v) || v < 0.0) throw EvaluationError("custom mu returned an invalid value");
        return v;
    };
    s.log_h = [h](double t) {
        const double v = h(t);
        if (!std::isfinite(v) || v < 0.0) throw EvaluationError("custom h returned an invalid value");
        return std::log(v);
    };
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
        const double t = b + (c - b) * i / 200.0;
        lo = std::min(lo, s.mu(t));
    }
    s.mu_inf = lo;
    return s;
}

double omega_beta(const PotentialSpec& spec, double t) {
    if (t == 0.0) return 0.0;
    const double m = spec.mu(t);
    return m * std::exp(m * std::log(std::abs(t)) + spec.log_h(t));
}

double omega_nu(const PotentialSpec& spec, double t) { return spec.mu(t) + 2.0; }

Estimate u_at_origin(const PotentialSpec& spec, const QuadratureConfig& q) {
    if (spec.h_integral) return {*spec.h_integral, 0.0};
    auto res = integrate_kernel<1>(spec, 0.0, 0.0, {{spec.b, spec.c}}, q,
                                   [](const Ctx& c) { return quad::Vec<1>{std::exp(c.lnh + c.lnJ)}; });
    require_converged(res, "u(0,0)");
    return {res.value[0], res.error[0]};
}

Estimate eval_u(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    check_args(x, r);
    if (r == 0.0 && on_segment(spec, x)) {
        if (x == 0.0) return u_at_origin(spec, q);
        if (spec.mu(x) >= 1.0) throw SingularPointError("u is infinite on the segment where mu >= 1");
    }
    auto res = integrate_kernel<1>(spec, x, r, {{spec.b, spec.c}}, q, [](const Ctx& c) {
        return quad::Vec<1>{std::exp(c.lnh + c.lnJ + c.mu * (c.lnt - c.lhalfD))};
    });
    require_converged(res, "eval_u");
    return {res.value[0], res.error[0]};
}

Estimate eval_omega(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    check_args(x, r);
    if (r == 0.0 && on_segment(spec, x)) return {spec.mu(x), 0.0};
    const double tstar = std::clamp(x, spec.b, spec.c);
    const double scale_len = std::max({r, std::abs(x - tstar), kTinyR});
    // Peak size of the k2 integrand, divided out so both sums are O(1).
    const double mstar = spec.mu(tstar);
    double shift = mstar * std::log(std::max(std::abs(tstar), scale_len)) - (mstar + 1.0) * std::log(scale_len);
    if (tstar != 0.0) {
        const double lh = spec.log_h(tstar);
        if (std::isfinite(lh)) shift += lh;
    }
    auto res = integrate_kernel<2>(spec, x, r, {{spec.b, spec.c}}, q, [shift](const Ctx& c) {
        const double k2 = c.mu * std::exp(c.lnh + c.lnJ + c.mu * c.lnt - (c.mu + 2.0) * c.lhalfD - shift);
        return quad::Vec<2>{c.mu * k2, k2};
    });
    require_converged(res, "eval_omega");
    const double k1 = res.value[0], k2 = res.value[1];
    if (!(k2 > 0.0) || res.error[1] > 0.1 * std::abs(k2))
        throw DivisionInstability("omega: k2 error estimate exceeds 10% of its value");
    const double w = k1 / k2;
    const double err = std::abs(w) * (res.error[0] / std::max(std::abs(k1), 1e-300) + res.error[1] / k2);
    return {w, err};
}

Derivatives eval_derivatives(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    require_off_segment(spec, x, r);
    auto res = integrate_kernel<2>(spec, x, r, {{spec.b, spec.c}}, q, [](const Ctx& c) {
        const double k2 = c.mu * std::exp(c.lnh + c.lnJ + c.mu * c.lnt - (c.mu + 2.0) * c.lhalfD);
        return quad::Vec<2>{k2, c.mu * k2};
    });
    require_converged(res, "eval_derivatives");
    Derivatives d;
    d.u_r = {-r * res.value[0], r * res.error[0]};
    d.laplacian = {res.value[1], res.error[1]};
    return d;
}

Residual pde_residual(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    require_off_segment(spec, x, r);
    if (r == 0.0) throw DomainError("pde_residual needs r > 0");
    auto res = integrate_kernel<5>(spec, x, r, {{spec.b, spec.c}}, q, [r](const Ctx& c) {
        const double k2 = c.mu * std::exp(c.lnh + c.lnJ + c.mu * c.lnt - (c.mu + 2.0) * c.lhalfD);
        const double nu = c.mu + 2.0;
        return quad::Vec<5>{k2 * (-1.0 + nu * c.ct * c.ct), k2 * (-1.0 + nu * c.sr * c.sr), -r * k2, c.mu * k2, k2};
    });
    require_converged(res, "pde_residual");
    Residual out;
    out.u_xx = {res.value[0], res.error[0]};
    out.u_rr = {res.value[1], res.error[1]};
    out.u_r = {res.value[2], res.error[2]};
    const double k1 = res.value[3], k2 = res.value[4];
    if (!(k2 > 0.0) || res.error[4] > 0.1 * k2) throw DivisionInstability("pde_residual: k2 unresolved");
    const double w = k1 / k2;
    const double werr = std::abs(w) * (res.error[3] / std::max(std::abs(k1), 1e-300) + res.error[4] / k2);
    out.omega = {w, werr};
    out.residual = out.u_xx.value + out.u_rr.value + (w / r) * out.u_r.value;
    out.error = out.u_xx.error + out.u_rr.error + std::abs(w / r) * out.u_r.error +
                std::abs(out.u_r.value / r) * werr;
    return out;
}

SplitU split_u(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    check_args(x, r);
    if (!spec.even) throw DomainError("split_u needs a symmetric potential (b = -c)");
    const double a = 2.0 * std::abs(x);
    if (a > spec.c) throw DomainError("split_u needs 2|x| <= c");
    SplitU out;
    if (x == 0.0) {
        out.u1 = {0.0, 0.0};
        out.u2 = eval_u(spec, 0.0, r, q);
        return out;
    }
    if (r == 0.0 && spec.mu(x) >= 1.0) throw SingularPointError("u1 is infinite at r = 0");
    auto kern = [](const Ctx& c) { return quad::Vec<1>{std::exp(c.lnh + c.lnJ + c.mu * (c.lnt - c.lhalfD))}; };
    auto r1 = integrate_kernel<1>(spec, x, r, {{-a, a}}, q, kern);
    require_converged(r1, "split_u inner");
    auto r2 = integrate_kernel<1>(spec, x, r, {{spec.b, -a}, {a, spec.c}}, q, kern);
    require_converged(r2, "split_u outer");
    out.u1 = {r1.value[0], r1.error[0]};
    out.u2 = {r2.value[0], r2.error[0]};
    return out;
}

Estimate u2_deficit(const PotentialSpec& spec, double x, double r, const QuadratureConfig& q) {
    check_args(x, r);
    if (!spec.even) throw DomainError("u2_deficit needs a symmetric potential");
    const double a = 2.0 * std::abs(x);
    if (a > spec.c) throw DomainError("u2_deficit needs 2|x| <= c");
    Estimate inner{0.0, 0.0};
    if (a > 0.0) {
        if (spec.preset == Preset::L71) {
            inner.value = 2.0 * std::pow(std::abs(std::log(a)), 1.0 - spec.params.gamma) / (spec.params.gamma - 1.0);
        } else {
            auto ri = integrate_kernel<1>(spec, 0.0, 0.0, {{-a, a}}, q,
                                          [](const Ctx& c) { return quad::Vec<1>{std::exp(c.lnh + c.lnJ)}; });
            require_converged(ri, "u2_deficit inner");
            inner = {ri.value[0], ri.error[0]};
        }
    }
    auto ro = integrate_kernel<1>(spec, x, r, {{spec.b, -a}, {a, spec.c}}, q, [](const Ctx& c) {
        return quad::Vec<1>{std::exp(c.lnh + c.lnJ) * -std::expm1(c.mu * (c.lnt - c.lhalfD))};
    });
    require_converged(ro, "u2_deficit outer");
    return {inner.value + ro.value[0], inner.error + ro.error[0]};
}

double tail_identity(double mu) {
    // s = 1 + e^y
    quad::Config q;
    q.abs_tol = 1e-15;
    q.rel_tol = 1e-13;
    auto res = quad::integrate_scalar(
        [mu](double y) { return mu * std::exp((mu - 1.0) * std::log1p(std::exp(y)) - mu * y); }, 0.0, kLogCut, q);
    return res.value[0];
}

double tail_negative(double mu) {
    // s = e^y
    quad::Config q;
    q.abs_tol = 1e-15;
    q.rel_tol = 1e-13;
    auto res = quad::integrate_scalar(
        [mu](double y) { return mu * std::exp(mu * y - (mu + 1.0) * std::log1p(std::exp(y))); }, kLn2, kLogCut, q);
    return res.value[0];
}

double spine_derivative_limit(double mu) {
    return -std::pow(2.0, mu) * (1.0 + std::pow(3.0, -mu)) + tail_identity(mu) - tail_negative(mu);
}

SpineDerivative u2_spine_derivative(const PotentialSpec& spec, const SpineProfile& profile, double x,
                                    const QuadratureConfig& q) {
    if (spec.preset != Preset::L71) throw DomainError("u2_spine_derivative needs the L71 preset");
    if (!(x > 0.0) || 2.0 * x > spec.c || x > profile.c()) throw DomainError("x outside the validity window");
    const double mu = spec.params.mu0, gamma = spec.params.gamma;
    const double r = profile.value(x);
    const double rp = profile.derivative(x);
    const double lx = std::abs(std::log(x)), l2x = std::abs(std::log(2.0 * x));
    const double scale_ln = std::log(x) + gamma * std::log(lx);  // ln(x |ln x|^gamma)
    SpineDerivative out;
    out.x = x;
    const double lratio = gamma * std::log(lx / l2x);
    const double rx = r / x;
    const double b1 = -std::pow(2.0, mu) * std::exp(-0.5 * mu * std::log1p(rx * rx) + lratio);
    const double b2 = -std::pow(2.0, mu) * std::exp(-0.5 * mu * std::log(9.0 + rx * rx) + lratio);
    out.boundary_terms = b1 + b2;
    const double a = 2.0 * x;
    auto res = integrate_kernel<1>(spec, x, r, {{spec.b, -a}, {a, spec.c}}, q, [&](const Ctx& c) {
        const double w = std::exp(c.lnh + c.lnJ + c.mu * c.lnt - (c.mu + 2.0) * c.lhalfD + scale_ln);
        return quad::Vec<1>{c.mu * w * ((c.t - x) - r * rp)};
    });
    require_converged(res, "u2_spine_derivative");
    out.g_term = res.value[0];
    out.error = res.error[0];
    out.total = out.boundary_terms + out.g_term;
    return out;
}

double lebesgue_psi(double y) { return 2.0 * y * std::asinh(y); }

Estimate lebesgue_asymptotic_gap(double x1, double r, const QuadratureConfig& q) {
    if (!(x1 > 0.0 && r > 0.0)) throw DomainError("lebesgue_asymptotic_gap needs x1 > 0 and r > 0");
    const Estimate u = eval_u(presets::lebesgue(), x1, r, q);
    return {u.value - (1.0 + 2.0 * x1 * std::log(1.0 / r)), u.error};
}

limits::LimitEstimate axis_limit(const PotentialSpec& spec, const QuadratureConfig& q) {
    const double r0 = 0.01 * std::min(spec.c, -spec.b > 0 ? -spec.b : spec.c);
    return limits::richardson([&](double r) { return eval_u(spec, 0.0, r, q).value; }, r0, 0.5, 8, 1.0);
}

limits::LimitEstimate lebesgue_spine_limit(double eps, const QuadratureConfig& q) {
    const auto spec = presets::lebesgue();
    std::vector<double> s, f;
    for (double x = 0.04; x >= eps / 600.0 && s.size() < 14; x *= 0.7) {
        s.push_back(x);
        f.push_back(eval_u(spec, x, std::exp(-eps / x), q).value);
    }
    auto fit_with = [&](std::size_t nb) {
        std::vector<std::vector<double>> rows;
        for (double x : s) {
            std::vector<double> row{1.0, x * std::log(x), x, x * x, x * x * x};
            row.resize(nb);
            rows.push_back(row);
        }
        return limits::least_squares(rows, f);
    };
    const auto full = fit_with(5);
    const auto reduced = fit_with(4);
    limits::LimitEstimate out;
    out.value = full.coef[0];
    out.error = std::abs(full.coef[0] - reduced.coef[0]) + full.rms;
    for (std::size_t i = 0; i < s.size(); ++i) out.sequence.emplace_back(s[i], f[i]);
    bool mono = true;
    for (std::size_t i = 1; i < f.size(); ++i) mono = mono && f[i] >= f[i - 1];
    out.certified = mono;
    out.certificate = mono ? "monotone" : "none";
    return out;
}

Estimate integrability_mass(const PotentialSpec& spec, const QuadratureConfig& q) {
    auto res = integrate_kernel<1>(spec, 0.0, 0.0, {{spec.b, spec.c}}, q,
                                   [](const Ctx& c) { return quad::Vec<1>{std::exp(c.lnh + c.lnJ + c.mu * c.lnt)}; });
    require_converged(res, "integrability");
    if (!std::isfinite(res.value[0])) throw EvaluationError("∫|t|^mu h is not finite");
    return {res.value[0], res.error[0]};
}

}  // namespace cusplab
