#include "cusplab/diffusion.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "cusplab/errors.hpp"

namespace cusplab {

namespace rng {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}
}  // namespace

Counter philox4x32(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

Stream::Stream(std::uint64_t seed, std::uint64_t path)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, path_(path) {}

void Stream::refill() {
    const Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
    buf_ = philox4x32(ctr, key_);
    ++block_;
    used_ = 0;
}

double Stream::uniform() {
    if (used_ > 2) refill();
    const std::uint64_t hi = buf_[static_cast<std::size_t>(used_)];
    const std::uint64_t lo = buf_[static_cast<std::size_t>(used_ + 1)];
    used_ += 2;
    const std::uint64_t m = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(m) + 0.5) * 0x1p-53;
}

double Stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
}

}  // namespace rng

namespace {

void check_config(const SimConfig& cfg) {
    if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw ConfigError("time step must be positive");
    if (cfg.max_steps <= 0) throw ConfigError("max_steps must be positive");
    if (cfg.paths <= 0) throw ConfigError("paths must be positive");
    if (!(cfg.boundary_tol > 0.0)) throw ConfigError("boundary tolerance must be positive");
    if (cfg.threads < 0) throw ConfigError("threads must be nonnegative");
}

// Closest point of the segment p -> q to the x1 axis.
void closest_to_axis(const Point& p, const Point& q, Point& z) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double dv = q[i] - p[i];
        num -= p[i] * dv;
        den += dv * dv;
    }
    const double t = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) z[i] = p[i] + t * (q[i] - p[i]);
}

struct SpineJump {
    double p_hit;  // probability of reaching rho before 2r
    double time;   // mean duration of the radial excursion, ignoring rho
};

// Radial part of the motion in the cross-section near a thin spine: generator
// f'' + kappa f' / r with kappa = lambda (d - 2), scale function r^{1 - kappa} or ln r.
SpineJump spine_jump(double kappa, double r, double rho) {
    const double S = 2.0 * r;
    const double q = 1.0 - kappa;
    double p;
    if (std::abs(q) < 1e-12) {
        p = rho > 0.0 ? std::log(S / r) / std::log(S / rho) : 0.0;
    } else {
        const double a = std::pow(r / S, q);
        const double b = rho > 0.0 ? std::pow(rho / S, q) : (q > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        p = std::isinf(b) ? 0.0 : (1.0 - a) / (1.0 - b);
    }
    return {std::clamp(p, 0.0, 1.0), (S * S - r * r) / (2.0 * (1.0 + kappa))};
}

// Shrinks (inside a, outside b) until |b - a| <= tol; returns the outside end.
Point bisect(const CuspDomain& dom, Point a, Point b, double tol) {
    Point m(a.size());
    for (int it = 0; it < 200; ++it) {
        double gap = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(b[i] - a[i]));
        if (gap <= tol) break;
        for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
        if (dom.contains(m))
            a.swap(m);
        else
            b.swap(m);
    }
    return b;
}

ExitSample run_path(const CuspDomain& dom, const LambdaField& field, std::span<const double> start,
                    const SimConfig& cfg, std::uint64_t path, double time_limit) {
    const std::size_t d = static_cast<std::size_t>(dom.d());
    rng::Stream st(cfg.seed, path);
    Point x(start.begin(), start.end()), y(d), z(d), xi(d), inc(d);
    ExitSample out;
    double t = 0.0;
    double last_dt = cfg.step, last_smax = std::sqrt(2.0);
    while (true) {
        if (out.steps >= cfg.max_steps || t >= time_limit) {
            out.censored = true;
            out.exit_point = x;
            out.exit_time = t;
            return out;
        }
        const double lam = field(x);
        const double smax = std::sqrt(2.0 * std::max(1.0, lam));
        if (cfg.thin_spine_jumps) {
            double rho = dom.spine_radius(x[0]);
            if (rho > 0.0 && rho < 1e-280) rho = 0.0;  // keep exit points representable
            const double r = radial_part(x);
            const double reach = 0.5 * smax * std::sqrt(cfg.step);
            if (rho >= 0.0 && r > 0.0 && r < reach && rho <= 0.25 * r && dom.sphere_distance(x) > 4.0 * r) {
                const auto jump = spine_jump(lam * (dom.d() - 2), r, rho);
                t += jump.time;
                ++out.steps;
                const double u = st.uniform();
                const double dx1 = std::sqrt(2.0 * jump.time) * st.normal();
                const double scale = (u < jump.p_hit ? rho : 2.0 * r) / r;
                for (std::size_t i = 1; i < d; ++i) x[i] *= scale;
                if (u < jump.p_hit) {
                    out.exit_point = x;
                    out.exit_time = t;
                    out.boundary_class = BoundaryClass::Spine;
                    return out;
                }
                x[0] += dx1;
                if (!dom.contains(x)) {
                    // The axial move left the domain; treat it as an ordinary exiting step.
                    out.exit_point = x;
                    out.exit_time = t;
                    break;
                }
                continue;
            }
        }
        double dt = cfg.step;
        if (cfg.step_refinement_near_boundary) {
            const double dist = std::min(dom.sphere_distance(x), dom.spine_distance(x[0], radial_part(x)));
            for (int lvl = 0; lvl < 10 && dist < 4.0 * smax * std::sqrt(dt); ++lvl) dt *= 0.5;
        }
        for (std::size_t i = 0; i < d; ++i) xi[i] = st.normal();
        apply_diffusion_sqrt(lam, x, xi, inc);
        const double sq = std::sqrt(dt);
        for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + sq * inc[i];
        t += dt;
        ++out.steps;
        last_dt = dt;
        last_smax = smax;
        bool exited = !dom.contains(y);
        const Point* outside = &y;
        if (!exited) {
            closest_to_axis(x, y, z);
            if (norm(z) < dom.radius() && !dom.contains(z)) {
                exited = true;
                outside = &z;
            }
        }
        if (exited) {
            const bool inside_start = dom.contains(x);
            out.exit_point = (cfg.bisect_exit && inside_start) ? bisect(dom, x, *outside, cfg.boundary_tol) : *outside;
            out.exit_time = t;
            break;
        }
        x.swap(y);
    }
    const double tol = cfg.bisect_exit ? 10.0 * cfg.boundary_tol : 10.0 * last_smax * std::sqrt(last_dt);
    out.boundary_class = dom.classify_boundary(out.exit_point, tol);
    return out;
}

template <class Fn>
void parallel_for(long n, int threads, Fn&& fn) {
    int T = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    T = static_cast<int>(std::min<long>(T, n));
    if (T <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(T));
    std::vector<std::thread> pool;
    for (int k = 0; k < T; ++k) {
        const long lo = n * k / T, hi = n * (k + 1) / T;
        pool.emplace_back([&, k, lo, hi] {
            try {
                for (long i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_start(const CuspDomain& dom, std::span<const double> start) {
    if (static_cast<int>(start.size()) != dom.d()) throw StartOutsideDomain("start has wrong dimension");
    if (!dom.contains(start)) {
        std::ostringstream os;
        os << "start point (";
        for (std::size_t i = 0; i < start.size(); ++i) os << (i ? ", " : "") << start[i];
        os << ") is not inside the domain";
        throw StartOutsideDomain(os.str());
    }
}

double normal_quantile_upper(double alpha) {
    // z with erfc(z / sqrt 2) = alpha.
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        if (std::erfc(m / std::numbers::sqrt2) > alpha)
            lo = m;
        else
            hi = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ExitSample simulate_exit(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                         const SimConfig& cfg, std::uint64_t path) {
    check_config(cfg);
    check_start(domain, start);
    return run_path(domain, field, start, cfg, path, std::numeric_limits<double>::infinity());
}

std::vector<ExitSample> simulate_paths(const CuspDomain& domain, const LambdaField& field,
                                       std::span<const double> start, const SimConfig& cfg) {
    check_config(cfg);
    check_start(domain, start);
    std::vector<ExitSample> out(static_cast<std::size_t>(cfg.paths));
    parallel_for(cfg.paths, cfg.threads, [&](long i) {
        out[static_cast<std::size_t>(i)] = run_path(domain, field, start, cfg, static_cast<std::uint64_t>(i),
                                                    std::numeric_limits<double>::infinity());
    });
    return out;
}

MeasureEstimate summarize(const std::vector<ExitSample>& samples,
                          const std::function<double(const ExitSample&)>& f) {
    MeasureEstimate est;
    if (samples.empty()) throw DomainError("no samples");
    long censored = 0;
    double mean = 0.0, m2 = 0.0;
    long n = 0;
    for (const auto& s : samples) {
        if (s.censored) {
            ++censored;
            continue;
        }
        const double v = f(s);
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    est.censoring_rate = static_cast<double>(censored) / static_cast<double>(samples.size());
    est.n_effective = n;
    if (est.censoring_rate >= 0.05) {
        std::ostringstream os;
        os << "censoring rate " << est.censoring_rate << " is at least 5%";
        throw ExcessCensoring(os.str());
    }
    est.mean = mean;
    est.half_width_95 = n > 1 ? 1.96 * std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return est;
}

MeasureEstimate harmonic_measure(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                                 const std::function<double(std::span<const double>)>& g, const SimConfig& cfg) {
    const auto samples = simulate_paths(domain, field, start, cfg);
    std::vector<double> values(samples.size(), 0.0);
    parallel_for(static_cast<long>(samples.size()), cfg.threads, [&](long i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        if (!s.censored) values[static_cast<std::size_t>(i)] = g(s.exit_point);
    });
    const ExitSample* base = samples.data();
    return summarize(samples, [&](const ExitSample& s) { return values[static_cast<std::size_t>(&s - base)]; });
}

MeasureEstimate exit_time_mean(const CuspDomain& domain, const LambdaField& field, std::span<const double> start,
                               const SimConfig& cfg) {
    const auto samples = simulate_paths(domain, field, start, cfg);
    return summarize(samples, [](const ExitSample& s) { return s.exit_time; });
}

CovarianceCheck increment_covariance(const LambdaField& field, std::span<const double> x, double dt, long n,
                                     std::uint64_t seed) {
    if (!(dt > 0.0) || n < 100) throw ConfigError("covariance check needs dt > 0 and n >= 100");
    const int d = static_cast<int>(x.size());
    const double lam = field(x);
    rng::Stream st(seed, 0);
    std::vector<double> xi(static_cast<std::size_t>(d)), inc(static_cast<std::size_t>(d));
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(d, d), s2 = Eigen::MatrixXd::Zero(d, d);
    const double sq = std::sqrt(dt);
    for (long k = 0; k < n; ++k) {
        for (auto& v : xi) v = st.normal();
        apply_diffusion_sqrt(lam, x, xi, inc);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double p = sq * inc[static_cast<std::size_t>(i)] * sq * inc[static_cast<std::size_t>(j)];
                s1(i, j) += p;
                s2(i, j) += p * p;
            }
    }
    CovarianceCheck c;
    const double nn = static_cast<double>(n);
    c.sample = s1 / nn;
    c.expected = 2.0 * dt * coefficient_matrix_for(lam, x);
    c.half_width_95 = Eigen::MatrixXd::Zero(d, d);
    // Simultaneous 95% band over the d(d+1)/2 distinct entries.
    const double z = normal_quantile_upper(0.05 / (d * (d + 1) / 2.0));
    c.within_ci = true;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double var = std::max(s2(i, j) / nn - c.sample(i, j) * c.sample(i, j), 0.0);
            const double se = std::sqrt(var / nn);
            c.half_width_95(i, j) = 1.96 * se;
            const double dev = std::abs(c.sample(i, j) - c.expected(i, j));
            if (se > 0.0) c.max_z = std::max(c.max_z, dev / se);
            if (dev > z * se + 1e-15 * dt) c.within_ci = false;
        }
    return c;
}

const char* to_string(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::ConsistentWithRegular: return "Consistent-with-Regular";
        case ProbeVerdict::ConsistentWithIrregular: return "Consistent-with-Irregular";
        case ProbeVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

ProbeReport regularity_probe(const CuspDomain& domain, const LambdaField& field, const std::vector<Point>& starts,
                             const std::function<double(std::span<const double>)>& g, double g0,
                             const SimConfig& cfg, const std::vector<double>& escape_times) {
    check_config(cfg);
    if (starts.size() < 2) throw DomainError("probe needs at least two starts");
    for (std::size_t k = 1; k < starts.size(); ++k)
        if (!(norm(starts[k]) < norm(starts[k - 1]))) throw DomainError("probe starts must approach the origin");
    ProbeReport rep;
    rep.g0 = g0;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        SimConfig c = cfg;
        c.seed = cfg.seed + 0x9E3779B97F4A7C15ull * (k + 1);
        ProbeRow row;
        row.start = starts[k];
        row.distance = norm(starts[k]);
        row.estimate = harmonic_measure(domain, field, starts[k], g, c);
        row.gap = std::abs(g0 - row.estimate.mean);
        rep.rows.push_back(row);
    }

    std::vector<double> times = escape_times;
    if (times.empty())
        for (int j = 0; j <= 6; ++j) times.push_back(cfg.step * std::pow(4.0, j));
    std::sort(times.begin(), times.end());
    const long n_escape = std::min<long>(cfg.paths, 10000);
    const Point origin(static_cast<std::size_t>(domain.d()), 0.0);
    std::vector<double> tau(static_cast<std::size_t>(n_escape));
    SimConfig ce = cfg;
    ce.seed = cfg.seed ^ 0xD1B54A32D192ED03ull;
    parallel_for(n_escape, cfg.threads, [&](long i) {
        const auto s = run_path(domain, field, origin, ce, static_cast<std::uint64_t>(i), times.back());
        tau[static_cast<std::size_t>(i)] = s.censored ? std::numeric_limits<double>::infinity() : s.exit_time;
    });
    for (double t : times) {
        long hit = 0;
        for (double v : tau)
            if (v <= t) ++hit;
        const double p = static_cast<double>(hit) / static_cast<double>(n_escape);
        rep.escape.push_back({t, p, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n_escape))});
    }

    auto se = [](const ProbeRow& r) { return r.estimate.half_width_95 / 1.96; };
    const ProbeRow& last = rep.rows.back();
    bool all_decrease = true;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const double dec = rep.rows[k - 1].gap - rep.rows[k].gap;
        const double s = std::hypot(se(rep.rows[k - 1]), se(rep.rows[k]));
        if (!(dec > 3.0 * s)) all_decrease = false;
    }
    const ProbeRow& prev = rep.rows[rep.rows.size() - 2];
    const double last_dec = prev.gap - last.gap;
    const double last_dec_se = std::hypot(se(prev), se(last));
    std::ostringstream why;
    if (last.gap <= last.estimate.half_width_95) {
        rep.verdict = ProbeVerdict::ConsistentWithRegular;
        why << "final gap " << last.gap << " is within the 95% interval of 0";
    } else if (all_decrease) {
        rep.verdict = ProbeVerdict::ConsistentWithRegular;
        why << "gap decreases significantly (> 3 SE) at every step; final gap " << last.gap;
    } else if (last.gap > 3.0 * se(last) && !(std::abs(last_dec) > 3.0 * last_dec_se)) {
        rep.verdict = ProbeVerdict::ConsistentWithIrregular;
        why << "final gap " << last.gap << " exceeds 3 SE and the last change " << last_dec
            << " is within 3 SE (" << 3.0 * last_dec_se << ")";
    } else {
        rep.verdict = ProbeVerdict::Inconclusive;
        why << "gap trend is neither persistently decreasing nor flat";
    }
    rep.reason = why.str();
    std::ostringstream note;
    note << "statistical evidence from Euler-Maruyama paths, not a proof; escape frequencies use " << n_escape
         << " paths started at the origin and resolve only times above the step size";
    rep.note = note.str();
    return rep;
}

void write_samples_csv(std::ostream& os, const std::vector<ExitSample>& samples) {
    if (samples.empty()) return;
    const std::size_t d = samples.front().exit_point.size();
    for (std::size_t i = 0; i < d; ++i) os << "x" << (i + 1) << ",";
    os << "exit_time,censored,class\n";
    char buf[64];
    for (const auto& s : samples) {
        for (double v : s.exit_point) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,", s.exit_time);
        os << buf << (s.censored ? 1 : 0) << "," << to_string(s.boundary_class) << "\n";
    }
}

}  // namespace cusplab
