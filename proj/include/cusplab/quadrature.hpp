#pragma once

// Globally adaptive Gauss-Kronrod (10/21) quadrature over a set of pieces.
// The integrand is vector valued so that related integrals share nodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cusplab/errors.hpp"

namespace cusplab::quad {

struct Config {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    bool singularity_split = true;
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Result {
    Vec<N> value{};
    Vec<N> error{};
    int intervals = 0;
    int evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077712128542900, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t N>
struct Segment {
    int piece;
    double a, b;
    Vec<N> value, error, absval;
    bool splittable;
};

template <std::size_t N, class F>
Segment<N> rule21(F& f, int piece, double a, double b) {
    constexpr double epmach = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    const double half = 0.5 * (b - a);
    const double centr = 0.5 * (a + b);
    Vec<N> resk{}, resg{}, resabs{}, resasc{};
    std::array<Vec<N>, 21> fv;
    auto check = [&](const Vec<N>& v, double s) {
        for (double e : v)
            if (!std::isfinite(e))
                throw EvaluationError("non-finite integrand value at s=" + std::to_string(s));
    };
    fv[20] = f(piece, centr);
    check(fv[20], centr);
    for (int k = 0; k < 10; ++k) {
        // Nodes measured from the nearer endpoint keep small offsets exact.
        const double off = half * (1.0 - xgk[k]);
        const double s1 = a + off, s2 = b - off;
        fv[2 * k] = f(piece, s1);
        fv[2 * k + 1] = f(piece, s2);
        check(fv[2 * k], s1);
        check(fv[2 * k + 1], s2);
    }
    Segment<N> seg{piece, a, b, {}, {}, {}, true};
    for (std::size_t i = 0; i < N; ++i) {
        double k21 = wgk[10] * fv[20][i];
        double g10 = 0.0;
        double abs21 = std::abs(k21);
        for (int k = 0; k < 10; ++k) {
            const double s = fv[2 * k][i] + fv[2 * k + 1][i];
            k21 += wgk[k] * s;
            abs21 += wgk[k] * (std::abs(fv[2 * k][i]) + std::abs(fv[2 * k + 1][i]));
            if (k % 2 == 1) g10 += wg[k / 2] * s;
        }
        const double mean = 0.5 * k21;
        double asc = wgk[10] * std::abs(fv[20][i] - mean);
        for (int k = 0; k < 10; ++k)
            asc += wgk[k] * (std::abs(fv[2 * k][i] - mean) + std::abs(fv[2 * k + 1][i] - mean));
        resk[i] = k21 * half;
        resg[i] = g10 * half;
        resabs[i] = abs21 * std::abs(half);
        resasc[i] = asc * std::abs(half);
        double err = std::abs(resk[i] - resg[i]);
        if (resasc[i] != 0.0 && err != 0.0)
            err = resasc[i] * std::min(1.0, std::pow(200.0 * err / resasc[i], 1.5));
        if (resabs[i] > uflow / (50.0 * epmach)) err = std::max(50.0 * epmach * resabs[i], err);
        seg.value[i] = resk[i];
        seg.error[i] = err;
        seg.absval[i] = resabs[i];
    }
    const double width_floor = 8.0 * epmach * std::max(std::abs(a), std::abs(b)) + 16.0 * uflow;
    seg.splittable = std::abs(b - a) > width_floor;
    return seg;
}

}  // namespace detail

// f(piece, s) returns Vec<N>; pieces are (lo, hi) ranges of the integration
// variable, each integrated with the same piece index passed back to f.
template <std::size_t N, class F>
Result<N> integrate(F&& f, const std::vector<std::pair<double, double>>& pieces, const Config& cfg) {
    using Seg = detail::Segment<N>;
    std::vector<Seg> segs;
    segs.reserve(pieces.size() + 2 * static_cast<std::size_t>(cfg.max_subdivisions));
    Result<N> out;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        if (!(pieces[p].second > pieces[p].first)) continue;
        segs.push_back(detail::rule21<N>(f, static_cast<int>(p), pieces[p].first, pieces[p].second));
        out.evaluations += 21;
    }
    auto totals = [&](Vec<N>& v, Vec<N>& e, Vec<N>& m) {
        v.fill(0.0);
        e.fill(0.0);
        m.fill(0.0);
        for (const auto& s : segs)
            for (std::size_t i = 0; i < N; ++i) {
                v[i] += s.value[i];
                e[i] += s.error[i];
                m[i] += s.absval[i];
            }
    };
    Vec<N> val, err, mass;
    totals(val, err, mass);
    int splits = 0;
    for (;;) {
        Vec<N> scale;
        bool done = true;
        for (std::size_t i = 0; i < N; ++i) {
            // Cancellation limits attainable accuracy to a multiple of eps * ∫|f|.
            scale[i] = std::max({cfg.abs_tol, cfg.rel_tol * std::abs(val[i]),
                                 200.0 * std::numeric_limits<double>::epsilon() * mass[i]});
            if (err[i] > scale[i]) done = false;
        }
        if (done) break;
        if (splits >= cfg.max_subdivisions) {
            out.converged = false;
            break;
        }
        std::size_t worst = segs.size();
        double worst_key = -1.0;
        for (std::size_t j = 0; j < segs.size(); ++j) {
            if (!segs[j].splittable) continue;
            double key = 0.0;
            for (std::size_t i = 0; i < N; ++i) key = std::max(key, segs[j].error[i] / scale[i]);
            if (key > worst_key) {
                worst_key = key;
                worst = j;
            }
        }
        if (worst == segs.size() || worst_key <= 0.0) {
            out.converged = false;
            break;
        }
        Seg old = segs[worst];
        const double mid = 0.5 * (old.a + old.b);
        Seg left = detail::rule21<N>(f, old.piece, old.a, mid);
        Seg right = detail::rule21<N>(f, old.piece, mid, old.b);
        out.evaluations += 42;
        for (std::size_t i = 0; i < N; ++i) {
            val[i] += left.value[i] + right.value[i] - old.value[i];
            err[i] += left.error[i] + right.error[i] - old.error[i];
            mass[i] += left.absval[i] + right.absval[i] - old.absval[i];
        }
        segs[worst] = left;
        segs.push_back(right);
        ++splits;
    }
    Vec<N> final_mass;
    totals(out.value, out.error, final_mass);
    out.intervals = static_cast<int>(segs.size());
    return out;
}

template <class F>
Result<1> integrate_scalar(F&& f, double a, double b, const Config& cfg) {
    auto g = [&](int, double s) { return Vec<1>{f(s)}; };
    return integrate<1>(g, {{a, b}}, cfg);
}

}  // namespace cusplab::quad
