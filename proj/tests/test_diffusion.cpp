#include <chrono>
#include <cmath>
#include <sstream>

#include "doctest.h"

#include "cusplab/diffusion.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/potentials.hpp"

using namespace cusplab;

namespace {

// The unit ball with a spine of zero radius, i.e. no spine at all for the process.
CuspDomain ball(int d, double c = 1.0) {
    return CuspDomain(d, c, SpineProfile::custom([](double) { return 0.0; }, c, "zero"), false);
}

}  // namespace

TEST_CASE("Philox known-answer vectors") {
    using rng::philox4x32;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == rng::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          rng::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          rng::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream moments") {
    rng::Stream s(7, 3);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
    CHECK(std::abs(sn4 / n - 3.0) < 4 * std::sqrt(96.0 / n));
    // streams differ by path and seed
    rng::Stream a(7, 3), b(7, 4), c(8, 3);
    const double x = a.uniform();
    CHECK(x != b.uniform());
    CHECK(x != c.uniform());
}

TEST_CASE("seed determinism and thread independence") {
    const CuspDomain dom(3, 1.0, SpineProfile::exp_spine(0.5), false);
    SimConfig cfg;
    cfg.paths = 64;
    cfg.step = 1e-3;
    cfg.seed = 42;
    const std::vector<double> start{0.05, 0.1, 0.0};
    auto dump = [&](int threads) {
        auto c = cfg;
        c.threads = threads;
        std::ostringstream os;
        write_samples_csv(os, simulate_paths(dom, LambdaField::constant(1.0), start, c));
        return os.str();
    };
    const auto one = dump(1);
    CHECK(one == dump(1));
    CHECK(one == dump(3));
    CHECK(one.rfind("x1,x2,x3,exit_time,censored,class\n", 0) == 0);
    auto other = cfg;
    other.seed = 43;
    std::ostringstream os;
    write_samples_csv(os, simulate_paths(dom, LambdaField::constant(1.0), start, other));
    CHECK(os.str() != one);
}

TEST_CASE("exit sample contract") {
    const auto dom = ball(3);
    SimConfig cfg;
    cfg.step = 1e-3;
    const std::vector<double> start{-0.5, 0.3, 0.0};
    for (std::uint64_t p = 0; p < 50; ++p) {
        const auto s = simulate_exit(dom, LambdaField::constant(1.0), start, cfg, p);
        CHECK(s.exit_time > 0.0);
        CHECK_FALSE(s.censored);
        CHECK(std::abs(norm(s.exit_point) - 1.0) < 1e-8);
        CHECK(s.boundary_class == BoundaryClass::Sphere);
    }
    cfg.max_steps = 10;
    const auto c = simulate_exit(dom, LambdaField::constant(1.0), start, cfg, 0);
    CHECK(c.censored);
    CHECK(c.steps == 10);

    auto bad = cfg;
    bad.step = 0.0;
    CHECK_THROWS_AS(simulate_exit(dom, LambdaField::constant(1.0), start, bad), ConfigError);
    CHECK_THROWS_AS(simulate_exit(dom, LambdaField::constant(1.0), std::vector<double>{2.0, 0, 0}, cfg), StartOutsideDomain);
    cfg.paths = 200;
    CHECK_THROWS_AS(exit_time_mean(dom, LambdaField::constant(1.0), start, cfg), ExcessCensoring);
}

TEST_CASE("exit time from a ball") {
    const auto dom = ball(3);
    SimConfig cfg;
    cfg.step = 2e-4;
    cfg.paths = 4000;
    const std::vector<double> start{-0.5, 0.3, 0.0};
    const auto m = exit_time_mean(dom, LambdaField::constant(1.0), start, cfg);
    const double exact = (1.0 - 0.34) / 6.0;
    CHECK(m.censoring_rate == 0.0);
    CHECK(std::abs(m.mean - exact) < 3 * m.half_width_95);
}

TEST_CASE("harmonic measure: constant and odd data") {
    const auto dom = ball(3);
    SimConfig cfg;
    cfg.step = 1e-3;
    cfg.paths = 2000;
    const std::vector<double> start{-0.5, 0.0, 0.0};
    const auto one = harmonic_measure(dom, LambdaField::constant(1.0), start, [](std::span<const double>) { return 1.0; }, cfg);
    CHECK(one.mean == 1.0);
    CHECK(one.half_width_95 == 0.0);
    for (double lambda : {1.0, 3.0}) {
        const auto odd = harmonic_measure(dom, LambdaField::constant(lambda), start,
                                          [](std::span<const double> x) { return x[1]; }, cfg);
        CHECK(std::abs(odd.mean) < odd.half_width_95);
    }
    // odd in x1 from a start on {x1 = 0}
    const std::vector<double> mid{0.0, 0.4, 0.0};
    const auto x1 = harmonic_measure(dom, LambdaField::constant(1.0), mid, [](std::span<const double> x) { return x[0]; }, cfg);
    CHECK(std::abs(x1.mean) < 1.5 * x1.half_width_95);
}

TEST_CASE("increment covariance") {
    for (double lambda : {0.3, 1.0, 4.0}) {
        const std::vector<double> x{0.1, 0.3, -0.4};
        const auto c = increment_covariance(LambdaField::constant(lambda), x, 1e-3, 40000, 5);
        CHECK(c.expected.isApprox(2e-3 * coefficient_matrix_for(lambda, x), 1e-14));
        CHECK(c.max_z < 4.0);
    }
}

TEST_CASE("generator consistency at first order") {
    // antithetic one-step estimate of (E u(X_dt) - u(x)) / dt, u = exp(-|x|^2)
    auto u = [](const std::vector<double>& y) {
        double s = 0;
        for (double v : y) s += v * v;
        return std::exp(-s);
    };
    const double lambda = 2.5;
    for (const auto& x : std::vector<std::vector<double>>{{0.1, 0.3, -0.4}, {-0.5, 0.2, 0.6}}) {
        const auto a = coefficient_matrix_for(lambda, x);
        double s2 = 0;
        for (double v : x) s2 += v * v;
        double exact = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                exact += a(i, j) * std::exp(-s2) * (4 * x[i] * x[j] - (i == j ? 2.0 : 0.0));
        std::vector<double> est, dts{4e-3, 2e-3, 1e-3};
        for (double dt : dts) {
            rng::Stream s(11, 0);
            const long n = 200000;
            double acc = 0;
            std::vector<double> xi(3), inc(3), yp(3), ym(3);
            for (long k = 0; k < n; ++k) {
                for (auto& v : xi) v = s.normal();
                apply_diffusion_sqrt(lambda, x, xi, inc);
                for (int i = 0; i < 3; ++i) {
                    yp[i] = x[i] + std::sqrt(dt) * inc[i];
                    ym[i] = x[i] - std::sqrt(dt) * inc[i];
                }
                acc += 0.5 * (u(yp) + u(ym)) - u(x);
            }
            est.push_back(acc / n / dt);
        }
        const double rich = 2 * est[2] - est[1];
        CHECK(std::abs(est[2] - exact) < 0.05 * std::abs(exact) + 0.02);
        CHECK(std::abs(rich - exact) < 0.05 * std::abs(exact) + 0.02);
    }
}

TEST_CASE("harmonic measure tracks the Lebesgue potential") {
    const CuspDomain dom(3, 1.0, SpineProfile::exp_spine(0.5), false);
    const auto spec = presets::lebesgue();
    auto g = [&spec](std::span<const double> x) { return eval_u(spec, x[0], radial_part(x)).value; };
    SimConfig cfg;
    cfg.step = 2e-4;
    cfg.paths = 1500;
    for (double t : {0.2, 0.1}) {
        const std::vector<double> start{0.0, t, 0.0};
        const auto m = harmonic_measure(dom, LambdaField::constant(1.0), start, g, cfg);
        const double exact = eval_u(spec, 0.0, t).value;
        CHECK(std::abs(m.mean - exact) < 3 * m.half_width_95 + 0.01);
    }
}
