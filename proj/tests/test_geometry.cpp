#include <cmath>
#include <random>

#include "doctest.h"

#include "cusplab/errors.hpp"
#include "cusplab/geometry.hpp"
#include "cusplab/scenarios.hpp"

using namespace cusplab;

namespace {

std::vector<SpineProfile> catalog_profiles() {
    return {SpineProfile::exp_spine(0.5),    SpineProfile::power(2.0),         SpineProfile::log_power(1.0),
            SpineProfile::iter_log_power(1.0), SpineProfile::power_iter_log(), SpineProfile::dminus3_loglog(5)};
}

}  // namespace

TEST_CASE("profile values from the defining formulas") {
    const auto e = SpineProfile::exp_spine(0.5);
    CHECK(eval_profile(e, 0.0) == 0.0);
    CHECK(eval_profile(e, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    const auto lp = SpineProfile::log_power(1.0);
    CHECK(eval_profile(lp, std::exp(-2.0)) == doctest::Approx(std::exp(-2.0) / 2.0).epsilon(1e-15));
    CHECK(eval_profile(SpineProfile::power(3.0), 0.5) == doctest::Approx(0.125));

    // r(t) = t |ln t|^{-p} (ln|ln t|)^{-p}
    const double t = 1e-3, L = -std::log(t);
    CHECK(eval_profile(SpineProfile::iter_log_power(0.5), t) ==
          doctest::Approx(t * std::pow(L, -0.5) * std::pow(std::log(L), -0.5)).epsilon(1e-13));
    // r(t) = t^{1 + |ln|ln t||}
    CHECK(eval_profile(SpineProfile::power_iter_log(), t) ==
          doctest::Approx(std::pow(t, 1.0 + std::abs(std::log(L)))).epsilon(1e-12));
    // the alias carries p = 1/(d-3)
    CHECK(eval_profile(SpineProfile::dminus3_loglog(5), t) ==
          doctest::Approx(eval_profile(SpineProfile::iter_log_power(0.5), t)).epsilon(1e-14));
}

TEST_CASE("profile argument checks") {
    const auto p = SpineProfile::power(2.0, 1.0);
    CHECK_THROWS_AS(eval_profile(p, -0.1), DomainError);
    CHECK_THROWS_AS(eval_profile(p, 1.5), DomainError);
    const auto bad = SpineProfile::custom([](double) { return -1.0; }, 1.0);
    CHECK_THROWS_AS(eval_profile(bad, 0.5), EvaluationError);
    const auto nan = SpineProfile::custom([](double) { return std::nan(""); }, 1.0);
    CHECK_THROWS_AS(eval_profile(nan, 0.5), EvaluationError);
    // ln|ln t| needs t < 1/e, so c beyond the validity window is refused
    CHECK_THROWS_AS(SpineProfile::power_iter_log(0.5), DomainError);
    CHECK_THROWS_AS(SpineProfile::dminus3_loglog(3), DomainError);
}

TEST_CASE("catalog profiles are positive and decrease to zero along geometric sequences") {
    for (const auto& p : catalog_profiles()) {
        CAPTURE(p.describe());
        double prev = INFINITY;
        for (double t = p.c(); t > 1e-12; t *= 0.5) {
            const double r = eval_profile(p, t);
            CHECK(std::isfinite(r));
            if (r == 0.0) break;  // ExpSpine underflows quickly
            CHECK(r > 0.0);
            CHECK(r < prev);
            prev = r;
        }
        CHECK(eval_profile(p, 0.0) == 0.0);
    }
}

TEST_CASE("derivative matches central differences") {
    for (const auto& p : catalog_profiles()) {
        CAPTURE(p.describe());
        const double t = 0.05, h = 1e-6;
        const double fd = (eval_profile(p, t + h) - eval_profile(p, t - h)) / (2 * h);
        CHECK(p.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("log_ratio_w agrees with ln(r(x)/x)") {
    for (const auto& p : catalog_profiles()) {
        CAPTURE(p.describe());
        for (double x : {0.1, 1e-3, 1e-6}) {
            const double r = eval_profile(p, x);
            if (r == 0.0) continue;
            CHECK(p.log_ratio_w(-std::log(x)) == doctest::Approx(std::log(r / x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("contains follows the set definition") {
    const CuspDomain sym(3, 1.0, SpineProfile::power(2.0), true);
    const std::vector<double> a{0.5, 0.1, 0.0};
    CHECK_FALSE(sym.contains(a));  // |x'| = 0.1 <= r(0.5) = 0.25
    const std::vector<double> b{0.5, 0.3, 0.0};
    CHECK(sym.contains(b));
    const std::vector<double> origin{0.0, 0.0, 0.0};
    CHECK_FALSE(sym.contains(origin));
    const CuspDomain half(3, 1.0, SpineProfile::exp_spine(0.5), false);
    const std::vector<double> neg{-0.5, 0.0, 0.0};
    CHECK(half.contains(neg));
    CHECK_FALSE(sym.contains(std::vector<double>{-0.5, 0.0, 0.0}));
    CHECK_FALSE(sym.contains(std::vector<double>{0.0, 1.0, 0.0}));  // |x| = c
    CHECK_FALSE(sym.contains(std::vector<double>{0.0, 0.9, 0.5}));
    CHECK_THROWS_AS(sym.contains(std::vector<double>{0.0, NAN, 0.0}), DomainError);
    CHECK_THROWS_AS(sym.contains(std::vector<double>{0.1, 0.2}), DomainError);
}

TEST_CASE("classify_boundary precedence") {
    const CuspDomain dom(3, 1.0, SpineProfile::power(2.0), true);
    CHECK(dom.classify_boundary(std::vector<double>{0, 0, 0}, 1e-12) == BoundaryClass::Origin);
    CHECK(dom.classify_boundary(std::vector<double>{1, 0, 0}, 1e-9) == BoundaryClass::Spine);
    CHECK(dom.classify_boundary(std::vector<double>{0.5, 0.25, 0}, 1e-9) == BoundaryClass::Spine);
    CHECK(dom.classify_boundary(std::vector<double>{0, 1, 0}, 1e-9) == BoundaryClass::Sphere);
    CHECK(dom.classify_boundary(std::vector<double>{0.1, 0.5, 0}, 1e-9) == BoundaryClass::NotBoundary);
    CHECK_THROWS_AS(dom.classify_boundary(std::vector<double>{0, 1, 0}, 0.0), DomainError);
}

TEST_CASE("property: symmetric domains are even in x1, and thinner spines leave more of the ball") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const CuspDomain thin(4, 1.0, SpineProfile::power(3.0), true);
    const CuspDomain thick(4, 1.0, SpineProfile::power(1.5), true);
    for (int i = 0; i < 5000; ++i) {
        std::vector<double> x{u(gen), 0.3 * u(gen), 0.3 * u(gen), 0.3 * u(gen)};
        std::vector<double> m = x;
        m[0] = -m[0];
        CHECK(thin.contains(x) == thin.contains(m));
        // r_thin <= r_thick on [0, 1]
        if (thick.contains(x)) CHECK(thin.contains(x));
    }
}

TEST_CASE("property: the origin is a boundary point of every catalog domain") {
    for (const auto& p : catalog_profiles()) {
        CAPTURE(p.describe());
        const CuspDomain dom(p.kind() == ProfileKind::DMinus3LogLog ? 5 : 3, p.c(), p, true);
        for (double s = 1e-2; s > 1e-8; s *= 0.1) {
            std::vector<double> in(static_cast<std::size_t>(dom.d()), 0.0), out = in;
            in[1] = s;   // off the axis
            out[0] = s;  // on the spine axis
            CHECK(dom.contains(in));
            CHECK_FALSE(dom.contains(out));
        }
    }
}

TEST_CASE("domain radius is clamped to the profile window") {
    const CuspDomain dom(3, 1.0, SpineProfile::power_iter_log(0.3), true);
    CHECK(dom.clamped());
    CHECK(dom.radius() <= 0.3);
    CHECK_FALSE(dom.contains(std::vector<double>{0.0, 0.5, 0.0}));
}

TEST_CASE("profile and domain serialization round-trips exactly") {
    for (const auto& p : catalog_profiles()) {
        const auto j = profile_to_json(p);
        const auto back = profile_from_json(nlohmann::json::parse(j.dump()));
        CHECK(back.kind() == p.kind());
        CHECK(back.param() == p.param());
        CHECK(back.c() == p.c());
        CHECK(profile_to_json(back) == j);
        for (double t : {0.01, 0.1, 0.2}) CHECK(eval_profile(back, t) == eval_profile(p, t));
    }
    const CuspDomain dom(4, 0.7, SpineProfile::log_power(1.25, 0.3), false);
    const auto j = domain_to_json(dom);
    const auto back = domain_from_json(nlohmann::json::parse(j.dump()));
    CHECK(domain_to_json(back) == j);
    CHECK_THROWS_AS(profile_to_json(SpineProfile::custom([](double t) { return t * t; }, 1.0)), SerializationError);
}
