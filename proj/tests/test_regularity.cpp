#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle_quadrature.hpp"

#include "cusplab/errors.hpp"
#include "cusplab/growth.hpp"
#include "cusplab/regularity.hpp"

using namespace cusplab;

TEST_CASE("growth classifier on synthetic partial integrals") {
    std::vector<double> W, lg, llg, conv, pw;
    for (int k = 1; k <= 40; ++k) {
        const double w = k * std::log(2.0);
        W.push_back(w);
        lg.push_back(3.0 + 0.7 * w);
        llg.push_back(1.0 + 2.0 * std::log(w));
        conv.push_back(5.0 - 4.0 * std::exp(-w));
        pw.push_back(2.0 - std::pow(w, -0.5));
    }
    CHECK(growth::classify(W, lg).result == growth::Convergence::Divergent);
    CHECK(growth::classify(W, llg).result == growth::Convergence::Divergent);
    CHECK(growth::classify(W, conv).result == growth::Convergence::Convergent);
    CHECK(growth::classify(W, pw).result == growth::Convergence::Convergent);
    const auto p = growth::default_probe(0.5);
    REQUIRE(p.size() == 40);
    CHECK(p.front() == 0.25);
    CHECK(p.back() == std::ldexp(0.5, -40));
}

TEST_CASE("verdict matrix") {
    CHECK(ito_mckean_test(SpineProfile::power(2.0), 3).verdict == Verdict::Regular);
    CHECK(ito_mckean_test(SpineProfile::power(1.5), 3).verdict == Verdict::Regular);
    for (double eps : {0.3, 0.5, 1.0}) CHECK(ito_mckean_test(SpineProfile::exp_spine(eps), 3).verdict == Verdict::Irregular);
    for (int d : {4, 5, 6}) {
        CHECK(ito_mckean_test(SpineProfile::iter_log_power(1.0 / (d - 3)), d).verdict == Verdict::Regular);
        const double eta = 2.0 / (d - 3);  // eta (d - 3) = 2 > 1
        CHECK(ito_mckean_test(SpineProfile::log_power(eta), d).verdict == Verdict::Irregular);
    }
    CHECK_THROWS_AS(ito_mckean_test(SpineProfile::power(2.0), 2), DomainError);
}

TEST_CASE("partial integrals match the closed form for power spines") {
    // d = 3, r = x^eta: integrand 1/((eta-1) x |ln x|), antiderivative -ln|ln x|/(eta-1)
    for (double eta : {1.5, 2.0, 4.0}) {
        const auto v = ito_mckean_test(SpineProfile::power(eta), 3);
        REQUIRE(v.evidence.size() >= 3);
        const auto [d0, f0] = v.evidence.front();
        for (const auto& [d, f] : v.evidence) {
            const double exact = std::log(std::log(1.0 / d) / std::log(1.0 / d0)) / (eta - 1.0);
            CHECK(f - f0 == doctest::Approx(exact).epsilon(1e-7));
        }
        REQUIRE(v.closed_form);
        CHECK(v.closed_form->verdict == Verdict::Regular);
        CHECK(v.closed_form_agrees);
    }
    // d = 4, r = x |ln x|^{-eta}: integrand 1/(x |ln x|^eta), a direct quadrature oracle in w = ln(1/x)
    const auto v = ito_mckean_test(SpineProfile::log_power(2.0), 4);
    const auto [d0, f0] = v.evidence.front();
    for (std::size_t i = 1; i < v.evidence.size(); i += 7) {
        const auto [d, f] = v.evidence[i];
        const double exact =
            oracle::integrate([](double w) { return std::pow(w, -2.0); }, std::log(1.0 / d0), std::log(1.0 / d), 400);
        CHECK(f - f0 == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("property: closed forms agree with the probe on the catalog") {
    std::vector<std::pair<SpineProfile, int>> catalog{
        {SpineProfile::power(2.0), 3},           {SpineProfile::power(3.0), 3},
        {SpineProfile::exp_spine(0.5), 3},       {SpineProfile::exp_spine(0.3), 3},
        {SpineProfile::power_iter_log(), 3},     {SpineProfile::log_power(2.0), 4},
        {SpineProfile::log_power(0.5), 5},       {SpineProfile::iter_log_power(1.0), 4},
        {SpineProfile::iter_log_power(0.5), 5},  {SpineProfile::power(2.0), 4},
        {SpineProfile::dminus3_loglog(4), 4},    {SpineProfile::exp_spine(0.5), 4}};
    for (const auto& [p, d] : catalog) {
        CAPTURE(p.describe());
        CAPTURE(d);
        const auto v = ito_mckean_test(p, d);
        const auto cf = ito_mckean_closed_form(p, d);
        if (cf) {
            CHECK(v.closed_form_agrees);
            CHECK(v.verdict == cf->verdict);
        }
        CHECK(v.verdict != Verdict::Inconclusive);
    }
}

TEST_CASE("property: verdicts are monotone in the profile for d >= 4") {
    // r1 = x|ln x|^{-2} <= r2 = x|ln x|^{-1.5} near 0; r2 irregular at d = 4 forces r1 irregular
    const auto r1 = SpineProfile::log_power(2.0), r2 = SpineProfile::log_power(1.5);
    for (double x = 1e-3; x > 1e-200; x *= 1e-5) CHECK(r1.value(x) <= r2.value(x));
    const auto v1 = ito_mckean_test(r1, 4), v2 = ito_mckean_test(r2, 4);
    REQUIRE(v2.verdict == Verdict::Irregular);
    CHECK(v1.verdict != Verdict::Regular);
    // partial integrals are ordered as well
    for (std::size_t i = 0; i < std::min(v1.evidence.size(), v2.evidence.size()); ++i)
        if (v1.evidence[i].first == v2.evidence[i].first)
            CHECK(v1.evidence[i].second - v1.evidence.front().second <=
                  v2.evidence[i].second - v2.evidence.front().second + 1e-12);
}

TEST_CASE("Dini tests") {
    CHECK(dini_test(DiniModulus::linear(), 0.5, false).result == DiniResult::Satisfied);
    CHECK(dini_test(DiniModulus::linear(), 0.5, true).result == DiniResult::Satisfied);
    CHECK(dini_test(DiniModulus::inv_log(), 0.5, false).result == DiniResult::Violated);
    CHECK(dini_test(DiniModulus::inv_log(), 0.5, true).result == DiniResult::Satisfied);
    CHECK(dini_test(DiniModulus::inv_loglog(), 0.1, true).result == DiniResult::Violated);
    for (const auto& m : {DiniModulus::linear(), DiniModulus::inv_log(), DiniModulus::inv_loglog()})
        for (bool weighted : {false, true}) {
            const auto v = dini_test(m, 0.1, weighted);
            if (v.closed_form) CHECK(*v.closed_form == v.result);
        }
    // a custom modulus evaluated only through samples
    const auto sq = DiniModulus::custom([](double t) { return std::sqrt(t); });
    CHECK(dini_test(sq, 0.5, false).result == DiniResult::Satisfied);
    const auto bad = DiniModulus::custom([](double t) { return -t; });
    CHECK_THROWS_AS(dini_test(bad, 0.5, false), DomainError);
}

TEST_CASE("omega Dini witness") {
    const auto spec = presets::t23_d3();
    const auto rep = omega_dini_witness(spec, {1e-2, 1e-3, 1e-4});
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
        CHECK(row.holds);
        CHECK(row.lower_bound == doctest::Approx((spec.mu(row.x / 2) - 1.0) / 3.0));
        CHECK(row.deviation >= row.lower_bound);
    }
    CHECK(rep.all_hold);
    CHECK(rep.bound_integral.result == growth::Convergence::Divergent);

    const auto flat = omega_dini_witness(presets::mu_const(1.5, -0.5, 0.5), {1e-2, 1e-3});
    for (const auto& row : flat.rows) {
        CHECK(row.lower_bound == 0.0);
        CHECK(row.holds);
    }
    // mu decreasing on (0, c] violates the hypotheses
    auto dec = make_custom_spec(-0.5, 0.5, [](double t) { return 3.0 - std::abs(t); }, [](double) { return 1.0; });
    dec.even = true;
    CHECK_THROWS_AS(omega_dini_witness(dec, {1e-2}), HypothesisError);
}

TEST_CASE("blow-up: T21 in d = 3 with a cubic spine") {
    const auto spec = presets::t21_d3(0.5);
    const auto prof = SpineProfile::power(3.0);
    std::vector<double> xs;
    for (double x = 1e-2; x >= 1e-6; x /= std::sqrt(10.0)) xs.push_back(x);
    const auto rep = blowup_check(spec, prof, xs);
    REQUIRE(rep.rows.size() == xs.size());
    const double u0 = 2.0;  // axis limit
    for (const auto& row : rep.rows) {
        // (eps/(1-eps)) x^{eta(1-1/eps)+1/eps} = 1/x
        CHECK(row.q2 == doctest::Approx(1.0 / row.x).epsilon(1e-10));
        CHECK(row.q1 == doctest::Approx(std::log(row.x * row.x)).epsilon(1e-10));
        CHECK(row.holds);
        CHECK(row.u >= row.bound);
        if (row.x <= 1e-4 * (1 + 1e-9)) CHECK(row.u > 10.0 * u0);
    }
    CHECK(rep.delta == doctest::Approx(std::pow(2.0, -1.0)));
    CHECK(rep.q2_diverges);
    CHECK(rep.bound_holds);
    CHECK(rep.q1_negative);
}

TEST_CASE("blow-up: T23 in d = 3") {
    const auto spec = presets::t23_d3();
    const auto prof = SpineProfile::power_iter_log();
    std::vector<double> xs;
    for (double x = 1e-2; x >= 1e-40; x *= 1e-2) xs.push_back(x);
    const auto rep = blowup_check(spec, prof, xs);
    for (const auto& row : rep.rows) {
        CHECK(row.q1 == doctest::Approx(std::log(row.x)).epsilon(1e-9));
        CHECK(row.q2 == doctest::Approx(std::log(std::log(1.0 / row.x))).epsilon(1e-9));
        CHECK(row.holds);
    }
    CHECK(rep.q2_diverges);
    CHECK(rep.q1_negative);
    // the tail continues ln w
    for (const auto& [w, q2] : rep.q2_tail) CHECK(q2 == doctest::Approx(std::log(w)).epsilon(1e-5));
}

TEST_CASE("blow-up: T23 in d = 4") {
    const double gamma = 2.0;
    const auto spec = presets::t23_dge4(gamma, 4);
    const auto prof = SpineProfile::iter_log_power(1.0);
    std::vector<double> xs;
    for (double lx = -8; lx >= -280; lx -= 16) xs.push_back(std::pow(10.0, lx));
    const auto rep = blowup_check(spec, prof, xs);
    for (const auto& row : rep.rows) {
        const double g = std::log(std::log(1.0 / row.x));
        const double mu_minus_1 = 1.0 + gamma * std::log(g) / g;
        CHECK(row.q2 * mu_minus_1 == doctest::Approx(std::pow(g, gamma - 1 + gamma * std::log(g) / g)).epsilon(1e-8));
        CHECK(row.holds);
    }
    CHECK(rep.q2_diverges);
}

TEST_CASE("blow-up hypotheses") {
    const std::vector<double> xs{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    CHECK_THROWS_AS(blowup_check(presets::lebesgue(), SpineProfile::power(2.0), xs), HypothesisError);
    CHECK_THROWS_AS(blowup_check(presets::t21_d3(0.5), SpineProfile::power(3.0), {1e-2, 1e-3}), DomainError);
    // r(x) = x^{1.01} is not below x/2 at x = 1e-2
    CHECK_THROWS_AS(check_blowup_hypotheses(presets::t21_d3(0.5), SpineProfile::power(1.01), 1e-3, 1e-2), HypothesisError);
    CHECK_NOTHROW(check_blowup_hypotheses(presets::t21_d3(0.5), SpineProfile::power(3.0), 1e-6, 1e-2));
}

TEST_CASE("alpha window") {
    auto [a, b] = t21_alpha_window(0.5, 4);
    CHECK(a == 1.0);
    CHECK(b == doctest::Approx(3.0));
    std::tie(a, b) = t21_alpha_window(0.9, 5);
    CHECK(b == doctest::Approx(7.0 / 6.0));
    for (int d : {4, 5, 8}) {
        std::tie(a, b) = t21_alpha_window(1.0 - 1e-9, d);
        CHECK(b > 1.0);
        CHECK(b == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK_THROWS_AS(t21_alpha_window(0.5, 3), DomainError);
    CHECK_THROWS_AS(t21_alpha_window(1.0, 4), DomainError);
    CHECK_THROWS_AS(t21_alpha_window(0.0, 4), DomainError);
}

TEST_CASE("property: every alpha in the window gives a positive exponent") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> ue(0.01, 0.99), ut(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double eps = ue(gen);
        const int d = 4 + i % 6;
        const auto [a, b] = t21_alpha_window(eps, d);
        REQUIRE(a < b);
        const double alpha = a + (b - a) * (0.001 + 0.998 * ut(gen));
        const double eta = 1.0 / (d - 3);
        CHECK(eta * ((d - 2) / eps - 1.0) - alpha > 0.0);
    }
}
