#include <cmath>

#include "doctest.h"
#include "oracle_quadrature.hpp"

#include "cusplab/barriers.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/reports.hpp"

using namespace cusplab;

namespace {

const HypothesisCheck& hyp(const BarrierReport& r, int i) { return r.hypotheses.at(static_cast<std::size_t>(i)); }

// L_lambda |x|^{-p} = p |x|^{-p-2} (p - lambda (d - 2)) for constant lambda.
double inv_power_L(double p, double lambda, int d, double rho) { return p * std::pow(rho, -p - 2) * (p - lambda * (d - 2)); }

}  // namespace

TEST_CASE("barrier candidates |x'|^{1 - eps(d-2)}") {
    for (auto [d, eps] : std::vector<std::pair<int, double>>{{3, 0.4}, {4, 0.3}, {5, 0.2}}) {
        CAPTURE(d);
        const CuspDomain dom(d, 1.0, SpineProfile::exp_spine(0.5), true);
        const BarrierCandidate cand{FieldFunction::radial_power(1.0 - eps * (d - 2)), LambdaField::constant(eps), dom};
        const auto rep = verify_barrier(cand, default_annuli(dom));
        CHECK(rep.passed);
        REQUIRE(rep.hypotheses.size() == 3);
        CHECK(hyp(rep, 0).passed);
        CHECK(std::abs(rep.max_Lw) <= 1e-9);
        CHECK(hyp(rep, 1).passed);
        for (const auto& a : rep.annuli) CHECK(a.min_w > 0.0);
        CHECK(hyp(rep, 2).passed);
        CHECK(rep.lw_method == "analytic");

        // the radial oracle: k(k - 1) + lambda (d - 2) k = 0
        const double k = 1.0 - eps * (d - 2);
        CHECK(std::abs(k * (k - 1) + eps * (d - 2) * k) < 1e-15);

        // the same w for the Laplacian fails (a) once d >= 4
        if (d >= 4) {
            const BarrierCandidate lap{cand.w, LambdaField::constant(1.0), dom};
            const auto bad = verify_barrier(lap, default_annuli(dom));
            CHECK_FALSE(bad.passed);
            CHECK_FALSE(hyp(bad, 0).passed);
            // residual k (k - 1 + d - 2) r^{k-2} > 0
            CHECK(k * (k - 1 + d - 2) > 0.0);
            CHECK(bad.max_Lw > 0.0);
        }
    }
}

TEST_CASE("|x|^2 is not a barrier") {
    const CuspDomain dom(3, 1.0, SpineProfile::exp_spine(0.5), true);
    const BarrierCandidate cand{FieldFunction::quadratic(), LambdaField::constant(1.0), dom};
    const auto rep = verify_barrier(cand, default_annuli(dom));
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(hyp(rep, 0).passed);
    // L|x|^2 = 2 trace(a) = 2 (2 + lambda (d - 2)) = 6
    CHECK(rep.max_Lw == doctest::Approx(6.0));
    CHECK(hyp(rep, 2).passed);
}

TEST_CASE("finite-difference path of apply_operator agrees with the closed form") {
    auto w = FieldFunction::inv_power(1.5);
    FieldFunction fd{w.name, w.value, {}, {}};
    const auto field = LambdaField::constant(0.7);
    for (const auto& x : std::vector<Point>{{0.3, 0.2, 0.1}, {-0.2, 0.05, 0.4, 0.1}, {0.5, 0.5, 0.0}}) {
        const int d = static_cast<int>(x.size());
        const auto a = apply_operator(w, field, x, d);
        const auto b = apply_operator(fd, field, x, d);
        CHECK(a.method == "analytic");
        CHECK(b.method == "finite-difference");
        CHECK(a.value == doctest::Approx(inv_power_L(1.5, 0.7, d, norm(x))).epsilon(1e-12));
        CHECK(std::abs(b.value - a.value) <= std::max(b.error, 1e-6 * std::abs(a.value)));
    }
}

TEST_CASE("superharmonicity of |x|^{-p}") {
    const auto two = verify_superharmonic_blowup(1.0, LambdaField::constant(2.0), 3);
    CHECK(two.passed);
    CHECK(two.violations == 0);
    CHECK(two.blows_up.passed);
    CHECK(two.max_Lw <= 0.0);

    const auto one = verify_superharmonic_blowup(1.0, LambdaField::constant(1.0), 3);
    CHECK(one.passed);
    CHECK(std::abs(one.max_Lw) <= 1e-9);

    const auto half = verify_superharmonic_blowup(1.0, LambdaField::constant(0.5), 3);
    CHECK_FALSE(half.passed);
    CHECK(half.violations > 0);
    CHECK(half.max_Lw > 0.0);
    // (1 - lambda)/|x|^3 at the innermost radius of the grid
    const SuperharmonicGrid g;
    CHECK(half.max_Lw <= inv_power_L(1.0, 0.5, 3, g.rmin) * (1 + 1e-9));

    for (int d : {4, 5}) {
        CHECK(verify_superharmonic_blowup(d - 2.0, LambdaField::constant(1.0), d).passed);
        CHECK(verify_superharmonic_blowup(d - 2.0, LambdaField::constant(1.5), d).passed);
        CHECK_FALSE(verify_superharmonic_blowup(d - 2.0, LambdaField::constant(0.9), d).passed);
    }
}

TEST_CASE("witness on the Lebesgue spine") {
    const double eps = 0.5;
    const CuspDomain dom(3, 1.0, SpineProfile::exp_spine(eps), false);
    const WitnessPair pair{FieldFunction::potential(presets::lebesgue()), FieldFunction::inv_power(1.0),
                           LambdaField::constant(1.0)};
    const auto rep = irregularity_witness(pair, dom);
    CHECK(rep.valid);
    CHECK(rep.alpha == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(rep.beta - (1.0 + 2.0 * eps)) < 0.1);
    CHECK(rep.gap > 0.5);
    CHECK_FALSE(rep.note.empty());
}

TEST_CASE("witness for T21 in d = 3") {
    const CuspDomain dom(3, 1.0, SpineProfile::power(3.0), true);
    const WitnessPair pair{FieldFunction::potential(presets::t21_d3(0.5)), FieldFunction::inv_power(1.0),
                           LambdaField::constant(2.0)};
    const auto rep = irregularity_witness(pair, dom);
    CHECK(rep.valid);
    CHECK(rep.alpha == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::isinf(rep.beta));
    CHECK(rep.gap >= 0.5);
    for (const auto& p : rep.paths) CHECK(p.w_blows_up);

    // refining the sampling does not move the estimates
    auto paths = default_approach_paths(dom);
    for (auto& p : paths) {
        p.samples = 2 * p.samples - 1;
        p.ratio = std::sqrt(p.ratio);
    }
    const auto fine = irregularity_witness(pair, dom, paths);
    CHECK(std::abs(fine.alpha - rep.alpha) <= rep.alpha_error + fine.alpha_error + 1e-6);
    CHECK(std::isinf(fine.beta));
}

TEST_CASE("constant boundary data gives no witness") {
    const CuspDomain dom(3, 1.0, SpineProfile::exp_spine(0.5), false);
    const WitnessPair pair{FieldFunction::constant(1.0), FieldFunction::inv_power(1.0), LambdaField::constant(1.0)};
    const auto rep = irregularity_witness(pair, dom);
    CHECK_FALSE(rep.valid);
    CHECK(rep.failed == "beta > alpha");
    CHECK(rep.gap == doctest::Approx(0.0));
}

TEST_CASE("barrier ratio") {
    const auto spec = presets::l71(1.8, 1.5);
    const auto prof = SpineProfile::log_power(0.7, 0.25);
    const std::vector<double> xs{1e-2, 1e-3, 1e-4, 1e-5};
    const auto rep = barrier_ratio_check(spec, prof, 5, xs);
    CHECK(rep.increasing);
    CHECK(rep.exceeds_one);
    CHECK(rep.passed);

    // deficit oracle: in w = ln(1/|t|), ∫_{|t|<2x} h = 2 W^{1-gamma}/(gamma - 1) with W = ln(1/(2x)),
    // plus ∫_{|t|>2x} h (1 - |t|^mu / D^{mu/2})
    for (const auto& row : rep.rows) {
        if (row.x < 1e-3 * 0.999) continue;
        const double x = row.x, r = row.r, g = 1.5, mu = 1.8;
        const double W = std::log(1.0 / (2 * x)), wc = std::log(1.0 / 0.25);
        double outer = 0.0;
        for (double sgn : {1.0, -1.0}) {
            auto f = [&](double w) {
                const double t = sgn * std::exp(-w);
                const double D = (t - x) * (t - x) + r * r;
                return std::pow(w, -g) * (1.0 - std::pow(std::abs(t), mu) * std::pow(D, -mu / 2));
            };
            outer += oracle::integrate(f, wc, W, 400);
        }
        const double oracle = 2 * std::pow(W, 1 - g) / (g - 1) + outer;
        CHECK(row.deficit == doctest::Approx(oracle).epsilon(1e-7));
    }

    const auto crit = barrier_ratio_check(presets::l71(1.0, 1.5), SpineProfile::log_power(1.0, 0.25), 4, xs);
    CHECK(crit.increasing);
    CHECK(crit.passed);
    CHECK(crit.rows.back().ratio > crit.rows.front().ratio);

    CHECK_THROWS_AS(barrier_ratio_check(spec, SpineProfile::log_power(2.0, 0.25), 5, xs), HypothesisError);
    CHECK_THROWS_AS(barrier_ratio_check(presets::l71(1.0, 2.5), prof, 4, xs), HypothesisError);
    CHECK_THROWS_AS(barrier_ratio_check(presets::t21_d3(0.5), prof, 5, xs), DomainError);
}

TEST_CASE("property: reports are reproducible") {
    const CuspDomain dom(4, 1.0, SpineProfile::exp_spine(0.5), true);
    const BarrierCandidate cand{FieldFunction::radial_power(0.4), LambdaField::constant(0.3), dom};
    const auto a = to_json(verify_barrier(cand, default_annuli(dom), 12)).dump();
    const auto b = to_json(verify_barrier(cand, default_annuli(dom), 12)).dump();
    CHECK(a == b);
    CHECK_THROWS_AS(verify_barrier(cand, {}, 12), GridError);
    CHECK_THROWS_AS(verify_barrier(cand, {{2.0, 3.0}}, 12), GridError);
}
