#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"

#include "cusplab/errors.hpp"
#include "cusplab/operators.hpp"
#include "cusplab/scenarios.hpp"

using namespace cusplab;

namespace {

// Independent construction: a = lambda I + (1 - lambda) (e1 e1^T + n n^T), n = x'/|x'|.
Eigen::MatrixXd oracle_matrix(double lambda, const std::vector<double>& x) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d), n = Eigen::VectorXd::Zero(d);
    e1(0) = 1.0;
    double r = 0.0;
    for (int i = 1; i < d; ++i) r += x[i] * x[i];
    r = std::sqrt(r);
    if (r == 0.0) return Eigen::MatrixXd::Identity(d, d);
    for (int i = 1; i < d; ++i) n(i) = x[i] / r;
    return lambda * Eigen::MatrixXd::Identity(d, d) + (1.0 - lambda) * (e1 * e1.transpose() + n * n.transpose());
}

std::vector<double> random_point(std::mt19937_64& gen, int d) {
    std::normal_distribution<double> g;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = g(gen);
    return x;
}

}  // namespace

TEST_CASE("coefficient matrix examples") {
    const auto one = LambdaField::constant(1.0);
    const std::vector<double> x{0.3, -0.2, 0.7};
    CHECK(coefficient_matrix(one, x, 3).a.isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-15));

    const auto two = LambdaField::constant(2.0);
    const auto a = coefficient_matrix(two, std::vector<double>{0, 1, 0}, 3).a;
    CHECK(a(1, 1) == doctest::Approx(1.0));
    CHECK(a(2, 2) == doctest::Approx(2.0));
    CHECK(a(1, 2) == doctest::Approx(0.0));

    const double s = 1.0 / std::sqrt(2.0);
    const auto b = coefficient_matrix(two, std::vector<double>{0, s, s}, 3).a;
    CHECK(b(1, 1) == doctest::Approx(1.5));
    CHECK(b(2, 2) == doctest::Approx(1.5));
    CHECK(b(1, 2) == doctest::Approx(-0.5));
    CHECK(b(0, 0) == 1.0);
    CHECK(b(0, 1) == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    CHECK(es.eigenvalues()(0) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(2.0));

    // identity on the axis
    CHECK(coefficient_matrix(two, std::vector<double>{0.4, 0, 0}, 3).a.isApprox(Eigen::MatrixXd::Identity(3, 3)));
    CHECK_THROWS_AS(LambdaField::constant(-1.0), DomainError);
}

TEST_CASE("property: matrix entries and eigenstructure against the oracle") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> lam(0.05, 20.0);
    for (int i = 0; i < 300; ++i) {
        const int d = 3 + i % 4;
        const double l = lam(gen);
        const auto x = random_point(gen, d);
        const auto a = coefficient_matrix(LambdaField::constant(l), x, d).a;
        CHECK((a - oracle_matrix(l, x)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
        // a x' = x' and a z = lambda z for z orthogonal to x' in the x'-block
        Eigen::VectorXd xp = Eigen::VectorXd::Zero(d);
        for (int k = 1; k < d; ++k) xp(k) = x[static_cast<std::size_t>(k)];
        CHECK((a * xp - xp).norm() < 1e-12 * xp.norm());
        Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
        z(1) = -xp(2);
        z(2) = xp(1);
        CHECK((a * z - l * z).norm() < 1e-12 * (1 + l) * z.norm());
        // ellipticity bounds
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const double theta = std::min({l, 1.0 / l, 1.0});
        CHECK(es.eigenvalues().minCoeff() >= theta - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= 1.0 / theta + 1e-12);
    }
}

TEST_CASE("eigen spread") {
    const std::vector<double> x{0.1, 0.4, -0.3};
    CHECK(eigen_spread(LambdaField::constant(1.0 / 0.3), x) == doctest::Approx(0.3));
    CHECK(eigen_spread(LambdaField::constant(0.3), x) == doctest::Approx(0.3));
    CHECK(eigen_spread(LambdaField::constant(1.0), x) == 1.0);
    CHECK_THROWS_AS(eigen_spread(LambdaField::constant(0.3), std::vector<double>{0.1, 0, 0}), DomainError);
    CHECK(eigen_spread(LambdaField::constant(0.3), std::vector<double>{0.1, 0, 0}, true) == 1.0);
    // invariant under rotations about the x1 axis
    const auto field = LambdaField::smooth_patch(LambdaField::constant(3.0), 0.2, SpineProfile::power(2.0), 0.5);
    for (double th = 0.0; th < 6.2; th += 0.7) {
        const std::vector<double> y{-0.3, 0.02 * std::cos(th), 0.02 * std::sin(th)};
        CHECK(eigen_spread(field, y) == doctest::Approx(eigen_spread(field, std::vector<double>{-0.3, 0.02, 0.0})));
    }
}

TEST_CASE("radial residual examples") {
    const std::vector<double> x{0.2, 0.5, 0.0};
    const double r = 0.5;
    CHECK(radial_residual(LambdaField::constant(1.0), 3, 0.0, 2.0, 2 * r, x) == doctest::Approx(4.0));
    CHECK(radial_residual(LambdaField::constant(1.0), 3, 0.0, 0.0, 0.0, x) == 0.0);
    for (int d : {3, 4, 5})
        for (double eps : {0.1, 0.2, 0.3}) {
            if (eps * (d - 2) >= 1.0) continue;
            const double k = 1.0 - eps * (d - 2);
            for (double rr : {1e-3, 0.1, 2.0}) {
                std::vector<double> y(static_cast<std::size_t>(d), 0.0);
                y[1] = rr;
                const double vr = k * std::pow(rr, k - 1), vrr = k * (k - 1) * std::pow(rr, k - 2);
                CHECK(std::abs(radial_residual(LambdaField::constant(eps), d, 0.0, vrr, vr, y)) <=
                      1e-12 * std::abs(vrr));
            }
        }
    CHECK_THROWS_AS(radial_residual(LambdaField::constant(1.0), 3, 0, 0, 0, std::vector<double>{1, 0, 0}), DomainError);
}

TEST_CASE("property: radial residual matches the full second-order form by finite differences") {
    // v(x1, r) = exp(-x1^2) r^2 cos(r) + x1 r
    auto v = [](double x1, double r) { return std::exp(-x1 * x1) * r * r * std::cos(r) + x1 * r; };
    auto u = [&v](const Eigen::VectorXd& x) { return v(x(0), x.tail(x.size() - 1).norm()); };
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> un(0.2, 1.0);
    for (int i = 0; i < 10; ++i) {
        const int d = 3 + i % 3;
        const double lambda = 0.3 + 0.4 * i;
        Eigen::VectorXd x(d);
        for (int k = 0; k < d; ++k) x(k) = un(gen);
        std::vector<double> xs(x.data(), x.data() + d);
        const auto a = coefficient_matrix_for(lambda, xs);
        double fd = 0.0;
        const double h = 1e-4;
        for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q) {
                Eigen::VectorXd ep = Eigen::VectorXd::Zero(d), eq = Eigen::VectorXd::Zero(d);
                ep(p) = h;
                eq(q) = h;
                const double dpq = (u(x + ep + eq) - u(x + ep - eq) - u(x - ep + eq) + u(x - ep - eq)) / (4 * h * h);
                fd += a(p, q) * dpq;
            }
        const double x1 = x(0), r = x.tail(d - 1).norm();
        const double vx1x1 = (4 * x1 * x1 - 2) * std::exp(-x1 * x1) * r * r * std::cos(r);
        const double vr = std::exp(-x1 * x1) * (2 * r * std::cos(r) - r * r * std::sin(r)) + x1;
        const double vrr = std::exp(-x1 * x1) * (2 * std::cos(r) - 4 * r * std::sin(r) - r * r * std::cos(r));
        CHECK(radial_residual(LambdaField::constant(lambda), d, vx1x1, vrr, vr, xs) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("diffusion square root") {
    CHECK(diffusion_sqrt(LambdaField::constant(1.0), std::vector<double>{0.1, 0.2, 0.3}, 3)
              .isApprox(std::sqrt(2.0) * Eigen::MatrixXd::Identity(3, 3), 1e-15));
    const auto s = diffusion_sqrt(LambdaField::constant(4.0), std::vector<double>{0, 1, 0}, 3);
    CHECK(s(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(s(2, 2) == doctest::Approx(std::sqrt(8.0)));
    CHECK(s(1, 2) == doctest::Approx(0.0));

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> lam(0.01, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const int d = 3 + i % 5;
        const double l = lam(gen);
        const auto x = random_point(gen, d);
        const auto sig = diffusion_sqrt_for(l, x);
        const Eigen::MatrixXd two_a = 2.0 * oracle_matrix(l, x);
        CHECK((sig * sig.transpose() - two_a).cwiseAbs().maxCoeff() < 1e-12 * (1 + l));
        CHECK((sig - sig.transpose()).cwiseAbs().maxCoeff() == 0.0);
        // the matrix-free product agrees with sigma xi
        const auto xi = random_point(gen, d);
        std::vector<double> out(static_cast<std::size_t>(d));
        apply_diffusion_sqrt(l, x, xi, out);
        const Eigen::VectorXd ref = sig * Eigen::Map<const Eigen::VectorXd>(xi.data(), d);
        for (int k = 0; k < d; ++k) CHECK(out[static_cast<std::size_t>(k)] == doctest::Approx(ref(k)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(diffusion_sqrt_for(0.0, std::vector<double>{0, 1, 0}), EvaluationError);
}

TEST_CASE("smooth patch: eps deep inside the negative spine, inner field outside") {
    const auto prof = SpineProfile::power(2.0);
    const auto f = LambdaField::smooth_patch(LambdaField::constant(2.0), 0.1, prof, 0.5);
    // x1 < 0 and |x'| <= r(|x1|)/2
    CHECK(f(std::vector<double>{-0.5, 0.05, 0.0}) == doctest::Approx(0.2));
    CHECK(f(std::vector<double>{-0.5, 0.3, 0.0}) == doctest::Approx(2.0));
    CHECK(f(std::vector<double>{0.5, 0.3, 0.0}) == doctest::Approx(2.0));
    // continuous across the transition layer
    double prev = f(std::vector<double>{-0.5, 0.12, 0.0});
    for (double r = 0.12; r <= 0.26; r += 1e-4) {
        const double v = f(std::vector<double>{-0.5, r, 0.0});
        CHECK(std::abs(v - prev) < 0.01);
        prev = v;
    }
}

TEST_CASE("omega-derived field") {
    const auto spec = presets::t23_d3(0.1);
    const auto f = LambdaField::omega_derived(spec, 1.0);
    // omega averages mu, so lambda >= inf mu = 1
    for (double s : {0.05, 0.01, 1e-3}) CHECK(f(std::vector<double>{s, s, 0.0}) >= 1.0 - 1e-9);
    // the modulus shrinks toward the origin
    const auto mod = empirical_modulus(f, 3, {1e-2, 1e-4, 1e-8}, 8);
    CHECK(mod[0].max_deviation > mod[1].max_deviation);
    CHECK(mod[1].max_deviation > mod[2].max_deviation);
    // grid memo returns the same values on repeat
    const auto g = LambdaField::omega_derived(spec, 1.0, 1e-4);
    const std::vector<double> y{0.01, 0.02, 0.0};
    CHECK(g(y) == g(y));
    const auto spec4 = presets::t23_dge4(2.0, 4);
    const auto f4 = LambdaField::omega_derived(spec4, 0.5);
    for (double s : {1e-8, 1e-9}) CHECK(f4(std::vector<double>{s, s, 0.0, 0.0}) >= 1.0 - 1e-9);
}

TEST_CASE("operator serialization round-trips") {
    const auto prof = SpineProfile::power(2.0);
    const std::vector<LambdaField> fields{
        LambdaField::constant(0.7), LambdaField::omega_derived(presets::t23_d3(0.1), 1.0, 1e-3),
        LambdaField::smooth_patch(LambdaField::constant(2.0), 0.25, prof, 0.4)};
    for (const auto& f : fields) {
        const auto j = operator_to_json(f);
        const auto back = operator_from_json(nlohmann::json::parse(j.dump()));
        CHECK(operator_to_json(back) == j);
        const std::vector<double> x{-0.2, 0.03, 0.01};
        CHECK(back(x) == f(x));
    }
}
