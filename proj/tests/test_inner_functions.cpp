#include <random>

#include "doctest.h"
#include "ktheta/inner_functions.hpp"

using namespace ktheta;

namespace {

SingularInner atom_at_one(double mass = 1.0) { return SingularInner(SingularMeasure{{{0.0, mass}}, {}}); }

SingularInner mixed_measure() {
    return SingularInner(SingularMeasure{{{0.1, 0.4}, {0.55, 0.3}},
                                         {{GapSchedule::geometric(1.0 / 3.0, 0.7, 0.2), 0.6}}});
}

// Taylor coefficients of exp(-(1+z)/(1-z)) from the power-series ODE s' = -A' s
std::vector<double> atom_series(std::size_t K) {
    std::vector<double> s(K, 0.0);
    s[0] = std::exp(-1.0);
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j) acc += 2.0 * double(j + 1) * s[k - j];
        s[k + 1] = -acc / double(k + 1);
    }
    return s;
}

}  // namespace

TEST_CASE("Blaschke products") {
    BlaschkeProduct B{{0.5}};
    CHECK(std::abs(eval_blaschke(B, 0.0) - 0.5) < 1e-15);
    CHECK(eval_blaschke(BlaschkeProduct{}, cplx(0.3, 0.1)) == cplx(1.0));
    for (int j = 0; j < 16; ++j) CHECK(std::abs(std::abs(eval_blaschke(B, circle_point(j / 16.0))) - 1.0) < 1e-12);
    BlaschkeProduct origin{{0.0, cplx(0.2, -0.4)}};
    cplx z(0.3, 0.2);
    cplx f = cplx(std::abs(cplx(0.2, -0.4))) / cplx(0.2, -0.4) * (cplx(0.2, -0.4) - z) /
             (1.0 - std::conj(cplx(0.2, -0.4)) * z);
    CHECK(std::abs(eval_blaschke(origin, z) - z * f) < 1e-15);
    double h = 1e-5;
    cplx fd = (eval_blaschke(origin, z + h) - eval_blaschke(origin, z - h)) / (2 * h);
    CHECK(std::abs(blaschke_derivative(origin, z) - fd) < 1e-9);
    CHECK_THROWS_AS(BlaschkeProduct{{1.0}}.validate(), DomainError);
}

TEST_CASE("atom singular inner function") {
    auto S = atom_at_one();
    CHECK(std::abs(eval_singular_inner(S, 0.0).value - std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(eval_singular_inner(S, -0.5).value - std::exp(-1.0 / 3.0)) < 1e-15);
    CHECK(std::abs(inner_derivative(S, 0.0, 1).value + 2.0 * std::exp(-1.0)) < 1e-15);
    CHECK_THROWS_AS(eval_singular_inner(S, 1.0), SingularityError);
    CHECK_THROWS_AS(inner_derivative(S, 0.2, 5), UnsupportedOrder);
    for (int j = 1; j < 16; ++j)
        CHECK(std::abs(std::abs(eval_singular_inner(S, circle_point(j / 16.0)).value) - 1.0) < 1e-12);
}

TEST_CASE("Cantor singular inner function refines consistently") {
    SingularInner S(SingularMeasure{{}, {{GapSchedule::geometric(1.0 / 3.0), 1.0}}});
    cplx z(0.0, 0.5);
    auto L = eval_singular_inner_at_level(S, z, 8);
    auto L4 = eval_singular_inner_at_level(S, z, 12);
    CHECK(std::abs(L.value - L4.value) <= L.error_bound);
    auto tree = eval_singular_inner(S, z);
    CHECK(tree.error_bound <= 1e-8);
    CHECK(std::abs(tree.value - L4.value) <= tree.error_bound + L4.error_bound);
    CHECK(std::abs(eval_singular_inner(S, 0.0).value - std::exp(-1.0)) < 1e-14);
    // unimodular off the support, within the evaluation bound
    for (double t : {0.4, 0.5, 0.6, 1.0 / 9.0 + 0.05}) {
        auto v = eval_singular_inner(S, circle_point(t));
        CHECK(std::abs(std::abs(v.value) - 1.0) <= v.error_bound + 1e-12);
    }
    CHECK_THROWS_AS(eval_singular_inner(S, circle_point(1.0 / 3.0)), SingularityError);
}

TEST_CASE("derivatives against finite differences") {
    auto S = mixed_measure();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < 10; ++i) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) > 0.8) z *= 0.8 / std::abs(z);
        double h = 1e-4;
        auto f = [&](cplx w) { return eval_singular_inner(S, w).value; };
        cplx d1 = (f(z + h) - f(z - h)) / (2 * h);
        cplx d1c = (-f(z + 2 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2 * h)) / (12 * h);
        auto D1 = inner_derivative(S, z, 1);
        CHECK(std::abs(D1.value - d1c) <= 1e-6 * std::max(1.0, std::abs(D1.value)));
        CHECK(std::abs(D1.value - d1) <= 1e-5 * std::max(1.0, std::abs(D1.value)));
        cplx d2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        auto D2 = inner_derivative(S, z, 2);
        CHECK(std::abs(D2.value - d2) <= 1e-5 * std::max(1.0, std::abs(D2.value)));
        // third and fourth orders by differencing the lower analytic derivatives
        auto g2 = [&](cplx w) { return inner_derivative(S, w, 2).value; };
        auto g3 = [&](cplx w) { return inner_derivative(S, w, 3).value; };
        cplx d3 = (g2(z + h) - g2(z - h)) / (2 * h);
        cplx d4 = (g3(z + h) - g3(z - h)) / (2 * h);
        CHECK(std::abs(inner_derivative(S, z, 3).value - d3) <= 1e-5 * std::max(1.0, std::abs(d3)));
        CHECK(std::abs(inner_derivative(S, z, 4).value - d4) <= 1e-5 * std::max(1.0, std::abs(d4)));
        for (int k = 1; k <= 4; ++k) CHECK(inner_derivative(S, z, k).within_crude_bound);
    }
}

TEST_CASE("inner functions and kernels") {
    InnerFunction theta{BlaschkeProduct{{0.3, cplx(-0.2, 0.5)}}, mixed_measure()};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int i = 0; i < 10; ++i) {
        cplx z(u(rng), u(rng)), w(u(rng), u(rng));
        cplx prod = eval_blaschke(theta.blaschke, z) * eval_singular_inner(theta.singular, z).value;
        CHECK(std::abs(eval_inner(theta, z).value - prod) < 1e-12);
        KernelSpec kz{theta, z}, kw{theta, w};
        CHECK(std::abs(reproducing_kernel(kw, z) - std::conj(reproducing_kernel(kz, w))) < 1e-12);
        CHECK(kernel_norm_squared(kz) >= 0.0);
        CHECK(std::abs(reproducing_kernel(kz, z) - kernel_norm_squared(kz)) < 1e-12);
    }
    InnerFunction zero_at_origin{BlaschkeProduct{{0.0}}, SingularInner{}};
    CHECK(std::abs(reproducing_kernel(KernelSpec{zero_at_origin, 0.0}, cplx(0.4, 0.3)) - 1.0) < 1e-15);
    CHECK(reproducing_kernel(KernelSpec{InnerFunction{}, 0.3}, 0.2) == cplx(0.0));
    cplx h = 1e-5, z(0.2, -0.3);
    cplx fd = (eval_inner(theta, z + h).value - eval_inner(theta, z - h).value) / (2.0 * h);
    CHECK(std::abs(inner_function_derivative(theta, z) - fd) < 1e-8);
}

TEST_CASE("factor truncation") {
    SingularMeasure nu{{{0.0, 0.5}, {0.5, 0.25}}, {{GapSchedule::geometric(0.25, 0.1, 0.3), 0.4}}};
    InnerFunction theta{BlaschkeProduct{{0.5, cplx(0.1, 0.6)}}, SingularInner(nu)};
    auto t0 = factor_truncate(theta, 0);
    CHECK(t0.trivial());
    auto tall = factor_truncate(theta, 10);
    CHECK(tall.blaschke.zeros.size() == 2);
    CHECK(tall.singular.measure().total_mass() == nu.total_mass());
    auto t1 = factor_truncate(theta, 1);
    CHECK(t1.singular.measure().atoms.size() == 1);
    CHECK(t1.singular.measure().components.empty());
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    for (int i = 0; i < 20; ++i) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) >= 0.99) continue;
        for (std::size_t N : {0, 1, 2, 3})
            CHECK(std::abs(eval_inner(factor_truncate(theta, N), z).value) >=
                  std::abs(eval_inner(theta, z).value) - 1e-12);
    }
    InnerFunction bad{{}, SingularInner(SingularMeasure{{}, {{GapSchedule::polylog(1.0), 1.0}}})};
    CHECK_THROWS_AS(factor_truncate(bad, 1), DecompositionRequired);
}

TEST_CASE("Taylor coefficients") {
    cplx a(0.3, -0.5);
    InnerFunction b{BlaschkeProduct{{a}}, SingularInner{}};
    auto c = taylor_coefficients(b, 64);
    CHECK(std::abs(c[0] - std::abs(a)) < 1e-13);
    for (int k = 1; k < 64; ++k) {
        cplx want = (std::abs(a) / a) * std::pow(std::conj(a), k - 1) * (std::norm(a) - 1.0);
        CHECK(std::abs(c[k] - want) < 1e-13);
    }
    auto oracle = atom_series(200);
    InnerFunction s{{}, atom_at_one()};
    auto t = taylor_coefficients(s, 2048);
    for (std::size_t k = 0; k < 200; ++k) CHECK(std::abs(t[k] - oracle[k]) < 1e-10);
    // the series sums back to the direct evaluation at an interior point
    InnerFunction m{BlaschkeProduct{{0.4}}, mixed_measure()};
    auto tm = taylor_coefficients(m, 4096);
    cplx z(0.3, 0.4), acc = 0.0, p = 1.0;
    for (auto x : tm) {
        acc += x * p;
        p *= z;
    }
    CHECK(std::abs(acc - eval_inner(m, z).value) < 1e-9);
}

TEST_CASE("ring evaluation") {
    InnerFunction theta{BlaschkeProduct{{0.3, cplx(-0.2, 0.5)}}, mixed_measure()};
    RingEvaluator ev(theta, 0.99);
    const std::size_t M = 64;
    for (double r : {0.0, 0.5, 0.9, 0.99}) {
        auto v = ev.values(r, M);
        auto d = ev.derivatives(r, M);
        for (std::size_t j = 0; j < M; j += 7) {
            cplx z = r * circle_point(double(j) / M);
            CHECK(std::abs(v[j] - eval_inner(theta, z).value) < 1e-8);
            CHECK(std::abs(d[j] - inner_function_derivative(theta, z)) < 1e-6 * std::max(1.0, std::abs(d[j])));
        }
    }
    CHECK(ev.terms(0.99) > ev.terms(0.9));
    CHECK_THROWS_AS(ev.values(0.995, M), DomainError);
    CHECK_THROWS_AS(RingEvaluator(theta, 1.0), DomainError);
}
