#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "ktheta/bergman_lab.hpp"

using namespace ktheta;

namespace {

std::vector<cplx> random_poly(std::mt19937_64& rng, std::size_t deg) {
    std::normal_distribution<double> g;
    std::vector<cplx> c(deg + 1);
    for (auto& x : c) x = cplx(g(rng), g(rng));
    return c;
}

cplx integrate(const DiscQuadrature& q, const std::vector<cplx>& v) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q.weight(k) * v[k];
    return s;
}

// ||S_{m delta_1}||^2 in L^2_a: with w = i(1+z)/(1-z) the integral over Re w is explicit,
// leaving ∫_0^inf 2 e^{-2 m v} / (1 + v)^3 dv
double atom_bergman_norm2(double m) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double v) { return 2.0 * std::exp(-2.0 * m * v) / std::pow(1.0 + v, 3); });
}

InnerFunction atom_inner(double m) { return {{}, SingularInner(SingularMeasure{{{0.0, m}}, {}})}; }

InnerFunction polylog_inner() {
    return {{}, SingularInner(SingularMeasure{{}, {{GapSchedule::polylog(1.0), 0.3}}})};
}

}  // namespace

TEST_CASE("disc quadrature") {
    DiscQuadrature q(8, 64);
    std::vector<cplx> one(q.size(), 1.0), r2(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) r2[k] = std::norm(q.node(k));
    CHECK(std::abs(integrate(q, one) - 1.0) < 1e-14);
    CHECK(std::abs(integrate(q, r2) - 0.5) < 1e-12);
    for (int j = 0; j <= 15; ++j)
        for (int k = 0; k <= 15; ++k) {
            std::vector<cplx> v(q.size());
            for (std::size_t i = 0; i < q.size(); ++i) v[i] = std::pow(q.node(i), j) * std::pow(std::conj(q.node(i)), k);
            cplx want = j == k ? 1.0 / (j + 1) : 0.0;
            CHECK(std::abs(integrate(q, v) - want) < 1e-12);
        }
    DiscQuadrature d = q.doubled();
    CHECK(d.radial() == 16);
    CHECK(d.angular() == 128);
    CHECK_THROWS_AS(DiscQuadrature(8, 100), DomainError);
}

TEST_CASE("Bergman and Sobolev norms") {
    DiscQuadrature q;
    auto one = DiscFunction::polynomial({1.0});
    for (double p : {0.5, 1.0, 2.0, 3.0, double(INFINITY)}) CHECK(lp_bergman_norm(one, p, q) == doctest::Approx(1.0).epsilon(1e-13));
    for (int k = 0; k <= 10; ++k) {
        std::vector<cplx> c(std::size_t(k + 1), 0.0);
        c[std::size_t(k)] = 1.0;
        CHECK(lp_bergman_norm(DiscFunction::polynomial(c), 2.0, q) == doctest::Approx(std::sqrt(1.0 / (k + 1))).epsilon(1e-13));
    }
    auto z = DiscFunction::polynomial({0.0, 1.0});
    // ||z||_p^p = ∫ r^p dA = 2 / (p + 2)
    for (double p : {1.0, 3.0}) CHECK(lp_bergman_norm(z, p, q) == doctest::Approx(std::pow(2.0 / (p + 2), 1 / p)).epsilon(1e-6));
    CHECK(lp_bergman_norm(z, INFINITY, q) == doctest::Approx(q.radius(q.radial() - 1)));

    CHECK(sobolev_norm(one, 2.0, q) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sobolev_norm(z, 2.0, q) == doctest::Approx(std::sqrt(0.5) + 1.0).epsilon(1e-13));
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
        auto c = random_poly(rng, 5);
        double f2 = 0.0, d2 = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            f2 += std::norm(c[k]) / double(k + 1);
            d2 += double(k) * std::norm(c[k]);
        }
        CHECK(sobolev_norm(DiscFunction::polynomial(c), 2.0, q) ==
              doctest::Approx(std::sqrt(f2) + std::sqrt(d2)).epsilon(1e-10));
    }

    auto c = random_poly(rng, 6);
    auto poly = DiscFunction::polynomial(c);
    auto samp = DiscFunction::sampled(q, [&](cplx w) { return poly(w); });
    auto pv = poly.values(q), sv = samp.values(q);
    double m = 0.0;
    for (std::size_t k = 0; k < pv.size(); ++k) m = std::max(m, std::abs(pv[k] - sv[k]));
    CHECK(m < 1e-12);
    CHECK(lp_bergman_norm(samp, 2.0, q) == doctest::Approx(lp_bergman_norm(poly, 2.0, q)).epsilon(1e-13));
    CHECK_THROWS_AS(sobolev_norm(samp, 2.0, q), DerivativeUnavailable);
    CHECK_THROWS_AS(samp.values(DiscQuadrature(8, 64)), GridMismatch);
}

TEST_CASE("backward shift") {
    CHECK(backward_shift(DiscFunction::polynomial({1.0})).coefficients() == std::vector<cplx>{0.0});
    CHECK(backward_shift(DiscFunction::polynomial({0.0, 1.0})).coefficients() == std::vector<cplx>{1.0});
    CHECK(backward_shift(DiscFunction::polynomial({0.0, 2.0, 0.0, 1.0})).coefficients() ==
          std::vector<cplx>{2.0, 0.0, 1.0});
    DiscQuadrature q(4, 16);
    CHECK_THROWS_AS(backward_shift(DiscFunction::sampled(q, [](cplx w) { return w; })), UnsupportedForm);
}

TEST_CASE("Cauchy pairing on the disc") {
    DiscQuadrature q;
    auto z = DiscFunction::polynomial({0.0, 1.0});
    auto zz = cauchy_pairing_disc(z, z, 2.0, q);
    CHECK(std::abs(zz.lhs - 1.0) < 1e-15);
    CHECK(std::abs(zz.rhs - 1.0) < 1e-13);

    std::mt19937_64 rng(21);
    auto g = random_poly(rng, 4);
    auto fg = cauchy_pairing_disc(DiscFunction::polynomial({1.0}), DiscFunction::polynomial(g), 2.0, q);
    CHECK(std::abs(fg.lhs - std::conj(g[0])) < 1e-15);
    CHECK(std::abs(fg.rhs - std::conj(g[0])) < 1e-15);

    std::uniform_int_distribution<int> deg(0, 8);
    for (int t = 0; t < 50; ++t) {
        auto f = DiscFunction::polynomial(random_poly(rng, std::size_t(deg(rng))));
        auto h = DiscFunction::polynomial(random_poly(rng, std::size_t(deg(rng))));
        auto a = cauchy_pairing_disc(f, h, 2.0, q);
        auto b = cauchy_pairing_disc(h, f, 2.0, q);
        CHECK(a.gap < 1e-8);
        CHECK(std::abs(a.rhs - std::conj(b.rhs)) < 1e-10);
        CHECK(std::isfinite(a.ratio));
    }

    // the bound ratio stays bounded along dilations f(rz)
    auto c = random_poly(rng, 6);
    auto h = DiscFunction::polynomial(random_poly(rng, 6));
    double lo = 1e300, hi = 0.0;
    for (double r : {0.25, 0.5, 0.75, 0.9, 1.0}) {
        auto cr = c;
        double rk = 1.0;
        for (auto& x : cr) {
            x *= rk;
            rk *= r;
        }
        for (double p : {1.5, 2.0, 4.0}) {
            double ratio = cauchy_pairing_disc(DiscFunction::polynomial(cr), h, p, q).ratio;
            CHECK(std::isfinite(ratio));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    CHECK(hi < 10.0);
    CHECK_THROWS_AS(cauchy_pairing_disc(DiscFunction::sampled(q, [](cplx w) { return w; }), z, 2.0, q),
                    UnsupportedForm);
}

TEST_CASE("cyclicity distances") {
    DiscQuadrature q;
    auto trivial = cyclicity_distance(InnerFunction{}, 5, 2.0, q);
    CHECK(trivial.distance < 1e-12);
    CHECK(std::abs(trivial.coefficients[0] - 1.0) < 1e-12);
    for (std::size_t k = 1; k < trivial.coefficients.size(); ++k) CHECK(std::abs(trivial.coefficients[k]) < 1e-12);

    // d_0^2 = 1 - |<S, 1>|^2 / ||S||^2 with <S, 1> = S(0)
    for (double m : {0.5, 1.0}) {
        double d0 = std::sqrt(1.0 - std::exp(-2 * m) / atom_bergman_norm2(m));
        CHECK(cyclicity_distance(atom_inner(m), 0, 2.0, q).distance == doctest::Approx(d0).epsilon(1e-4));
        CHECK(cyclicity_distance(atom_inner(m), 0, 2.0, q.doubled()).distance == doctest::Approx(d0).epsilon(2e-5));
    }

    auto s = cyclicity_sweep(polylog_inner(), {0, 1, 2, 3, 5, 8, 10, 20}, q);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].distance <= s[i - 1].distance);
    for (const auto& r : s) CHECK(r.condition < 1e3);
    CHECK(s[3].coefficients.size() == 4);

    auto bad = cyclicity_distance(atom_inner(1.0), 40, 2.0, DiscQuadrature(2, 8));
    CHECK(bad.regularized);
    CHECK(bad.condition > 1e12);
    CHECK_THROWS_AS(cyclicity_distance(atom_inner(1.0), 5, 3.0, q), UnsupportedForm);
}

TEST_CASE("obstruction functional") {
    DiscQuadrature q;
    CircleGrid grid(1024);
    GridFunction one(grid), zero(grid);
    for (auto& v : one.values) v = 1.0;
    auto f1 = DiscFunction::polynomial({1.0});
    CHECK(std::abs(obstruction_functional(InnerFunction{}, f1, zero, 2.0, q).pairing) == 0.0);
    CHECK(std::abs(obstruction_functional(InnerFunction{}, f1, one, 2.0, q).pairing - 1.0) < 1e-14);

    // Theta_C nontrivial: the disc identity against the Taylor coefficient pairing
    std::vector<cplx> gc = {0.5, cplx(0.1, -0.2), 0.3, 0.0, cplx(0.0, 0.25)};
    auto g = from_taylor(grid, gc);
    // (slow convergence: Theta_C' concentrates near the atom)
    auto fa = DiscFunction::polynomial({1.0, cplx(0.2, 0.1)});
    auto ob = obstruction_functional(atom_inner(0.5), fa, g, 2.0, q);
    auto ob2 = obstruction_functional(atom_inner(0.5), fa, g, 2.0, q.doubled());
    CHECK(std::abs(ob.pairing - ob.boundary) < 1e-4);
    CHECK(std::abs(ob2.pairing - ob2.boundary) < 0.5 * std::abs(ob.pairing - ob.boundary));
    CHECK(std::abs(ob2.boundary - ob.boundary) < 1e-14);

    // projecting 1 off span{S z^j}: the pairing is ||g_J||^2, nonincreasing in J
    auto sweep = obstruction_sweep(InnerFunction{}, polylog_inner(), f1, one, {0, 2, 4, 8, 16}, 2.0, q);
    for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(std::abs(sweep[i].value.pairing) < std::abs(sweep[i - 1].value.pairing));
    for (const auto& sm : sweep) {
        CHECK(std::abs(sm.value.pairing - sm.value.boundary) < 1e-12);
        CHECK(std::abs(sm.value.pairing.imag()) < 1e-12);
    }
}
