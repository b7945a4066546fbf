#include "ktheta/smoothing_pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ktheta/fft.hpp"

namespace ktheta {

namespace {

constexpr double kE = std::numbers::e;

template <class F>
auto integrate(F f, double a, double b, double tol = 1e-10) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0, l1 = 0.0;
    auto v = gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &err, &l1);
    if (!(err <= 1e-7 * std::max(1.0, l1)))
        throw QuadratureError("adaptive quadrature did not converge near the boundary set");
    return v;
}

constexpr double kFactorial[3] = {1, 1, 2};

cplx kernel_derivative(int j, cplx w, cplx z) {
    if (j == 0) return (w + z) / (w - z);
    cplx inv = 1.0 / (w - z);
    return 2.0 * kFactorial[j] * w * std::pow(inv, j + 1);
}

}  // namespace

// ---------------------------------------------------------------- profile

BlowupProfile::BlowupProfile(ArcSet set, double alpha, double c) : set_(std::move(set)), alpha_(alpha), c_(c) {
    if (!(alpha > 0.0) || !(c > 0.0)) throw DomainError("profile needs alpha > 0 and c > 0");
    auto cert = is_beurling_carleson(set_);
    if (!cert.is_bc) throw DomainError("profile needs a Beurling-Carleson set");
    double s = 0.0;
    for (const auto& a : set_.arcs()) {
        gaps_.push_back({a.start, a.length});
        if (a.length < 1.0) s += a.length * std::pow(std::log(1.0 / a.length), alpha);
    }
    if (!std::isfinite(s)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "sum L (log 1/L)^alpha diverges (partial %.6e)", s);
        throw IntegrabilityError(buf);
    }
    std::stable_sort(gaps_.begin(), gaps_.end(), [](const Gap& x, const Gap& y) {
        return x.length != y.length ? x.length > y.length : x.start < y.start;
    });
    by_start_.resize(gaps_.size());
    std::iota(by_start_.begin(), by_start_.end(), 0);
    std::sort(by_start_.begin(), by_start_.end(),
              [&](std::size_t i, std::size_t j) { return gaps_[i].start < gaps_[j].start; });
}

BlowupProfile build_profile(const ArcSet& set, double alpha, double c) { return BlowupProfile(set, alpha, c); }

std::size_t BlowupProfile::locate(double t) const {
    t = wrap_turns(t);
    if (gaps_.empty()) return npos;
    auto it = std::upper_bound(by_start_.begin(), by_start_.end(), t,
                               [&](double v, std::size_t i) { return v < gaps_[i].start; });
    std::size_t k = it == by_start_.begin() ? by_start_.back() : *(it - 1);
    double rel = wrap_turns(t - gaps_[k].start);
    if (rel > 0.0 && rel < gaps_[k].length) return k;
    return npos;
}

double BlowupProfile::smoothed_distance(double d, double L) {
    double a = 0.25 * L;
    if (d <= a) return d;
    // L/2 - a sigma(y/a), sigma(v) = B v + (1 - B) v^2 blends |v| into v^2 below |v| = 1
    double v = std::min(1.0, (0.5 * L - d) / a);
    double B = smooth_step(2.0 * v - 1.0);
    return 0.5 * L - a * (B * v + (1.0 - B) * v * v);
}

double BlowupProfile::at_distance(double d, double L) const {
    return c_ * std::pow(std::log(kE * L / smoothed_distance(d, L)), alpha_);
}

double BlowupProfile::value(double t) const {
    std::size_t k = locate(t);
    if (k == npos) return std::numeric_limits<double>::infinity();
    double rel = wrap_turns(t - gaps_[k].start);
    double L = gaps_[k].length;
    return at_distance(std::min(rel, L - rel), L);
}

double BlowupProfile::half_integral(double s, double L) const {
    if (s <= 0.0) return 0.0;
    double a = 0.25 * L;
    double v = c_ * kE * L * boost::math::tgamma(alpha_ + 1.0, std::log(kE * L / std::min(s, a)));
    if (s > a) v += integrate([&](double d) { return at_distance(d, L); }, a, std::min(s, 0.5 * L));
    return v;
}

double BlowupProfile::gap_integral(std::size_t k) const {
    double L = gaps_.at(k).length;
    return 2.0 * half_integral(0.5 * L, L);
}

double BlowupProfile::integral() const {
    double s = 0.0;
    for (std::size_t k = 0; k < gaps_.size(); ++k) s += gap_integral(k);
    return s;
}

double BlowupProfile::endpoint_radius(double M, std::size_t k) const {
    double L = gaps_.at(k).length;
    double R = kE * L * std::exp(-std::pow(std::max(M, 0.0) / c_, 1.0 / alpha_));
    if (R <= 0.25 * L) return R;
    if (R >= 0.5 * L) return 0.5 * L;
    double lo = 0.25 * L, hi = 0.5 * L;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (smoothed_distance(mid, L) <= R ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------- cutoffs

double smooth_step(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    double a = std::exp(-1.0 / y), b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
}

double CutoffFamily::psi(std::size_t n, double x) const {
    if (n == 0) return 0.0;
    double d = std::min(x, 1.0 - x);
    double e = eps(n);
    return smooth_step((d - e) / e);
}

double CutoffFamily::phi(const BlowupProfile& p, std::size_t n, double t) const {
    std::size_t k = p.locate(t);
    if (k == BlowupProfile::npos || k >= n) return 0.0;
    const Gap& g = p.gaps()[k];
    return psi(n, wrap_turns(t - g.start) / g.length);
}

double SmoothingSequence::weight(std::size_t n, double t) const {
    double phi = cutoff.phi(profile, n, t);
    if (phi >= 1.0) return 0.0;
    return profile.value(t) * (1.0 - phi);
}

namespace {

// ∫_0^s of the weight over one half of gap k, s <= L/2, delta measured from the endpoint
double endpoint_integral(const SmoothingSequence& seq, std::size_t n, std::size_t k, double s) {
    const auto& p = seq.profile;
    double L = p.gaps()[k].length;
    if (k >= n) return p.half_integral(s, L);
    double e = seq.cutoff.eps(n);
    double flat = std::min(s, e * L);
    double v = p.half_integral(flat, L);
    double hi = std::min(s, std::min(2.0 * e, 0.5) * L);
    if (hi > flat) {
        auto f = [&](double d) { return p.at_distance(d, L) * (1.0 - seq.cutoff.psi(n, d / L)); };
        v += integrate(f, flat, hi);
    }
    return v;
}

}  // namespace

double SmoothingSequence::weight_integral(std::size_t n) const {
    double s = 0.0;
    for (std::size_t k = 0; k < profile.gaps().size(); ++k)
        s += 2.0 * endpoint_integral(*this, n, k, 0.5 * profile.gaps()[k].length);
    return s;
}

// ---------------------------------------------------------------- outer functions

OuterValue OuterFunction::evaluate(cplx z, int order) const {
    if (!(std::abs(z) < 1.0)) throw DomainError("outer functions are evaluated in the open disk");
    if (order < 0 || order > 2) throw UnsupportedOrder("outer derivatives up to order 2");
    const auto& p = seq_.profile;
    std::array<cplx, 3> I{};
    for (std::size_t k = 0; k < p.gaps().size(); ++k) {
        const Gap& g = p.gaps()[k];
        const double L = g.length;
        // delta = e L e^{-u}, d delta = delta du; the weight is c u^alpha (1 - psi) for delta <= L/4
        double u_lo = std::log(2.0 * kE);
        double u_mid = u_lo;
        double e = seq_.cutoff.eps(n_);
        bool cut = k < n_;
        if (cut) {
            if (2.0 * e < 0.5) u_lo = std::log(kE / (2.0 * e));
            u_mid = std::max(u_lo, std::log(kE / e));
        }
        double u_hi = std::max(u_lo, 1.0) + 1.0;
        while (p.c() * std::pow(u_hi, p.alpha()) * kE * L * std::exp(-u_hi) > 1e-18 && u_hi < 700.0) u_hi += 1.0;
        const double theta = std::abs(z) > 0.0 ? turns_of(z) : 0.0;
        const double spread = 1.0 - std::abs(z);
        for (int side = 0; side < 2; ++side) {
            cplx anchor = circle_point(side == 0 ? g.start : g.start + L);
            double sign = side == 0 ? 1.0 : -1.0;
            // breakpoints in u: cutoff edges, the profile blend, and the Poisson peak of z
            std::vector<double> brk{u_lo, u_hi, std::log(4.0 * kE)};
            if (cut) brk.push_back(u_mid);
            double near = wrap_turns(sign * (theta - (side == 0 ? g.start : g.start + L)));
            if (near > 0.0 && near < 0.5 * L)
                for (double d : {near - spread, near, near + spread})
                    if (d > 0.0) brk.push_back(std::log(kE * L / d));
            std::sort(brk.begin(), brk.end());
            for (int j = 0; j <= order; ++j) {
                auto f = [&](double u) {
                    double d = kE * L * std::exp(-u);
                    double w = p.at_distance(d, L);
                    if (cut) w *= 1.0 - seq_.cutoff.psi(n_, d / L);
                    cplx zeta = anchor * circle_point(sign * d);
                    return kernel_derivative(j, zeta, z) * (w * d);
                };
                for (std::size_t b = 0; b + 1 < brk.size(); ++b) {
                    double lo = std::max(brk[b], u_lo), hi = std::min(brk[b + 1], u_hi);
                    if (hi > lo) I[j] += integrate(f, lo, hi);
                }
            }
        }
    }
    OuterValue v;
    v.value = std::exp(-I[0]);
    v.d1 = -I[1] * v.value;
    v.d2 = (I[1] * I[1] - I[2]) * v.value;
    return v;
}

OuterFunction outer_from_profile(const BlowupProfile& profile) {
    return OuterFunction(SmoothingSequence{profile, {}, std::size_t(1) << 21}, 0);
}

OuterFunction interior_evaluator(const SmoothingSequence& seq, std::size_t n) { return OuterFunction(seq, n); }

SmoothingResult smoothing_function(const SmoothingSequence& seq, std::size_t n, CircleGrid grid) {
    const auto& p = seq.profile;
    const std::size_t M = std::max(next_power_of_two(seq.fine_grid), 8 * grid.n);
    const double dt = 1.0 / double(M);
    for (const auto& g : p.gaps())
        if (g.length < 4.0 * dt) throw DomainError("a gap is narrower than four fine-grid cells");

    std::vector<double> w(M), wpoint(M);
    for (std::size_t j = 0; j < M; ++j) wpoint[j] = w[j] = seq.weight(n, double(j) * dt);
    // cells holding a point of E carry the exact cell average of the weight
    std::vector<char> on_e(M, 0);
    for (std::size_t k = 0; k < p.gaps().size(); ++k) {
        const Gap& g = p.gaps()[k];
        double e = wrap_turns(g.start);
        std::size_t j0 = std::size_t(std::llround(e * double(M))) % M;
        double cell_lo = double(j0) * dt - 0.5 * dt;
        double s_before = wrap_turns(e - cell_lo);
        if (s_before > dt) s_before -= 1.0;
        double s_after = dt - s_before;
        std::size_t prev = p.locate(e - 0.25 * dt);
        double mass = endpoint_integral(seq, n, k, s_after);
        if (prev != BlowupProfile::npos) mass += endpoint_integral(seq, n, prev, s_before);
        w[j0] = mass / dt;
        if (std::isinf(wpoint[j0])) on_e[j0] = 1;
    }

    std::vector<cplx> F(w.begin(), w.end());
    fft_inplace(F, -1);
    for (std::size_t k = 0; k < M; ++k) {
        double s = (k == 0 ? 1.0 : (k < M / 2 ? 2.0 : 0.0)) / double(M);
        F[k] *= s;
    }
    fft_inplace(F, +1);

    std::vector<cplx> H(M);
    for (std::size_t j = 0; j < M; ++j)
        H[j] = on_e[j] ? cplx(0.0) : std::exp(cplx(-wpoint[j], -F[j].imag()));

    SmoothingResult r{n, GridFunction(grid), {}, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
    const std::size_t stride = M / grid.n;
    std::vector<double> dev(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        cplx v = H[j * stride];
        r.boundary.values[j] = v;
        if (on_e[j * stride]) r.singular_nodes.push_back(j);
        dev[j] = std::abs(v - 1.0);
    }
    for (const auto& v : H) r.sup_abs = std::max(r.sup_abs, std::abs(v));
    std::nth_element(dev.begin(), dev.begin() + long(grid.n / 2), dev.end());
    r.median_abs_minus_one = dev[grid.n / 2];

    fft_inplace(H, -1);
    r.taylor.assign(grid.n, 0.0);
    for (std::size_t k = 0; k < grid.n; ++k) r.taylor[k] = H[k] / double(M);
    double neg = 0.0;
    for (std::size_t k = M / 2; k < M; ++k) neg += std::norm(H[k] / double(M));
    r.negative_frequency_norm = std::sqrt(neg);
    r.weight_integral = seq.weight_integral(n);
    r.value_at_zero = std::exp(-r.weight_integral);
    return r;
}

// ---------------------------------------------------------------- products

ProductCheck smooth_product_check(const SingularInner& S, const GridFunction& H, std::size_t kmin) {
    const std::size_t N = H.grid.n;
    auto s = taylor_coefficients(InnerFunction{{}, S}, N / 2);
    // pointwise on the grid: where S oscillates faster than the grid resolves, H is already
    // below roundoff, so the product aliases far less than a truncated coefficient correlation
    GridFunction prod(H.grid);
    for (std::size_t j = 0; j < N; ++j) {
        cplx h = H.values[j];
        if (h == 0.0) continue;
        cplx z = H.grid.node(j);
        if (support_distance(S.measure(), z).value < 1e-12) continue;
        prod.values[j] = std::conj(h) * eval_singular_inner(S, z).value;
    }
    double ref = 0.0;
    for (auto x : s) ref = std::max(ref, std::abs(x));
    ProductCheck r;
    // both sides of the spectrum: for nu = 0 the product is conj(H), whose content is co-analytic
    auto pc = to_coefficients(prod);
    std::vector<cplx> sided(N / 2);
    for (std::size_t k = 0; k < N / 2; ++k)
        sided[k] = std::max(std::abs(pc.at(long(k))), std::abs(pc.at(-long(k))));
    r.product = decay_report_from_coefficients(sided, kmin, N / 4, ref);
    r.inner_alone = decay_report_from_coefficients(s, kmin, N / 4, ref);
    return r;
}

ProductCheck smooth_product_check(const SingularInner& S, const GridFunction& H, const OuterFunction& g,
                                  const ArcSet& E, std::size_t kmin) {
    const auto& nu = S.measure();
    if (!nu.components.empty())
        throw DomainError("support mismatch: Cantor components do not lie in a finite boundary set");
    for (const auto& a : nu.atoms)
        if (!E.contains(a.position)) throw DomainError("support mismatch: an atom lies outside E");
    auto r = smooth_product_check(S, H, kmin);
    if (nu.atoms.empty()) return r;
    cplx zeta = circle_point(nu.atoms.front().position);
    for (int i = 1; i <= 4; ++i) {
        double rad = 1.0 - std::pow(10.0, -i);
        cplx z = rad * zeta;
        auto gv = g.evaluate(z, 2);
        std::array<cplx, 3> gd{gv.value, gv.d1, gv.d2};
        std::array<cplx, 3> sd{eval_singular_inner(S, z).value, inner_derivative(S, z, 1).value,
                               inner_derivative(S, z, 2).value};
        double mx = 0.0;
        for (auto a : sd)
            for (auto b : gd) mx = std::max(mx, std::abs(a * b));
        r.radial.push_back({rad, mx});
    }
    return r;
}

// ---------------------------------------------------------------- kernel approximation

ArcSet atom_support(const SingularMeasure& nu) {
    if (!nu.components.empty())
        throw UnsupportedForm("the smoothing profile needs a finite boundary set; Cantor components are not supported");
    std::vector<double> pts;
    for (const auto& a : nu.atoms) pts.push_back(a.position);
    return ArcSet::from_points(pts);
}

KernelApproximation approximate_kernel(const InnerFunction& theta, cplx lambda, std::size_t n,
                                       const PipelineOptions& opt) {
    if (!(std::abs(lambda) < 1.0)) throw DomainError("kernel point must lie in the open disk");
    const auto& nu = theta.singular.measure();
    if (!decompose(nu).nu_K.empty())
        throw HypothesisViolation("the measure has a Korenblum-Roberts part; kernels of such spaces are not approximable");
    const std::size_t N = opt.grid;
    CircleGrid grid(N);
    KernelApproximation out;
    out.approximant = GridFunction(grid);
    if (theta.trivial()) {
        out.short_circuit = true;
        out.decay.exponent = out.raw_decay.exponent = std::numeric_limits<double>::infinity();
        return out;
    }

    auto th = taylor_coefficients(theta, N);
    cplx cl = std::conj(eval_inner(theta, lambda).value);
    std::vector<cplx> f(N);
    f[0] = 1.0 - cl * th[0];
    for (std::size_t j = 1; j < N; ++j) f[j] = std::conj(lambda) * f[j - 1] - cl * th[j];

    std::vector<cplx> h(N, 0.0);
    h[0] = 1.0;
    if (!nu.empty()) {
        SmoothingSequence seq{build_profile(atom_support(nu), opt.alpha, opt.c), {opt.cutoff_exponent}, opt.fine_grid};
        auto sm = smoothing_function(seq, n, grid);
        h = sm.taylor;
        out.weight_integral = sm.weight_integral;
    }

    CircleGrid g2(2 * N);
    auto fg = from_taylor(g2, f), hg = from_taylor(g2, h);
    auto u = to_coefficients(toeplitz_coanalytic(hg, fg)).analytic();
    u.resize(N / 2);
    out.approximant = from_taylor(grid, u);

    KernelSpec spec{theta, lambda};
    double norm2 = kernel_norm_squared(spec);
    out.kernel_norm = std::sqrt(norm2);
    double err = 0.0, head = 0.0;
    for (std::size_t j = 0; j < N / 2; ++j) {
        err += std::norm(u[j] - f[j]);
        head += std::norm(f[j]);
    }
    out.h2_error = std::sqrt(err + std::max(0.0, norm2 - head));
    out.membership_residual = membership_residual_from_coefficients(th, u);

    double ref = 0.0;
    for (auto x : f) ref = std::max(ref, std::abs(x));
    std::vector<cplx> fhalf(f.begin(), f.begin() + long(N / 2));
    out.decay = decay_report_from_coefficients(u, opt.kmin, N / 4, ref);
    out.raw_decay = decay_report_from_coefficients(fhalf, opt.kmin, N / 4, ref);

    double dom = 0.0;
    for (std::size_t j = 0; j < g2.n; ++j) dom += std::norm((hg.values[j] - 1.0) * fg.values[j]);
    out.dominating_norm = std::sqrt(dom / double(g2.n));
    return out;
}

TruncatedApproximation approximate_truncated(const InnerFunction& theta, cplx lambda, std::size_t N,
                                             std::size_t n, const PipelineOptions& opt,
                                             const std::vector<cplx>& sample_points) {
    auto tn = factor_truncate(theta, N);
    TruncatedApproximation r;
    r.approximation = approximate_kernel(tn, lambda, n, opt);
    for (cplx z : sample_points) {
        double gap = std::abs(reproducing_kernel(KernelSpec{tn, lambda}, z) -
                              reproducing_kernel(KernelSpec{theta, lambda}, z));
        r.kernel_gaps.push_back({z, gap});
    }
    return r;
}

}  // namespace ktheta
