#include "ktheta/inner_functions.hpp"

#include <algorithm>
#include <limits>

#include "ktheta/fft.hpp"

namespace ktheta {

namespace {

constexpr double kFactorial[6] = {1, 1, 2, 6, 24, 120};

// kernel d^j/dz^j (w+z)/(w-z)
void add_kernel_derivatives(cplx w, cplx z, double mass, int order, std::array<cplx, 5>& A) {
    cplx inv = 1.0 / (w - z);
    A[0] += mass * (w + z) * inv;
    cplx p = inv;
    for (int j = 1; j <= order; ++j) {
        p *= inv;
        A[j] += mass * 2.0 * kFactorial[j] * w * p;
    }
}

// sup over the arc of |d^2/dtheta^2| of the order-j kernel, with d a lower bound on |w - z|
double kernel_curvature(int j, double d) {
    double m = j + 1;
    return 2.0 * kFactorial[j] * (m * m + 5.0 * m) / std::pow(d, m + 2.0);
}

}  // namespace

void BlaschkeProduct::validate() const {
    for (auto a : zeros)
        if (!(std::abs(a) < 1.0)) throw DomainError("Blaschke zeros must lie in the open disk");
}

SingularInner::SingularInner(SingularMeasure nu, double tol) : nu_(std::move(nu)), tol_(tol) {
    nu_.validate();
    for (const auto& c : nu_.components) {
        ComponentTables t;
        t.base_start = c.schedule.base_start;
        t.mass = c.mass;
        t.J.push_back(c.schedule.base_length);
        t.gap.push_back(0.0);
        for (int n = 1; n < 200; ++n) {
            t.J.push_back(c.schedule.interval_length(n));
            t.gap.push_back(c.schedule.gap_length(n));
            if (t.J.back() < 1e-17) break;
        }
        tables_.push_back(std::move(t));
    }
}

HerglotzMoments herglotz_moments(const SingularInner& S, cplx z, int order) {
    if (order < 0 || order > 4) throw UnsupportedOrder("derivative order must lie in [0, 4]");
    HerglotzMoments out;
    const auto& nu = S.measure();
    for (const auto& a : nu.atoms) {
        cplx w = circle_point(a.position);
        if (std::abs(w - z) < 1e-14) throw SingularityError("evaluation on an atom");
        add_kernel_derivatives(w, z, a.mass, order, out.A);
    }
    double total = nu.total_mass();
    // tree code over the Cantor intervals: each interval carries a measure symmetric about
    // its center, so the center rule errs by at most (1/2) sup|K''| mass (pi J)^2
    struct Node {
        int level;
        double left;
        double mass;
    };
    std::vector<Node> stack;
    for (const auto& t : S.tables()) {
        double node_tol = S.tolerance() / std::max(total, 1e-300);
        stack.push_back({0, 0.0, t.mass});
        while (!stack.empty()) {
            Node nd = stack.back();
            stack.pop_back();
            double J = t.J[nd.level];
            cplx w = circle_point(t.base_start + nd.left + 0.5 * J);
            double d = std::abs(w - z) - std::numbers::pi * J;
            bool last = nd.level + 1 >= int(t.J.size());
            if (last && d < 1e-12) throw SingularityError("evaluation on the support of a Cantor component");
            if (d > 0.0) {
                double arc2 = std::numbers::pi * std::numbers::pi * J * J;
                double err = 0.0;
                for (int j = 0; j <= order; ++j) err += 0.5 * kernel_curvature(j, d) * nd.mass * arc2;
                if (err <= node_tol * nd.mass || last) {
                    add_kernel_derivatives(w, z, nd.mass, order, out.A);
                    out.error_bound += err;
                    continue;
                }
            }
            int n = nd.level + 1;
            double half = 0.5 * nd.mass;
            stack.push_back({n, nd.left, half});
            stack.push_back({n, nd.left + t.J[n] + t.gap[n], half});
        }
    }
    return out;
}

cplx eval_blaschke(const BlaschkeProduct& B, cplx z) {
    cplx p = 1.0;
    for (auto a : B.zeros) {
        if (a == 0.0)
            p *= z;
        else
            p *= (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
    }
    return p;
}

cplx blaschke_derivative(const BlaschkeProduct& B, cplx z) {
    const auto& zs = B.zeros;
    cplx total = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        cplx a = zs[i];
        cplx term = a == 0.0 ? cplx(1.0)
                             : (std::abs(a) / a) * (std::norm(a) - 1.0) /
                                   ((1.0 - std::conj(a) * z) * (1.0 - std::conj(a) * z));
        for (std::size_t m = 0; m < zs.size(); ++m) {
            if (m == i) continue;
            cplx b = zs[m];
            term *= b == 0.0 ? z : (std::abs(b) / b) * (b - z) / (1.0 - std::conj(b) * z);
        }
        total += term;
    }
    return total;
}

Evaluation eval_singular_inner(const SingularInner& S, cplx z) {
    if (S.trivial()) return {1.0, 0.0};
    auto m = herglotz_moments(S, z, 0);
    cplx v = std::exp(-m.A[0]);
    // |e^{-a} - e^{-b}| <= |a - b| when both real parts are nonnegative
    return {v, m.error_bound};
}

Evaluation eval_singular_inner_at_level(const SingularInner& S, cplx z, int level) {
    auto d = discretize(S.measure(), level);
    cplx A = 0.0;
    for (const auto& a : d.atomic.atoms) {
        cplx w = circle_point(a.position);
        if (std::abs(w - z) < 1e-14) throw SingularityError("evaluation on an atom");
        A += a.mass * (w + z) / (w - z);
    }
    return {std::exp(-A), d.error_bound(z)};
}

DerivativeResult inner_derivative(const SingularInner& S, cplx z, int k) {
    if (k < 1 || k > 4) throw UnsupportedOrder("derivative order must lie in [1, 4]");
    if (S.trivial()) return {0.0, 0.0, 0.0, true};
    auto m = herglotz_moments(S, z, k);
    // S = e^G with G = -A: S^(k) = sum_j C(k-1, j) G^(j+1) S^(k-1-j)
    std::array<cplx, 5> D{};
    D[0] = std::exp(-m.A[0]);
    std::array<double, 5> U{};
    U[0] = 1.0;
    double delta = support_distance(S.measure(), z).value;
    double mass = S.measure().total_mass();
    auto binom = [](int n, int r) {
        double b = 1.0;
        for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
        return b;
    };
    for (int q = 1; q <= k; ++q) {
        cplx acc = 0.0;
        double ub = 0.0;
        for (int j = 0; j < q; ++j) {
            acc += binom(q - 1, j) * (-m.A[j + 1]) * D[q - 1 - j];
            ub += binom(q - 1, j) * 2.0 * kFactorial[j + 1] * mass / std::pow(delta, j + 2) * U[q - 1 - j];
        }
        D[q] = acc;
        U[q] = ub;
    }
    DerivativeResult r;
    r.value = D[k];
    r.error_bound = m.error_bound * U[k];
    r.empirical_constant = std::abs(D[k]) * std::pow(delta, 2 * k);
    r.within_crude_bound = std::abs(D[k]) <= U[k] * (1.0 + 1e-9) + r.error_bound;
    return r;
}

Evaluation eval_inner(const InnerFunction& theta, cplx z) {
    auto s = eval_singular_inner(theta.singular, z);
    cplx b = eval_blaschke(theta.blaschke, z);
    return {b * s.value, s.error_bound};
}

cplx inner_function_derivative(const InnerFunction& theta, cplx z) {
    cplx b = eval_blaschke(theta.blaschke, z);
    cplx db = blaschke_derivative(theta.blaschke, z);
    if (theta.singular.trivial()) return db;
    auto m = herglotz_moments(theta.singular, z, 1);
    cplx s = std::exp(-m.A[0]);
    return db * s - b * s * m.A[1];
}

cplx reproducing_kernel(const KernelSpec& spec, cplx z) {
    if (spec.theta.trivial()) return 0.0;
    cplx tl = eval_inner(spec.theta, spec.lambda).value;
    cplx tz = eval_inner(spec.theta, z).value;
    return (1.0 - std::conj(tl) * tz) / (1.0 - std::conj(spec.lambda) * z);
}

double kernel_norm_squared(const KernelSpec& spec) {
    if (spec.theta.trivial()) return 0.0;
    cplx tl = eval_inner(spec.theta, spec.lambda).value;
    return (1.0 - std::norm(tl)) / (1.0 - std::norm(spec.lambda));
}

InnerFunction factor_truncate(const InnerFunction& theta, std::size_t N) {
    auto d = decompose(theta.singular.measure());
    if (!d.nu_K.empty())
        throw DecompositionRequired("truncation needs a measure without a Korenblum-Roberts part");
    InnerFunction out;
    const auto& zs = theta.blaschke.zeros;
    out.blaschke.zeros.assign(zs.begin(), zs.begin() + std::min(N, zs.size()));
    SingularMeasure nu;
    std::size_t taken = 0;
    for (const auto& a : d.nu_C.atoms)
        if (taken < N) {
            nu.atoms.push_back(a);
            ++taken;
        }
    for (const auto& c : d.nu_C.components)
        if (taken < N) {
            nu.components.push_back(c);
            ++taken;
        }
    out.singular = SingularInner(std::move(nu), theta.singular.tolerance());
    return out;
}

std::vector<cplx> taylor_coefficients(const InnerFunction& theta, std::size_t count) {
    std::vector<cplx> out(count, 0.0);
    if (count == 0) return out;
    if (theta.trivial()) {
        out[0] = 1.0;
        return out;
    }
    // Cauchy integral on |z| = r: aliasing from index M is r^M = e^{-64}
    const double tau = 2.0;
    double r = std::max(0.5, 1.0 - tau / double(count));
    std::size_t M = std::max<std::size_t>(256, next_power_of_two(32 * count));
    const auto& nu = theta.singular.measure();

    std::vector<cplx> samples(M, 0.0);
    if (!nu.empty()) {
        auto nh = nu.fourier(M);
        // A(r zeta) = nu(T) + 2 sum_k r^k nu^(k) zeta^k
        double rk = 1.0;
        for (std::size_t k = 0; k < M; ++k) {
            samples[k] = (k == 0 ? 1.0 : 2.0 * rk) * nh[k];
            rk *= r;
        }
        fft_inplace(samples, +1);
        for (auto& s : samples) s = std::exp(-s);
    } else {
        std::fill(samples.begin(), samples.end(), cplx(1.0));
    }
    if (!theta.blaschke.zeros.empty())
        for (std::size_t j = 0; j < M; ++j)
            samples[j] *= eval_blaschke(theta.blaschke, r * circle_point(double(j) / double(M)));
    fft_inplace(samples, -1);
    double scale = 1.0 / double(M);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = samples[k] * scale;
        scale /= r;
    }
    return out;
}

RingEvaluator::RingEvaluator(InnerFunction theta, double r_max, double tol)
    : theta_(std::move(theta)), r_max_(r_max), tol_(tol), mass_(theta_.singular.measure().total_mass()) {
    if (!(r_max >= 0.0 && r_max < 1.0)) throw DomainError("ring radii must lie in [0, 1)");
    if (mass_ > 0.0) nu_hat_ = theta_.singular.measure().fourier(terms(r_max));
}

std::size_t RingEvaluator::terms(double r) const {
    if (mass_ == 0.0) return 1;
    if (r == 0.0) return 2;
    // 2 mass sum_{k >= K} k r^(k-1) <= 2 mass r^(K-1) (K / (1-r) + 1 / (1-r)^2)
    double q = 1.0 - r;
    double K = 16.0;
    for (int it = 0; it < 8; ++it)
        K = 1.0 + std::log(tol_ / (2.0 * mass_ * (K / q + 1.0 / (q * q)))) / std::log(r);
    if (!(K < double(std::size_t(1) << 27))) throw DomainError("ring radius too close to the circle");
    return std::size_t(std::max(16.0, std::ceil(K)));
}

std::vector<cplx> RingEvaluator::folded(double r, std::size_t M, bool derivative) const {
    if (r > r_max_) throw DomainError("ring radius beyond the precomputed range");
    std::vector<cplx> a(M, 0.0);
    if (mass_ == 0.0) return a;
    std::size_t K = std::min(terms(r), nu_hat_.size());
    if (!derivative) a[0] += nu_hat_[0];
    double rk = 1.0;  // r^(k-1)
    for (std::size_t k = 1; k < K; ++k) {
        if (derivative)
            a[(k - 1) % M] += 2.0 * double(k) * rk * nu_hat_[k];
        else
            a[k % M] += 2.0 * rk * r * nu_hat_[k];
        rk *= r;
        if (k % 4096 == 0) rk = std::pow(r, double(k));
    }
    fft_inplace(a, +1);
    return a;
}

std::vector<cplx> RingEvaluator::values(double r, std::size_t M) const {
    auto A = folded(r, M, false);
    std::vector<cplx> v(M);
    for (std::size_t j = 0; j < M; ++j) {
        cplx z = r * circle_point(double(j) / double(M));
        v[j] = std::exp(-A[j]) * eval_blaschke(theta_.blaschke, z);
    }
    return v;
}

std::vector<cplx> RingEvaluator::derivatives(double r, std::size_t M) const {
    auto A = folded(r, M, false);
    auto dA = folded(r, M, true);
    std::vector<cplx> v(M);
    for (std::size_t j = 0; j < M; ++j) {
        cplx z = r * circle_point(double(j) / double(M));
        cplx s = std::exp(-A[j]);
        v[j] = s * (blaschke_derivative(theta_.blaschke, z) - eval_blaschke(theta_.blaschke, z) * dA[j]);
    }
    return v;
}

}  // namespace ktheta
