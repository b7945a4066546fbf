#include "ktheta/circle_harmonics.hpp"

#include <algorithm>

#include "ktheta/fft.hpp"

namespace ktheta {

CircleGrid::CircleGrid(std::size_t n_) : n(n_) {
    if (n < 8 || !is_power_of_two(n)) throw DomainError("grid size must be a power of two >= 8");
}

GridFunction::GridFunction(CircleGrid g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw GridMismatch("sample count does not match the grid");
}

FourierCoefficients GridFunction::spectrum() const { return to_coefficients(*this); }

cplx FourierCoefficients::at(long k) const {
    long n = long(grid.n);
    return data[std::size_t(((k % n) + n) % n)];
}

cplx& FourierCoefficients::at(long k) {
    long n = long(grid.n);
    return data[std::size_t(((k % n) + n) % n)];
}

GridFunction FourierCoefficients::to_grid() const { return ktheta::to_grid(*this); }

std::vector<cplx> FourierCoefficients::analytic() const {
    return {data.begin(), data.begin() + long(grid.n / 2)};
}

FourierCoefficients FourierCoefficients::from_analytic(CircleGrid g, const std::vector<cplx>& coeffs) {
    FourierCoefficients c{g, std::vector<cplx>(g.n, 0.0)};
    std::size_t m = std::min(coeffs.size(), g.n / 2);
    std::copy(coeffs.begin(), coeffs.begin() + long(m), c.data.begin());
    return c;
}

FourierCoefficients to_coefficients(const GridFunction& f) {
    FourierCoefficients c{f.grid, f.values};
    fft_inplace(c.data, -1);
    double s = 1.0 / double(f.grid.n);
    for (auto& x : c.data) x *= s;
    return c;
}

GridFunction to_grid(const FourierCoefficients& c) {
    std::vector<cplx> v = c.data;
    fft_inplace(v, +1);
    return GridFunction(c.grid, std::move(v));
}

GridFunction riesz_project(const GridFunction& f) {
    auto c = to_coefficients(f);
    std::fill(c.data.begin() + long(f.grid.n / 2), c.data.end(), cplx(0.0));
    return to_grid(c);
}

GridFunction herglotz(const GridFunction& f) {
    auto c = to_coefficients(f);
    for (std::size_t k = 1; k < f.grid.n / 2; ++k) c.data[k] *= 2.0;
    std::fill(c.data.begin() + long(f.grid.n / 2), c.data.end(), cplx(0.0));
    return to_grid(c);
}

GridFunction toeplitz_coanalytic(const GridFunction& H, const GridFunction& f) {
    if (!(H.grid == f.grid)) throw GridMismatch("Toeplitz symbol and argument live on different grids");
    const std::size_t n = f.grid.n, m = 2 * n;
    auto lift = [&](const GridFunction& g) {
        auto c = to_coefficients(g);
        std::vector<cplx> big(m, 0.0);
        for (long k = -long(n / 2); k < long(n / 2); ++k) big[std::size_t((k + long(m)) % long(m))] = c.at(k);
        fft_inplace(big, +1);
        return big;
    };
    auto hb = lift(H), fb = lift(f);
    for (std::size_t j = 0; j < m; ++j) hb[j] = std::conj(hb[j]) * fb[j];
    fft_inplace(hb, -1);
    FourierCoefficients out{f.grid, std::vector<cplx>(n, 0.0)};
    for (std::size_t k = 0; k < n / 2; ++k) out.data[k] = hb[k] / double(m);
    return to_grid(out);
}

cplx h2_inner(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid == g.grid)) throw GridMismatch("inner product across different grids");
    auto a = to_coefficients(f), b = to_coefficients(g);
    cplx s = 0.0;
    for (std::size_t k = 0; k < f.grid.n / 2; ++k) s += a.data[k] * std::conj(b.data[k]);
    return s;
}

double h2_norm(const GridFunction& f) { return std::sqrt(std::max(0.0, h2_inner(f, f).real())); }

cplx grid_inner(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid == g.grid)) throw GridMismatch("inner product across different grids");
    cplx s = 0.0;
    for (std::size_t j = 0; j < f.grid.n; ++j) s += f.values[j] * std::conj(g.values[j]);
    return s / double(f.grid.n);
}

GridFunction from_taylor(CircleGrid g, const std::vector<cplx>& coeffs) {
    return to_grid(FourierCoefficients::from_analytic(g, coeffs));
}

SampledInner sample_on_grid(const InnerFunction& theta, CircleGrid grid) {
    SampledInner out{GridFunction(grid), {}};
    const auto& nu = theta.singular.measure();
    for (std::size_t j = 0; j < grid.n; ++j) {
        double t = double(j) / double(grid.n);
        cplx z = circle_point(t);
        if (!nu.empty() && support_distance(nu, z).value < 1e-12) {
            z = circle_point(t + 0.5 / double(grid.n));
            out.shifted_nodes.push_back(j);
        }
        out.values.values[j] = eval_inner(theta, z).value;
    }
    return out;
}

double membership_residual_from_coefficients(const std::vector<cplx>& theta_hat,
                                             const std::vector<cplx>& f_hat) {
    // r_j = sum_{k >= j} f^_k conj(theta^_{k-j}) = <f, Theta z^j>
    const std::size_t K = f_hat.size();
    if (K == 0) return 0.0;
    std::size_t m = next_power_of_two(2 * K);
    std::vector<cplx> a(m, 0.0), b(m, 0.0);
    std::copy(f_hat.begin(), f_hat.end(), a.begin());
    for (std::size_t k = 0; k < std::min(K, theta_hat.size()); ++k) b[k] = theta_hat[k];
    fft_inplace(a, -1);
    fft_inplace(b, -1);
    // correlation: sum_k a_k conj(b_{k-j}) has transform A conj(B)
    for (std::size_t j = 0; j < m; ++j) a[j] *= std::conj(b[j]);
    fft_inplace(a, +1);
    double s = 0.0;
    for (std::size_t j = 0; j < K; ++j) s += std::norm(a[j] / double(m));
    return std::sqrt(s);
}

MembershipResidual ktheta_membership_residual(const InnerFunction& theta, const GridFunction& f) {
    MembershipResidual out;
    auto fh = to_coefficients(f).analytic();
    auto th = taylor_coefficients(theta, fh.size());
    out.residual = membership_residual_from_coefficients(th, fh);
    return out;
}

DecayReport decay_report_from_coefficients(const std::vector<cplx>& coeffs, std::size_t kmin,
                                           std::size_t kmax, double reference_scale) {
    DecayReport r;
    kmax = std::min(kmax, coeffs.size() == 0 ? 0 : coeffs.size() - 1);
    double scale = reference_scale;
    if (scale <= 0.0)
        for (auto c : coeffs) scale = std::max(scale, std::abs(c));
    double floor = 1e-13 * scale;
    for (std::size_t k = std::max<std::size_t>(kmin, 1); k < coeffs.size(); ++k) {
        double a = std::abs(coeffs[k]);
        for (int p = 0; p < 4; ++p) r.tail_sup[p] = std::max(r.tail_sup[p], a * std::pow(double(k), p + 1));
    }
    // fit the decreasing envelope sup_{j >= k} |c_j| on a log-log scale
    std::vector<double> env(kmax + 1, 0.0);
    double run = 0.0;
    for (std::size_t k = kmax + 1; k-- > kmin;) {
        run = std::max(run, std::abs(coeffs[k]));
        env[k] = run;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = std::max<std::size_t>(kmin, 1); k <= kmax; ++k) {
        if (env[k] <= floor) break;
        double x = std::log(double(k)), y = std::log(env[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    r.points = n;
    if (n < 4) {
        r.exponent = std::numeric_limits<double>::infinity();
        r.finite_spectrum = true;
        return r;
    }
    double slope = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
    r.exponent = -slope;
    return r;
}

DecayReport decay_report(const GridFunction& f, std::size_t kmin, double reference_scale) {
    auto c = to_coefficients(f).analytic();
    return decay_report_from_coefficients(c, kmin, f.grid.n / 4, reference_scale);
}

}  // namespace ktheta
