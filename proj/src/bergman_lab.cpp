#include "ktheta/bergman_lab.hpp"

#include <limits>

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include "ktheta/fft.hpp"

namespace ktheta {

namespace {

// values of sum_k c_k r^k zeta^k on the M-point ring, by folding k mod M
std::vector<cplx> ring_values(const std::vector<cplx>& c, double r, int M) {
    std::vector<cplx> a(std::size_t(M), 0.0);
    double rk = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        a[k % std::size_t(M)] += c[k] * rk;
        rk *= r;
    }
    fft_inplace(a, +1);
    return a;
}

std::vector<cplx> derivative_coeffs(const std::vector<cplx>& c) {
    std::vector<cplx> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
    return d;
}

std::vector<cplx> on_nodes(const std::vector<cplx>& c, const DiscQuadrature& q) {
    std::vector<cplx> v(q.size());
    for (int i = 0; i < q.radial(); ++i) {
        auto ring = ring_values(c, q.radius(i), q.angular());
        std::copy(ring.begin(), ring.end(), v.begin() + long(i) * q.angular());
    }
    return v;
}

double lp_of_values(const std::vector<cplx>& v, double p, const DiscQuadrature& q) {
    if (!(p > 0.0)) throw DomainError("Bergman exponent must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (auto x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += q.weight(k) * std::pow(std::abs(v[k]), p);
    return std::pow(s, 1.0 / p);
}

// Theta and Theta' on the quadrature nodes, ring by ring
std::pair<std::vector<cplx>, std::vector<cplx>> inner_on_nodes(const InnerFunction& theta, const DiscQuadrature& q,
                                                               bool derivative) {
    std::vector<cplx> v(q.size(), 1.0), d(q.size(), 0.0);
    if (theta.trivial()) return {v, d};
    RingEvaluator ev(theta, q.radius(q.radial() - 1));
    const std::size_t M = std::size_t(q.angular());
    for (int i = 0; i < q.radial(); ++i) {
        auto ring = ev.values(q.radius(i), M);
        std::copy(ring.begin(), ring.end(), v.begin() + long(i) * long(M));
        if (derivative) {
            auto dr = ev.derivatives(q.radius(i), M);
            std::copy(dr.begin(), dr.end(), d.begin() + long(i) * long(M));
        }
    }
    return {v, d};
}

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    if (p <= 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
}

}  // namespace

DiscQuadrature::DiscQuadrature(int radial, int angular) : R_(radial), M_(angular) {
    if (radial < 1 || angular < 1 || !is_power_of_two(std::size_t(angular)))
        throw DomainError("disc quadrature needs R >= 1 and a power-of-two angular size");
    auto zeros = boost::math::legendre_p_zeros<double>(R_);
    std::vector<double> x;
    for (double z : zeros) {
        x.push_back(z);
        if (z != 0.0) x.push_back(-z);
    }
    std::sort(x.begin(), x.end());
    for (double xi : x) {
        double dp = boost::math::legendre_p_prime(R_, xi);
        double w = 2.0 / ((1.0 - xi * xi) * dp * dp);
        r_.push_back(std::sqrt(0.5 * (xi + 1.0)));
        w_.push_back(0.5 * w);
    }
}

cplx DiscQuadrature::node(std::size_t k) const {
    std::size_t i = k / std::size_t(M_), j = k % std::size_t(M_);
    return r_[i] * circle_point(double(j) / double(M_));
}

DiscFunction DiscFunction::polynomial(std::vector<cplx> coeffs) {
    DiscFunction f;
    if (coeffs.empty()) coeffs.push_back(0.0);
    f.coeffs_ = std::move(coeffs);
    return f;
}

DiscFunction DiscFunction::sampled(const DiscQuadrature& q, std::vector<cplx> values) {
    if (values.size() != q.size()) throw GridMismatch("sample count does not match the quadrature");
    DiscFunction f;
    f.samples_ = std::move(values);
    f.R_ = q.radial();
    f.M_ = q.angular();
    return f;
}

DiscFunction DiscFunction::sampled(const DiscQuadrature& q, const std::function<cplx(cplx)>& fn) {
    std::vector<cplx> v(q.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(q.node(k));
    return sampled(q, std::move(v));
}

const std::vector<cplx>& DiscFunction::coefficients() const {
    if (!coeffs_) throw UnsupportedForm("a polynomial coefficient form is required");
    return *coeffs_;
}

cplx DiscFunction::operator()(cplx z) const {
    const auto& c = coefficients();
    cplx s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * z + *it;
    return s;
}

std::vector<cplx> DiscFunction::values(const DiscQuadrature& q) const {
    if (coeffs_) return on_nodes(*coeffs_, q);
    if (R_ != q.radial() || M_ != q.angular()) throw GridMismatch("samples were taken on another quadrature");
    return samples_;
}

DiscFunction DiscFunction::derivative() const {
    if (!coeffs_) throw DerivativeUnavailable("sampled functions carry no derivative");
    return polynomial(derivative_coeffs(*coeffs_));
}

double lp_bergman_norm(const DiscFunction& f, double p, const DiscQuadrature& q) {
    return lp_of_values(f.values(q), p, q);
}

double sobolev_norm(const DiscFunction& f, double p, const DiscQuadrature& q) {
    if (!f.is_polynomial()) throw DerivativeUnavailable("the Sobolev norm needs f'");
    return lp_bergman_norm(f, p, q) + lp_bergman_norm(f.derivative(), p, q);
}

DiscFunction backward_shift(const DiscFunction& g) {
    const auto& c = g.coefficients();
    std::vector<cplx> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k];
    return DiscFunction::polynomial(std::move(d));
}

PairingCheck cauchy_pairing_disc(const DiscFunction& f, const DiscFunction& g, double p, const DiscQuadrature& q) {
    const auto& fc = f.coefficients();
    const auto& gc = g.coefficients();
    PairingCheck r;
    for (std::size_t k = 0; k < std::min(fc.size(), gc.size()); ++k) r.lhs += fc[k] * std::conj(gc[k]);

    auto fd = on_nodes(derivative_coeffs(fc), q);
    auto gd = derivative_coeffs(gc);
    auto lg = backward_shift(g).coefficients();
    std::vector<cplx> sum(std::max(gd.size(), lg.size()), 0.0);
    for (std::size_t k = 0; k < gd.size(); ++k) sum[k] += gd[k];
    for (std::size_t k = 0; k < lg.size(); ++k) sum[k] += lg[k];
    auto gs = on_nodes(sum, q);
    cplx integral = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        double r2 = std::norm(q.node(k));
        integral += q.weight(k) * fd[k] * std::conj(gs[k]) * (1.0 - r2);
    }
    r.rhs = fc[0] * std::conj(gc[0]) + integral;
    r.gap = std::abs(r.lhs - r.rhs);
    double denom = sobolev_norm(f, p, q) * lp_bergman_norm(g, conjugate_exponent(p), q);
    r.ratio = denom > 0.0 ? std::abs(r.lhs) / denom : 0.0;
    return r;
}

std::vector<CyclicityResult> cyclicity_sweep(const InnerFunction& S, const std::vector<std::size_t>& degrees,
                                             const DiscQuadrature& quad) {
    std::size_t N = 0;
    for (auto d : degrees) N = std::max(N, d);
    const Eigen::Index n = Eigen::Index(N + 1), m = Eigen::Index(quad.size());
    // columns sqrt(w) S sqrt(k+1) z^k; the target is sqrt(w)
    Eigen::MatrixXcd A(m, n);
    Eigen::VectorXcd b(m);
    auto sv = inner_on_nodes(S, quad, false).first;
    for (Eigen::Index k = 0; k < m; ++k) {
        cplx z = quad.node(std::size_t(k));
        double sw = std::sqrt(quad.weight(std::size_t(k)));
        cplx v = sw * sv[std::size_t(k)];
        for (Eigen::Index j = 0; j < n; ++j) {
            A(k, j) = v * std::sqrt(double(j + 1));
            v *= z;
        }
        b(k) = sw;
    }
    Eigen::MatrixXcd G = A.adjoint() * A;
    Eigen::VectorXcd h = A.adjoint() * b;

    // distances from the QR factor of [A | b]: the residual after k columns is the norm of the
    // trailing part of Q* b, accurate near zero and nonincreasing in k by construction
    Eigen::MatrixXcd Ab(m, n + 1);
    Ab << A, b;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Ab);
    const Eigen::Index rows = std::min(m, n + 1);
    std::vector<double> tail(std::size_t(n + 2), 0.0);
    if (rows == n + 1) tail[std::size_t(n)] = std::norm(qr.matrixQR()(n, n));
    for (Eigen::Index i = std::min(n, rows) - 1; i >= 0; --i)
        tail[std::size_t(i)] = tail[std::size_t(i + 1)] + std::norm(qr.matrixQR()(i, n));

    std::vector<CyclicityResult> out;
    for (auto d : degrees) {
        const Eigen::Index k = Eigen::Index(d + 1);
        Eigen::MatrixXcd Gk = G.topLeftCorner(k, k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gk, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        CyclicityResult r;
        r.degree = d;
        r.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(r.condition < 1e12)) {
            Gk.diagonal().array() += 1e-12 * hi;
            r.regularized = true;
        }
        Eigen::LLT<Eigen::MatrixXcd> llt(Gk);
        Eigen::VectorXcd y = llt.matrixL().solve(h.head(k));
        Eigen::VectorXcd x = llt.matrixU().solve(y);
        r.distance = std::sqrt(tail[std::size_t(std::min(k, n))]);
        for (Eigen::Index j = 0; j < k; ++j) r.coefficients.push_back(x(j) * std::sqrt(double(j + 1)));
        out.push_back(std::move(r));
    }
    return out;
}

CyclicityResult cyclicity_distance(const InnerFunction& S, std::size_t N, double q, const DiscQuadrature& quad) {
    if (q != 2.0) throw UnsupportedForm("cyclicity distances are computed for q = 2 only");
    return cyclicity_sweep(S, {N}, quad).front();
}

GridFunction project_off_multiples(const InnerFunction& theta, const GridFunction& g, std::size_t J) {
    auto a = to_coefficients(g).analytic();
    const Eigen::Index n = Eigen::Index(a.size());
    auto th = taylor_coefficients(theta, a.size());
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, Eigen::Index(J + 1));
    for (Eigen::Index j = 0; j <= Eigen::Index(J); ++j)
        for (Eigen::Index k = j; k < n; ++k) B(k, j) = th[std::size_t(k - j)];
    Eigen::Map<Eigen::VectorXcd> y(a.data(), n);
    Eigen::VectorXcd x = B.colPivHouseholderQr().solve(y);
    Eigen::VectorXcd res = y - B * x;
    return from_taylor(g.grid, std::vector<cplx>(res.data(), res.data() + res.size()));
}

Obstruction obstruction_functional(const InnerFunction& theta_C, const DiscFunction& f, const GridFunction& g,
                                   double p, const DiscQuadrature& q) {
    auto gc = to_coefficients(g).analytic();
    auto fc = f.coefficients();
    Obstruction out;

    // F = Theta_C f and F' on the nodes
    auto fv = on_nodes(fc, q), fdv = on_nodes(derivative_coeffs(fc), q);
    auto [tv, dtv] = inner_on_nodes(theta_C, q, true);
    std::vector<cplx> F(q.size()), dF(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        F[k] = tv[k] * fv[k];
        dF[k] = dtv[k] * fv[k] + tv[k] * fdv[k];
    }
    cplx F0 = (theta_C.trivial() ? cplx(1.0) : eval_inner(theta_C, 0.0).value) * fc[0];

    auto gd = derivative_coeffs(gc);
    std::vector<cplx> sum(gc.size(), 0.0);
    for (std::size_t k = 0; k < gd.size(); ++k) sum[k] += gd[k];
    for (std::size_t k = 1; k < gc.size(); ++k) sum[k - 1] += gc[k];
    auto gs = on_nodes(sum, q);
    cplx integral = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k)
        integral += q.weight(k) * dF[k] * std::conj(gs[k]) * (1.0 - std::norm(q.node(k)));
    out.pairing = F0 * std::conj(gc[0]) + integral;

    auto th = taylor_coefficients(theta_C, gc.size());
    for (std::size_t j = 0; j < gc.size(); ++j) {
        cplx Fj = 0.0;
        for (std::size_t i = 0; i < fc.size() && i <= j; ++i) Fj += fc[i] * th[j - i];
        out.boundary += Fj * std::conj(gc[j]);
    }

    double pq = conjugate_exponent(p);
    double denom = (lp_of_values(F, p, q) + lp_of_values(dF, p, q)) * lp_of_values(on_nodes(gc, q), pq, q);
    out.ratio = denom > 0.0 ? std::abs(out.pairing) / denom : 0.0;
    return out;
}

std::vector<ObstructionSample> obstruction_sweep(const InnerFunction& theta_C, const InnerFunction& theta,
                                                 const DiscFunction& f, const GridFunction& g0,
                                                 const std::vector<std::size_t>& degrees, double p,
                                                 const DiscQuadrature& q) {
    std::vector<ObstructionSample> out;
    for (auto J : degrees)
        out.push_back({J, obstruction_functional(theta_C, f, project_off_multiples(theta, g0, J), p, q)});
    return out;
}

}  // namespace ktheta
