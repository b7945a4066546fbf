#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ktheta/circle_harmonics.hpp"

namespace ktheta {

// Gauss-Legendre in s = r^2 times the trapezoid rule in angle; weights sum to 1 against the
// normalized area measure, and z^j conj(z)^k integrates exactly for j, k <= 2R - 1 (and |j - k| < M)
class DiscQuadrature {
public:
    explicit DiscQuadrature(int radial = 64, int angular = 512);

    int radial() const { return R_; }
    int angular() const { return M_; }
    std::size_t size() const { return std::size_t(R_) * std::size_t(M_); }
    // node i * M + j sits at radius r_i and angle j / M turns
    cplx node(std::size_t k) const;
    double weight(std::size_t k) const { return w_[k / std::size_t(M_)] / M_; }
    double radius(int i) const { return r_[std::size_t(i)]; }
    DiscQuadrature doubled() const { return DiscQuadrature(2 * R_, 2 * M_); }

private:
    int R_, M_;
    std::vector<double> r_, w_;
};

// polynomial coefficients, or values on the nodes of one quadrature
class DiscFunction {
public:
    DiscFunction() = default;
    static DiscFunction polynomial(std::vector<cplx> coeffs);
    static DiscFunction sampled(const DiscQuadrature& q, std::vector<cplx> values);
    static DiscFunction sampled(const DiscQuadrature& q, const std::function<cplx(cplx)>& f);

    bool is_polynomial() const { return coeffs_.has_value(); }
    const std::vector<cplx>& coefficients() const;
    cplx operator()(cplx z) const;
    std::vector<cplx> values(const DiscQuadrature& q) const;
    DiscFunction derivative() const;

private:
    std::optional<std::vector<cplx>> coeffs_;
    std::vector<cplx> samples_;
    int R_ = 0, M_ = 0;
};

// p = infinity gives the sup over the nodes
double lp_bergman_norm(const DiscFunction& f, double p, const DiscQuadrature& q = DiscQuadrature());
double sobolev_norm(const DiscFunction& f, double p, const DiscQuadrature& q = DiscQuadrature());
DiscFunction backward_shift(const DiscFunction& g);

struct PairingCheck {
    cplx lhs;  // sum f^(k) conj(g^(k))
    cplx rhs;  // f(0) conj(g(0)) + ∫ f' conj(g' + Lg) (1 - |z|^2) dA
    double gap = 0.0;
    double ratio = 0.0;  // |lhs| / (||f||_{W^{1,p}} ||g||_{L^q}), 1/p + 1/q = 1
};

PairingCheck cauchy_pairing_disc(const DiscFunction& f, const DiscFunction& g, double p = 2.0,
                                 const DiscQuadrature& q = DiscQuadrature());

struct CyclicityResult {
    std::size_t degree = 0;
    double distance = 0.0;
    std::vector<cplx> coefficients;  // monomial coefficients of the optimal p
    double condition = 1.0;          // of the Gram matrix in the sqrt(k+1) z^k basis
    bool regularized = false;
};

// min over deg p <= N of ||S p - 1|| in L^2_a
CyclicityResult cyclicity_distance(const InnerFunction& S, std::size_t N, double q = 2.0,
                                   const DiscQuadrature& quad = DiscQuadrature());
std::vector<CyclicityResult> cyclicity_sweep(const InnerFunction& S, const std::vector<std::size_t>& degrees,
                                             const DiscQuadrature& quad = DiscQuadrature());

// g - (least-squares projection of g onto span{Theta z^j, j <= J}) in H^2
GridFunction project_off_multiples(const InnerFunction& theta, const GridFunction& g, std::size_t J);

struct Obstruction {
    cplx pairing;   // by the disc identity
    cplx boundary;  // sum of Taylor coefficient products, as a cross-check
    double ratio = 0.0;
};

// ∫ Theta_C f conj(g) dm for polynomial f and the analytic part of g
Obstruction obstruction_functional(const InnerFunction& theta_C, const DiscFunction& f, const GridFunction& g,
                                   double p = 2.0, const DiscQuadrature& q = DiscQuadrature());

struct ObstructionSample {
    std::size_t degree = 0;
    Obstruction value;
};

// pairing against g0 - P_J g0 for J in degrees, the projection taken off theta multiples
std::vector<ObstructionSample> obstruction_sweep(const InnerFunction& theta_C, const InnerFunction& theta,
                                                 const DiscFunction& f, const GridFunction& g0,
                                                 const std::vector<std::size_t>& degrees, double p = 2.0,
                                                 const DiscQuadrature& q = DiscQuadrature());

}  // namespace ktheta
