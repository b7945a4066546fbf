#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ktheta/boundary_measures.hpp"

namespace ktheta {

// a zero at the origin contributes the factor z
struct BlaschkeProduct {
    std::vector<cplx> zeros;
    void validate() const;
};

// level tables for each Cantor component, built once per measure
struct ComponentTables {
    double base_start = 0.0;
    double mass = 0.0;
    std::vector<double> J;    // J[n], n = 0..depth
    std::vector<double> gap;  // gap[n], gap[0] unused
};

class SingularInner {
public:
    SingularInner() = default;
    explicit SingularInner(SingularMeasure nu, double tol = 1e-8);

    const SingularMeasure& measure() const { return nu_; }
    double tolerance() const { return tol_; }
    const std::vector<ComponentTables>& tables() const { return tables_; }
    bool trivial() const { return nu_.empty(); }

private:
    SingularMeasure nu_;
    double tol_ = 1e-8;
    std::vector<ComponentTables> tables_;
};

struct InnerFunction {
    BlaschkeProduct blaschke;
    SingularInner singular;
    bool trivial() const { return blaschke.zeros.empty() && singular.trivial(); }
};

struct KernelSpec {
    InnerFunction theta;
    cplx lambda;
};

struct Evaluation {
    cplx value;
    double error_bound = 0.0;
};

// A_j(z) = ∫ d^j/dz^j (w+z)/(w-z) dnu(w) for j = 0..order, order <= 4
struct HerglotzMoments {
    std::array<cplx, 5> A{};
    double error_bound = 0.0;
};

HerglotzMoments herglotz_moments(const SingularInner& S, cplx z, int order);

cplx eval_blaschke(const BlaschkeProduct& B, cplx z);
cplx blaschke_derivative(const BlaschkeProduct& B, cplx z);

Evaluation eval_singular_inner(const SingularInner& S, cplx z);
// plain atom sum over discretize(nu, level), with that operation's bound
Evaluation eval_singular_inner_at_level(const SingularInner& S, cplx z, int level);

struct DerivativeResult {
    cplx value;
    double error_bound = 0.0;
    double empirical_constant = 0.0;  // |S^(k)(z)| delta(z)^(2k)
    bool within_crude_bound = true;   // |S^(k)| <= bound from |A^(j)| <= 2 j! nu(T)/delta^(j+1)
};

DerivativeResult inner_derivative(const SingularInner& S, cplx z, int k);

Evaluation eval_inner(const InnerFunction& theta, cplx z);
// Theta'(z)
cplx inner_function_derivative(const InnerFunction& theta, cplx z);

cplx reproducing_kernel(const KernelSpec& spec, cplx z);
// k(lambda, lambda) = ||k_lambda||^2
double kernel_norm_squared(const KernelSpec& spec);

InnerFunction factor_truncate(const InnerFunction& theta, std::size_t N);

// first `count` Taylor coefficients of Theta at the origin
std::vector<cplx> taylor_coefficients(const InnerFunction& theta, std::size_t count);

// Theta and Theta' on the ring |z| = r at the M angles j/M, for r <= r_max. The Herglotz series
// nu(T) + 2 sum r^k nu^(k) zeta^k is summed exactly on the ring by folding k mod M, then one FFT.
class RingEvaluator {
public:
    RingEvaluator(InnerFunction theta, double r_max, double tol = 1e-13);
    std::vector<cplx> values(double r, std::size_t M) const;
    std::vector<cplx> derivatives(double r, std::size_t M) const;
    // series length used at radius r
    std::size_t terms(double r) const;

private:
    std::vector<cplx> folded(double r, std::size_t M, bool derivative) const;
    InnerFunction theta_;
    double r_max_, tol_, mass_;
    std::vector<cplx> nu_hat_;
};

}  // namespace ktheta
