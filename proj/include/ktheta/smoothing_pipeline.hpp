#pragma once

#include <vector>

#include "ktheta/circle_harmonics.hpp"

namespace ktheta {

struct Gap {
    double start = 0.0;
    double length = 0.0;
};

// h(t) = c (log(e L_k / delta_k(t)))^alpha on gap k, delta_k the distance to the nearer endpoint.
// Within L_k/4 of the midpoint delta_k is replaced by a smooth even proxy with the same value L_k/2
// at the midpoint, so h has no kink there.
class BlowupProfile {
public:
    BlowupProfile() = default;
    BlowupProfile(ArcSet set, double alpha, double c);

    const ArcSet& set() const { return set_; }
    double alpha() const { return alpha_; }
    double c() const { return c_; }
    // gaps ordered by decreasing length, ties by start
    const std::vector<Gap>& gaps() const { return gaps_; }

    double value(double t) const;
    // profile on a gap of length L at distance d <= L/2 from an endpoint
    double at_distance(double d, double L) const;
    static double smoothed_distance(double d, double L);
    double gap_integral(std::size_t k) const;
    double integral() const;  // ∫ h dm
    // h >= M exactly within this distance of an endpoint of gap k
    double endpoint_radius(double M, std::size_t k) const;
    // index into gaps() of the gap containing t, or npos when t lies in E
    std::size_t locate(double t) const;
    // ∫_0^s h over one half of a gap of length L; c e L Gamma(alpha + 1, log(e L / s)) for s <= L/4
    double half_integral(double s, double L) const;

    static constexpr std::size_t npos = std::size_t(-1);

private:
    ArcSet set_;
    double alpha_ = 1.0;
    double c_ = 1.0;
    std::vector<Gap> gaps_;
    std::vector<std::size_t> by_start_;
};

BlowupProfile build_profile(const ArcSet& set, double alpha, double c);

// psi_n(x) = S((delta - eps_n) / eps_n), delta = min(x, 1 - x), eps_n = n^-q / 2, with S the
// exp-based smooth step; psi_n = 1 on [1/n, 1 - 1/n] for every q >= 1
struct CutoffFamily {
    double exponent = 3.0;
    double eps(std::size_t n) const { return 0.5 * std::pow(double(n), -exponent); }
    double psi(std::size_t n, double x) const;
    // sum over the first n gaps of psi_n on the affine parameter of the gap
    double phi(const BlowupProfile& p, std::size_t n, double t) const;
};

double smooth_step(double y);

// n = 0 stands for the outer function g itself (no cutoff)
struct SmoothingSequence {
    BlowupProfile profile;
    CutoffFamily cutoff;
    std::size_t fine_grid = std::size_t(1) << 21;

    double weight(std::size_t n, double t) const;
    double weight_integral(std::size_t n) const;
};

struct OuterValue {
    cplx value;
    cplx d1;
    cplx d2;
};

// exp(-∫ (zeta+z)/(zeta-z) w dm) for the weight of index n, by per-gap quadrature
class OuterFunction {
public:
    OuterFunction(SmoothingSequence seq, std::size_t n) : seq_(std::move(seq)), n_(n) {}
    OuterValue evaluate(cplx z, int order = 0) const;
    cplx operator()(cplx z) const { return evaluate(z).value; }

private:
    SmoothingSequence seq_;
    std::size_t n_;
};

OuterFunction outer_from_profile(const BlowupProfile& profile);

struct SmoothingResult {
    std::size_t n = 0;
    GridFunction boundary;          // H_n on the output grid
    std::vector<cplx> taylor;       // H_n^(k), k < grid size
    double weight_integral = 0.0;
    double sup_abs = 0.0;
    double median_abs_minus_one = 0.0;
    cplx value_at_zero;
    double negative_frequency_norm = 0.0;
    std::vector<std::size_t> singular_nodes;  // output nodes on E, where H_n = 0
};

SmoothingResult smoothing_function(const SmoothingSequence& seq, std::size_t n, CircleGrid grid);
OuterFunction interior_evaluator(const SmoothingSequence& seq, std::size_t n);

struct RadialSample {
    double r = 0.0;
    double max_product = 0.0;  // max over k, l <= 2 of |S^(k)(r zeta) g^(l)(r zeta)|
};

struct ProductCheck {
    DecayReport product;
    DecayReport inner_alone;
    std::vector<RadialSample> radial;  // toward the first support point
};

// decay of P+(conj(H) S) on the grid of H, against that of S alone
ProductCheck smooth_product_check(const SingularInner& S, const GridFunction& H, std::size_t kmin = 16);
// adds the radial derivative-product samples toward each atom of S
ProductCheck smooth_product_check(const SingularInner& S, const GridFunction& H, const OuterFunction& g,
                                  const ArcSet& E, std::size_t kmin = 16);

struct PipelineOptions {
    double alpha = 3.0;
    double c = 0.01;
    double cutoff_exponent = 3.0;
    std::size_t grid = 16384;
    std::size_t fine_grid = std::size_t(1) << 21;
    std::size_t kmin = 16;
};

struct KernelApproximation {
    GridFunction approximant{CircleGrid(8)};
    double h2_error = 0.0;
    double membership_residual = 0.0;
    double kernel_norm = 0.0;
    double dominating_norm = 0.0;  // grid L2 norm of (H_n - 1) k
    double weight_integral = 0.0;
    DecayReport decay;
    DecayReport raw_decay;
    bool short_circuit = false;
};

KernelApproximation approximate_kernel(const InnerFunction& theta, cplx lambda, std::size_t n,
                                       const PipelineOptions& opt);

struct KernelGap {
    cplx z;
    double gap = 0.0;
};

struct TruncatedApproximation {
    KernelApproximation approximation;
    std::vector<KernelGap> kernel_gaps;
};

TruncatedApproximation approximate_truncated(const InnerFunction& theta, cplx lambda, std::size_t N,
                                             std::size_t n, const PipelineOptions& opt,
                                             const std::vector<cplx>& sample_points = {0.0});

// boundary set of the singular support when it is a finite set of atoms
ArcSet atom_support(const SingularMeasure& nu);

}  // namespace ktheta
