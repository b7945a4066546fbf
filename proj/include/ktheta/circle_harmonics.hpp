#pragma once

#include <array>
#include <limits>
#include <vector>

#include "ktheta/inner_functions.hpp"

namespace ktheta {

struct CircleGrid {
    std::size_t n = 0;
    explicit CircleGrid(std::size_t n_ = 16384);
    cplx node(std::size_t j) const { return circle_point(double(j) / double(n)); }
    bool operator==(const CircleGrid& o) const { return n == o.n; }
};

struct FourierCoefficients;

struct GridFunction {
    CircleGrid grid;
    std::vector<cplx> values;
    GridFunction(CircleGrid g, std::vector<cplx> v);
    explicit GridFunction(CircleGrid g) : grid(g), values(g.n, 0.0) {}
    FourierCoefficients spectrum() const;
};

// stored in transform order; at(k) accepts k in [-N/2, N/2)
struct FourierCoefficients {
    CircleGrid grid;
    std::vector<cplx> data;
    cplx at(long k) const;
    cplx& at(long k);
    GridFunction to_grid() const;
    // nonnegative frequencies 0..N/2-1
    std::vector<cplx> analytic() const;
    static FourierCoefficients from_analytic(CircleGrid g, const std::vector<cplx>& coeffs);
};

FourierCoefficients to_coefficients(const GridFunction& f);
GridFunction to_grid(const FourierCoefficients& c);

GridFunction riesz_project(const GridFunction& f);
GridFunction herglotz(const GridFunction& f);
GridFunction toeplitz_coanalytic(const GridFunction& H, const GridFunction& f);

cplx h2_inner(const GridFunction& f, const GridFunction& g);
double h2_norm(const GridFunction& f);
// mean over the nodes of f conj(g)
cplx grid_inner(const GridFunction& f, const GridFunction& g);

// analytic polynomial with the given coefficients sampled on the grid
GridFunction from_taylor(CircleGrid g, const std::vector<cplx>& coeffs);

struct SampledInner {
    GridFunction values;
    std::vector<std::size_t> shifted_nodes;  // nodes rotated by half a step off the support
};

// Theta on the grid nodes; nodes on the singular support are rotated by half a step
SampledInner sample_on_grid(const InnerFunction& theta, CircleGrid grid);

struct MembershipResidual {
    double residual = 0.0;
};

// || P+(conj(Theta) f) || over the analytic band of f, computed as the correlation of the
// Taylor coefficients of f against those of Theta
MembershipResidual ktheta_membership_residual(const InnerFunction& theta, const GridFunction& f);
double membership_residual_from_coefficients(const std::vector<cplx>& theta_hat,
                                             const std::vector<cplx>& f_hat);

struct DecayReport {
    double exponent = 0.0;        // fitted p in |f^(k)| ~ k^-p; +inf when the tail is below noise
    bool finite_spectrum = false;
    std::size_t points = 0;
    std::array<double, 4> tail_sup{};  // sup_{k >= kmin} |f^(k)| k^p for p = 1..4
};

// reference_scale sets the noise floor (1e-13 * reference_scale); <= 0 uses max |f^(k)|
DecayReport decay_report(const GridFunction& f, std::size_t kmin = 16, double reference_scale = 0.0);
DecayReport decay_report_from_coefficients(const std::vector<cplx>& coeffs, std::size_t kmin,
                                           std::size_t kmax, double reference_scale);

}  // namespace ktheta
