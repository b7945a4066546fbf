#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ktheta {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// angles are in turns throughout: the full circle has length 1
inline cplx circle_point(double turns) { return std::polar(1.0, two_pi * turns); }

inline double wrap_turns(double t) {
    double w = t - std::floor(t);
    return w >= 1.0 ? 0.0 : w;
}

inline double turns_of(cplx z) { return wrap_turns(std::arg(z) / two_pi); }

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define KTHETA_ERROR(Name, tag)                                                   \
    struct Name : Error {                                                         \
        explicit Name(const std::string& w) : Error(tag, w) {}                    \
    }

KTHETA_ERROR(RepresentationError, "representation");
KTHETA_ERROR(UnsupportedSchedule, "unsupported_schedule");
KTHETA_ERROR(DomainError, "domain");
KTHETA_ERROR(SingularityError, "singularity");
KTHETA_ERROR(UnsupportedOrder, "unsupported_order");
KTHETA_ERROR(DecompositionRequired, "decomposition_required");
KTHETA_ERROR(HypothesisViolation, "hypothesis_violation");
KTHETA_ERROR(GridMismatch, "grid_mismatch");
KTHETA_ERROR(DerivativeUnavailable, "derivative_unavailable");
KTHETA_ERROR(UnsupportedForm, "unsupported_form");
KTHETA_ERROR(IntegrabilityError, "integrability");
KTHETA_ERROR(QuadratureError, "quadrature");
KTHETA_ERROR(ConfigError, "config");

#undef KTHETA_ERROR

}  // namespace ktheta
