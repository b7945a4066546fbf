#include "ktheta/boundary_measures.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include <boost/math/special_functions/zeta.hpp>

namespace ktheta {

namespace {

// sum_{m > n} m^{-s}, s > 1, Euler-Maclaurin from a >= 40
double zeta_tail(double s, int n) {
    double acc = 0.0;
    long a = n + 1;
    for (; a < 40; ++a) acc += std::pow(double(a), -s);
    double x = double(a);
    double em = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s) +
                s * std::pow(x, -s - 1.0) / 12.0 -
                s * (s + 1.0) * (s + 2.0) * std::pow(x, -s - 3.0) / 720.0 +
                s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * std::pow(x, -s - 5.0) / 30240.0;
    return acc + em;
}

double xlog1x(double x) { return x > 0.0 && x < 1.0 ? -x * std::log(x) : 0.0; }

double circular_gap(double from, double to) { return wrap_turns(to - from); }

// arcs overlapping by less than this only touch at a point of E
constexpr double kTouch = 1e-12;

}  // namespace

// ---------------------------------------------------------------- ArcSet

std::vector<Arc> canonicalize(std::vector<Arc> arcs) {
    for (auto& a : arcs) {
        if (!(a.length > 0.0) || a.length > 1.0 || !std::isfinite(a.start))
            throw RepresentationError("arc length must lie in (0, 1]");
        a.start = wrap_turns(a.start);
    }
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.start < y.start; });
    std::vector<Arc> out;
    for (const auto& a : arcs) {
        if (!out.empty() && a.start < out.back().end() - kTouch) {
            out.back().length = std::max(out.back().end(), a.end()) - out.back().start;
        } else {
            out.push_back(a);
        }
    }
    // the last arc may wrap over the first
    if (out.size() > 1 && out.back().end() > 1.0 + out.front().start + kTouch) {
        Arc merged{out.back().start,
                   std::max(out.back().end(), 1.0 + out.front().end()) - out.back().start};
        out.erase(out.begin());
        out.back() = merged;
    }
    for (auto& a : out) a.length = std::min(a.length, 1.0);
    return out;
}

ArcSet ArcSet::from_arcs(std::vector<Arc> arcs) {
    double total = 0.0;
    for (const auto& a : arcs) total += a.length;
    auto canon = canonicalize(arcs);
    double after = 0.0;
    for (const auto& a : canon) after += a.length;
    if (canon.size() != arcs.size() || std::abs(after - total) > 1e-12)
        throw RepresentationError("arcs overlap; the complement list must be disjoint");
    if (total > 1.0 + 1e-15) throw RepresentationError("total arc length exceeds 1");
    ArcSet s;
    s.arcs_ = std::move(canon);
    return s;
}

ArcSet ArcSet::from_points(std::vector<double> points) {
    if (points.empty()) throw RepresentationError("empty point set");
    for (auto& p : points) p = wrap_turns(p);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double next = i + 1 < points.size() ? points[i + 1] : points[0] + 1.0;
        arcs.push_back({points[i], next - points[i]});
    }
    ArcSet s;
    s.arcs_ = std::move(arcs);
    return s;
}

double ArcSet::total_length() const {
    double t = 0.0;
    for (const auto& a : arcs_) t += a.length;
    return t;
}

bool ArcSet::measure_zero(double tol) const { return std::abs(1.0 - total_length()) <= tol; }

bool ArcSet::contains(double t) const {
    t = wrap_turns(t);
    for (const auto& a : arcs_) {
        double d = circular_gap(a.start, t);
        if (d > 0.0 && d < a.length) return false;
    }
    return true;
}

ArcSet unite(const ArcSet& a, const ArcSet& b) {
    std::vector<Arc> out;
    for (const auto& x : a.arcs())
        for (const auto& y : b.arcs()) {
            // intersect two arcs, each possibly wrapping; test the shifts of y by -1, 0, 1
            for (int shift = -1; shift <= 1; ++shift) {
                double ys = y.start + shift;
                double lo = std::max(x.start, ys);
                double hi = std::min(x.end(), ys + y.length);
                if (hi > lo) out.push_back({lo, hi - lo});
            }
        }
    return ArcSet::from_arcs(canonicalize(out));
}

// ---------------------------------------------------------------- GapSchedule

ScheduleFamily parse_family(const std::string& tag) {
    if (tag == "GEOMETRIC") return ScheduleFamily::Geometric;
    if (tag == "POLYLOG") return ScheduleFamily::Polylog;
    throw UnsupportedSchedule("unknown schedule family '" + tag + "'");
}

std::string family_name(ScheduleFamily f) {
    return f == ScheduleFamily::Geometric ? "GEOMETRIC" : "POLYLOG";
}

GapSchedule GapSchedule::geometric(double r, double base_start, double base_length, int depth) {
    GapSchedule s{ScheduleFamily::Geometric, r, base_start, base_length, depth};
    s.validate();
    return s;
}

GapSchedule GapSchedule::polylog(double beta, double base_start, double base_length, int depth) {
    GapSchedule s{ScheduleFamily::Polylog, beta, base_start, base_length, depth};
    s.validate();
    return s;
}

void GapSchedule::validate() const {
    if (!(base_length > 0.0 && base_length <= 1.0))
        throw RepresentationError("schedule base length must lie in (0, 1]");
    if (depth < 1 || depth > 60) throw RepresentationError("schedule depth must lie in [1, 60]");
    if (family == ScheduleFamily::Geometric && !(param > 0.0 && param < 0.5))
        throw RepresentationError("geometric ratio must lie in (0, 1/2)");
    if (family == ScheduleFamily::Polylog && !(param > 0.0))
        throw RepresentationError("polylog exponent must be positive");
}

double GapSchedule::c() const {
    if (family == ScheduleFamily::Geometric) return base_length * (1.0 - 2.0 * param) / param;
    return 2.0 * base_length / boost::math::zeta(1.0 + param);
}

double GapSchedule::gap_length(int n) const {
    if (family == ScheduleFamily::Geometric) return c() * std::pow(param, n);
    return c() * std::ldexp(1.0, -n) * std::pow(double(n), -1.0 - param);
}

double GapSchedule::interval_length(int n) const {
    if (n == 0) return base_length;
    if (family == ScheduleFamily::Geometric)
        return c() * std::pow(param, n + 1) / (1.0 - 2.0 * param);
    return std::ldexp(1.0, -n) * 0.5 * c() * zeta_tail(1.0 + param, n);
}

std::vector<double> GapSchedule::level_left_endpoints(int n) const {
    std::vector<double> left{base_start};
    for (int m = 1; m <= n; ++m) {
        double shift = interval_length(m) + gap_length(m);
        std::vector<double> next;
        next.reserve(2 * left.size());
        for (double a : left) {
            next.push_back(a);
            next.push_back(a + shift);
        }
        left.swap(next);
    }
    return left;
}

bool GapSchedule::contains(double t) const {
    double rel = circular_gap(base_start, t);
    if (rel > base_length) return false;
    double a = 0.0;
    for (int n = 1; n < 400; ++n) {
        double J = interval_length(n);
        if (J < 1e-16) return true;
        double g = gap_length(n);
        const double eps = 1e-15;
        if (rel > a + J + eps && rel < a + J + g - eps) return false;
        if (rel >= a + J + g - eps) a += J + g;
    }
    return true;
}

// ---------------------------------------------------------------- entropy

double entropy(const ArcSet& set) {
    double e = 0.0;
    for (const auto& a : set.arcs()) e += xlog1x(a.length);
    return e;
}

EntropyReport entropy(const GapSchedule& s) {
    s.validate();
    EntropyReport r;
    r.depth = s.depth;
    const int L = s.depth;
    const double c = s.c();
    r.partial_sum = xlog1x(1.0 - s.base_length);
    for (int n = 1; n <= L; ++n) {
        double g = s.gap_length(n);
        r.partial_sum += std::ldexp(1.0, n - 1) * g * std::log(1.0 / g);
    }
    if (s.family == ScheduleFamily::Geometric) {
        // t_n = (c/2) q^n (A + n B), q = 2r
        double q = 2.0 * s.param;
        double A = std::log(1.0 / c), B = std::log(1.0 / s.param);
        double qL1 = std::pow(q, L + 1);
        double s0 = qL1 / (1.0 - q);
        double s1 = qL1 * ((L + 1) - L * q) / ((1.0 - q) * (1.0 - q));
        r.tail_bound = 0.5 * c * (A * s0 + B * s1);
        r.converges = true;
        return r;
    }
    // t_n = (c/2) n^{-1-beta} (n log 2 + (1+beta) log n - log c)
    const double beta = s.param;
    if (beta > 1.0) {
        double Ld = L;
        double t1 = std::pow(Ld, 1.0 - beta) / (beta - 1.0);
        double t2 = std::pow(Ld, -beta) * (beta * std::log(Ld) + 1.0) / (beta * beta);
        double t3 = std::pow(Ld, -beta) / beta;
        r.tail_bound = 0.5 * c * (std::log(2.0) * t1 + (1.0 + beta) * t2 + std::abs(std::log(c)) * t3);
        r.converges = true;
    } else {
        r.tail_bound = std::numeric_limits<double>::infinity();
        r.converges = false;
        double h = 0.0, h1 = 0.0;
        for (int n = 1; n <= L; ++n) {
            h += std::pow(double(n), -beta);
            h1 += std::pow(double(n), -1.0 - beta);
        }
        r.divergence_witness = 0.5 * c * (std::log(2.0) * h - std::max(0.0, std::log(c)) * h1);
    }
    return r;
}

std::string BcCertificate::describe() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s bc=%d partial=%.12e tail=%.6e depth=%d witness=%.6e",
                  kind.c_str(), is_bc ? 1 : 0, entropy.partial_sum, entropy.tail_bound,
                  entropy.depth, entropy.divergence_witness);
    return buf;
}

BcCertificate is_beurling_carleson(const ArcSet& set) {
    if (!set.measure_zero()) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "set has positive measure (excess %.6e)",
                      1.0 - set.total_length());
        throw DomainError(buf);
    }
    BcCertificate c;
    c.is_bc = true;
    c.kind = "finite_sum";
    c.entropy.partial_sum = entropy(set);
    c.entropy.depth = int(set.arcs().size());
    return c;
}

BcCertificate is_beurling_carleson(const GapSchedule& s) {
    BcCertificate c;
    c.entropy = entropy(s);
    c.is_bc = c.entropy.converges;
    if (s.family == ScheduleFamily::Geometric)
        c.kind = "geometric_tail";
    else
        c.kind = c.is_bc ? "polylog_tail" : "harmonic_divergence";
    return c;
}

// ---------------------------------------------------------------- measures

void SingularMeasure::validate() const {
    for (const auto& a : atoms)
        if (!(a.mass > 0.0) || !std::isfinite(a.mass) || !std::isfinite(a.position))
            throw RepresentationError("atom masses must be positive and finite");
    for (const auto& c : components) {
        if (!(c.mass > 0.0) || !std::isfinite(c.mass))
            throw RepresentationError("component masses must be positive and finite");
        c.schedule.validate();
    }
}

double SingularMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    for (const auto& c : components) m += c.mass;
    return m;
}

cplx cantor_fourier(const CantorComponent& comp, long k) {
    const auto& s = comp.schedule;
    double center = s.base_start + 0.5 * s.base_length;
    double prod = 1.0;
    double ak = std::abs(double(k));
    for (int n = 1; n < 400; ++n) {
        double x = std::numbers::pi * ak * s.center_spacing(n);
        if (x < 1e-9) break;
        prod *= std::cos(x);
        if (prod == 0.0) break;
    }
    double ph = -two_pi * double(k) * wrap_turns(center);
    return comp.mass * prod * cplx(std::cos(ph), std::sin(ph));
}

std::vector<cplx> SingularMeasure::fourier(std::size_t count) const {
    std::vector<cplx> out(count, 0.0);
    for (const auto& a : atoms) {
        cplx step = circle_point(-a.position);
        cplx cur = a.mass;
        for (std::size_t k = 0; k < count; ++k) {
            out[k] += cur;
            cur *= step;
            if (k % 64 == 63) cur = a.mass * circle_point(-double(k + 1) * a.position);
        }
    }
    for (const auto& c : components) {
        const auto& s = c.schedule;
        std::vector<double> spacing;
        for (int n = 1; n < 400; ++n) {
            double d = s.center_spacing(n);
            if (d < 1e-22) break;
            spacing.push_back(std::numbers::pi * d);
        }
        double center = wrap_turns(s.base_start + 0.5 * s.base_length);
        for (std::size_t k = 0; k < count; ++k) {
            double prod = 1.0;
            for (double d : spacing) {
                double x = d * double(k);
                if (x < 1e-9) break;
                prod *= std::cos(x);
            }
            double ph = std::fmod(double(k) * center, 1.0);
            out[k] += c.mass * prod * circle_point(-ph);
        }
    }
    return out;
}

Decomposition decompose(const SingularMeasure& nu) {
    nu.validate();
    Decomposition d;
    d.nu_C.atoms = nu.atoms;
    for (const auto& c : nu.components) {
        auto cert = is_beurling_carleson(c.schedule);
        (cert.is_bc ? d.nu_C : d.nu_K).components.push_back(c);
        d.certificates.push_back(cert);
    }
    // witness sets: E_n is the union of the supports of the first n items of nu_C
    const auto& C = d.nu_C;
    std::size_t items = C.atoms.size() + C.components.size();
    for (std::size_t n = 1; n <= items; ++n) {
        double m = 0.0;
        std::size_t na = std::min(n, C.atoms.size());
        std::size_t nc = n > C.atoms.size() ? n - C.atoms.size() : 0;
        for (std::size_t i = 0; i < C.atoms.size(); ++i) {
            bool in = i < na;
            for (std::size_t j = 0; j < nc && !in; ++j)
                in = C.components[j].schedule.contains(C.atoms[i].position);
            for (std::size_t j = 0; j < na && !in; ++j)
                in = wrap_turns(C.atoms[j].position) == wrap_turns(C.atoms[i].position);
            if (in) m += C.atoms[i].mass;
        }
        for (std::size_t j = 0; j < nc; ++j) m += C.components[j].mass;
        d.witness_mass.push_back(m);
    }
    return d;
}

DiscretizedMeasure discretize(const SingularMeasure& nu, int level) {
    if (level < 1) throw DomainError("discretization level must be at least 1");
    nu.validate();
    DiscretizedMeasure d;
    d.level = level;
    d.atomic.atoms = nu.atoms;
    d.sources = nu.components;
    for (const auto& c : nu.components) {
        double J = c.schedule.interval_length(level);
        auto left = c.schedule.level_left_endpoints(level);
        double m = c.mass / double(left.size());
        for (double a : left) d.atomic.atoms.push_back({wrap_turns(a + 0.5 * J), m});
    }
    return d;
}

double DiscretizedMeasure::error_bound(cplx z) const {
    // |S - S~| <= |∫K dnu - ∫K dnu~| since both exponents have nonnegative real part,
    // and |K(w,z) - K(w',z)| = 2|z||w - w'| / (|w - z||w' - z|)
    double bound = 0.0;
    for (const auto& c : sources) {
        double J = c.schedule.interval_length(level);
        Distance dist = boundary_distance(c.schedule, z);
        double deff = dist.value - std::numbers::pi * J;
        if (deff <= 0.0) return std::numeric_limits<double>::infinity();
        bound += c.mass * 2.0 * std::abs(z) * std::numbers::pi * J / (deff * deff);
    }
    return bound;
}

// ---------------------------------------------------------------- distances

Distance boundary_distance(const ArcSet& set, cplx z) {
    double r = std::abs(z);
    if (set.arcs().empty()) return {1.0 - r, 0.0};
    double t = turns_of(z);
    for (const auto& a : set.arcs()) {
        double d = circular_gap(a.start, t);
        if (r > 0.0 && d > 0.0 && d < a.length)
            return {std::min(std::abs(z - circle_point(a.start)), std::abs(z - circle_point(a.end()))),
                    0.0};
    }
    if (r == 0.0) return {1.0, 0.0};
    return {1.0 - r, 0.0};
}

Distance boundary_distance(const GapSchedule& s, cplx z) {
    double r = std::abs(z);
    if (r == 0.0) return {1.0, 0.0};
    double t = turns_of(z);
    double rel = circular_gap(s.base_start, t);
    if (rel > s.base_length)
        return {std::min(std::abs(z - circle_point(s.base_start)),
                         std::abs(z - circle_point(s.base_start + s.base_length))),
                0.0};
    double a = 0.0;
    for (int n = 1; n < 400; ++n) {
        double J = s.interval_length(n);
        double g = s.gap_length(n);
        if (rel > a + J && rel < a + J + g)
            return {std::min(std::abs(z - circle_point(s.base_start + a + J)),
                             std::abs(z - circle_point(s.base_start + a + J + g))),
                    0.0};
        if (rel >= a + J + g) a += J + g;
        if (J < 1e-16) return {1.0 - r, two_pi * J};
    }
    return {1.0 - r, 0.0};
}

Distance support_distance(const SingularMeasure& nu, cplx z) {
    Distance best{std::numeric_limits<double>::infinity(), 0.0};
    for (const auto& a : nu.atoms) {
        double d = std::abs(z - circle_point(a.position));
        if (d < best.value) best = {d, 0.0};
    }
    for (const auto& c : nu.components) {
        Distance d = boundary_distance(c.schedule, z);
        if (d.value < best.value) best = d;
    }
    return best;
}

}  // namespace ktheta
