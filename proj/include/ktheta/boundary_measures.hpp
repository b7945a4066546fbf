#pragma once

#include <string>
#include <vector>

#include "ktheta/common.hpp"

namespace ktheta {

// open arc (start, start + length) in turns
struct Arc {
    double start = 0.0;
    double length = 0.0;
    double end() const { return start + length; }
};

// closed set E stored as its complementary open arcs
class ArcSet {
public:
    ArcSet() = default;
    // arcs must be pairwise disjoint; they are wrapped and sorted by start
    static ArcSet from_arcs(std::vector<Arc> arcs);
    // complement of a finite point set
    static ArcSet from_points(std::vector<double> points);

    const std::vector<Arc>& arcs() const { return arcs_; }
    double total_length() const;
    bool measure_zero(double tol = 1e-12) const;
    bool contains(double t) const;  // t in E

private:
    std::vector<Arc> arcs_;
};

// sorts, wraps and merges overlapping arcs
std::vector<Arc> canonicalize(std::vector<Arc> arcs);
// E1 ∪ E2: the complement is the intersection of the arc families
ArcSet unite(const ArcSet& a, const ArcSet& b);

enum class ScheduleFamily { Geometric, Polylog };

ScheduleFamily parse_family(const std::string& tag);
std::string family_name(ScheduleFamily f);

// Cantor-type construction inside a base arc. Level n has 2^(n-1) gaps of length
// gap_length(n); interval_length(n) is the length J_n of each of the 2^n level-n
// intervals, J_0 = base_length and J_{n-1} = 2 J_n + gap_length(n).
//   Geometric: gap = c r^n, 0 < r < 1/2
//   Polylog:   gap = c / (2^n n^(1+beta)), beta > 0
struct GapSchedule {
    ScheduleFamily family = ScheduleFamily::Geometric;
    double param = 1.0 / 3.0;  // r or beta
    double base_start = 0.0;
    double base_length = 1.0;
    int depth = 12;

    static GapSchedule geometric(double r, double base_start = 0.0, double base_length = 1.0,
                                 int depth = 12);
    static GapSchedule polylog(double beta, double base_start = 0.0, double base_length = 1.0,
                               int depth = 12);

    void validate() const;
    double c() const;
    double gap_length(int n) const;
    double interval_length(int n) const;
    // distance between the two children centers of a level-(n-1) interval
    double center_spacing(int n) const { return interval_length(n) + gap_length(n); }
    // left endpoints (turns, unwrapped from base_start) of the 2^n level-n intervals
    std::vector<double> level_left_endpoints(int n) const;
    bool contains(double t) const;
};

struct EntropyReport {
    double partial_sum = 0.0;  // through level `depth`, outer arc included
    double tail_bound = 0.0;   // upper bound on the remaining levels (exact for Geometric)
    int depth = 0;
    bool converges = true;
    double divergence_witness = 0.0;  // lower bound on the partial sum when divergent
};

double entropy(const ArcSet& set);
EntropyReport entropy(const GapSchedule& s);

struct BcCertificate {
    bool is_bc = false;
    std::string kind;
    EntropyReport entropy;
    std::string describe() const;
};

BcCertificate is_beurling_carleson(const ArcSet& set);
BcCertificate is_beurling_carleson(const GapSchedule& s);

struct Atom {
    double position = 0.0;
    double mass = 0.0;
};

// equidistributed Cantor measure on the support of the schedule
struct CantorComponent {
    GapSchedule schedule;
    double mass = 0.0;
};

struct SingularMeasure {
    std::vector<Atom> atoms;
    std::vector<CantorComponent> components;

    void validate() const;
    double total_mass() const;
    bool empty() const { return atoms.empty() && components.empty(); }
    // nu^(k) = ∫ exp(-2 pi i k t) dnu(t), k = 0..count-1
    std::vector<cplx> fourier(std::size_t count) const;
};

cplx cantor_fourier(const CantorComponent& comp, long k);

struct Decomposition {
    SingularMeasure nu_C;
    SingularMeasure nu_K;
    std::vector<BcCertificate> certificates;  // one per input component, input order
    // nu_C(E_n) for the increasing witness sets E_1 ⊆ E_2 ⊆ ...; items are the atoms of
    // nu_C in order followed by its components
    std::vector<double> witness_mass;
};

Decomposition decompose(const SingularMeasure& nu);

struct DiscretizedMeasure {
    SingularMeasure atomic;
    int level = 0;
    std::vector<CantorComponent> sources;
    // bound on |S_nu(z) - S_atomic(z)|
    double error_bound(cplx z) const;
};

DiscretizedMeasure discretize(const SingularMeasure& nu, int level);

struct Distance {
    double value = 0.0;
    double truncation = 0.0;  // true distance lies in [value, value + truncation]
};

Distance boundary_distance(const ArcSet& set, cplx z);
Distance boundary_distance(const GapSchedule& s, cplx z);
Distance support_distance(const SingularMeasure& nu, cplx z);

}  // namespace ktheta
