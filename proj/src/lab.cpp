#include "ktheta/lab.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ktheta/bergman_lab.hpp"
#include "ktheta/smoothing_pipeline.hpp"

namespace ktheta::lab {

namespace {

const std::map<std::string, Kind> kinds = {
    {"ENTROPY", Kind::Entropy},           {"DECOMPOSE", Kind::Decompose},
    {"APPROX_KERNEL", Kind::ApproxKernel}, {"CYCLICITY", Kind::Cyclicity},
    {"PAIRING_CHECK", Kind::PairingCheck}, {"SMOOTHING_SUITE", Kind::SmoothingSuite},
};

bool power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

// shortest text that reads back to the same double
std::string exact(double x) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string integer(std::size_t x) { return std::to_string(x); }

// ---- parsing ----

void check_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) throw ConfigError(where + ": expected a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
        auto key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& where) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + ": cannot read value");
    }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
    if (auto n = parent[key]) out = scalar<T>(n, where + "." + key);
}

std::size_t count(const YAML::Node& n, const std::string& where) {
    long v = scalar<long>(n, where);
    if (v < 0) throw ConfigError(where + ": must be nonnegative");
    return std::size_t(v);
}

void read_count(const YAML::Node& parent, const char* key, std::size_t& out, const std::string& where) {
    if (auto n = parent[key]) out = count(n, where + "." + key);
}

// x or [re, im]
cplx complex_value(const YAML::Node& n, const std::string& where) {
    if (n.IsScalar()) return scalar<double>(n, where);
    if (n.IsSequence() && n.size() == 2)
        return {scalar<double>(n[0], where + "[0]"), scalar<double>(n[1], where + "[1]")};
    throw ConfigError(where + ": expected a number or [re, im]");
}

YAML::Node sequence(const YAML::Node& parent, const char* key, const std::string& where) {
    auto n = parent[key];
    if (n && !n.IsSequence()) throw ConfigError(where + "." + key + ": expected a list");
    return n;
}

std::vector<std::size_t> count_list(const YAML::Node& parent, const char* key, const std::string& where) {
    std::vector<std::size_t> out;
    auto n = sequence(parent, key, where);
    for (std::size_t i = 0; n && i < n.size(); ++i)
        out.push_back(count(n[i], where + "." + key + "[" + integer(i) + "]"));
    return out;
}

GapSchedule parse_schedule(const YAML::Node& n, const std::string& where, double* mass) {
    if (mass) check_keys(n, where, {"family", "param", "base_start", "base_length", "depth", "mass"});
    else check_keys(n, where, {"family", "param", "base_start", "base_length", "depth"});
    GapSchedule s;
    if (!n["family"]) throw ConfigError(where + ": missing family");
    try {
        s.family = parse_family(scalar<std::string>(n["family"], where + ".family"));
    } catch (const UnsupportedSchedule& e) {
        throw ConfigError(where + ".family: " + e.what());
    }
    if (!n["param"]) throw ConfigError(where + ": missing param");
    read(n, "param", s.param, where);
    read(n, "base_start", s.base_start, where);
    read(n, "base_length", s.base_length, where);
    read(n, "depth", s.depth, where);
    if (mass) {
        if (!n["mass"]) throw ConfigError(where + ": missing mass");
        read(n, "mass", *mass, where);
    }
    return s;
}

InnerSpec parse_inner(const YAML::Node& n, const std::string& where) {
    check_keys(n, where, {"name", "zeros", "atoms", "cantor"});
    InnerSpec s;
    s.name = "theta";
    read(n, "name", s.name, where);
    auto zeros = sequence(n, "zeros", where);
    for (std::size_t i = 0; zeros && i < zeros.size(); ++i)
        s.zeros.push_back(complex_value(zeros[i], where + ".zeros[" + integer(i) + "]"));
    auto atoms = sequence(n, "atoms", where);
    for (std::size_t i = 0; atoms && i < atoms.size(); ++i) {
        std::string w = where + ".atoms[" + integer(i) + "]";
        check_keys(atoms[i], w, {"position", "mass"});
        if (!atoms[i]["position"] || !atoms[i]["mass"]) throw ConfigError(w + ": needs position and mass");
        Atom a;
        read(atoms[i], "position", a.position, w);
        read(atoms[i], "mass", a.mass, w);
        s.measure.atoms.push_back(a);
    }
    auto cantor = sequence(n, "cantor", where);
    for (std::size_t i = 0; cantor && i < cantor.size(); ++i) {
        CantorComponent c;
        c.schedule = parse_schedule(cantor[i], where + ".cantor[" + integer(i) + "]", &c.mass);
        s.measure.components.push_back(c);
    }
    return s;
}

void emit_schedule(YAML::Emitter& e, const GapSchedule& s, const double* mass) {
    e << YAML::BeginMap << YAML::Key << "family" << YAML::Value << family_name(s.family);
    e << YAML::Key << "param" << YAML::Value << exact(s.param);
    e << YAML::Key << "base_start" << YAML::Value << exact(s.base_start);
    e << YAML::Key << "base_length" << YAML::Value << exact(s.base_length);
    e << YAML::Key << "depth" << YAML::Value << s.depth;
    if (mass) e << YAML::Key << "mass" << YAML::Value << exact(*mass);
    e << YAML::EndMap;
}

void emit_complex(YAML::Emitter& e, cplx z) {
    e << YAML::Flow << YAML::BeginSeq << exact(z.real()) << exact(z.imag()) << YAML::EndSeq;
}

void emit_inner(YAML::Emitter& e, const InnerSpec& s) {
    e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name;
    e << YAML::Key << "zeros" << YAML::Value << YAML::BeginSeq;
    for (auto z : s.zeros) emit_complex(e, z);
    e << YAML::EndSeq << YAML::Key << "atoms" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : s.measure.atoms)
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "position" << YAML::Value << exact(a.position)
          << YAML::Key << "mass" << YAML::Value << exact(a.mass) << YAML::EndMap;
    e << YAML::EndSeq << YAML::Key << "cantor" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : s.measure.components) emit_schedule(e, c.schedule, &c.mass);
    e << YAML::EndSeq << YAML::EndMap;
}

template <class T>
void emit_list(YAML::Emitter& e, const char* key, const std::vector<T>& v) {
    e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& x : v) e << x;
    e << YAML::EndSeq;
}

// ---- validation ----

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

ArcSet build_set(const ExperimentConfig& cfg) {
    try {
        if (cfg.points.empty()) return ArcSet::from_arcs(cfg.arcs);
        auto pts = ArcSet::from_points(cfg.points);
        return cfg.arcs.empty() ? pts : unite(pts, ArcSet::from_arcs(cfg.arcs));
    } catch (const Error& e) {
        throw ConfigError(std::string("set: ") + e.what());
    }
}

void validate_inner(const InnerSpec& s, const std::string& where) {
    for (auto z : s.zeros) require(std::abs(z) < 1.0, where + ": Blaschke zeros must lie in the open disc");
    try {
        s.measure.validate();
        BlaschkeProduct{s.zeros}.validate();
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// ---- computation ----

struct Block {
    Table table;
    std::vector<double> primary;  // one per row, compared across resolutions
    std::string quantity;
    std::vector<Series> series;
};

ExperimentConfig scaled(const ExperimentConfig& cfg, int s) {
    if (s == 1) return cfg;
    ExperimentConfig d = cfg;
    d.grid *= 2;
    d.fine_grid *= 2;
    d.radial *= 2;
    d.angular *= 2;
    if (d.obstruction) d.obstruction->grid *= 2;
    for (auto& sc : d.schedules) sc.depth = std::min(2 * sc.depth, 60);
    if (d.inner)
        for (auto& c : d.inner->measure.components) c.schedule.depth = std::min(2 * c.schedule.depth, 60);
    return d;
}

std::string resolution(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
    case Kind::Entropy:
    case Kind::Decompose: return "schedule depth d vs min(2d, 60)";
    case Kind::ApproxKernel:
    case Kind::SmoothingSuite:
        return "grid " + integer(cfg.grid) + " vs " + integer(2 * cfg.grid) + ", fine grid " +
               integer(cfg.fine_grid) + " vs " + integer(2 * cfg.fine_grid);
    case Kind::Cyclicity:
    case Kind::PairingCheck:
        return "quadrature " + std::to_string(cfg.radial) + "x" + std::to_string(cfg.angular) + " vs " +
               std::to_string(2 * cfg.radial) + "x" + std::to_string(2 * cfg.angular);
    }
    return {};
}

double entropy_value(const EntropyReport& r) {
    return r.converges ? r.partial_sum + r.tail_bound : std::numeric_limits<double>::infinity();
}

std::vector<Block> run_entropy(const ExperimentConfig& cfg) {
    Block b;
    b.quantity = "entropy";
    b.table.file = "entropy.csv";
    b.table.header = {"item", "family", "param", "entropy", "partial_sum", "tail_bound",
                      "depth", "converges", "is_bc", "divergence_witness"};
    if (!cfg.points.empty() || !cfg.arcs.empty()) {
        auto set = build_set(cfg);
        auto cert = is_beurling_carleson(set);
        double e = entropy(set);
        b.table.rows.push_back({"set", "SET", "nan", fmt(e), fmt(e), fmt(0.0), "0", "1", cert.is_bc ? "1" : "0", "nan"});
        b.primary.push_back(e);
    }
    for (std::size_t i = 0; i < cfg.schedules.size(); ++i) {
        const auto& s = cfg.schedules[i];
        auto cert = is_beurling_carleson(s);
        const auto& r = cert.entropy;
        b.table.rows.push_back({"schedule_" + integer(i), family_name(s.family), fmt(s.param), fmt(entropy_value(r)),
                                fmt(r.partial_sum), fmt(r.tail_bound), std::to_string(r.depth),
                                r.converges ? "1" : "0", cert.is_bc ? "1" : "0",
                                r.converges ? "nan" : fmt(r.divergence_witness)});
        b.primary.push_back(entropy_value(r));
        Series ser{"entropy_schedule_" + integer(i) + ".dat", "depth", "partial_sum", {}};
        for (int d = 1; d <= s.depth; ++d) {
            GapSchedule t = s;
            t.depth = d;
            ser.points.push_back({double(d), entropy(t).partial_sum});
        }
        b.series.push_back(std::move(ser));
    }
    return {std::move(b)};
}

std::vector<Block> run_decompose(const ExperimentConfig& cfg) {
    const auto& nu = cfg.inner->measure;
    auto d = decompose(nu);
    Block b;
    b.quantity = "entropy";
    b.table.file = "decompose.csv";
    b.table.header = {"part", "item", "family", "param", "mass", "entropy", "is_bc"};
    auto add_part = [&](const char* part, const SingularMeasure& m) {
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            b.table.rows.push_back({part, "atom_" + integer(i), "ATOM", fmt(m.atoms[i].position),
                                    fmt(m.atoms[i].mass), fmt(0.0), "1"});
            b.primary.push_back(0.0);
        }
        for (std::size_t i = 0; i < m.components.size(); ++i) {
            const auto& c = m.components[i];
            auto cert = is_beurling_carleson(c.schedule);
            double e = entropy_value(cert.entropy);
            b.table.rows.push_back({part, "cantor_" + integer(i), family_name(c.schedule.family),
                                    fmt(c.schedule.param), fmt(c.mass), fmt(e), cert.is_bc ? "1" : "0"});
            b.primary.push_back(e);
        }
    };
    add_part("C", d.nu_C);
    add_part("K", d.nu_K);
    for (auto [item, m] : {std::pair{"input", nu.total_mass()}, std::pair{"nu_C", d.nu_C.total_mass()},
                           std::pair{"nu_K", d.nu_K.total_mass()}}) {
        b.table.rows.push_back({"total", item, "nan", "nan", fmt(m), "nan", "nan"});
        b.primary.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    Series w{"witness_mass.dat", "witness_index", "nu_C_mass", {}};
    for (std::size_t i = 0; i < d.witness_mass.size(); ++i) w.points.push_back({double(i + 1), d.witness_mass[i]});
    b.series.push_back(std::move(w));
    return {std::move(b)};
}

PipelineOptions pipeline(const ExperimentConfig& cfg) {
    PipelineOptions o;
    o.alpha = cfg.alpha;
    o.c = cfg.c;
    o.cutoff_exponent = cfg.cutoff_exponent;
    o.grid = cfg.grid;
    o.fine_grid = cfg.fine_grid;
    o.kmin = cfg.kmin;
    return o;
}

std::vector<Block> run_approx(const ExperimentConfig& cfg, std::vector<std::string>& warn) {
    auto theta = cfg.inner->build();
    auto opt = pipeline(cfg);
    Block b;
    b.quantity = "h2_error";
    b.table.file = "approx_kernel.csv";
    b.table.header = {"n", "lambda_re", "lambda_im", "h2_error", "membership_residual", "decay_exponent",
                      "raw_decay_exponent", "dominating_norm", "weight_integral", "kernel_norm"};
    if (cfg.n_list.empty()) warn.push_back("n list is empty; the table has no rows");
    if (cfg.lambdas.empty()) warn.push_back("lambda list is empty; the table has no rows");
    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
        cplx lam = cfg.lambdas[li];
        Series ser{"h2_error_lambda_" + integer(li) + ".dat", "n", "h2_error", {}};
        double prev = std::numeric_limits<double>::infinity();
        for (auto n : cfg.n_list) {
            auto a = approximate_kernel(theta, lam, n, opt);
            b.table.rows.push_back({integer(n), fmt(lam.real()), fmt(lam.imag()), fmt(a.h2_error),
                                    fmt(a.membership_residual), fmt(a.decay.exponent), fmt(a.raw_decay.exponent),
                                    fmt(a.dominating_norm), fmt(a.weight_integral), fmt(a.kernel_norm)});
            b.primary.push_back(a.h2_error);
            ser.points.push_back({double(n), a.h2_error});
            if (a.short_circuit) warn.push_back("lambda " + integer(li) + ": trivial singular part, no smoothing applied");
            if (!(a.h2_error < prev) && !a.short_circuit)
                warn.push_back("lambda " + integer(li) + ": h2 error not decreasing at n = " + integer(n));
            prev = a.h2_error;
        }
        b.series.push_back(std::move(ser));
    }
    return {std::move(b)};
}

std::vector<Block> run_cyclicity(const ExperimentConfig& cfg, std::vector<std::string>& warn) {
    DiscQuadrature q(cfg.radial, cfg.angular);
    Block b;
    b.quantity = "distance";
    b.table.file = "cyclicity.csv";
    b.table.header = {"function", "degree", "distance", "condition", "regularized"};
    if (cfg.degrees.empty()) warn.push_back("degree list is empty; the table has no rows");
    std::map<std::string, InnerFunction> built;
    for (const auto& f : cfg.functions) {
        auto theta = built.emplace(f.name, f.build()).first->second;
        Series ser{"cyclicity_" + f.name + ".dat", "degree", "distance", {}};
        for (const auto& r : cyclicity_sweep(theta, cfg.degrees, q)) {
            b.table.rows.push_back({f.name, integer(r.degree), fmt(r.distance), fmt(r.condition), r.regularized ? "1" : "0"});
            b.primary.push_back(r.distance);
            ser.points.push_back({double(r.degree), r.distance});
            if (r.regularized)
                warn.push_back(f.name + ": Gram matrix regularized at degree " + integer(r.degree) +
                               " (condition " + fmt(r.condition) + ")");
        }
        b.series.push_back(std::move(ser));
    }
    std::vector<Block> out{std::move(b)};
    if (!cfg.obstruction) return out;

    const auto& ob = *cfg.obstruction;
    CircleGrid grid(ob.grid);
    GridFunction one(grid);
    for (auto& v : one.values) v = 1.0;
    InnerFunction theta_c = ob.theta_c ? ob.theta_c->build() : InnerFunction{};
    auto sweep = obstruction_sweep(theta_c, built.at(ob.theta), DiscFunction::polynomial({1.0}), one, ob.degrees,
                                   2.0, q);
    Block o;
    o.quantity = "pairing_abs";
    o.table.file = "obstruction.csv";
    o.table.header = {"degree", "pairing_re", "pairing_im", "pairing_abs", "boundary_re", "boundary_im", "ratio"};
    Series ser{"obstruction.dat", "degree", "pairing_abs", {}};
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : sweep) {
        const auto& v = s.value;
        o.table.rows.push_back({integer(s.degree), fmt(v.pairing.real()), fmt(v.pairing.imag()), fmt(std::abs(v.pairing)),
                                fmt(v.boundary.real()), fmt(v.boundary.imag()), fmt(v.ratio)});
        o.primary.push_back(std::abs(v.pairing));
        ser.points.push_back({double(s.degree), std::abs(v.pairing)});
        if (!(std::abs(v.pairing) < prev))
            warn.push_back("obstruction pairing not decreasing at degree " + integer(s.degree));
        prev = std::abs(v.pairing);
    }
    o.series.push_back(std::move(ser));
    out.push_back(std::move(o));
    return out;
}

std::vector<Block> run_pairing(const ExperimentConfig& cfg) {
    DiscQuadrature q(cfg.radial, cfg.angular);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<std::size_t> deg(0, cfg.max_degree);
    auto poly = [&](std::size_t d) {
        std::vector<cplx> c(d + 1);
        for (auto& x : c) {
            double re = g(rng);
            x = cplx(re, g(rng));
        }
        return c;
    };
    Block b;
    b.quantity = "rhs_abs";
    b.table.file = "pairing_check.csv";
    b.table.header = {"pair", "deg_f", "deg_g", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap", "ratio"};
    Series ser{"pairing_gap.dat", "pair", "gap", {}};
    auto add = [&](std::size_t i, const std::vector<cplx>& f, const std::vector<cplx>& h) {
        auto r = cauchy_pairing_disc(DiscFunction::polynomial(f), DiscFunction::polynomial(h), cfg.p, q);
        b.table.rows.push_back({integer(i), integer(f.size() - 1), integer(h.size() - 1), fmt(r.lhs.real()),
                                fmt(r.lhs.imag()), fmt(r.rhs.real()), fmt(r.rhs.imag()), fmt(r.gap), fmt(r.ratio)});
        b.primary.push_back(std::abs(r.rhs));
        ser.points.push_back({double(i), r.gap});
    };
    add(0, {0.0, 1.0}, {0.0, 1.0});
    for (std::size_t i = 1; i <= cfg.pairs; ++i) {
        auto df = deg(rng);
        auto f = poly(df);
        auto dh = deg(rng);
        add(i, f, poly(dh));
    }
    b.series.push_back(std::move(ser));
    return {std::move(b)};
}

std::vector<Block> run_smoothing(const ExperimentConfig& cfg, std::vector<std::string>& warn) {
    SmoothingSequence seq{build_profile(build_set(cfg), cfg.alpha, cfg.c), {cfg.cutoff_exponent}, cfg.fine_grid};
    const double total = seq.profile.integral();
    CircleGrid grid(cfg.grid);
    Block b;
    b.quantity = "median_abs_minus_one";
    b.table.file = "smoothing_suite.csv";
    b.table.header = {"n", "weight_integral", "weight_ratio", "sup_abs", "median_abs_minus_one",
                      "abs_value_at_zero", "singular_nodes"};
    if (cfg.n_list.empty()) warn.push_back("n list is empty; the table has no rows");
    Series med{"median.dat", "n", "median_abs_minus_one", {}}, wt{"weight_integral.dat", "n", "weight_integral", {}};
    double prev_w = std::numeric_limits<double>::infinity(), prev_m = prev_w;
    for (auto n : cfg.n_list) {
        auto r = smoothing_function(seq, n, grid);
        b.table.rows.push_back({integer(n), fmt(r.weight_integral), fmt(r.weight_integral / total), fmt(r.sup_abs),
                                fmt(r.median_abs_minus_one), fmt(std::abs(r.value_at_zero)),
                                integer(r.singular_nodes.size())});
        b.primary.push_back(r.median_abs_minus_one);
        med.points.push_back({double(n), r.median_abs_minus_one});
        wt.points.push_back({double(n), r.weight_integral});
        if (!r.singular_nodes.empty())
            warn.push_back("grid collision at n = " + integer(n) + ": " + integer(r.singular_nodes.size()) +
                           " node(s) on E where H_n = 0");
        if (r.weight_integral > prev_w) warn.push_back("weight integral increased at n = " + integer(n));
        if (!(r.median_abs_minus_one < prev_m)) warn.push_back("median |H_n - 1| not decreasing at n = " + integer(n));
        prev_w = r.weight_integral;
        prev_m = r.median_abs_minus_one;
    }
    b.series.push_back(std::move(med));
    b.series.push_back(std::move(wt));
    return {std::move(b)};
}

std::vector<Block> compute(const ExperimentConfig& cfg, std::vector<std::string>& warn) {
    switch (cfg.kind) {
    case Kind::Entropy: return run_entropy(cfg);
    case Kind::Decompose: return run_decompose(cfg);
    case Kind::ApproxKernel: return run_approx(cfg, warn);
    case Kind::Cyclicity: return run_cyclicity(cfg, warn);
    case Kind::PairingCheck: return run_pairing(cfg);
    case Kind::SmoothingSuite: return run_smoothing(cfg, warn);
    }
    return {};
}

double delta(double a, double b) {
    // rows without a compared value carry nan at both resolutions
    if (std::isnan(a) && std::isnan(b)) return 0.0;
    if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)) return 0.0;
    double d = std::abs(a - b);
    return std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

Kind parse_kind(const std::string& tag) {
    auto it = kinds.find(tag);
    if (it == kinds.end()) throw ConfigError("kind: unknown experiment kind '" + tag + "'");
    return it->second;
}

std::string kind_name(Kind k) {
    for (const auto& [name, v] : kinds)
        if (v == k) return name;
    return {};
}

InnerFunction InnerSpec::build() const { return {BlaschkeProduct{zeros}, SingularInner(measure)}; }

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return buf;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("yaml: ") + e.what());
    }
    const std::string w = "config";
    check_keys(root, w,
               {"kind", "name", "seed", "set", "schedules", "inner", "functions", "grid", "fine_grid", "quadrature",
                "profile", "kmin", "n", "lambda", "degrees", "pairing", "obstruction", "tolerances"});
    ExperimentConfig c;
    if (!root["kind"]) throw ConfigError("kind: missing");
    c.kind = parse_kind(scalar<std::string>(root["kind"], "kind"));
    read(root, "name", c.name, w);
    read(root, "seed", c.seed, w);
    if (auto s = root["set"]) {
        check_keys(s, "set", {"points", "arcs"});
        auto pts = sequence(s, "points", "set");
        for (std::size_t i = 0; pts && i < pts.size(); ++i)
            c.points.push_back(scalar<double>(pts[i], "set.points[" + integer(i) + "]"));
        auto arcs = sequence(s, "arcs", "set");
        for (std::size_t i = 0; arcs && i < arcs.size(); ++i) {
            std::string at = "set.arcs[" + integer(i) + "]";
            if (!arcs[i].IsSequence() || arcs[i].size() != 2) throw ConfigError(at + ": expected [start, length]");
            c.arcs.push_back({scalar<double>(arcs[i][0], at), scalar<double>(arcs[i][1], at)});
        }
    }
    auto sch = sequence(root, "schedules", w);
    for (std::size_t i = 0; sch && i < sch.size(); ++i)
        c.schedules.push_back(parse_schedule(sch[i], "schedules[" + integer(i) + "]", nullptr));
    if (auto in = root["inner"]) c.inner = parse_inner(in, "inner");
    auto fns = sequence(root, "functions", w);
    for (std::size_t i = 0; fns && i < fns.size(); ++i) {
        c.functions.push_back(parse_inner(fns[i], "functions[" + integer(i) + "]"));
        if (!fns[i]["name"]) c.functions.back().name = "f" + integer(i);
    }
    read_count(root, "grid", c.grid, w);
    read_count(root, "fine_grid", c.fine_grid, w);
    if (auto q = root["quadrature"]) {
        check_keys(q, "quadrature", {"radial", "angular"});
        read(q, "radial", c.radial, "quadrature");
        read(q, "angular", c.angular, "quadrature");
    }
    if (auto p = root["profile"]) {
        check_keys(p, "profile", {"alpha", "c", "cutoff_exponent"});
        read(p, "alpha", c.alpha, "profile");
        read(p, "c", c.c, "profile");
        read(p, "cutoff_exponent", c.cutoff_exponent, "profile");
    }
    read_count(root, "kmin", c.kmin, w);
    c.n_list = count_list(root, "n", w);
    auto lam = sequence(root, "lambda", w);
    for (std::size_t i = 0; lam && i < lam.size(); ++i)
        c.lambdas.push_back(complex_value(lam[i], "lambda[" + integer(i) + "]"));
    c.degrees = count_list(root, "degrees", w);
    if (auto p = root["pairing"]) {
        check_keys(p, "pairing", {"pairs", "max_degree", "p"});
        read_count(p, "pairs", c.pairs, "pairing");
        read_count(p, "max_degree", c.max_degree, "pairing");
        read(p, "p", c.p, "pairing");
    }
    if (auto o = root["obstruction"]) {
        check_keys(o, "obstruction", {"theta", "theta_c", "degrees", "grid"});
        ObstructionSpec s;
        if (!o["theta"]) throw ConfigError("obstruction: missing theta");
        read(o, "theta", s.theta, "obstruction");
        if (auto tc = o["theta_c"]) s.theta_c = parse_inner(tc, "obstruction.theta_c");
        s.degrees = count_list(o, "degrees", "obstruction");
        read_count(o, "grid", s.grid, "obstruction");
        c.obstruction = s;
    }
    if (auto t = root["tolerances"]) {
        check_keys(t, "tolerances", {"selfconv_rel", "selfconv_abs"});
        read(t, "selfconv_rel", c.selfconv_rel, "tolerances");
        read(t, "selfconv_abs", c.selfconv_abs, "tolerances");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    require(power_of_two(c.grid) && c.grid >= 16, "grid: must be a power of two >= 16");
    require(power_of_two(c.fine_grid) && c.fine_grid >= c.grid, "fine_grid: must be a power of two >= grid");
    require(c.radial >= 1 && c.radial <= 4096, "quadrature.radial: must lie in [1, 4096]");
    require(c.angular >= 8 && power_of_two(std::size_t(c.angular)), "quadrature.angular: must be a power of two >= 8");
    require(c.alpha > 0.0 && std::isfinite(c.alpha), "profile.alpha: must be positive");
    require(c.c > 0.0 && std::isfinite(c.c), "profile.c: must be positive");
    require(c.cutoff_exponent >= 1.0 && std::isfinite(c.cutoff_exponent), "profile.cutoff_exponent: must be >= 1");
    require(c.kmin >= 1 && 4 * c.kmin < c.grid, "kmin: must be >= 1 and below grid / 4");
    require(c.selfconv_rel >= 0.0 && c.selfconv_abs >= 0.0, "tolerances: must be nonnegative");
    for (double t : c.points) require(std::isfinite(t), "set.points: must be finite");
    for (const auto& a : c.arcs) require(a.length > 0.0 && a.length <= 1.0, "set.arcs: lengths must lie in (0, 1]");
    for (std::size_t i = 0; i < c.schedules.size(); ++i) {
        try {
            c.schedules[i].validate();
        } catch (const Error& e) {
            throw ConfigError("schedules[" + integer(i) + "]: " + e.what());
        }
    }
    if (c.inner) validate_inner(*c.inner, "inner");
    std::set<std::string> names;
    for (const auto& f : c.functions) {
        validate_inner(f, "functions." + f.name);
        require(names.insert(f.name).second, "functions: duplicate name '" + f.name + "'");
    }

    const bool has_set = !c.points.empty() || !c.arcs.empty();
    if (has_set) build_set(c);
    switch (c.kind) {
    case Kind::Entropy:
        require(has_set || !c.schedules.empty(), "ENTROPY needs a set or schedules");
        break;
    case Kind::Decompose:
        require(c.inner.has_value(), "DECOMPOSE needs inner");
        break;
    case Kind::ApproxKernel:
        require(c.inner.has_value(), "APPROX_KERNEL needs inner");
        for (auto l : c.lambdas) require(std::abs(l) < 1.0, "lambda: points must lie in the open disc");
        break;
    case Kind::Cyclicity:
        require(!c.functions.empty(), "CYCLICITY needs functions");
        if (c.obstruction) {
            require(names.count(c.obstruction->theta) == 1, "obstruction.theta: no function named '" + c.obstruction->theta + "'");
            require(power_of_two(c.obstruction->grid) && c.obstruction->grid >= 16,
                    "obstruction.grid: must be a power of two >= 16");
            for (auto d : c.obstruction->degrees)
                require(d < c.obstruction->grid / 2, "obstruction.degrees: must be below grid / 2");
            if (c.obstruction->theta_c) validate_inner(*c.obstruction->theta_c, "obstruction.theta_c");
        }
        break;
    case Kind::PairingCheck:
        require(c.p > 1.0, "pairing.p: must exceed 1");
        require(c.max_degree <= 64, "pairing.max_degree: must be <= 64");
        break;
    case Kind::SmoothingSuite:
        require(has_set, "SMOOTHING_SUITE needs a set");
        require(c.arcs.empty() || build_set(c).measure_zero(), "set: must have measure zero");
        break;
    }
}

std::string to_yaml(const ExperimentConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << kind_name(c.kind);
    e << YAML::Key << "name" << YAML::Value << c.name;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "set" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "points" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double t : c.points) e << exact(t);
    e << YAML::EndSeq << YAML::Key << "arcs" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : c.arcs) e << YAML::Flow << YAML::BeginSeq << exact(a.start) << exact(a.length) << YAML::EndSeq;
    e << YAML::EndSeq << YAML::EndMap;
    e << YAML::Key << "schedules" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.schedules) emit_schedule(e, s, nullptr);
    e << YAML::EndSeq;
    if (c.inner) {
        e << YAML::Key << "inner" << YAML::Value;
        emit_inner(e, *c.inner);
    }
    e << YAML::Key << "functions" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : c.functions) emit_inner(e, f);
    e << YAML::EndSeq;
    e << YAML::Key << "grid" << YAML::Value << c.grid;
    e << YAML::Key << "fine_grid" << YAML::Value << c.fine_grid;
    e << YAML::Key << "quadrature" << YAML::Value << YAML::BeginMap << YAML::Key << "radial" << YAML::Value << c.radial
      << YAML::Key << "angular" << YAML::Value << c.angular << YAML::EndMap;
    e << YAML::Key << "profile" << YAML::Value << YAML::BeginMap << YAML::Key << "alpha" << YAML::Value << exact(c.alpha)
      << YAML::Key << "c" << YAML::Value << exact(c.c) << YAML::Key << "cutoff_exponent" << YAML::Value
      << exact(c.cutoff_exponent) << YAML::EndMap;
    e << YAML::Key << "kmin" << YAML::Value << c.kmin;
    emit_list(e, "n", c.n_list);
    e << YAML::Key << "lambda" << YAML::Value << YAML::BeginSeq;
    for (auto l : c.lambdas) emit_complex(e, l);
    e << YAML::EndSeq;
    emit_list(e, "degrees", c.degrees);
    e << YAML::Key << "pairing" << YAML::Value << YAML::BeginMap << YAML::Key << "pairs" << YAML::Value << c.pairs
      << YAML::Key << "max_degree" << YAML::Value << c.max_degree << YAML::Key << "p" << YAML::Value << exact(c.p)
      << YAML::EndMap;
    if (c.obstruction) {
        const auto& o = *c.obstruction;
        e << YAML::Key << "obstruction" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "theta" << YAML::Value << o.theta;
        if (o.theta_c) {
            e << YAML::Key << "theta_c" << YAML::Value;
            emit_inner(e, *o.theta_c);
        }
        emit_list(e, "degrees", o.degrees);
        e << YAML::Key << "grid" << YAML::Value << o.grid << YAML::EndMap;
    }
    e << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap << YAML::Key << "selfconv_rel" << YAML::Value
      << exact(c.selfconv_rel) << YAML::Key << "selfconv_abs" << YAML::Value << exact(c.selfconv_abs) << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string Table::csv() const {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    }
    return s;
}

std::string Series::dat() const {
    std::string s = "# " + x + " " + y + "\n";
    for (auto [a, b] : points) s += fmt(a) + " " + fmt(b) + "\n";
    return s;
}

RunResult run(ExperimentConfig cfg, const RunOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (opt.grid_override) {
        cfg.grid = *opt.grid_override;
        cfg.fine_grid = std::max(cfg.fine_grid, cfg.grid);
    }
    if (opt.seed) cfg.seed = *opt.seed;
    validate(cfg);

    RunResult r;
    r.manifest.config_echo = to_yaml(cfg);
    r.manifest.verify = opt.verify;
    auto blocks = compute(cfg, r.manifest.warnings);
    std::vector<Block> fine;
    if (opt.verify) {
        std::vector<std::string> ignored;
        fine = compute(scaled(cfg, 2), ignored);
    }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        auto& b = blocks[bi];
        b.table.header.push_back("selfconv_delta");
        SelfConvergence sc{b.table.file, b.quantity, resolution(cfg)};
        for (std::size_t i = 0; i < b.table.rows.size(); ++i) {
            if (!opt.verify) {
                b.table.rows[i].push_back("nan");
                continue;
            }
            double d = delta(b.primary[i], fine[bi].primary.at(i));
            b.table.rows[i].push_back(fmt(d));
            double allowed = std::isnan(b.primary[i]) ? cfg.selfconv_abs
                                                      : std::max(cfg.selfconv_rel * std::abs(b.primary[i]), cfg.selfconv_abs);
            if (std::isinf(b.primary[i])) allowed = 0.0;
            sc.max_delta = std::max(sc.max_delta, d);
            double excess = d == 0.0 ? 0.0 : d / allowed;
            sc.max_excess = std::max(sc.max_excess, excess);
        }
        if (opt.verify) {
            sc.within = sc.max_excess <= 1.0;
            if (!sc.within)
                r.manifest.warnings.push_back(b.table.file + ": self-convergence delta exceeds tolerance (ratio " +
                                              fmt(sc.max_excess) + ")");
            r.manifest.selfconv.push_back(sc);
        }
        r.manifest.files.push_back(b.table.file);
        for (auto& s : b.series) {
            r.manifest.files.push_back(s.file);
            r.series.push_back(std::move(s));
        }
        r.tables.push_back(std::move(b.table));
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

void emit_report(const RunResult& r, const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    for (const auto& t : r.tables) write_file(out / t.file, t.csv());
    for (const auto& s : r.series) write_file(out / s.file, s.dat());

    const auto& m = r.manifest;
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "artifact" << YAML::Value << "ktheta-lab";
    e << YAML::Key << "version" << YAML::Value << artifact_version;
    e << YAML::Key << "config" << YAML::Value << YAML::Load(m.config_echo);
    e << YAML::Key << "verify" << YAML::Value << m.verify;
    e << YAML::Key << "timing" << YAML::Value << "timing.yaml";
    e << YAML::Key << "tables" << YAML::Value << YAML::BeginSeq;
    for (const auto& t : r.tables) {
        e << YAML::BeginMap << YAML::Key << "file" << YAML::Value << t.file;
        e << YAML::Key << "columns" << YAML::Value << YAML::Flow << t.header;
        e << YAML::Key << "rows" << YAML::Value << t.rows.size() << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "series" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : r.series)
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "file" << YAML::Value << s.file << YAML::Key << "x"
          << YAML::Value << s.x << YAML::Key << "y" << YAML::Value << s.y << YAML::EndMap;
    e << YAML::EndSeq;
    e << YAML::Key << "selfconvergence" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : m.selfconv) {
        e << YAML::BeginMap << YAML::Key << "table" << YAML::Value << s.table;
        e << YAML::Key << "quantity" << YAML::Value << s.quantity;
        e << YAML::Key << "resolution" << YAML::Value << s.resolution;
        e << YAML::Key << "max_delta" << YAML::Value << fmt(s.max_delta);
        e << YAML::Key << "max_excess" << YAML::Value << fmt(s.max_excess);
        e << YAML::Key << "within_tolerance" << YAML::Value << s.within << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : m.warnings) e << w;
    e << YAML::EndSeq;
    e << YAML::Key << "files" << YAML::Value << m.files;
    e << YAML::EndMap;
    write_file(out / "manifest.yaml", std::string(e.c_str()) + "\n");

    char buf[64];
    std::snprintf(buf, sizeof buf, "wall_seconds: %.3f\n", r.seconds);
    write_file(out / "timing.yaml", buf);
}

int run_cli(const std::filesystem::path& config, const std::filesystem::path& out, const RunOptions& opt) {
    int code = Ok;
    std::string kind, message;
    try {
        emit_report(run(load_config(config), opt), out);
        return Ok;
    } catch (const ConfigError& e) {
        code = ConfigFailure, kind = e.kind(), message = e.what();
    } catch (const HypothesisViolation& e) {
        code = Hypothesis, kind = e.kind(), message = e.what();
    } catch (const IoError& e) {
        code = IoFailure, kind = e.kind(), message = e.what();
    } catch (const Error& e) {
        code = ModuleFailure, kind = e.kind(), message = e.what();
    } catch (const std::exception& e) {
        code = ModuleFailure, kind = "internal", message = e.what();
    }
    std::fprintf(stderr, "ktheta_lab: %s: %s\n", kind.c_str(), message.c_str());
    YAML::Emitter e;
    e << YAML::BeginMap << YAML::Key << "status" << YAML::Value << code;
    e << YAML::Key << "error" << YAML::Value << kind;
    e << YAML::Key << "message" << YAML::Value << message;
    e << YAML::Key << "config" << YAML::Value << config.string() << YAML::EndMap;
    try {
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        write_file(out / "error.yaml", std::string(e.c_str()) + "\n");
    } catch (const IoError& io) {
        std::fprintf(stderr, "ktheta_lab: %s\n", io.what());
    }
    return code;
}

}  // namespace ktheta::lab
