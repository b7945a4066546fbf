#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ktheta/boundary_measures.hpp"
#include "ktheta/inner_functions.hpp"

namespace ktheta::lab {

inline constexpr const char* artifact_version = "0.1.0";

struct IoError : Error {
    explicit IoError(const std::string& w) : Error("io", w) {}
};

enum class Kind { Entropy, Decompose, ApproxKernel, Cyclicity, PairingCheck, SmoothingSuite };

Kind parse_kind(const std::string& tag);
std::string kind_name(Kind k);

// Blaschke zeros plus a singular measure; the name labels table rows
struct InnerSpec {
    std::string name;
    std::vector<cplx> zeros;
    SingularMeasure measure;

    InnerFunction build() const;
};

struct ObstructionSpec {
    std::string theta;             // name of an entry of `functions`
    std::optional<InnerSpec> theta_c;
    std::vector<std::size_t> degrees;
    std::size_t grid = 16384;
};

struct ExperimentConfig {
    Kind kind = Kind::Entropy;
    std::string name = "experiment";
    std::uint64_t seed = 0;

    // the closed set E, as points and complementary arcs
    std::vector<double> points;
    std::vector<Arc> arcs;
    std::vector<GapSchedule> schedules;
    std::optional<InnerSpec> inner;
    std::vector<InnerSpec> functions;

    std::size_t grid = 16384;
    std::size_t fine_grid = std::size_t(1) << 21;
    int radial = 64;
    int angular = 512;

    double alpha = 3.0;
    double c = 0.01;
    double cutoff_exponent = 3.0;
    std::size_t kmin = 16;

    std::vector<std::size_t> n_list;
    std::vector<cplx> lambdas;
    std::vector<std::size_t> degrees;

    std::size_t pairs = 50;
    std::size_t max_degree = 8;
    double p = 2.0;

    std::optional<ObstructionSpec> obstruction;

    // relative self-convergence tolerance and its absolute floor
    double selfconv_rel = 0.1;
    double selfconv_abs = 1e-8;
};

// throws ConfigError with the offending key
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// module preconditions, checked before any computation
void validate(const ExperimentConfig& cfg);
std::string to_yaml(const ExperimentConfig& cfg);

struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string csv() const;
};

struct Series {
    std::string file;
    std::string x, y;
    std::vector<std::pair<double, double>> points;
    std::string dat() const;
};

struct SelfConvergence {
    std::string table;
    std::string quantity;
    std::string resolution;  // what was doubled
    double max_delta = 0.0;
    double max_excess = 0.0;  // max of delta / max(rel |value|, abs); <= 1 passes
    bool within = true;
};

struct RunManifest {
    std::string config_echo;
    bool verify = false;
    std::vector<SelfConvergence> selfconv;
    std::vector<std::string> warnings;
    std::vector<std::string> files;
};

struct RunResult {
    RunManifest manifest;
    std::vector<Table> tables;
    std::vector<Series> series;
    double seconds = 0.0;
};

struct RunOptions {
    bool verify = false;
    std::optional<std::size_t> grid_override;
    std::optional<std::uint64_t> seed;
};

RunResult run(ExperimentConfig cfg, const RunOptions& opt = {});
// writes the tables, series, manifest.yaml and timing.yaml into out
void emit_report(const RunResult& r, const std::filesystem::path& out);

// fixed-width scientific formatting used in every table
std::string fmt(double x);

enum ExitCode { Ok = 0, ConfigFailure = 2, Hypothesis = 3, ModuleFailure = 4, IoFailure = 5 };

// load, run and emit; on failure writes error.yaml into out and returns the matching code
int run_cli(const std::filesystem::path& config, const std::filesystem::path& out, const RunOptions& opt);

}  // namespace ktheta::lab
