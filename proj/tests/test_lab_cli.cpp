#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "ktheta/lab.hpp"

using namespace ktheta;
using namespace ktheta::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ktheta_lab_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    auto p = dir / "config.yaml";
    std::ofstream(p) << text;
    return p;
}

int cli(const std::string& args) {
    const char* exe = std::getenv("KTHETA_LAB");
    REQUIRE(exe != nullptr);
    int rc = std::system((std::string(exe) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* two_point = "kind: ENTROPY\nset:\n  points: [0.0, 0.5]\n";

}  // namespace

TEST_CASE("config parsing and validation") {
    auto c = parse_config(two_point);
    CHECK(c.kind == Kind::Entropy);
    CHECK(c.points == std::vector<double>{0.0, 0.5});
    CHECK(c.grid == 16384);
    validate(c);

    // the echo is a fixed point of parse then emit
    auto full = parse_config(R"(
kind: CYCLICITY
functions:
  - name: mixed
    zeros: [[0.2, -0.1], 0.5]
    atoms: [{position: 0.25, mass: 0.7}]
    cantor: [{family: POLYLOG, param: 1.5, depth: 9, mass: 0.2}]
degrees: [1, 3]
obstruction: {theta: mixed, degrees: [0, 1], grid: 256}
)");
    REQUIRE(full.functions.size() == 1);
    CHECK(full.functions[0].zeros[0] == cplx(0.2, -0.1));
    CHECK(full.functions[0].measure.components[0].schedule.depth == 9);
    auto echo = to_yaml(full);
    CHECK(to_yaml(parse_config(echo)) == echo);

    CHECK_THROWS_AS(parse_config("kind: ENTROPY\nsett: {}\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("name: x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind: FOO\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind: ENTROPY\ngrid: -4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind: ENTROPY\n  bad: [\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kind: DECOMPOSE\ninner: {cantor: [{family: CUBIC, param: 1, mass: 1}]}\n"),
                    ConfigError);

    auto bad = [](const std::string& text) { CHECK_THROWS_AS(validate(parse_config(text)), ConfigError); };
    bad("kind: ENTROPY\n");
    bad("kind: ENTROPY\nset: {points: [0]}\ngrid: 1000\n");
    bad("kind: APPROX_KERNEL\ninner: {atoms: [{position: 0, mass: 1}]}\nlambda: [[0.9, 0.9]]\n");
    bad("kind: APPROX_KERNEL\ninner: {atoms: [{position: 0, mass: -1}]}\n");
    bad("kind: CYCLICITY\nfunctions: [{name: a}, {name: a}]\n");
    bad("kind: CYCLICITY\nfunctions: [{name: a}]\nobstruction: {theta: b}\n");
    bad("kind: PAIRING_CHECK\npairing: {p: 1}\n");
    bad("kind: SMOOTHING_SUITE\nset: {arcs: [[0.0, 0.5]]}\n");
    bad("kind: ENTROPY\nschedules: [{family: GEOMETRIC, param: 0.6}]\n");
    bad("kind: ENTROPY\nset: {points: [0]}\nprofile: {alpha: 0}\n");
}

TEST_CASE("entropy and decomposition runs") {
    auto r = run(parse_config(two_point));
    REQUIRE(r.tables.size() == 1);
    REQUIRE(r.tables[0].rows.size() == 1);
    CHECK(r.tables[0].header[3] == "entropy");
    CHECK(std::stod(r.tables[0].rows[0][3]) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.tables[0].rows[0].back() == "nan");

    auto v = run(parse_config(two_point), {.verify = true});
    CHECK(v.tables[0].rows[0].back() == fmt(0.0));
    REQUIRE(v.manifest.selfconv.size() == 1);
    CHECK(v.manifest.selfconv[0].within);

    // non-BC schedules report infinite entropy with a finite witness
    auto s = run(parse_config("kind: ENTROPY\nschedules: [{family: POLYLOG, param: 1.0, depth: 10}]\n"));
    CHECK(s.tables[0].rows[0][3] == "inf");
    CHECK(s.tables[0].rows[0][7] == "0");
    CHECK(std::isfinite(std::stod(s.tables[0].rows[0][9])));
    REQUIRE(s.series.size() == 1);
    CHECK(s.series[0].points.size() == 10);

    auto d = run(parse_config(R"(
kind: DECOMPOSE
inner:
  atoms: [{position: 0.0, mass: 1.0}]
  cantor:
    - {family: GEOMETRIC, param: 0.3333333333333333, base_start: 0.1, base_length: 0.3, mass: 0.5}
    - {family: POLYLOG, param: 1.0, base_start: 0.5, base_length: 0.4, mass: 0.25}
)"));
    const auto& rows = d.tables[0].rows;
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == "C");
    CHECK(rows[1][2] == "GEOMETRIC");
    CHECK(rows[2][0] == "K");
    CHECK(rows[2][2] == "POLYLOG");
    CHECK(rows[3][4] == fmt(1.75));
    CHECK(rows[4][4] == fmt(1.5));
    CHECK(rows[5][4] == fmt(0.25));
}

TEST_CASE("empty n list") {
    auto r = run(parse_config("kind: SMOOTHING_SUITE\nset: {points: [0.0]}\nn: []\ngrid: 256\nfine_grid: 4096\n"));
    REQUIRE(r.tables.size() == 1);
    CHECK(r.tables[0].rows.empty());
    REQUIRE(r.manifest.warnings.size() == 1);
    CHECK(r.manifest.warnings[0].find("n list is empty") != std::string::npos);
    auto out = scratch("empty");
    emit_report(r, out);
    CHECK(slurp(out / "smoothing_suite.csv") ==
          "n,weight_integral,weight_ratio,sup_abs,median_abs_minus_one,abs_value_at_zero,singular_nodes,"
          "selfconv_delta\n");
    CHECK(slurp(out / "manifest.yaml").find("n list is empty") != std::string::npos);
}

TEST_CASE("kernel, cyclicity and pairing runs") {
    // Blaschke-only theta: no smoothing, the error is the tail cancellation floor
    auto k = run(parse_config("kind: APPROX_KERNEL\ninner: {zeros: [0.5]}\nlambda: [0.3]\nn: [2]\ngrid: 1024\nfine_grid: 8192\n"));
    REQUIRE(k.tables[0].rows.size() == 1);
    CHECK(k.tables[0].header[0] == "n");
    CHECK(std::stod(k.tables[0].rows[0][3]) < 1e-7);
    CHECK(std::stod(k.tables[0].rows[0][4]) < 1e-10);
    CHECK(k.manifest.warnings.empty());
    auto t = run(parse_config("kind: APPROX_KERNEL\ninner: {}\nlambda: [0.3]\nn: [2]\ngrid: 1024\nfine_grid: 8192\n"));
    CHECK(t.tables[0].rows[0][3] == fmt(0.0));
    CHECK(t.manifest.warnings.size() == 1);

    auto c = run(parse_config(R"(
kind: CYCLICITY
functions:
  - {name: one}
  - {name: atom, atoms: [{position: 0.0, mass: 1.0}]}
degrees: [0, 2]
quadrature: {radial: 16, angular: 64}
obstruction: {theta: atom, degrees: [0, 4], grid: 256}
)"),
                 {.verify = true});
    REQUIRE(c.tables.size() == 2);
    REQUIRE(c.tables[0].rows.size() == 4);
    CHECK(std::stod(c.tables[0].rows[0][2]) < 1e-12);
    CHECK(c.tables[1].file == "obstruction.csv");
    CHECK(c.manifest.selfconv.size() == 2);
    CHECK(c.series.size() == 3);

    auto p = run(parse_config("kind: PAIRING_CHECK\nseed: 3\npairing: {pairs: 5, max_degree: 4}\n"), {.verify = true});
    REQUIRE(p.tables[0].rows.size() == 6);
    CHECK(std::stod(p.tables[0].rows[0][3]) == 1.0);
    for (const auto& row : p.tables[0].rows) {
        CHECK(std::stod(row[7]) < 1e-8);
        CHECK(std::stod(row.back()) < 1e-10);
    }
    // the seed override changes the random pairs
    auto p2 = run(parse_config("kind: PAIRING_CHECK\nseed: 3\npairing: {pairs: 5, max_degree: 4}\n"), {.seed = 4});
    CHECK(p2.tables[0].rows[1] != p.tables[0].rows[1]);
}

TEST_CASE("command line") {
    auto dir = scratch("cli");
    auto cfg = write_config(dir, "kind: PAIRING_CHECK\nseed: 11\npairing: {pairs: 8, max_degree: 6}\n");
    for (const char* sub : {"a", "b"}) CHECK(cli("--config " + cfg.string() + " --out " + (dir / sub).string()) == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        auto name = e.path().filename();
        if (name == "timing.yaml") continue;
        CHECK(slurp(e.path()) == slurp(dir / "b" / name));
        ++compared;
    }
    CHECK(compared == 3);
    CHECK(fs::exists(dir / "a" / "timing.yaml"));
    auto table = slurp(dir / "a" / "pairing_check.csv");
    CHECK(table.rfind("pair,deg_f,deg_g,lhs_re,lhs_im,rhs_re,rhs_im,gap,ratio,selfconv_delta\n", 0) == 0);

    auto two = write_config(scratch("two"), two_point);
    CHECK(cli("--config " + two.string() + " --out " + (dir / "entropy").string()) == 0);
    auto csv = slurp(dir / "entropy" / "entropy.csv");
    CHECK(csv.find("set,SET,nan," + fmt(std::log(2.0)) + ",") != std::string::npos);

    // grid override reaches the echoed config
    CHECK(cli("--config " + two.string() + " --out " + (dir / "g").string() + " --grid-override 512") == 0);
    CHECK(slurp(dir / "g" / "manifest.yaml").find("grid: 512") != std::string::npos);

    auto hyp = write_config(scratch("hyp"), R"(
kind: APPROX_KERNEL
inner:
  atoms: [{position: 0.0, mass: 1.0}]
  cantor: [{family: POLYLOG, param: 1.0, base_start: 0.3, base_length: 0.4, mass: 0.5}]
lambda: [0.4]
n: [2]
grid: 1024
fine_grid: 8192
)");
    CHECK(cli("--config " + hyp.string() + " --out " + (dir / "hyp").string()) == 3);
    auto err = slurp(dir / "hyp" / "error.yaml");
    CHECK(err.find("status: 3") != std::string::npos);
    CHECK(err.find("hypothesis_violation") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "hyp" / "approx_kernel.csv"));

    auto badcfg = write_config(scratch("bad"), "kind: ENTROPY\n");
    CHECK(cli("--config " + badcfg.string() + " --out " + (dir / "bad").string()) == 2);
    CHECK(slurp(dir / "bad" / "error.yaml").find("status: 2") != std::string::npos);
    CHECK(cli("--config " + (dir / "missing.yaml").string() + " --out " + (dir / "missing").string()) == 5);
    CHECK(cli("--out " + (dir / "x").string()) == 2);

    // a geometric Cantor component is outside the pipeline's supported profiles
    auto mod = write_config(scratch("mod"), R"(
kind: APPROX_KERNEL
inner:
  cantor: [{family: GEOMETRIC, param: 0.3333333333333333, mass: 0.5}]
lambda: [0.4]
n: [2]
grid: 1024
fine_grid: 8192
)");
    CHECK(cli("--config " + mod.string() + " --out " + (dir / "mod").string()) == 4);
    fs::remove_all(dir.parent_path());
}
