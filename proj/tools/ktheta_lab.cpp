#include "CLI11.hpp"
#include "ktheta/lab.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ktheta_lab: configuration-driven model space experiments"};
    std::string config, out;
    ktheta::lab::RunOptions opt;
    std::size_t grid = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "experiment file (YAML)")->required();
    app.add_option("--out", out, "output directory")->required();
    auto* g = app.add_option("--grid-override", grid, "replace the circle grid size");
    auto* s = app.add_option("--seed", seed, "replace the random seed");
    app.add_flag("--verify", opt.verify, "rerun at doubled resolution and fill selfconv_delta");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : ktheta::lab::ConfigFailure;
    }
    if (*g) opt.grid_override = grid;
    if (*s) opt.seed = seed;
    return ktheta::lab::run_cli(config, out, opt);
}
