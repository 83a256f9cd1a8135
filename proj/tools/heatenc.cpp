#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "heatenc/config.hpp"
#include "heatenc/errors.hpp"
#include "heatenc/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    int jobs = 1;
    long long seed_override = -1;
};

heatenc::ScenarioConfig load(const CommonArgs& args) {
    heatenc::ScenarioConfig cfg = heatenc::load_config(args.config_path);
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    if (args.seed_override >= 0)
        cfg.seed = static_cast<unsigned long long>(args.seed_override);
    return cfg;
}

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "scenario config (JSON)")->required();
    sub->add_option("--out", args.out_override, "override output directory");
    sub->add_option("--jobs", args.jobs, "sweep worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed_override, "override the noise seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"enclosure-method laboratory for the inverse heat-source problem"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string data_path, sweep_path;
    heatenc::OracleOptions oracle_opts;

    auto* simulate = app.add_subcommand("simulate", "solve forward, write traces");
    add_common(simulate, args);

    auto* sweep = app.add_subcommand("sweep", "indicator sweep over probes");
    add_common(sweep, args);
    sweep->add_option("--data", data_path, "boundary data CSV (default <out>/boundary.csv)");

    auto* estimate = app.add_subcommand("estimate", "extract t0 / support, build enclosure");
    add_common(estimate, args);
    estimate->add_option("--sweep", sweep_path, "sweep CSV (default <out>/sweep.csv)");

    auto* oracle = app.add_subcommand("oracle", "run independent cross-checks");
    add_common(oracle, args);
    oracle->add_option("--kd-tol", oracle_opts.kd_tol, "K_D agreement tolerance");
    oracle->add_option("--only", oracle_opts.only, "run only checks with this name prefix");

    auto* all = app.add_subcommand("all", "simulate + sweep + estimate + oracle");
    add_common(all, args);
    all->add_option("--kd-tol", oracle_opts.kd_tol, "K_D agreement tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        const heatenc::ScenarioConfig cfg = load(args);
        if (simulate->parsed()) return heatenc::cmd_simulate(cfg);
        if (sweep->parsed()) {
            if (data_path.empty()) data_path = cfg.out_dir + "/boundary.csv";
            return heatenc::cmd_sweep(cfg, data_path, args.jobs);
        }
        if (estimate->parsed()) {
            if (sweep_path.empty()) sweep_path = cfg.out_dir + "/sweep.csv";
            return heatenc::cmd_estimate(cfg, sweep_path);
        }
        if (oracle->parsed()) return heatenc::cmd_oracle(cfg, oracle_opts);
        return heatenc::cmd_all(cfg, args.jobs, oracle_opts);
    } catch (const heatenc::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const heatenc::ToleranceError& e) {
        std::fprintf(stderr, "tolerance breach: %s\n", e.what());
        return 3;
    } catch (const heatenc::GateError& e) {
        std::fprintf(stderr, "gate rejection: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
