#include "pnsim/errors.hpp"
#include "pnsim/run.hpp"

#include <CLI11.hpp>

#include <cstdio>

int main(int argc, char** argv) {
    CLI::App app{"Phase-noise gate-fidelity simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = -1;
    long long seed = -1;
    bool paper_scale = false;
    bool dry_run = false;
    std::string dump_trace;
    std::string dump_state;

    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const char* name : {"rabi", "pi-scan-rabi", "pi-scan-rpsd", "pumping",
                             "pumping-scan", "heating", "ms-gate", "noise-only"}) {
        CLI::App* sub = app.add_subcommand(name, "Run the " + std::string(name) +
                                                     " experiment");
        sub->add_option("--config", config_path, "Config file (JSON or TOML)")
            ->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--jobs", jobs, "Max parallel workers (default: all cores)");
        sub->add_option("--seed", seed, "Override ensemble base seed");
        sub->add_flag("--paper-scale", paper_scale,
                      "Paper-scale ensemble (1000 realizations, Fock cutoff 30)");
        sub->add_flag("--dry-run", dry_run,
                      "Validate and print the resolved config without computing");
        sub->add_option("--dump-trace", dump_trace, "Also write a first-seed trace CSV");
        sub->add_option("--dump-state", dump_state,
                        "Also write the first-seed final state CSV");
        subs.emplace_back(name, sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        pnsim::RunConfig cfg = pnsim::parse_config_file(config_path);
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const auto requested = pnsim::experiment_from_name(name);
            if (cfg.experiment != requested)
                throw pnsim::ParamError("config experiment '" +
                                        pnsim::to_string(cfg.experiment) +
                                        "' does not match subcommand '" + name + "'");
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (jobs >= 0) cfg.ensemble.max_parallel = jobs;
        if (seed >= 0) cfg.ensemble.base_seed = static_cast<std::uint64_t>(seed);
        if (paper_scale) pnsim::apply_paper_scale(cfg);
        cfg.dry_run = dry_run;
        cfg.dump_trace_path = dump_trace;
        cfg.dump_state_path = dump_state;
        return pnsim::run(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
