#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plab/cli/experiments.hpp"

namespace {

void list_experiments() {
    for (const auto& e : plab::experiments()) std::printf("%-18s %s\n", e.name.c_str(), e.summary.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perelman-lab: configuration-driven geometric flow experiments"};
    bool list = false;
    app.add_flag("--list-experiments", list, "list the experiment names and exit");

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> res;
    bool run_list = false;
    run->add_option("config", config_path, "config file")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--seed", seed, "random seed (overrides the config)");
    run->add_option("--resolution", res, "main grid size (overrides the config)")->check(CLI::PositiveNumber);
    run->add_flag("--list-experiments", run_list, "list the experiment names and exit");

    CLI11_PARSE(app, argc, argv);
    if (list || run_list) {
        list_experiments();
        return 0;
    }
    if (!run->parsed() || config_path.empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        plab::ExperimentConfig cfg = plab::ExperimentConfig::load(config_path);
        if (seed) cfg.seed = *seed;
        if (res) cfg.set("resolution", std::to_string(*res));
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        const plab::RunReport r = plab::run_experiment(cfg);
        plab::emit_all(r, cfg.out_dir);
        for (const auto& c : r.checks)
            std::printf("%s  %-48s %s %s %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                        plab::format_number(c.measured).c_str(), c.relation.c_str(),
                        plab::format_number(c.tolerance).c_str(), c.detail.empty() ? "" : "  # ", c.detail.c_str());
        double total = 0;
        for (const auto& [phase, sec] : r.wall) total += sec;
        std::printf("%s: %s (%zu checks, %.2f s), reports in %s\n", r.experiment.c_str(),
                    r.passed() ? "passed" : "FAILED", r.checks.size(), total, cfg.out_dir.c_str());
        return r.passed() ? 0 : 1;
    } catch (const plab::ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
