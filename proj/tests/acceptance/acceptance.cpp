// Runs every acceptance criterion through the experiment runner and prints one line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "plab/cli/experiments.hpp"

namespace fs = std::filesystem;
using namespace plab;

namespace {

const fs::path out_root = fs::temp_directory_path() / "perelman-lab-acceptance";

ExperimentConfig config(const std::string& name, const std::string& suite = "") {
    ExperimentConfig cfg = ExperimentConfig::load(std::string(PLAB_CONFIG_DIR) + "/" + name + ".cfg");
    if (!suite.empty()) cfg.set("suite", suite);
    return cfg;
}

struct Outcome {
    bool pass = false;
    double seconds = 0.0;
    std::string note;
};

std::string failures(const RunReport& r) {
    std::string s;
    for (const auto& c : r.checks)
        if (!c.pass) s += (s.empty() ? "failed: " : ", ") + c.name + " = " + format_number(c.measured);
    return s;
}

Outcome run_criterion(const ExperimentConfig& cfg, const std::string& dir, double limit) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunReport r = run_experiment(cfg);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    emit_all(r, (out_root / dir).string());
    Outcome o{r.passed() && dt.count() < limit, dt.count(), ""};
    o.note = std::to_string(r.checks.size()) + " checks";
    if (!r.passed()) o.note += "; " + failures(r);
    if (dt.count() >= limit) o.note += "; over the " + format_number(limit) + " s budget";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every report file of a rerun must match byte for byte; wall times live in timing.json and are skipped.
Outcome determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{true, 0.0, ""};
    std::size_t compared = 0, differ = 0;
    bool round_trip = true;
    for (const std::string name : {"variation_oracle", "entropy_w", "lgeo_identities", "list_flow"}) {
        const ExperimentConfig cfg = config(name);
        const fs::path a = out_root / ("rerun_a_" + name), b = out_root / ("rerun_b_" + name);
        fs::remove_all(a);
        fs::remove_all(b);
        const RunReport ra = run_experiment(cfg);
        emit_all(ra, a.string());
        emit_all(run_experiment(cfg), b.string());
        std::size_t na = 0, nb = 0;
        for (const auto& e : fs::directory_iterator(b)) (void)e, ++nb;
        for (const auto& e : fs::directory_iterator(a)) {
            ++na;
            const std::string n = e.path().filename().string();
            if (n == "timing.json") continue;
            ++compared;
            if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) ++differ;
        }
        if (na != nb) ++differ;
        round_trip = round_trip && report_json(read_report((a / "report.json").string())) == report_json(ra);
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.pass = differ == 0 && compared > 0 && round_trip;
    o.note = "4 experiments, " + std::to_string(compared) + " files compared, " + std::to_string(differ) +
             " differ; json round trip " + (round_trip ? "lossless" : "LOSSY");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        std::string what;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "euclidean F law", [] { return run_criterion(config("flow_monotonicity", "euclidean"), "c1", 1); }},
        {2, "measure conservation", [] { return run_criterion(config("flow_monotonicity", "conservation"), "c2", 10); }},
        {3, "first-variation oracles", [] { return run_criterion(config("variation_oracle"), "c3", 30); }},
        {4, "F and lambda monotonicity", [] { return run_criterion(config("flow_monotonicity", "monotonicity"), "c4", 30); }},
        {5, "W suite", [] { return run_criterion(config("entropy_w"), "c5", 60); }},
        {6, "L-geodesic exactness", [] { return run_criterion(config("lgeo_identities", "exactness"), "c6", 5); }},
        {7, "identity residuals", [] { return run_criterion(config("lgeo_identities", "identities"), "c7", 60); }},
        {8, "reduced distance and volume", [] { return run_criterion(config("reduced_volume"), "c8", 120); }},
        {9, "variant suites", [] { return run_criterion(config("list_flow", "all"), "c9", 60); }},
        {10, "determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.note = std::string("error: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d: %s  %-28s %7.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.what.c_str(), o.seconds,
                    o.note.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed; reports under %s\n", int(criteria.size()) - failed, criteria.size(),
                out_root.string().c_str());
    return failed ? 1 : 0;
}
