#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "plab/cli/config.hpp"
#include "plab/cli/report.hpp"
#include "plab/geometry/backend.hpp"

namespace plab::cli {

class Run {
public:
    Run(const ExperimentConfig& c, RunReport& r) : cfg(c), report(r) {}

    // Times body; an exception ends the phase as a failed check and the run goes on. Config
    // errors found late still abort the whole run.
    void phase(const std::string& name, const std::function<void()>& body);

    // Independent generator per phase, so one phase's draws never shift another's.
    std::mt19937_64 rng(const std::string& phase) const;

    const ExperimentConfig& cfg;
    RunReport& report;
};

// Torus from "<prefix>.nx", ny, lx, ly, profile and amp. Profiles, with X = 2 pi x / lx and Y = 2 pi y / ly:
//   flat 0, sin sin X, mixed sin X + cos(2Y + 0.3)/2, product sin X cos Y,
//   bumpy sin X + cos(X + 2Y)/2, twisted sin X cos Y + cos(2X + Y)/2; u = amp * profile.
ConformalTorus torus_from(const ExperimentConfig& cfg, const std::string& prefix, int n, double amp,
                          const std::string& profile);
// The keys torus_from reads, for schemas.
void add_torus_keys(ConfigSchema& s, const std::string& prefix);

// Sum of the Fourier modes with 0 <= kx <= kmax, |ky| <= kmax and normal coefficients of deviation amp.
Grid random_field(const ConformalTorus& t, std::mt19937_64& rng, double amp, int kmax = 2);

// |a - b| / max(|b|, floor)
double rel_error(double a, double b, double floor = 1e-300);

// min of v[i+1] - v[i]; +inf for fewer than two samples
double min_increment(const std::vector<double>& v);

// Suites named by the "suite" key; "all" (the default) selects every suite.
bool suite_on(const ExperimentConfig& cfg, const std::string& suite);

// Grid size from the "resolution" key, which --resolution sets.
int resolution(const ExperimentConfig& cfg, int fallback);

// Observed order log2(coarse / fine) must reach min_order, unless the fine error already sits
// below floor, where the ratio is roundoff noise and the fine error itself is checked instead.
void check_order(RunReport& r, const std::string& name, double coarse, double fine, double min_order, double floor);

// One entry per experiment: extra schema keys and the runner.
void flow_monotonicity_schema(ConfigSchema& s);
void flow_monotonicity(Run& run);
void entropy_w_schema(ConfigSchema& s);
void entropy_w(Run& run);
void spectral_sweep_schema(ConfigSchema& s);
void spectral_sweep(Run& run);
void variation_oracle_schema(ConfigSchema& s);
void variation_oracle(Run& run);
void lgeo_identities_schema(ConfigSchema& s);
void lgeo_identities(Run& run);
void reduced_volume_schema(ConfigSchema& s);
void reduced_volume_experiment(Run& run);
void list_flow_schema(ConfigSchema& s);
void list_flow(Run& run);
void rym_flow_schema(ConfigSchema& s);
void rym_flow(Run& run);

}  // namespace plab::cli
