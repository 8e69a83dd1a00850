#pragma once

#include <string>
#include <vector>

#include "plab/cli/config.hpp"
#include "plab/cli/report.hpp"

namespace plab {

struct ExperimentInfo {
    std::string name;
    std::string summary;
};

const std::vector<ExperimentInfo>& experiments();

// Runs the named experiment. Invalid configs throw ConfigError before any work starts; a phase
// that throws mid-run becomes a failed check and the independent phases still run.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace plab
