#include "plab/cli/experiments.hpp"

#include <Eigen/Core>

#include "common.hpp"
#include "json.hpp"

namespace plab {

namespace {

struct Entry {
    ExperimentInfo info;
    void (*schema)(ConfigSchema&);
    void (*run)(cli::Run&);
};

const std::vector<Entry>& registry() {
    using namespace cli;
    static const std::vector<Entry> r = {
        {{"flow_monotonicity", "Gaussian F law, conjugate-heat mass conservation, F and lambda monotonicity"},
         flow_monotonicity_schema, flow_monotonicity},
        {{"entropy_w", "W of the Gaussian soliton, flat-space W bound, scaling laws, mu on the flat torus"},
         entropy_w_schema, entropy_w},
        {{"spectral_sweep", "lambda_k along a torus flow and on round spheres"}, spectral_sweep_schema, spectral_sweep},
        {{"variation_oracle", "first variations of F, W and the Ricci Yang-Mills functionals against finite differences"},
         variation_oracle_schema, variation_oracle},
        {{"lgeo_identities", "L-geodesic exactness, transport frames, L and l identities, Hessian comparison"},
         lgeo_identities_schema, lgeo_identities},
        {{"reduced_volume", "reduced distance minima, reduced volume monotonicity, scalar curvature floor"},
         reduced_volume_schema, reduced_volume_experiment},
        {{"list_flow", "extended (List) flow: reductions, W production, mu monotonicity"}, list_flow_schema, list_flow},
        {{"rym_flow", "Ricci Yang-Mills flow: reductions, F production, lambda monotonicity, Yang-Mills energy"},
         rym_flow_schema, rym_flow},
    };
    return r;
}

const Entry& find(const std::string& name) {
    for (const auto& e : registry())
        if (e.info.name == name) return e;
    std::string known;
    for (const auto& e : registry()) known += (known.empty() ? "" : ", ") + e.info.name;
    throw ConfigError({"unknown experiment '" + name + "' (known: " + known + ")"});
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
    static const std::vector<ExperimentInfo> v = [] {
        std::vector<ExperimentInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return v;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const Entry& e = find(cfg.experiment);
    ConfigSchema schema{{"suite", KeyType::text}, {"resolution", KeyType::integer}};
    e.schema(schema);
    validate(cfg, schema);
    if (cfg.has("resolution") && cfg.get_int("resolution", 0) < 4) throw ConfigError({"resolution: must be at least 4"});

    RunReport r;
    r.experiment = cfg.experiment;
    r.config = cfg.canonical();
    r.config_hash = cfg.hash();
    for (const char* m : {"geometry", "flow", "functionals", "lgeo", "variants", "cli"}) r.versions[m] = "1.0.0";
    r.versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION);
    r.versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    cli::Run run(cfg, r);
    e.run(run);
    return r;
}

}  // namespace plab
