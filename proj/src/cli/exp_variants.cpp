// list_flow and rym_flow

#include <cmath>
#include <limits>
#include <numbers>

#include "common.hpp"
#include "plab/flow/ricci.hpp"
#include "plab/functionals/eigen.hpp"
#include "plab/functionals/entropy.hpp"
#include "plab/functionals/mu.hpp"
#include "plab/variants/list.hpp"
#include "plab/variants/rym.hpp"

namespace plab::cli {

using std::numbers::pi;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Grid field(const ConformalTorus& t, const std::function<double(double, double)>& f) {
    return std::get<Grid>(grid_field(t, f));
}

Grid compatible(const TorusMetric& g, const Grid& f, double tau) {
    return f + std::log(g.integrate((-f).exp()) / (4 * pi * tau));
}

ConformalTorus base_torus(const ExperimentConfig& cfg, double amp) {
    return torus_from(cfg, "torus", resolution(cfg, 32), amp, "product");
}

ListState list_state(const ConformalTorus& t, double amp) {
    return {variant_metric(t), field(t, [amp](double x, double y) { return amp * (std::sin(x) + 0.5 * std::cos(2 * y + x)); })};
}

RymState rym_state(const ConformalTorus& t) {
    return {variant_metric(t), field(t, [](double x, double y) { return 0.4 * std::sin(y) + 0.2 * std::cos(x + y); }),
            field(t, [](double x, double y) { return 0.5 * std::cos(x) + 0.1 * std::sin(2 * y); })};
}

VariantFlowConfig flow_config(const ExperimentConfig& cfg) {
    VariantFlowConfig fc;
    fc.cfl = cfg.get_double("flow.cfl", 0.1);
    return fc;
}

void list_reduction(Run& run) {
    const ConformalTorus t = base_torus(run.cfg, 0.15);
    const TorusMetric g = TorusMetric::conformal(t);
    const double dt = cfl_dt(t, 0.1);
    const ListState st{variant_metric(t), Grid::Constant(t.u.size(), 0.7)};
    ListState ls = st;
    Backend b = t;
    for (int k = 0; k < 10; ++k) {
        ls = step_list(ls, dt);
        b = step_forward(b, dt, Scheme::rk4, 0.1);
    }
    run.report.check_le("reduction.list_flow", (ls.g.base.u - std::get<ConformalTorus>(b).u).abs().maxCoeff(), 1e-12,
                        "max |u_list - u_ricci| after 10 steps with constant u");
    const double tau = 0.6;
    const Grid f = compatible(g, field(t, [](double x, double y) { return 0.3 * std::cos(x + y); }), tau);
    const PotentialConfig cfg{f, tau, true};
    run.report.check_le("reduction.W_list", std::abs(eval_W_list(st, f, tau) - eval_W(t, cfg)), 1e-12);
    run.report.check_le("reduction.production_W_list",
                        std::abs(production_W_list(g, st.u, f, tau) - production_W(t, cfg)), 1e-12);
    MuOptions opt;
    opt.grad_tol = 1e-8;
    run.report.check_le("reduction.mu_list", std::abs(mu_list(st, tau, opt).mu - mu(t, tau, opt).mu), 1e-12);
}

void list_production(Run& run) {
    const ConformalTorus t = base_torus(run.cfg, 0.15);
    const ListState st = list_state(t, run.cfg.get_double("list.amp", 0.3));
    const double T = run.cfg.get_double("list.T", 0.1);
    const ListRun lr = run_list(st, T, flow_config(run.cfg));
    const ListEntropySeries s = list_entropy_series(lr, T + run.cfg.get_double("list.tau_end", 0.9));
    Table& tab = run.report.table("list_entropy", {"t", "tau", "W", "production", "dW_dt", "mass_error"});
    double min_P = inf, worst = 0.0, mass = 0.0;
    int compared = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        tab.rows.push_back({s.t[i], s.tau[i], s.W[i], s.production[i], s.dWdt[i], s.mass_error[i]});
        min_P = std::min(min_P, s.production[i]);
        mass = std::max(mass, std::abs(s.mass_error[i]));
        if (std::isnan(s.dWdt[i])) continue;
        worst = std::max(worst, rel_error(s.dWdt[i], s.production[i]));
        ++compared;
    }
    run.report.check_ge("list.production_W", min_P, 0.0);
    run.report.check_le("list.dW/dt vs production", compared ? worst : inf, 1e-3,
                        std::to_string(compared) + " interior samples, central differences");
    run.report.check_ge("list.W monotone", min_increment(s.W), 0.0);
    run.report.check_le("list.mass", mass, 1e-10);
    Table& d = run.report.table("list_defect", {"t", "defect"});
    for (std::size_t i = 0; i < lr.t.size(); ++i) d.rows.push_back({lr.t[i], lr.defect[i]});
}

void list_mu(Run& run) {
    const ConformalTorus t = base_torus(run.cfg, run.cfg.get_double("mu.torus_amp", 0.1));
    const ListState st = list_state(t, run.cfg.get_double("mu.amp", 0.2));
    const double tau = run.cfg.get_double("mu.tau", 0.5);
    const ListRun lr = run_list(st, run.cfg.get_double("mu.T", 0.08), flow_config(run.cfg));
    const long samples = std::max(2L, run.cfg.get_int("mu.samples", 5));
    Table& tab = run.report.table("list_mu", {"t", "tau", "mu", "iterations"});
    std::vector<double> v;
    bool converged = true;
    for (long k = 0; k < samples; ++k) {
        const std::size_t i = static_cast<std::size_t>(k * (lr.states.size() - 1) / (samples - 1));
        const MuResult r = mu_list(lr.states[i], tau - lr.t[i]);
        converged = converged && r.converged;
        v.push_back(r.mu);
        tab.rows.push_back({lr.t[i], tau - lr.t[i], r.mu, double(r.iterations)});
    }
    run.report.check_ge("list.mu converged", converged ? 1.0 : 0.0, 1.0);
    run.report.check_ge("list.mu monotone", min_increment(v), -1e-4, "min mu(t_{i+1}) - mu(t_i)");
}

void rym_reduction(Run& run) {
    const ConformalTorus t = base_torus(run.cfg, 0.15);
    const TorusMetric g = TorusMetric::conformal(t);
    const double dt = cfl_dt(t, 0.1);
    const RymState rs{variant_metric(t), Grid::Zero(t.u.size()), Grid::Zero(t.u.size())};
    RymState rr = rs;
    Backend b = t;
    for (int k = 0; k < 10; ++k) {
        rr = step_rym(rr, dt);
        b = step_forward(b, dt, Scheme::rk4, 0.1);
    }
    run.report.check_le("reduction.rym_flow", (rr.g.base.u - std::get<ConformalTorus>(b).u).abs().maxCoeff(), 1e-12,
                        "max |u_rym - u_ricci| after 10 steps with A = 0");
    const double tau = 0.6;
    const Grid f = compatible(g, field(t, [](double x, double y) { return 0.3 * std::cos(x + y); }), tau);
    const Grid Fz = Grid::Zero(f.size());
    run.report.check_le("reduction.F_rym", std::abs(eval_F_rym(g, Fz, f) - eval_F(t, f)), 1e-12);
    run.report.check_le("reduction.W_rym", std::abs(eval_W_rym_raw(g, Fz, f, tau) - eval_W(t, PotentialConfig{f, tau, true})),
                        1e-12);
    run.report.check_le("reduction.production_F_rym", std::abs(production_F_rym(g, Fz, f) - production_F(t, f)), 1e-12);
    run.report.check_le("reduction.lambda_rym", std::abs(lambda_rym(rs).lambda - lambda_k(t, 1.0).lambda), 1e-12);
}

void rym_run(Run& run) {
    const ConformalTorus t = base_torus(run.cfg, 0.15);
    const double T = run.cfg.get_double("rym.T", 0.2);
    const RymRun rr = run_rym(rym_state(t), T, flow_config(run.cfg));
    const RymSeries s = rym_series(rr, T + run.cfg.get_double("rym.tau_end", 0.8));
    Table& tab = run.report.table("rym_series", {"t", "tau", "F", "production_F", "dF_dt", "W", "W_rate", "dW_dt",
                                                  "lambda", "energy", "sup_F_sq"});
    double min_P = inf, worst = 0.0;
    int compared = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        tab.rows.push_back({s.t[i], s.tau[i], s.F[i], s.production_F[i], s.dFdt[i], s.W[i], s.W_rate[i], s.dWdt[i],
                            s.lambda[i], s.energy[i], s.sup_F_sq[i]});
        min_P = std::min(min_P, s.production_F[i]);
        if (std::isnan(s.dFdt[i])) continue;
        worst = std::max(worst, rel_error(s.dFdt[i], s.production_F[i]));
        ++compared;
    }
    run.report.check_ge("rym.production_F", min_P, 0.0);
    run.report.check_le("rym.dF/dt vs production_F", compared ? worst : inf, 1e-3,
                        std::to_string(compared) + " interior samples, central differences");
    run.report.check_ge("rym.lambda monotone", min_increment(s.lambda), -1e-4);
    run.report.check_ge("rym.F monotone", min_increment(s.F), 0.0);

    const LowEnergyReport le = low_energy_check(s);
    Table& lt = run.report.table("rym_low_energy", {"t", "T_minus_t_sup_F_sq", "dW_dt"});
    for (std::size_t i = 0; i < le.t.size(); ++i) lt.rows.push_back({le.t[i], le.energy_scale[i], le.dWdt[i]});
}

void ym_energy_decay(Run& run) {
    const ConformalTorus flat = make_torus(resolution(run.cfg, 32), resolution(run.cfg, 32), 2 * pi, 2 * pi);
    const RymRun ym = run_rym(rym_state(flat), run.cfg.get_double("ym.T", 0.2), flow_config(run.cfg), false);
    std::vector<double> E;
    Table& tab = run.report.table("ym_energy", {"t", "energy"});
    for (std::size_t k = 0; k < ym.states.size(); ++k) {
        E.push_back(ym_energy(ym.states[k]));
        tab.rows.push_back({ym.t[k], E.back()});
    }
    double rise = -inf;
    for (std::size_t k = 1; k < E.size(); ++k) rise = std::max(rise, E[k] - E[k - 1]);
    run.report.check_le("ym.energy non-increasing", rise, 0.0, "max E(t_{k+1}) - E(t_k) on a frozen flat metric");
}

}  // namespace

void list_flow_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    s["flow.cfl"] = s["list.amp"] = s["list.T"] = s["list.tau_end"] = KeyType::real;
    s["mu.torus_amp"] = s["mu.amp"] = s["mu.tau"] = s["mu.T"] = KeyType::real;
    s["mu.samples"] = KeyType::integer;
    rym_flow_schema(s);
}

void rym_flow_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    s["flow.cfl"] = s["rym.T"] = s["rym.tau_end"] = s["ym.T"] = KeyType::real;
}

static void list_suites(Run& run) {
    run.phase("list_reduction", [&] { list_reduction(run); });
    run.phase("list_production", [&] { list_production(run); });
    run.phase("list_mu", [&] { list_mu(run); });
}

static void rym_suites(Run& run) {
    run.phase("rym_reduction", [&] { rym_reduction(run); });
    run.phase("rym_run", [&] { rym_run(run); });
    run.phase("ym_energy", [&] { ym_energy_decay(run); });
}

// Each experiment runs its own family by default; suite = all runs both, so the whole variant
// suite is one named run.
static void run_family(Run& run, const std::string& own) {
    const std::string s = run.cfg.get("suite", own);
    if (s != "list" && s != "rym" && s != "all") throw ConfigError({"suite: expected list, rym or all, got '" + s + "'"});
    if (s == "list" || s == "all") list_suites(run);
    if (s == "rym" || s == "all") rym_suites(run);
}

void list_flow(Run& run) { run_family(run, "list"); }

void rym_flow(Run& run) { run_family(run, "rym"); }

}  // namespace plab::cli
