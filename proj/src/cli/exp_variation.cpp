// variation_oracle: first variations against central differences on seeded random directions

#include <cmath>

#include "common.hpp"
#include "plab/functionals/entropy.hpp"
#include "plab/variants/rym.hpp"

namespace plab::cli {

namespace {

TorusMetric perturbed(const ConformalTorus& t, const TorusTensor& v, double e) {
    const Grid e2u = (2.0 * t.u).exp();
    return TorusMetric::general(t.nx, t.ny, t.lx, t.ly, e2u + e * v.xx, e * v.xy, e2u + e * v.yy);
}

struct Setup {
    int trials;
    double eps, tol;
};

Setup setup(const ExperimentConfig& cfg) {
    return {static_cast<int>(cfg.get_int("variation.trials", 20)), cfg.get_double("variation.eps", 1e-5), 1e-4};
}

void plain(Run& run, bool with_W) {
    const Setup s = setup(run.cfg);
    const ConformalTorus t = torus_from(run.cfg, "torus", resolution(run.cfg, 32), 0.1, "bumpy");
    const double tau = run.cfg.get_double("variation.tau", 0.4);
    auto rng = run.rng(with_W ? "delta_W" : "delta_F");
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const std::string name = with_W ? "delta_W" : "delta_F";
    Table& tab = run.report.table(name, {"trial", "analytic", "finite_difference", "rel_error"});
    double worst = 0.0;
    for (int k = 0; k < s.trials; ++k) {
        Grid f = random_field(t, rng, 0.3);
        const TorusTensor v{random_field(t, rng, 0.2), random_field(t, rng, 0.2), random_field(t, rng, 0.2)};
        const Grid h = random_field(t, rng, 0.2);
        double d, fd;
        if (with_W) {
            const PotentialConfig pc = normalize_potential(t, f, tau);
            f = std::get<Grid>(pc.f);
            const double sigma = U(rng);
            d = delta_W(t, pc, VariationData{v, h, sigma});
            fd = (eval_W_raw(perturbed(t, v, s.eps), Grid(f + s.eps * h), tau + s.eps * sigma) -
                  eval_W_raw(perturbed(t, v, -s.eps), Grid(f - s.eps * h), tau - s.eps * sigma)) /
                 (2 * s.eps);
        } else {
            d = delta_F(t, f, VariationData{v, h, 0.0});
            fd = (eval_F(perturbed(t, v, s.eps), Grid(f + s.eps * h)) -
                  eval_F(perturbed(t, v, -s.eps), Grid(f - s.eps * h))) /
                 (2 * s.eps);
        }
        const double e = rel_error(d, fd);
        tab.rows.push_back({double(k), d, fd, e});
        worst = std::max(worst, e);
    }
    run.report.check_le(name, worst, s.tol, "max relative error over " + std::to_string(s.trials) + " variations");
}

void rym(Run& run, bool with_W) {
    const Setup s = setup(run.cfg);
    const ConformalTorus t = torus_from(run.cfg, "rym_torus", resolution(run.cfg, 32), 0.15, "product");
    const double tau = run.cfg.get_double("variation.rym_tau", 0.7);
    const RymState st{variant_metric(t),
                      std::get<Grid>(grid_field(t, [](double x, double y) { return 0.4 * std::sin(y) + 0.2 * std::cos(x + y); })),
                      std::get<Grid>(grid_field(t, [](double x, double y) { return 0.5 * std::cos(x) + 0.1 * std::sin(2 * y); }))};
    const TorusMetric g = st.g.metric();
    const Grid F = rym_curvature(g, st.a1, st.a2);
    auto rng = run.rng(with_W ? "delta_W_rym" : "delta_F_rym");
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    const double a = run.cfg.get_double("variation.rym_amp", 0.07);
    const std::string name = with_W ? "delta_W_rym" : "delta_F_rym";
    Table& tab = run.report.table(name, {"trial", "analytic", "finite_difference", "rel_error"});
    double worst = 0.0;
    for (int k = 0; k < s.trials; ++k) {
        const RymVariation var{{random_field(t, rng, a), random_field(t, rng, a), random_field(t, rng, a)},
                               {random_field(t, rng, a), random_field(t, rng, a)},
                               random_field(t, rng, a),
                               with_W ? U(rng) : 0.0};
        const Grid f = random_field(t, rng, a);
        auto at = [&](double q) {
            const TorusMetric gq = perturbed(t, var.v, q);
            const Grid Fq = rym_curvature(gq, Grid(st.a1 + q * var.alpha.x), Grid(st.a2 + q * var.alpha.y));
            return with_W ? eval_W_rym_raw(gq, Fq, Grid(f + q * var.h), tau + q * var.sigma)
                          : eval_F_rym(gq, Fq, Grid(f + q * var.h));
        };
        const double fd = (at(s.eps) - at(-s.eps)) / (2 * s.eps);
        const double d = with_W ? delta_W_rym(g, F, f, tau, var) : delta_F_rym(g, F, f, var);
        const double e = rel_error(d, fd);
        tab.rows.push_back({double(k), d, fd, e});
        worst = std::max(worst, e);
    }
    run.report.check_le(name, worst, s.tol, "max relative error over " + std::to_string(s.trials) + " variations");
}

}  // namespace

void variation_oracle_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    add_torus_keys(s, "rym_torus");
    s["variation.trials"] = KeyType::integer;
    s["variation.eps"] = s["variation.tau"] = s["variation.rym_tau"] = s["variation.rym_amp"] =
        KeyType::real;
}

void variation_oracle(Run& run) {
    if (suite_on(run.cfg, "delta_F")) run.phase("delta_F", [&] { plain(run, false); });
    if (suite_on(run.cfg, "delta_W")) run.phase("delta_W", [&] { plain(run, true); });
    if (suite_on(run.cfg, "delta_F_rym")) run.phase("delta_F_rym", [&] { rym(run, false); });
    if (suite_on(run.cfg, "delta_W_rym")) run.phase("delta_W_rym", [&] { rym(run, true); });
}

}  // namespace plab::cli
