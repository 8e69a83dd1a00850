// lgeo_identities and reduced_volume

#include <cmath>
#include <memory>
#include <numbers>

#include "common.hpp"
#include "plab/flow/ricci.hpp"
#include "plab/lgeo/reduced.hpp"

namespace plab::cli {

using std::numbers::pi;

namespace {

LChart euclid_chart(int n, double scale = 1.0) {
    EuclideanSpace e;
    e.n = n;
    e.scale = scale;
    return LChart(backward_view(run_history(e, 4.0)));
}

// forward r^2 = r0^2 - 4t on S^3
LChart sphere_chart(const ExperimentConfig& cfg) {
    const double r = cfg.get_double("sphere.r", 2.0);
    return LChart(backward_view(run_history(RoundSphere{3, r}, cfg.get_double("sphere.T", 0.8))));
}

LChart torus_chart(const ExperimentConfig& cfg) {
    const ConformalTorus t0 = torus_from(cfg, "torus", resolution(cfg, 16), 0.2, "twisted");
    return LChart(backward_view(run_history(t0, cfg.get_double("torus.T", 2.1))));
}

Vec3 planar(const Vec3& x, int n) {
    Vec3 y = Vec3::Zero();
    for (int i = 0; i < n; ++i) y[i] = x[i];
    return y;
}

void exactness(Run& run) {
    auto rng = run.rng("exactness");
    std::uniform_real_distribution<double> U(-1, 1);
    const int trials = static_cast<int>(run.cfg.get_int("exactness.trials", 4));
    Table& tab = run.report.table("euclidean_bvp", {"n", "tau_bar", "L", "L_exact", "l", "l_exact", "path_error"});
    double shot_err = 0.0, L_err = 0.0, l_err = 0.0, hit = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const LChart c = euclid_chart(n);
        for (int k = 0; k < trials; ++k) {
            const Vec3 p = planar(Vec3(U(rng), U(rng), U(rng)), n);
            const Vec3 v = planar(Vec3(U(rng), U(rng), U(rng)), n);
            const double tb = 0.3 + 0.5 * (U(rng) + 1);
            const LPath path = shoot(c, p, v, tb);
            double e = 0.0;
            for (std::size_t j = 0; j < path.s.size(); ++j)
                e = std::max(e, (path.x[j] - (p + 2 * path.s[j] * v)).norm());
            shot_err = std::max(shot_err, e);

            const Vec3 q = planar(p + Vec3(U(rng), U(rng), U(rng)), n);
            const BvpResult r = solve_bvp(c, p, q, tb);
            const double d2 = (q - p).squaredNorm();
            const double L = d2 / (2 * std::sqrt(tb)), l = d2 / (4 * tb);
            double pe = 0.0;
            const Vec3 vq = (q - p) / (2 * std::sqrt(tb));
            for (std::size_t j = 0; j < r.path.s.size(); ++j)
                pe = std::max(pe, (r.path.x[j] - (p + 2 * r.path.s[j] * vq)).norm());
            tab.rows.push_back({double(n), tb, r.L, L, r.L / (2 * std::sqrt(tb)), l, pe});
            L_err = std::max(L_err, std::abs(r.L - L));
            l_err = std::max(l_err, std::abs(r.L / (2 * std::sqrt(tb)) - l));
            hit = std::max(hit, pe);
        }
    }
    run.report.check_le("exactness.shoot", shot_err, 1e-8, "max |gamma(tau) - p - 2 sqrt(tau) v|");
    run.report.check_le("exactness.bvp L", L_err, 1e-8);
    run.report.check_le("exactness.bvp l", l_err, 1e-8);
    run.report.check_le("exactness.bvp path", hit, 1e-8, "max distance to the straight-line solution");

    // frames
    const LChart e = euclid_chart(3);
    const FrameBundle fe = transport_frame(e, shoot(e, Vec3::Zero(), Vec3(0.3, -0.2, 0.5), 0.9));
    run.report.check_le("frames.euclidean", fe.gram_error, 1e-8, "max |<Y_i, Y_j> - (tau/tau_bar) delta_ij|");
    const LChart s = sphere_chart(run.cfg);
    const FrameBundle fs = transport_frame(s, solve_bvp(s, s.base_point(), s.sphere_target(0.8), 0.6).path);
    run.report.check_le("frames.sphere", fs.gram_error, 1e-8);
    const LChart t = torus_chart(run.cfg);
    const FrameBundle ft = transport_frame(t, solve_bvp(t, Vec3::Zero(), Vec3(1.1, -0.7, 0), 1.2).path);
    run.report.check_le("frames.torus", ft.gram_error, 1e-8);
}

void identities(Run& run) {
    const LChart s = sphere_chart(run.cfg);
    const LChart t = torus_chart(run.cfg);
    struct Case {
        std::string name;
        const LChart* c;
        Vec3 p, q;
        double tb;
        Vec3 y;
    };
    const std::vector<Case> cases{{"sphere", &s, s.base_point(), s.sphere_target(1.1), 0.5, Vec3(0, 0.2, 1)},
                                  {"torus", &t, Vec3::Zero(), Vec3(1.0, 0.7, 0.0), 1.0, Vec3(1, 0.3, 0)}};
    Table& tab = run.report.table(
        "identity_residuals", {"case", "resolution", "L_grad", "L_time", "l_time", "l_grad", "L_lap_slack", "l_lap_slack"});
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const Case& k = cases[ci];
        IdentityOptions coarse;
        coarse.bvp.steps = 128;
        coarse.h = coarse.k = 0.1;
        IdentityOptions fine;
        fine.h = fine.k = 0.05;
        const IdentityReport a = identity_residuals(*k.c, k.p, k.q, k.tb, coarse);
        const IdentityReport b = identity_residuals(*k.c, k.p, k.q, k.tb, fine);
        tab.rows.push_back({double(ci), 0.0, a.L_grad, a.L_time, a.l_time, a.l_grad, a.L_lap_slack, a.l_lap_slack});
        tab.rows.push_back({double(ci), 1.0, b.L_grad, b.L_time, b.l_time, b.l_grad, b.L_lap_slack, b.l_lap_slack});
        run.report.check_ge(k.name + ".smooth", b.smooth ? 1.0 : 0.0, 1.0, "no tied minimizer at q");
        const std::pair<std::string, std::pair<double, double>> res[] = {{"L_grad", {a.L_grad, b.L_grad}},
                                                                          {"L_time", {a.L_time, b.L_time}},
                                                                          {"l_time", {a.l_time, b.l_time}},
                                                                          {"l_grad", {a.l_grad, b.l_grad}}};
        for (const auto& [name, r] : res) {
            run.report.check_le(k.name + "." + name, std::abs(r.second), 1e-3, "residual at the fine resolution");
            check_order(run.report, k.name + "." + name + " order", r.first, r.second, 2.0, 1e-9);
        }
        run.report.check_ge(k.name + ".L_lap_slack", b.L_lap_slack, -1e-3);
        run.report.check_ge(k.name + ".l_lap_slack", b.l_lap_slack, -1e-3);

        const HessianReport h = hessian_bound_check(*k.c, k.p, k.q, k.tb, k.y);
        run.report.check_ge(k.name + ".hessian_slack", h.slack, -1e-3);
        run.report.check_ge(k.name + ".hessian_trace_slack", h.lap_slack_K, -1e-3);
    }
    const LChart e = euclid_chart(2);
    const double tb = 0.7;
    const HessianReport he = hessian_bound_check(e, Vec3::Zero(), Vec3(0.9, 0.4, 0), tb, Vec3(0.3, 1.0, 0));
    run.report.check_le("euclidean.hessian_equality", std::abs(he.slack), 1e-6, "|slack| of the Hessian bound");
    run.report.check_le("euclidean.hessian_value", std::abs(he.hess - 1 / std::sqrt(tb)), 1e-6,
                        "|Hess L(y, y) - 1/sqrt(tau_bar)|");
}

}  // namespace

void lgeo_identities_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    s["torus.T"] = s["sphere.r"] = s["sphere.T"] = KeyType::real;
    s["exactness.trials"] = KeyType::integer;
}

void lgeo_identities(Run& run) {
    if (suite_on(run.cfg, "exactness")) run.phase("exactness", [&] { exactness(run); });
    if (suite_on(run.cfg, "identities")) run.phase("identities", [&] { identities(run); });
}

// reduced_volume

namespace {

void volume_table(Run& run, const std::string& name, const std::vector<VolumeEntry>& v) {
    Table& tab = run.report.table(name, {"tau", "V_tilde", "min_l", "balance_density", "failures"});
    for (const auto& e : v) tab.rows.push_back({e.tau, e.V, e.min_l, e.balance_density, double(e.failures)});
}

void monotone_volume(Run& run, const std::string& name, const LChart& c, const std::vector<VolumeEntry>& v) {
    const int n = c.n();
    const double cap = std::pow(4 * pi, 0.5 * n);
    double rise = -1e300, over = -1e300, min_l = -1e300;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) rise = std::max(rise, v[i].V - v[i - 1].V);
        over = std::max(over, v[i].V - cap);
        min_l = std::max(min_l, v[i].min_l - 0.5 * n);
        failed += v[i].aborted ? 1 : 0;
    }
    run.report.check_le(name + ".aborted_taus", double(failed), 0.0, "taus with more than 1% failed BVPs");
    if (v.size() > 1) run.report.check_le(name + ".non_increasing", rise, 1e-4, "max V(tau_{i+1}) - V(tau_i)");
    run.report.check_le(name + ".bound", over, 1e-4, "max V - (4 pi)^{n/2}");
    run.report.check_le(name + ".min_l", min_l, 0.05, "max over tau of min l - n/2");
}

}  // namespace

void reduced_volume_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    s["torus.T"] = s["sphere.r"] = s["sphere.T"] = s["euclid.scale"] = KeyType::real;
    s["euclid.taus"] = s["sphere.taus"] = s["torus.taus"] = KeyType::reals;
    s["torus.stride"] = s["torus.steps"] = KeyType::integer;
}

void reduced_volume_experiment(Run& run) {
    if (suite_on(run.cfg, "euclidean"))
        run.phase("euclidean", [&] {
            const auto taus = run.cfg.get_doubles("euclid.taus", {0.25, 0.5, 1.0});
            for (int n : {1, 2, 3}) {
                const LChart c = euclid_chart(n, run.cfg.get_double("euclid.scale", 1.0));
                const auto v = reduced_volume(c, Vec3::Zero(), taus);
                volume_table(run, "euclidean_n" + std::to_string(n), v);
                double worst = 0.0, min_l = -1e300;
                for (const auto& e : v) {
                    worst = std::max(worst, std::abs(e.V - std::pow(4 * pi, 0.5 * n)));
                    min_l = std::max(min_l, e.min_l - 0.5 * n);
                }
                run.report.check_le("euclidean.V n=" + std::to_string(n), worst, 1e-6, "max |V - (4 pi)^{n/2}|");
                run.report.check_le("euclidean.min_l n=" + std::to_string(n), min_l, 0.05);
            }
        });
    if (suite_on(run.cfg, "sphere"))
        run.phase("sphere", [&] {
            const LChart s = sphere_chart(run.cfg);
            const auto v = reduced_volume(s, s.base_point(), run.cfg.get_doubles("sphere.taus", {0.1, 0.3, 0.5, 0.7}));
            volume_table(run, "sphere", v);
            monotone_volume(run, "sphere", s, v);
            run.report.check_ge("sphere.scalar_floor", scalar_floor_slack(s), -1e-6);
        });
    if (suite_on(run.cfg, "torus"))
        run.phase("torus", [&] {
            const LChart t = torus_chart(run.cfg);
            VolumeOptions o;
            o.resolution = static_cast<int>(run.cfg.get_int("torus.stride", 1));
            o.bvp.steps = static_cast<int>(run.cfg.get_int("torus.steps", 128));
            const auto taus = run.cfg.get_doubles("torus.taus", {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0});
            std::vector<ReducedField> fields;
            const auto v = reduced_volume(t, Vec3::Zero(), taus, o, &fields);
            volume_table(run, "torus", v);
            monotone_volume(run, "torus", t, v);
            run.report.check_ge("torus.scalar_floor", scalar_floor_slack(t), -1e-6);
            for (const auto& f : fields) {
                Table& tab = run.report.table("torus_field_tau" + format_number(f.tau_bar),
                                              {"qx", "qy", "L", "l", "v_x", "v_y", "n_minima"});
                for (const auto& p : f.points)
                    tab.rows.push_back({p.q[0], p.q[1], p.L, p.l, p.v[0], p.v[1], double(p.n_minima)});
            }
        });
}

}  // namespace plab::cli
