// flow_monotonicity, entropy_w and spectral_sweep

#include <cmath>
#include <limits>
#include <numbers>

#include "common.hpp"
#include "plab/flow/potential.hpp"
#include "plab/flow/ricci.hpp"
#include "plab/functionals/eigen.hpp"
#include "plab/functionals/entropy.hpp"
#include "plab/functionals/mu.hpp"
#include "plab/geometry/ops.hpp"

namespace plab::cli {

using std::numbers::pi;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const ConformalTorus& as_torus(const Backend& b) { return std::get<ConformalTorus>(b); }

// Terminal potential with unit mass on the last snapshot.
Grid terminal_potential(const MetricHistory& h, std::mt19937_64 rng, double amp) {
    const Backend& bT = h.forward_snapshot(h.size() - 1);
    Grid f = random_field(as_torus(bT), rng, amp);
    f += std::log(integrate(bT, Grid((-f).exp())));
    return f;
}

Mat3 proj(int n) {
    Mat3 p = Mat3::Zero();
    for (int i = 0; i < n; ++i) p(i, i) = 1.0;
    return p;
}

// |x|^2 / (4 tau) on the first n coordinates, compatible at scale tau
EuclidField gaussian_w(int n, double tau) {
    const Mat3 P = proj(n);
    return {[=](const Vec3& x) {
        const Vec3 y = P * x;
        Jet j;
        j.v = y.squaredNorm() / (4 * tau);
        j.g = y / (2 * tau);
        j.h = P / (2 * tau);
        return j;
    }};
}

EuclideanSpace euclid(int n) {
    EuclideanSpace e;
    e.n = n;
    if (n == 3) e.nodes = 64;
    return e;
}

FlowConfig flow_config(const ExperimentConfig& cfg) {
    FlowConfig fc;
    fc.cfl = cfg.get_double("flow.cfl", 0.2);
    return fc;
}

void euclidean_law(Run& run) {
    const double t0 = run.cfg.get_double("euclid.t0", 1.0);
    const double T = run.cfg.get_double("euclid.T", 0.5);
    const auto times = run.cfg.get_doubles("euclid.times", {0.0, 0.25, 0.5});
    Table& tab = run.report.table("euclidean_F", {"n", "t", "F", "exact"});
    for (int n = 1; n <= 3; ++n) {
        const MetricHistory h = run_history(euclid(n), T);
        const GaussianMixture w{{{1.0, Vec3::Zero(), t0 - T}}};
        const PotentialTrajectory tr = evolve_potential(h, w, PotentialMode::plain);
        double worst = 0.0;
        for (double t : times) {
            std::size_t best = 0;
            for (std::size_t i = 0; i < tr.t.size(); ++i)
                if (std::abs(tr.t[i] - t) < std::abs(tr.t[best] - t)) best = i;
            if (std::abs(tr.t[best] - t) > 1e-9) {
                run.report.fail("euclidean.F_law n=" + std::to_string(n), "no stored time at t = " + format_number(t));
                continue;
            }
            const double F = eval_F(tr, best);
            const double exact = n / (2 * (t0 - tr.t[best]));
            tab.rows.push_back({double(n), tr.t[best], F, exact});
            worst = std::max(worst, std::abs(F - exact));
        }
        run.report.check_le("euclidean.F_law n=" + std::to_string(n), worst, 1e-8, "max |F - n/(2(t0 - t))|");
    }
}

void conservation(Run& run) {
    const auto grids = run.cfg.get_ints("conservation.grids", {16, 32, 64});
    const int main_n = resolution(run.cfg, 64);
    const double T = run.cfg.get_double("flow.T", 0.5);
    const double amp = run.cfg.get_double("potential.amp", 0.2);
    const int stride = static_cast<int>(run.cfg.get_int("flow.stride", 4));
    Table& tab = run.report.table("mass_error", {"n", "max_mass_error"});
    std::vector<double> errors;
    double main_error = inf;
    for (long n : grids) {
        const ConformalTorus t0 = torus_from(run.cfg, "torus", static_cast<int>(n), 0.1, "mixed");
        const MetricHistory h = run_history(t0, T, flow_config(run.cfg));
        const PotentialTrajectory tr =
            evolve_potential(h, terminal_potential(h, run.rng("conservation"), amp), PotentialMode::plain, 0.0, stride);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            worst = std::max(worst, std::abs(integrate(tr.metric(i), Grid((-std::get<Grid>(tr.f[i])).exp())) - 1.0));
        tab.rows.push_back({double(n), worst});
        errors.push_back(worst);
        if (n == main_n || grids.size() == 1) main_error = worst;
    }
    if (main_error == inf) main_error = errors.back();
    run.report.check_le("conservation.mass", main_error, 1e-6, "max |int e^{-f} dV - 1| over [0, T]");
    for (std::size_t i = 1; i < errors.size(); ++i)
        check_order(run.report,
                    "conservation.order n=" + std::to_string(grids[i - 1]) + "->" + std::to_string(grids[i]),
                    errors[i - 1], errors[i], 2.0, 1e-11);
}

void monotonicity(Run& run) {
    const int n = resolution(run.cfg, 64);
    const double T = run.cfg.get_double("flow.T", 0.5);
    // the rate check differences stored samples, so the potential is kept at every step
    const int stride = static_cast<int>(run.cfg.get_int("monotone.stride", 1));
    const int every = static_cast<int>(run.cfg.get_int("monotone.lambda_every", 40));
    const ConformalTorus t0 = torus_from(run.cfg, "torus", n, 0.1, "mixed");
    const MetricHistory h = run_history(t0, T, flow_config(run.cfg));
    const PotentialTrajectory tr = evolve_potential(
        h, terminal_potential(h, run.rng("monotonicity"), run.cfg.get_double("potential.amp", 0.2)),
        PotentialMode::plain, 0.0, stride);

    std::vector<double> F(tr.t.size()), P(tr.t.size());
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        F[i] = eval_F(tr, i);
        P[i] = production_F(tr.metric(i), tr.f[i]);
    }
    run.report.check_ge("monotone.F", min_increment(F), -1e-5, "min F(t_{i+1}) - F(t_i) with the coupled potential");
    double worst_rate = 0.0, min_P = inf;
    std::vector<double> rate(F.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i + 1 < F.size(); ++i) {
        rate[i] = (F[i + 1] - F[i - 1]) / (tr.t[i + 1] - tr.t[i - 1]);
        worst_rate = std::max(worst_rate, rel_error(rate[i], P[i]));
    }
    for (double p : P) min_P = std::min(min_P, p);
    run.report.check_le("monotone.dF/dt vs production_F", worst_rate, 1e-4, "max relative error, central differences");
    run.report.check_ge("monotone.production_F", min_P, 0.0);

    std::vector<double> l1, l2, lt;
    Table& tab = run.report.table("flow", {"t", "F", "lambda", "production_F", "lambda_k2", "lambda_half_R", "dF_dt"});
    Grid warm1, warm2;
    for (std::size_t i = 0; i < tr.t.size(); i += static_cast<std::size_t>(every)) {
        const Backend m = tr.metric(i);
        const SpectralResult a = lambda_k(m, 1.0, warm1.size() ? &warm1 : nullptr);
        const SpectralResult b = lambda_k(m, 2.0, warm2.size() ? &warm2 : nullptr);
        warm1 = std::get<Grid>(a.u0);
        warm2 = std::get<Grid>(b.u0);
        l1.push_back(a.lambda);
        l2.push_back(b.lambda);
        // -lap + R/2 is (-4 lap + 2R) / 4
        lt.push_back(b.lambda / 4);
        tab.rows.push_back({tr.t[i], F[i], a.lambda, P[i], b.lambda, b.lambda / 4, rate[i]});
    }
    run.report.check_ge("monotone.lambda", min_increment(l1), -1e-5, "k = 1");
    run.report.check_ge("monotone.lambda_k k=2", min_increment(l2), -1e-5);
    run.report.check_ge("monotone.lambda(-lap + R/2)", min_increment(lt), -1e-5);
}

}  // namespace

void flow_monotonicity_schema(ConfigSchema& s) {
    s["euclid.t0"] = s["euclid.T"] = KeyType::real;
    s["euclid.times"] = KeyType::reals;
    add_torus_keys(s, "torus");
    s["flow.T"] = s["flow.cfl"] = s["potential.amp"] = KeyType::real;
    s["flow.stride"] = s["monotone.stride"] = s["monotone.lambda_every"] = KeyType::integer;
    s["conservation.grids"] = KeyType::integers;
}

void flow_monotonicity(Run& run) {
    if (suite_on(run.cfg, "euclidean")) run.phase("euclidean", [&] { euclidean_law(run); });
    if (suite_on(run.cfg, "conservation")) run.phase("conservation", [&] { conservation(run); });
    if (suite_on(run.cfg, "monotonicity")) run.phase("monotonicity", [&] { monotonicity(run); });
}

// entropy_w

namespace {

void soliton(Run& run) {
    const double tau0 = run.cfg.get_double("soliton.tau0", 1.0);
    const double T = run.cfg.get_double("soliton.T", 0.5);
    const int every = static_cast<int>(run.cfg.get_int("soliton.every", 10));
    Table& tab = run.report.table("soliton_W", {"n", "t", "tau", "W", "production_W"});
    for (int n = 1; n <= 3; ++n) {
        const MetricHistory h = run_history(euclid(n), T);
        const GaussianMixture w{{{1.0, Vec3::Zero(), tau0 - T}}};
        const PotentialTrajectory tr = evolve_potential(h, w, PotentialMode::normalized, tau0);
        double worst_W = 0.0, worst_P = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); i += static_cast<std::size_t>(every)) {
            const PotentialConfig pc{tr.f[i], tr.tau(i), true};
            const double W = eval_W(tr.metric(i), pc), P = production_W(tr.metric(i), pc);
            tab.rows.push_back({double(n), tr.t[i], tr.tau(i), W, P});
            worst_W = std::max(worst_W, std::abs(W));
            worst_P = std::max(worst_P, std::abs(P));
        }
        run.report.check_le("soliton.W n=" + std::to_string(n), worst_W, 1e-9, "max |W| along the Gaussian soliton");
        run.report.check_le("soliton.production_W n=" + std::to_string(n), worst_P, 1e-10);
    }
}

void flat_space(Run& run) {
    const int count = static_cast<int>(run.cfg.get_int("flat.count", 50));
    const double tau = run.cfg.get_double("flat.tau", 0.5);
    const double amp = run.cfg.get_double("flat.amp", 0.3);
    auto rng = run.rng("flat");
    std::normal_distribution<double> nd(0.0, amp);
    const EuclideanSpace e = euclid(2);
    const EuclidField base = gaussian_w(2, tau);
    double lowest = inf;
    Table& tab = run.report.table("flat_W", {"trial", "a", "b", "c", "W"});
    for (int k = 0; k < count; ++k) {
        const double a = nd(rng), b = nd(rng), c = nd(rng);
        // base + a sin(x + c) + b cos(2y), then normalized
        const EuclidField f{[=](const Vec3& x) {
            Jet j = base.f(x);
            const double s = std::sin(x[0] + c), co = std::cos(x[0] + c);
            const double s2 = std::sin(2 * x[1]), c2 = std::cos(2 * x[1]);
            j.v += a * s + b * c2;
            j.g[0] += a * co;
            j.g[1] += -2 * b * s2;
            j.h(0, 0) += -a * s;
            j.h(1, 1) += -4 * b * c2;
            return j;
        }};
        const double W = eval_W(e, normalize_potential(e, f, tau));
        tab.rows.push_back({double(k), a, b, c, W});
        lowest = std::min(lowest, W);
    }
    run.report.check_ge("flat.W_lower_bound", lowest, -1e-9, "min W over seeded compatible potentials on R^2");
}

void scaling(Run& run) {
    const ConformalTorus t = torus_from(run.cfg, "torus", resolution(run.cfg, 32), 0.1, "bumpy");
    auto rng = run.rng("scaling");
    const Grid f = random_field(t, rng, 0.2);
    const double c = 1.7, b = 0.4;
    // in two dimensions F(c^2 g, f + b) = e^{-b} F(g, f)
    const double F0 = eval_F(t, f);
    const double F1 = eval_F(rescale(t, c * c), Grid(f + b));
    run.report.check_le("scaling.F", std::abs(F1 - std::exp(-b) * F0) / std::max(1.0, std::abs(F0)), 1e-12);
    const double tau = 0.3;
    const PotentialConfig pc = normalize_potential(t, f, tau);
    const double W0 = eval_W(t, pc);
    double worst = 0.0;
    for (double alpha : {0.25, 2.3, 1 / tau}) {
        const double W1 = eval_W(rescale(t, alpha), PotentialConfig{pc.f, alpha * tau, true});
        worst = std::max(worst, std::abs(W1 - W0) / std::max(1.0, std::abs(W0)));
    }
    run.report.check_le("scaling.W", worst, 1e-12, "W(alpha g, alpha tau) against W(g, tau), alpha = 0.25, 2.3, 1/tau");
}

void mu_sweep(Run& run) {
    const double L = run.cfg.get_double("mu.L", 0.5);
    const int n = static_cast<int>(run.cfg.get_int("mu.n", 16));
    const auto taus = run.cfg.get_doubles("mu.taus", {0.2, 0.1, 0.05, 0.02, 0.01});
    const ConformalTorus flat = make_torus(n, n, L, L);
    Table& tab = run.report.table("mu_flat", {"tau", "mu", "constant_potential_W", "iterations"});
    std::vector<double> values;
    bool converged = true;
    for (double tau : taus) {
        const MuResult r = mu(flat, tau);
        converged = converged && r.converged;
        values.push_back(r.mu);
        tab.rows.push_back({tau, r.mu, std::log(L * L / (4 * pi * tau)) - 2, double(r.iterations)});
    }
    run.report.check_ge("mu.converged", converged ? 1.0 : 0.0, 1.0);
    run.report.check_ge("mu.increasing", min_increment(values), 0.0, "min mu(tau_{i+1}) - mu(tau_i) as tau decreases");
    if (!values.empty())
        run.report.check_le("mu.negative", values.back(), 0.0, "mu at tau = " + format_number(taus.back()));
}

}  // namespace

void entropy_w_schema(ConfigSchema& s) {
    s["soliton.tau0"] = s["soliton.T"] = s["flat.tau"] = s["flat.amp"] = s["mu.L"] = KeyType::real;
    s["soliton.every"] = s["flat.count"] = s["mu.n"] = KeyType::integer;
    s["mu.taus"] = KeyType::reals;
    add_torus_keys(s, "torus");
}

void entropy_w(Run& run) {
    if (suite_on(run.cfg, "soliton")) run.phase("soliton", [&] { soliton(run); });
    if (suite_on(run.cfg, "flat")) run.phase("flat", [&] { flat_space(run); });
    if (suite_on(run.cfg, "scaling")) run.phase("scaling", [&] { scaling(run); });
    if (suite_on(run.cfg, "mu")) run.phase("mu", [&] { mu_sweep(run); });
}

// spectral_sweep

void spectral_sweep_schema(ConfigSchema& s) {
    add_torus_keys(s, "torus");
    s["flow.T"] = s["flow.cfl"] = KeyType::real;
    s["sweep.ks"] = s["sphere.radii"] = KeyType::reals;
    s["sweep.samples"] = KeyType::integer;
}

void spectral_sweep(Run& run) {
    run.phase("torus", [&] {
        const ConformalTorus t0 = torus_from(run.cfg, "torus", resolution(run.cfg, 32), 0.1, "mixed");
        const MetricHistory h = run_history(t0, run.cfg.get_double("flow.T", 0.5), flow_config(run.cfg));
        const auto ks = run.cfg.get_doubles("sweep.ks", {1.0, 2.0, 3.0});
        const long samples = std::max(2L, run.cfg.get_int("sweep.samples", 11));
        std::vector<std::string> cols{"t"};
        for (double k : ks) cols.push_back("lambda_k" + format_number(k));
        Table& tab = run.report.table("lambda_k", cols);
        std::vector<std::vector<double>> series(ks.size());
        std::vector<Grid> warm(ks.size());
        for (long s = 0; s < samples; ++s) {
            const std::size_t i = static_cast<std::size_t>(s * (h.size() - 1) / (samples - 1));
            std::vector<double> row{h.time(i)};
            for (std::size_t j = 0; j < ks.size(); ++j) {
                const SpectralResult r = lambda_k(h.snapshot(i), ks[j], warm[j].size() ? &warm[j] : nullptr);
                warm[j] = std::get<Grid>(r.u0);
                series[j].push_back(r.lambda);
                row.push_back(r.lambda);
            }
            tab.rows.push_back(row);
        }
        for (std::size_t j = 0; j < ks.size(); ++j)
            run.report.check_ge("torus.lambda_k monotone k=" + format_number(ks[j]), min_increment(series[j]), -1e-5);
    });
    run.phase("sphere", [&] {
        // R = n(n-1)/r^2 is constant, so lambda_k = k R
        double worst = 0.0;
        Table& tab = run.report.table("sphere_lambda", {"n", "r", "k", "lambda", "exact"});
        for (int n = 2; n <= 3; ++n)
            for (double r : run.cfg.get_doubles("sphere.radii", {0.5, 1.0, 2.0}))
                for (double k : run.cfg.get_doubles("sweep.ks", {1.0, 2.0, 3.0})) {
                    const double l = lambda_k(RoundSphere{n, r}, k).lambda, exact = k * n * (n - 1) / (r * r);
                    tab.rows.push_back({double(n), r, k, l, exact});
                    worst = std::max(worst, rel_error(l, exact));
                }
        run.report.check_le("sphere.lambda_k closed form", worst, 1e-12, "max relative error");
    });
}

}  // namespace plab::cli
