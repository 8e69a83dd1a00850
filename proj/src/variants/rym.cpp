#include "plab/variants/rym.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "plab/flow/ricci.hpp"
#include "plab/functionals/points.hpp"

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Fields {
    Grid w, a1, a2;
};

Fields axpy(const Fields& a, double s, const Fields& d) { return {a.w + s * d.w, a.a1 + s * d.a1, a.a2 + s * d.a2}; }

RymState pack(const RymState& like, const Fields& f) {
    RymState st = like;
    st.g.base.u = f.w;
    st.a1 = f.a1;
    st.a2 = f.a2;
    return st;
}

Fields rhs(const RymState& st, bool evolve_metric) {
    const TorusMetric g = st.g.metric();
    const Grid F = rym_curvature(g, st.a1, st.a2);
    const Covector d = rym_codiff(g, F);
    Grid dw = Grid::Zero(F.size());
    if (evolve_metric) {
        const Grid base = st.g.conformal() ? ricci_rhs(st.g.base) : Grid(-0.5 * g.R);
        dw = base + 0.25 * rym_F_sq(g, F);
    }
    return {dw, -d.x, -d.y};
}

Grid cov_dot(const TorusMetric& g, const Covector& a, const Covector& b) {
    return g.i11 * a.x * b.x + g.i12 * (a.x * b.y + a.y * b.x) + g.i22 * a.y * b.y;
}

Covector beta(const TorusMetric& g, const Grid& F, const Grid& f) {
    const Covector d = rym_codiff(g, F), c = rym_contract_grad(g, F, f);
    return {d.x + c.x, d.y + c.y};
}

void check_fields(const TorusMetric& g, std::initializer_list<const Grid*> gs) {
    for (const Grid* a : gs) check_grid(*a, g.sp().nx(), g.sp().ny(), "rym field");
}

}  // namespace

Grid rym_curvature(const TorusMetric& g, const Grid& a1, const Grid& a2) { return g.sp().dx(a2) - g.sp().dy(a1); }

Grid rym_F_sq(const TorusMetric& g, const Grid& F12) { return 2.0 * F12.square() / g.sqrt_det.square(); }

TorusTensor rym_eta(const TorusMetric& g, const Grid& F12) { return Grid(0.5 * rym_F_sq(g, F12)) * g.metric(); }

Covector rym_codiff(const TorusMetric& g, const Grid& F12) {
    const Grid psi = F12 / g.sqrt_det;
    const Grid px = g.sp().dx(psi), py = g.sp().dy(psi);
    return {g.sqrt_det * (g.i12 * px + g.i22 * py), -g.sqrt_det * (g.i11 * px + g.i12 * py)};
}

Covector rym_contract_grad(const TorusMetric& g, const Grid& F12, const Grid& f) {
    const Grid fx = g.sp().dx(f), fy = g.sp().dy(f);
    const Grid X1 = g.i11 * fx + g.i12 * fy, X2 = g.i12 * fx + g.i22 * fy;
    return {-X2 * F12, X1 * F12};
}

RymState gauge_transform(const RymState& st, const Grid& chi) {
    const Spectral2D sp = st.g.base.spectral();
    RymState o = st;
    o.a1 += sp.dx(chi);
    o.a2 += sp.dy(chi);
    return o;
}

RymState step_rym(const RymState& st, double dt, double cfl, bool evolve_metric) {
    if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
    check_grid(st.a1, st.g.base.nx, st.g.base.ny, "connection");
    check_grid(st.a2, st.g.base.nx, st.g.base.ny, "connection");
    const double limit = st.g.cfl_dt(cfl);
    if (dt > limit * (1 + 1e-6)) throw CflViolation(dt, limit);
    const Fields y{st.g.base.u, st.a1, st.a2};
    const Fields k1 = rhs(st, evolve_metric);
    const Fields k2 = rhs(pack(st, axpy(y, 0.5 * dt, k1)), evolve_metric);
    const Fields k3 = rhs(pack(st, axpy(y, 0.5 * dt, k2)), evolve_metric);
    const Fields k4 = rhs(pack(st, axpy(y, dt, k3)), evolve_metric);
    Fields out = axpy(y, dt / 6.0, k1);
    out = axpy(out, dt / 3.0, k2);
    out = axpy(out, dt / 3.0, k3);
    out = axpy(out, dt / 6.0, k4);
    if (!out.w.allFinite() || !out.a1.allFinite() || !out.a2.allFinite())
        throw std::domain_error("Ricci Yang-Mills step produced non-finite values");
    return pack(st, out);
}

RymRun run_rym(const RymState& st0, double T, const VariantFlowConfig& cfg, bool evolve_metric) {
    const auto [n, dt] = plan_steps(T, st0.g.cfl_dt(cfg.cfl), cfg);
    RymRun r;
    r.dt = dt;
    r.metric_evolves = evolve_metric;
    r.t.push_back(0.0);
    r.states.push_back(st0);
    const double check = std::min(1.0, 2 * cfg.cfl);
    for (long k = 1; k <= n; ++k) {
        r.states.push_back(step_rym(r.states.back(), dt, check, evolve_metric));
        r.t.push_back(k * dt);
    }
    return r;
}

double eval_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f) {
    PointSet p = point_set(g, f);
    const Grid F2 = rym_F_sq(g, F12);
    for (std::size_t i = 0; i < p.size(); ++i) p.R[i] -= 0.25 * F2[i];
    return eval_F(p);
}

double eval_F_rym(const RymState& st, const Grid& f) {
    const TorusMetric g = st.g.metric();
    return eval_F_rym(g, rym_curvature(g, st.a1, st.a2), f);
}

double eval_W_rym_raw(const TorusMetric& g, const Grid& F12, const Grid& f, double tau) {
    PointSet p = point_set(g, f);
    const Grid F2 = rym_F_sq(g, F12);
    for (std::size_t i = 0; i < p.size(); ++i) p.R[i] += 0.25 * F2[i];
    return eval_W_raw(p, tau);
}

double eval_W_rym(const RymState& st, const Grid& f, double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    const TorusMetric g = st.g.metric();
    const double M = g.integrate((-f).exp()) / (4 * kPi * tau);
    if (std::abs(M - 1.0) > 1e-8) throw IncompatiblePotential("potential has mass " + std::to_string(M));
    return eval_W_rym_raw(g, rym_curvature(g, st.a1, st.a2), f, tau);
}

double delta_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f, const RymVariation& var) {
    check_fields(g, {&F12, &f, &var.h, &var.v.xx, &var.v.xy, &var.v.yy, &var.alpha.x, &var.alpha.y});
    const Grid& F = F12;
    const Grid F2 = rym_F_sq(g, F);
    const TorusTensor B = g.ricci() - 0.5 * rym_eta(g, F) + g.hessian(f);
    const Grid bracket = 2.0 * g.laplacian(f) - g.grad_sq(f) + g.R - 0.25 * F2;
    const Grid integrand =
        -g.contract(var.v, B) - cov_dot(g, var.alpha, beta(g, F, f)) + (0.5 * g.trace(var.v) - var.h) * bracket;
    return g.integrate(integrand * (-f).exp());
}

double delta_W_rym(const TorusMetric& g, const Grid& F12, const Grid& f, double tau,
                   const RymVariation& var) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    check_fields(g, {&F12, &f, &var.h, &var.v.xx, &var.v.xy, &var.v.yy, &var.alpha.x, &var.alpha.y});
    const Grid& F = F12;
    const Grid F2 = rym_F_sq(g, F);
    const Grid g2 = g.grad_sq(f);
    const TorusTensor C = g.ricci() + 0.5 * rym_eta(g, F) + g.hessian(f);
    const Grid bracket = tau * (2.0 * g.laplacian(f) - g2 + g.R + 0.25 * F2) + f - 2.0;
    const Grid integrand = var.sigma * (g2 + g.R + 0.25 * F2) - tau * g.contract(var.v, C) +
                           tau * cov_dot(g, var.alpha, beta(g, F, f)) + var.h +
                           bracket * (0.5 * g.trace(var.v) - var.h - var.sigma / tau);
    return g.integrate(integrand * (-f).exp()) / (4 * kPi * tau);
}

double production_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f) {
    const Grid& F = F12;
    const TorusTensor B = g.ricci() - 0.5 * rym_eta(g, F) + g.hessian(f);
    const Covector b = beta(g, F, f);
    return g.integrate((2.0 * g.norm_sq(B) + cov_dot(g, b, b)) * (-f).exp());
}

double rym_W_rate(const TorusMetric& g, const Grid& F12, const Grid& f, double tau) {
    const Grid& F = F12;
    const TorusTensor eta = rym_eta(g, F);
    const TorusTensor B = g.ricci() - 0.5 * eta + g.hessian(f);
    const Covector b = beta(g, F, f);
    const Grid integrand = 2.0 * tau * g.norm_sq(B - (0.5 / tau) * g.metric()) + 2.0 * tau * g.contract(B, eta) -
                           tau * cov_dot(g, b, b) - 0.75 * rym_F_sq(g, F);
    return g.integrate(integrand * (-f).exp()) / (4 * kPi * tau);
}

double rym_W_rate_squares(const TorusMetric& g, const Grid& F12, const Grid& f, double tau) {
    const Grid& F = F12;
    const TorusTensor eta = rym_eta(g, F);
    const TorusTensor B = g.ricci() - 0.5 * eta + g.hessian(f);
    const Covector b = beta(g, F, f);
    const Grid integrand =
        2.0 * tau * g.norm_sq(B) + tau * cov_dot(g, b, b) + 0.25 * rym_F_sq(g, F) - 0.5 * tau * g.norm_sq(eta);
    return g.integrate(integrand * (-f).exp()) / (4 * kPi * tau);
}

SpectralResult lambda_rym(const TorusMetric& g, const Grid& F12, const Grid* warm) {
    return lowest_eigen(g, Grid(g.R - 0.25 * rym_F_sq(g, F12)), warm);
}

SpectralResult lambda_rym(const RymState& st, const Grid* warm) {
    const TorusMetric g = st.g.metric();
    return lambda_rym(g, rym_curvature(g, st.a1, st.a2), warm);
}

double ym_energy(const RymState& st) {
    const TorusMetric g = st.g.metric();
    return g.integrate(rym_F_sq(g, rym_curvature(g, st.a1, st.a2)));
}

RymSeries rym_series(const RymRun& run, double T, bool with_lambda) {
    if (run.states.empty()) throw std::invalid_argument("empty Ricci Yang-Mills history");
    if (!run.metric_evolves) throw std::invalid_argument("rym_series needs a run with an evolving metric");
    const double t_end = run.t.back();
    if (!(T > t_end)) throw std::invalid_argument("tau = T - t must stay positive over the run");
    std::vector<TorusMetric> gs;
    std::vector<Grid> P;
    for (const auto& st : run.states) {
        gs.push_back(st.g.metric());
        P.push_back(gs.back().R - 0.5 * rym_F_sq(gs.back(), rym_curvature(gs.back(), st.a1, st.a2)));
    }
    Grid w = Grid::Ones(P.back().size());
    w /= gs.back().integrate(w);
    const std::vector<Grid> ws = conjugate_density(gs, P, run.dt, w);
    RymSeries s;
    Grid warm;
    for (std::size_t k = 0; k < ws.size(); ++k) {
        const std::size_t i = 2 * k;
        const RymState& st = run.states[i];
        const TorusMetric& g = gs[i];
        const double tau = T - run.t[i];
        const Grid f = -ws[k].log();
        const Grid fw = f - std::log(4 * kPi * tau);
        const Grid F = rym_curvature(g, st.a1, st.a2);
        const Grid F2 = rym_F_sq(g, F);
        s.t.push_back(run.t[i]);
        s.tau.push_back(tau);
        s.F.push_back(eval_F_rym(g, F, f));
        s.production_F.push_back(production_F_rym(g, F, f));
        s.W.push_back(eval_W_rym_raw(g, F, fw, tau));
        s.W_rate.push_back(rym_W_rate(g, F, fw, tau));
        s.W_rate_squares.push_back(rym_W_rate_squares(g, F, fw, tau));
        s.energy.push_back(g.integrate(F2));
        s.sup_F_sq.push_back(F2.maxCoeff());
        s.mass_error.push_back(g.integrate(ws[k]) - 1.0);
        if (with_lambda) {
            const SpectralResult ev = lambda_rym(g, F, warm.size() ? &warm : nullptr);
            warm = std::get<Grid>(ev.u0);
            s.lambda.push_back(ev.lambda);
        }
    }
    s.dFdt = central_rate(s.F, 2 * run.dt);
    s.dWdt = central_rate(s.W, 2 * run.dt);
    return s;
}

LowEnergyReport low_energy_check(const RymSeries& s, double tol) {
    if (s.t.empty()) throw std::invalid_argument("empty Ricci Yang-Mills history");
    LowEnergyReport r;
    r.t = s.t;
    r.dWdt = s.dWdt;
    for (std::size_t i = 0; i < s.t.size(); ++i) r.energy_scale.push_back(s.tau[i] * s.sup_F_sq[i]);
    r.decreasing_scale = r.energy_scale.back() < r.energy_scale.front();
    // scan backwards for the last sampled violation
    std::size_t first_ok = s.t.size();
    for (std::size_t i = s.t.size(); i-- > 0;) {
        if (std::isnan(s.dWdt[i])) continue;
        if (s.dWdt[i] < -tol) break;
        first_ok = i;
    }
    if (first_ok < s.t.size()) {
        r.found = true;
        r.t0 = s.t[first_ok];
    }
    return r;
}

}  // namespace plab
