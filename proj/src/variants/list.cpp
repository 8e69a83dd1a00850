#include "plab/variants/list.hpp"

#include <cmath>
#include <numbers>

#include "plab/flow/ricci.hpp"
#include "plab/functionals/points.hpp"

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Fields {
    Grid w, h11, h12, h22, u;
};

Fields axpy(const Fields& a, double s, const Fields& d) {
    return {a.w + s * d.w, a.h11 + s * d.h11, a.h12 + s * d.h12, a.h22 + s * d.h22, a.u + s * d.u};
}

Fields unpack(const ListState& st) {
    const auto N = st.u.size();
    const bool id = st.g.h11.size() == 0;
    return {st.g.base.u, id ? Grid::Ones(N) : st.g.h11, id ? Grid::Zero(N) : st.g.h12, id ? Grid::Ones(N) : st.g.h22,
            st.u};
}

ListState pack(const ListState& like, const Fields& f) {
    ListState st = like;
    st.g.base.u = f.w;
    st.g.h11 = f.h11;
    st.g.h12 = f.h12;
    st.g.h22 = f.h22;
    st.u = f.u;
    return st;
}

// dw = -R/2 + |du|^2, dh = e^{-2w} 4 du (x) du - 2 |du|^2 h, du = lap u
Fields rhs(const ListState& st) {
    const TorusMetric g = st.g.metric();
    const Fields f = unpack(st);
    const Grid ux = g.sp().dx(st.u), uy = g.sp().dy(st.u);
    const Grid du2 = g.grad_sq(st.u);
    const Grid dw = st.g.conformal() ? Grid(ricci_rhs(st.g.base) + du2) : Grid(-0.5 * g.R + du2);
    const Grid em2w = (-2.0 * f.w).exp();
    return {dw, 4.0 * em2w * ux * ux - 2.0 * du2 * f.h11, 4.0 * em2w * ux * uy - 2.0 * du2 * f.h12,
            4.0 * em2w * uy * uy - 2.0 * du2 * f.h22, g.laplacian(st.u)};
}

TorusTensor du_du(const TorusMetric& g, const Grid& u) {
    const Grid ux = g.sp().dx(u), uy = g.sp().dy(u);
    return {ux * ux, ux * uy, uy * uy};
}

}  // namespace

Grid list_S(const TorusMetric& g, const Grid& u) { return g.R - 2.0 * g.grad_sq(u); }

TorusTensor list_S_tensor(const TorusMetric& g, const Grid& u) { return g.ricci() - 2.0 * du_du(g, u); }

double list_defect(const ListState& st) {
    const TorusMetric g = st.g.metric();
    const TorusTensor D = 4.0 * du_du(g, st.u);
    const TorusTensor rate = (-1.0 * g.R) * g.metric() + D;
    const TorusTensor tf = D - Grid(0.5 * g.trace(D)) * g.metric();
    const double whole = g.integrate(g.norm_sq(rate));
    return whole > 0 ? std::sqrt(g.integrate(g.norm_sq(tf)) / whole) : 0.0;
}

ListState step_list(const ListState& st, double dt, double cfl) {
    if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
    check_grid(st.u, st.g.base.nx, st.g.base.ny, "list field");
    const double limit = st.g.cfl_dt(cfl);
    if (dt > limit * (1 + 1e-6)) throw CflViolation(dt, limit);
    const Fields y = unpack(st);
    const Fields k1 = rhs(st);
    const Fields k2 = rhs(pack(st, axpy(y, 0.5 * dt, k1)));
    const Fields k3 = rhs(pack(st, axpy(y, 0.5 * dt, k2)));
    const Fields k4 = rhs(pack(st, axpy(y, dt, k3)));
    Fields out = axpy(y, dt / 6.0, k1);
    out = axpy(out, dt / 3.0, k2);
    out = axpy(out, dt / 3.0, k3);
    out = axpy(out, dt / 6.0, k4);
    if (!out.w.allFinite() || !out.u.allFinite()) throw std::domain_error("list flow step produced non-finite values");
    return pack(st, out);
}

ListRun run_list(const ListState& st0, double T, const VariantFlowConfig& cfg) {
    const auto [n, dt] = plan_steps(T, st0.g.cfl_dt(cfg.cfl), cfg);
    ListRun r;
    r.dt = dt;
    r.t.push_back(0.0);
    r.states.push_back(st0);
    r.defect.push_back(list_defect(st0));
    // planned at cfg.cfl; the metric may shrink during the run, so the per-step check allows twice that
    const double check = std::min(1.0, 2 * cfg.cfl);
    for (long k = 1; k <= n; ++k) {
        r.states.push_back(step_list(r.states.back(), dt, check));
        r.t.push_back(k * dt);
        r.defect.push_back(list_defect(r.states.back()));
    }
    return r;
}

double eval_W_list_raw(const TorusMetric& g, const Grid& u, const Grid& f, double tau) {
    PointSet p = point_set(g, f);
    const Grid S = list_S(g, u);
    for (std::size_t i = 0; i < p.size(); ++i) p.R[i] = S[i];
    return eval_W_raw(p, tau);
}

double eval_W_list(const ListState& st, const Grid& f, double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    const TorusMetric g = st.g.metric();
    const double M = g.integrate((-f).exp()) / (4 * kPi * tau);
    if (std::abs(M - 1.0) > 1e-8) throw IncompatiblePotential("potential has mass " + std::to_string(M));
    return eval_W_list_raw(g, st.u, f, tau);
}

double delta_W_list(const TorusMetric& g, const Grid& u, const Grid& f, double tau, const TorusTensor& v,
                    const Grid& w, const Grid& h, double sigma) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    for (const Grid* a : {&u, &f, &w, &h, &v.xx, &v.xy, &v.yy}) check_grid(*a, g.sp().nx(), g.sp().ny(), "delta_W_list");
    const Grid S = list_S(g, u);
    const Grid g2 = g.grad_sq(f);
    const Grid bracket = tau * (2.0 * g.laplacian(f) - g2 + S) + f - 2.0;
    const Grid integrand = sigma * (S + g2) - tau * g.contract(v, list_S_tensor(g, u) + g.hessian(f)) -
                           4.0 * tau * g.inner_grad(u, w) + h + bracket * (0.5 * g.trace(v) - h - sigma / tau);
    return g.integrate(integrand * (-f).exp()) / (4 * kPi * tau);
}

double production_W_list(const TorusMetric& g, const Grid& u, const Grid& f, double tau, ListProduction mode) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    if (mode == ListProduction::variation) {
        const TorusTensor v = -2.0 * list_S_tensor(g, u);
        const Grid h = -g.laplacian(f) + g.grad_sq(f) - list_S(g, u) + 1.0 / tau;
        return delta_W_list(g, u, f, tau, v, g.laplacian(u), h, -1.0);
    }
    const TorusTensor A = list_S_tensor(g, u) + g.hessian(f) - (0.5 / tau) * g.metric();
    const Grid drift = g.laplacian(u) - g.inner_grad(u, f);
    const Grid integrand = 2.0 * tau * g.norm_sq(A) + 4.0 * tau * drift.square();
    return g.integrate(integrand * (-f).exp()) / (4 * kPi * tau);
}

MuResult mu_list(const ListState& st, double tau, const MuOptions& opt) {
    const TorusMetric g = st.g.metric();
    return mu_general(g, list_S(g, st.u), tau, opt);
}

ListEntropySeries list_entropy_series(const ListRun& run, double T, const Grid& f_final) {
    const double t_end = run.t.back();
    if (!(T > t_end)) throw std::invalid_argument("tau = T - t must stay positive over the run");
    std::vector<TorusMetric> gs;
    std::vector<Grid> P;
    for (const auto& st : run.states) {
        gs.push_back(st.g.metric());
        P.push_back(list_S(gs.back(), st.u));
    }
    const double tau_end = T - t_end;
    Grid w = f_final.size() ? Grid((-f_final).exp() / (4 * kPi * tau_end)) : Grid::Ones(P.back().size());
    w /= gs.back().integrate(w);
    const std::vector<Grid> ws = conjugate_density(gs, P, run.dt, w);
    ListEntropySeries s;
    for (std::size_t k = 0; k < ws.size(); ++k) {
        const std::size_t i = 2 * k;
        const double tau = T - run.t[i];
        const Grid f = -ws[k].log() - std::log(4 * kPi * tau);
        s.t.push_back(run.t[i]);
        s.tau.push_back(tau);
        s.W.push_back(eval_W_list_raw(gs[i], run.states[i].u, f, tau));
        s.production.push_back(production_W_list(gs[i], run.states[i].u, f, tau));
        s.production_variation.push_back(production_W_list(gs[i], run.states[i].u, f, tau, ListProduction::variation));
        s.mass_error.push_back(gs[i].integrate(ws[k]) - 1.0);
    }
    s.dWdt = central_rate(s.W, 2 * run.dt);
    return s;
}

}  // namespace plab
