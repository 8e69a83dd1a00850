#pragma once

#include "plab/functionals/eigen.hpp"
#include "plab/functionals/entropy.hpp"
#include "plab/variants/metric.hpp"

namespace plab {

// Ricci Yang-Mills flow of a metric and a U(1) connection A = a1 dx + a2 dy on a trivial
// bundle over the torus. F_12 = d_x a2 - d_y a1. Norms use the full contraction
// |F|^2 = g^{ik} g^{jl} F_ij F_kl and eta_ij = g^{kl} F_ik F_jl; in two dimensions
// eta = |F|^2 g / 2, so the flow never leaves the conformal class.
// d* is the L2 adjoint of d: (d*F)_j = -grad^i F_ij, and (i_{grad f} F)_j = grad^i f F_ij.
struct RymState {
    VariantMetric g;
    Grid a1, a2;
};

struct Covector {
    Grid x, y;
};

Grid rym_curvature(const TorusMetric& g, const Grid& a1, const Grid& a2);  // F_12
Grid rym_F_sq(const TorusMetric& g, const Grid& F12);                       // |F|^2
TorusTensor rym_eta(const TorusMetric& g, const Grid& F12);
Covector rym_codiff(const TorusMetric& g, const Grid& F12);
Covector rym_contract_grad(const TorusMetric& g, const Grid& F12, const Grid& f);

// Add d chi to the connection.
RymState gauge_transform(const RymState& st, const Grid& chi);

// One step of dg/dt = -2 Ric + eta, dA/dt = -d*F. With evolve_metric = false the metric is
// frozen and A follows the Yang-Mills heat flow.
RymState step_rym(const RymState& st, double dt, double cfl = 0.1, bool evolve_metric = true);

struct RymRun {
    double dt = 0.0;
    bool metric_evolves = true;
    std::vector<double> t;
    std::vector<RymState> states;
};
RymRun run_rym(const RymState& st0, double T, const VariantFlowConfig& cfg = {}, bool evolve_metric = true);

// The metric-level functionals below take the curvature F_12 directly, so they also accept
// curvature fields that no global connection produces (for example a constant F_12).

// int (R - |F|^2/4 + |df|^2) e^{-f} dV
double eval_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f);
double eval_F_rym(const RymState& st, const Grid& f);
// int (tau (|df|^2 + R + |F|^2/4) + f - n) (4 pi tau)^{-n/2} e^{-f} dV; note +|F|^2/4 where F has -|F|^2/4
double eval_W_rym_raw(const TorusMetric& g, const Grid& F12, const Grid& f, double tau);
double eval_W_rym(const RymState& st, const Grid& f, double tau);  // checks compatibility

struct RymVariation {
    TorusTensor v;
    Covector alpha;
    Grid h;
    double sigma = 0.0;
};

double delta_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f, const RymVariation& var);
double delta_W_rym(const TorusMetric& g, const Grid& F12, const Grid& f, double tau,
                   const RymVariation& var);

// int (2 |Ric - eta/2 + Hess f|^2 + |d*F + i_{grad f} F|^2) e^{-f} dV
double production_F_rym(const TorusMetric& g, const Grid& F12, const Grid& f);

// dW/dt for eval_W_rym along the flow with the conjugate normalized potential:
// int (2 tau |B - g/2tau|^2 + 2 tau <B, eta> - tau |d*F + i_{grad f} F|^2 - 3|F|^2/4) dm,
// B = Ric - eta/2 + Hess f. The squares variant
// int (2 tau |B|^2 + tau |d*F + i_{grad f} F|^2 + |F|^2/4 - tau |eta|^2 / 2) dm is kept for comparison;
// it does not track the measured rate.
double rym_W_rate(const TorusMetric& g, const Grid& F12, const Grid& f, double tau);
double rym_W_rate_squares(const TorusMetric& g, const Grid& F12, const Grid& f, double tau);

// Lowest eigenvalue of -4 lap + R - |F|^2/4.
SpectralResult lambda_rym(const TorusMetric& g, const Grid& F12, const Grid* warm = nullptr);
SpectralResult lambda_rym(const RymState& st, const Grid* warm = nullptr);

double ym_energy(const RymState& st);  // int |F|^2 dV

// Functionals along a run with one conjugate density w: f = -log w for F and
// f = -log w - log(4 pi tau), tau = T - t, for W. Sampled at every other stored state.
struct RymSeries {
    std::vector<double> t, tau, F, production_F, dFdt, W, W_rate, W_rate_squares, dWdt, lambda, energy, sup_F_sq,
        mass_error;
};
RymSeries rym_series(const RymRun& run, double T, bool with_lambda = true);

// Low-energy diagnostics: (T - t) sup|F|^2 along the run and the earliest sampled time
// past which the numerical dW/dt stayed >= -tol.
struct LowEnergyReport {
    std::vector<double> t, energy_scale, dWdt;
    bool decreasing_scale = false;
    double t0 = 0.0;
    bool found = false;
};
LowEnergyReport low_energy_check(const RymSeries& s, double tol = 1e-8);

}  // namespace plab
