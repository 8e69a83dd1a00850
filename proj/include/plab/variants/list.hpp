#pragma once

#include "plab/functionals/entropy.hpp"
#include "plab/functionals/mu.hpp"
#include "plab/variants/metric.hpp"

namespace plab {

// Extended Ricci flow dg/dt = -2 Ric + 4 du (x) du, du/dt = lap_g u.
// The metric is evolved as a full tensor (conformal factor plus the h part), so the
// trace-free forcing 4 du (x) du is kept exactly; its size is still reported.
struct ListState {
    VariantMetric g;
    Grid u;
};

Grid list_S(const TorusMetric& g, const Grid& u);               // R - 2 |du|^2
TorusTensor list_S_tensor(const TorusMetric& g, const Grid& u);  // Ric - 2 du (x) du

// L2 norm of the trace-free part of dg/dt relative to the whole; 0 when dg/dt vanishes.
double list_defect(const ListState& st);

ListState step_list(const ListState& st, double dt, double cfl = 0.1);

struct ListRun {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<ListState> states;
    std::vector<double> defect;
};
ListRun run_list(const ListState& st0, double T, const VariantFlowConfig& cfg = {});

double eval_W_list_raw(const TorusMetric& g, const Grid& u, const Grid& f, double tau);
double eval_W_list(const ListState& st, const Grid& f, double tau);  // checks compatibility

// First variation along (delta g, delta u, delta f, delta tau) = (v, w, h, sigma).
double delta_W_list(const TorusMetric& g, const Grid& u, const Grid& f, double tau, const TorusTensor& v,
                    const Grid& w, const Grid& h, double sigma);

// squares: int (2 tau |S_ij + Hess f - g/2tau|^2 + 4 tau (lap u - <du, df>)^2) dm
// variation: the first variation along the un-gauged coupled system's velocity
enum class ListProduction { squares, variation };
double production_W_list(const TorusMetric& g, const Grid& u, const Grid& f, double tau,
                         ListProduction mode = ListProduction::squares);

MuResult mu_list(const ListState& st, double tau, const MuOptions& opt = {});

// W along a run with the potential solved from the conjugate equation, tau = T - t,
// sampled at every other stored state.
struct ListEntropySeries {
    std::vector<double> t, tau, W, production, production_variation, dWdt, mass_error;
};
// f_final empty: the constant compatible potential at the last state.
ListEntropySeries list_entropy_series(const ListRun& run, double T, const Grid& f_final = {});

}  // namespace plab
