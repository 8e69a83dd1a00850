#pragma once

#include <vector>

#include "plab/geometry/torus_metric.hpp"

namespace plab {

// L = lap - grad(phi).grad with measure d mu = e^{-phi} dV and dimension parameter m > n.
struct WeightedOperator {
    Backend m;
    ScalarField phi;
    double mdim;
};

struct DiffusionEntropy {
    double H = 0.0;          // -int u log u dmu - (m/2)(log 4 pi t + 1)
    double W = 0.0;          // int (t|grad f|^2 + f - m) u dmu, u = e^{-f} / (4 pi t)^{m/2}
    double H_opposite_sign = 0.0;  // int u log u dmu - (m/2) log 4 pi t - m/2, kept for comparison
};

// Torus only. u > 0 with int u dmu = 1.
DiffusionEntropy diffusion_entropy(const WeightedOperator& w, const Grid& u, double t);

// Closed-form dW/dt along (d_t - L) u = 0 (curvature-dimension form).
double diffusion_dW(const WeightedOperator& w, const Grid& u, double t);

Grid weighted_laplacian(const WeightedOperator& w, const Grid& u);

// RK4 solution of (d_t - L) u = 0 on [t0, t1]; returns steps + 1 states.
std::vector<Grid> weighted_heat_flow(const WeightedOperator& w, const Grid& u0, double t0, double t1, int steps);

struct BakryEmery {
    SymTensorField tensor;  // Ric + Hess phi - dphi (x) dphi / (m - n)
    double min_eigenvalue;  // pointwise minimum over the quadrature nodes
};
BakryEmery bakry_emery(const WeightedOperator& w);

}  // namespace plab
