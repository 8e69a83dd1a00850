#pragma once

#include <string>
#include <vector>

#include "plab/geometry/torus_metric.hpp"

namespace plab {

struct MuOptions {
    double grad_tol = 1e-7;
    long max_iter = 100000;
    int memory = 8;
};

struct MuResult {
    double mu = 0.0;
    ScalarField f;        // compatible minimizer
    long iterations = 0;
    double grad_norm = 0.0;  // L2(dV) norm of the constrained gradient
    bool converged = false;  // false: mu is only an upper bound
    std::string start;       // which start produced the minimum
};

// inf of W over compatible f on the torus; starts from the constant potential, the ground
// state of -4 lap + R and Gaussians on the deepest wells of R, keeping the lowest result.
MuResult mu(const Backend& m, double tau, const MuOptions& opt = {});

// Same with an arbitrary curvature-like potential P in place of R and a general metric.
MuResult mu_general(const TorusMetric& g, const Grid& P, double tau, const MuOptions& opt = {},
                    const std::vector<Grid>& extra_starts = {});

// The discrete objective J(psi) = W(f) for e^{-f} = psi^2 / ((4 pi tau)^{-1} int psi^2 dV), the
// gradient term written as the Dirichlet energy of phi = e^{-f/2}; grad is the L2(dV) gradient in psi.
double mu_objective(const TorusMetric& g, const Grid& P, double tau, const Grid& psi, Grid* grad = nullptr);

}  // namespace plab
