#pragma once

#include "plab/geometry/torus_metric.hpp"

namespace plab {

struct SpectralResult {
    double lambda = 0.0;
    ScalarField u0;  // positive, int u0^2 dV = 1
    ScalarField f0;  // -2 log u0, so int e^{-f0} dV = 1
    int iterations = 0;
    double residual = 0.0;  // L2(dV) norm of (A - lambda) u0
};

class EigenNonConvergence : public std::runtime_error {
public:
    explicit EigenNonConvergence(const std::string& w) : std::runtime_error(w) {}
};

// Lowest eigenpair of -4 lap_g + V on the torus, symmetric in the dV inner product.
// A warm start (previous eigenvector) speeds up sweeps along a flow.
SpectralResult lowest_eigen(const TorusMetric& g, const Grid& V, const Grid* warm = nullptr);

// Apply -4 lap_g + V (the operator whose ground state lowest_eigen computes).
Grid schrodinger_apply(const TorusMetric& g, const Grid& V, const Grid& u);

// Lowest eigenvalue of -4 lap + k R; lambda(M, g) for k = 1.
SpectralResult lambda_k(const Backend& m, double k, const Grid* warm = nullptr);

}  // namespace plab
