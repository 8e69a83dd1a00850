#pragma once

#include <utility>
#include <vector>

#include "plab/geometry/torus_metric.hpp"

namespace plab {

// Torus metric g = e^{2w} h. The conformal factor w lives in base.u; h carries the
// non-conformal part that the List flow creates. An empty h means the identity.
struct VariantMetric {
    ConformalTorus base;
    Grid h11, h12, h22;

    bool conformal() const;
    // Closed conformal forms whenever h is the identity to 1e-14.
    TorusMetric metric() const;
    // safety * h^2 * (smallest eigenvalue of g) / 4
    double cfl_dt(double safety) const;
};

VariantMetric variant_metric(const ConformalTorus& t);

struct VariantFlowConfig {
    double dt = 0.0;  // 0 picks the CFL step
    double cfl = 0.1;
    long max_steps = 200000;
};

// Number of steps and step size for a run of length T: even step count, dt <= limit.
std::pair<long, double> plan_steps(double T, double limit, const VariantFlowConfig& cfg);

// Backward solve of d_s w = lap_g w - P w (s = t_end - t) over states stored at uniform
// spacing dt; RK4 with step 2 dt using the odd snapshots as midpoints. Returns w at the
// even snapshots in forward order. int w dV is conserved by the continuous problem.
std::vector<Grid> conjugate_density(const std::vector<TorusMetric>& g, const std::vector<Grid>& P, double dt,
                                    const Grid& w_final);

// Fourth-order central differences of samples with spacing h; the two points at each end are NaN.
std::vector<double> central_rate(const std::vector<double>& y, double h);

}  // namespace plab
