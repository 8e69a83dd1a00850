#pragma once

#include <vector>

#include "plab/flow/history.hpp"

namespace plab {

// plain:      f_t = -lap f + |grad f|^2 - R
// normalized: f_t = -lap f + |grad f|^2 - R + n/(2 tau), tau = tau0 - t
// gauge:      f_t = -lap f - R along the modified flow g_t = -2(Ric + Hess f)
enum class PotentialMode { plain, normalized, gauge };

// Density sum_i a_i (4 pi s_i)^{-n/2} exp(-|x - c_i|^2_g / (4 s_i)) on (R^n, scale * delta).
struct GaussianComponent {
    double weight = 1.0;
    Vec3 center = Vec3::Zero();
    double sigma = 1.0;
};
struct GaussianMixture {
    std::vector<GaussianComponent> parts;
};

// -log of the mixture density plus an additive constant, with exact derivatives.
EuclidField mixture_log_potential(const GaussianMixture& w, int n, double scale, double offset = 0.0);

struct PotentialTrajectory {
    PotentialMode mode = PotentialMode::plain;
    double tau0 = 0.0;
    MetricHistory history;
    std::vector<std::size_t> index;  // forward snapshot index of each stored potential
    std::vector<double> t;
    std::vector<ScalarField> f;
    // gauge mode only: the pulled-back metric at each stored time
    std::vector<EuclideanSpace> gauge_euclid;
    std::vector<TorusTensor> gauge_torus;

    double tau(std::size_t i) const { return tau0 - t[i]; }
    Backend metric(std::size_t i) const { return history.forward_snapshot(index[i]); }
};

// The conjugate equation is backward parabolic, so the potential is prescribed at the
// history's final snapshot and solved towards t_first through w = e^{-f} (or
// (4 pi tau)^{-n/2} e^{-f}), which obeys the forward heat equation in s = t0 - t.
// Gauge-mode trajectories keep every 2*stride-th snapshot; the others every stride-th.
PotentialTrajectory evolve_potential(const MetricHistory& h, const ScalarField& f_final, PotentialMode mode,
                                     double tau0 = 0.0, int stride = 1);
PotentialTrajectory evolve_potential(const MetricHistory& h, const GaussianMixture& w_final, PotentialMode mode,
                                     double tau0 = 0.0);

class TauExhausted : public std::domain_error {
public:
    explicit TauExhausted(double t) : std::domain_error("tau reaches zero inside the run"), t_zero(t) {}
    double t_zero;
};

}  // namespace plab
