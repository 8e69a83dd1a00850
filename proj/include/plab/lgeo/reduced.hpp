#pragma once

#include <string>
#include <vector>

#include "plab/lgeo/geodesic.hpp"

namespace plab {

// H(X) along an L-geodesic and K = int_0^tau_bar tau^{3/2} H dtau. In the s variable the
// quadrature is Simpson on 2 s^4 H(s), which is regular at s = 0; H itself is NaN there.
struct HarnackData {
    double tau_bar = 0.0;
    std::vector<double> s, H;
    double K = 0.0;
};
// Throws std::invalid_argument when the path's geodesic residual exceeds tol.
HarnackData harnack_data(const LChart& c, const LPath& path, double tol = 1e-6);
// H at one sample from the chart geometry (s > 0)
double harnack_H(const ChartPoint& cp, double s, const Vec3& xhat);

// Transported frame along a geodesic: Y_i solves nabla_X Y = -Ric(Y) + Y / (2 tau), seeded
// g(tau_bar)-orthonormal at the end. Columns of Y[j] are the Y_i(s_j) in chart coordinates.
struct FrameBundle {
    std::vector<double> s;
    std::vector<Mat3> Y;
    double gram_error = 0.0;  // max |<Y_i, Y_j> - (tau / tau_bar) delta_ij|
};
FrameBundle transport_frame(const LChart& c, const LPath& path);
// The same ODE seeded with the columns of seed (chart components at tau_bar).
FrameBundle transport_frame(const LChart& c, const LPath& path, const Mat3& seed);

// L-Jacobi field vanishing at p with d(xhat)(0) = seed, sampled on the path's grid.
std::vector<Vec3> ljacobi(const LChart& c, const LPath& path, const Vec3& seed);

// Q(X, Y) for X = xhat / (2 s), Y = s Z, with g-inner products from cp.
double lyh_quadratic(const ChartPoint& cp, double s, const Vec3& xhat, const Vec3& Z);

struct ReducedPoint {
    Vec3 q = Vec3::Zero();
    bool ok = false;
    std::string error;
    double L = std::numeric_limits<double>::quiet_NaN();
    double l = std::numeric_limits<double>::quiet_NaN();
    double K = std::numeric_limits<double>::quiet_NaN();
    double R = std::numeric_limits<double>::quiet_NaN();  // at (q, tau_bar)
    Vec3 v = Vec3::Zero();
    int n_minima = 0;
    bool smooth = true;
};

struct ReducedField {
    Vec3 p = Vec3::Zero();
    double tau_bar = 0.0;
    std::vector<ReducedPoint> points;
    std::size_t failures() const;
    double min_l() const;
    double min_L() const;
};
ReducedField reduced_field(const LChart& c, const Vec3& p, double tau_bar, const std::vector<Vec3>& targets,
                           const BvpOptions& opt = {});

struct IdentityOptions {
    BvpOptions bvp;
    double h = 0.05;  // spatial difference step, in units of sqrt(tau_bar) measured in g(tau_bar)
    double k = 0.05;  // time difference step, relative to tau_bar
};

// Residuals of the gradient and time-derivative identities for L and l = L / (2 sqrt tau_bar),
// and slacks of the Laplacian inequalities (rhs - lhs, nonnegative when they hold). Derivatives
// are fourth-order differences of BVP solutions in q and tau_bar.
struct IdentityReport {
    double tau_bar = 0.0;
    bool smooth = true;
    double L = 0.0, l = 0.0, K = 0.0, R = 0.0;
    double grad_L_sq = 0.0, dL_dtau = 0.0, lap_L = 0.0;
    double grad_vs_velocity = 0.0;  // |dL - g(xhat(tau_bar))|_g, both covectors
    double L_grad = 0.0, L_time = 0.0, L_lap_slack = 0.0;
    double l_time = 0.0, l_grad = 0.0, l_lap_slack = 0.0;
    // the same three with K / (2 tau^2) in place of the K / tau^{3/2} terms, kept for comparison
    double l_time_tau2 = 0.0, l_grad_tau2 = 0.0, l_lap_slack_tau2 = 0.0;
};
IdentityReport identity_residuals(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar,
                                  const IdentityOptions& opt = {});

// Hessian comparison along a direction y (normalized in g(tau_bar)) and its traced version.
struct HessianReport {
    bool smooth = true;
    double hess = 0.0, rhs = 0.0, slack = 0.0;
    double lap = 0.0;
    double lap_rhs_frame = 0.0, lap_slack_frame = 0.0;  // rhs summed over the transported frame
    double lap_rhs_K = 0.0, lap_slack_K = 0.0;          // n / sqrt(tau_bar) - 2 sqrt(tau_bar) R - K / tau_bar
    double trace_error = 0.0;                           // max_s |sum_i Q(X, Y_i) - (tau / tau_bar) H|
    double frame_gram_error = 0.0;
};
HessianReport hessian_bound_check(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar, const Vec3& y,
                                  const IdentityOptions& opt = {});

// Weighted target sets for the reduced volume at scale tau:
//   torus: grid nodes (every stride-th), weight e^{2u} cell
//   sphere: Gauss-Legendre nodes in the angle from p, weight of the whole latitude
//   euclidean: midpoint nodes on a box of half width 10 sqrt(tau) around p
struct VolumeTargets {
    std::vector<Vec3> q;
    std::vector<double> w;
};
VolumeTargets volume_targets(const LChart& c, const Vec3& p, double tau, int resolution);

struct VolumeEntry {
    double tau = 0.0;
    double V = std::numeric_limits<double>::quiet_NaN();
    double min_l = 0.0, min_L = 0.0;
    // int (dl/dtau - R + n / (2 tau)) tau^{-n/2} e^{-l} dV, with dl/dtau from the l identity
    double balance_density = std::numeric_limits<double>::quiet_NaN();
    std::size_t points = 0, failures = 0;
    bool aborted = false;  // more than 1% of the BVPs failed
};
struct VolumeOptions {
    int resolution = 0;  // 0 picks the default per backend (torus stride 1, 48 sphere nodes, 24 euclidean nodes)
    BvpOptions bvp;
};
// fields, when given, receives the reduced field behind each entry.
std::vector<VolumeEntry> reduced_volume(const LChart& c, const Vec3& p, const std::vector<double>& taus,
                                        const VolumeOptions& opt = {}, std::vector<ReducedField>* fields = nullptr);
// V(tau_last) - V(tau_first) + int balance_density dtau (Simpson on an even number of uniform
// intervals, else trapezoid); zero up to quadrature error
double volume_balance(const std::vector<VolumeEntry>& v);

// min over stored tau < tau_max of min R(., tau) + n / (2 (tau_max - tau)); nonnegative when the floor holds
double scalar_floor_slack(const LChart& c);

struct SpeedReport {
    bool bound_finite = true;
    double max_ratio = 0.0;        // max_s tau |X|^2 / speed bound
    double distance_slack = 0.0;   // min_s of rhs - d^2_{g(0)}(p, gamma(tau)) (d from above on the torus)
    double best_speed_slack = 0.0; // L / (2 sqrt tau_bar) + n C0 tau_bar / 3 - min_s tau |X|^2
};
SpeedReport speed_bound_check(const LChart& c, const LPath& path);

}  // namespace plab
