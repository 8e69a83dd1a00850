#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "plab/flow/history.hpp"

namespace plab {

// Geometry of g(tau) at one point of a conformal chart: g = e^{2u} delta and Ric = rho g.
// All three backends have this form (the torus in dimension 2, the round sphere through
// stereographic coordinates, flat space with constant u).
struct ChartPoint {
    int n = 2;
    double u = 0.0, u_tau = 0.0;
    Vec3 du = Vec3::Zero();
    Mat3 ddu = Mat3::Zero();
    double R = 0.0, R_tau = 0.0;
    Vec3 dR = Vec3::Zero();
    Mat3 ddR = Mat3::Zero();
    double rho = 0.0, rho_tau = 0.0;
    double kappa = 0.0;  // sectional curvature of every 2-plane

    double e2u() const { return std::exp(2.0 * u); }
    double inner(const Vec3& a, const Vec3& b) const { return e2u() * a.dot(b); }
    // Gamma(a, b)^k for the conformal metric
    Vec3 gamma(const Vec3& a, const Vec3& b) const { return du.dot(a) * b + du.dot(b) * a - a.dot(b) * du; }
    Vec3 grad_R() const { return std::exp(-2.0 * u) * dR; }
    Mat3 hess_R() const;  // covariant Hessian components
};

// Spacetime seen through one chart, parametrized by tau = t0 - t of a backward history.
//   euclidean: x in R^n, u = log(scale)/2
//   sphere:    stereographic from the pole e_{n+1}; the base point is e_1 and a point at angle theta
//              from it along the first great circle is (cos theta, sin theta, 0), so minimizing
//              paths stay on the unit circle and away from the singular point at infinity
//   torus:     the universal cover R^2; u and R come from sparse Fourier series of the
//              snapshots, blended by the history's four-point Lagrange stencil in time
class LChart {
public:
    enum class Kind { euclidean, sphere, torus };

    explicit LChart(const MetricHistory& backward);
    explicit LChart(const Backend& fixed);  // a static metric

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    double tau_max() const { return tau_max_; }
    bool is_static() const { return static_; }
    // sup over the chart's time range of max(|Rm|, |Ric|)
    double C0() const { return C0_; }
    // bounds used to prune periodic lifts and size start lattices
    double min_e2u() const { return min_e2u_; }
    double max_e2u() const { return max_e2u_; }
    double min_R() const { return min_R_; }

    ChartPoint at(const Vec3& x, double tau, int order = 2) const;

    // The torus geometry frozen at one tau, so repeated shots on one s-grid skip the time blend.
    struct Slice {
        double tau = 0.0;
        FourierSeries u, R, u_tau, R_tau;
    };
    using SliceGrid = std::vector<Slice>;
    // slices at tau = (k sqrt(tau_bar) / (2 steps))^2 for k = 0..2 steps; shared and cached
    std::shared_ptr<const SliceGrid> slices(double tau_bar, int steps) const;
    ChartPoint at(const Vec3& x, const Slice& sl, int order = 2) const;

    // lower bound for int_0^sqrt(tau_bar) 2 s^2 R ds along any path
    double curvature_floor(double tau_bar) const;

    Vec3 base_point() const;
    Vec3 sphere_target(double theta) const;  // sphere only
    double sphere_radius(double tau) const;  // sphere only
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    int nx() const { return nx_; }  // torus grid
    int ny() const { return ny_; }
    const std::vector<double>& forward_times() const { return t_; }
    // distance in g(tau) for static-in-space metrics; an upper bound (straight segment) on the torus
    double distance_bound(const Vec3& a, const Vec3& b, double tau) const;
    // Starting velocity for shooting towards target: the constant-speed geodesic of the fixed chart
    // geometry (a straight line, or a great circle on the sphere).
    Vec3 initial_velocity(const Vec3& p, const Vec3& target, double tau_bar) const;
    // Minimum of R over the stored snapshots with tau <= tau_hi, paired with its tau.
    std::vector<std::pair<double, double>> min_R_profile(double tau_hi) const;

private:
    void init_torus(const std::vector<double>& t, const std::vector<const ConformalTorus*>& snaps, double t0);
    void stencil(double tau, std::size_t& lo, int& count, double w[4], double dw[4]) const;

    Kind kind_ = Kind::euclidean;
    int n_ = 2;
    bool static_ = false;
    double tau_max_ = 0.0, C0_ = 0.0;
    double min_e2u_ = 1.0, max_e2u_ = 1.0, min_R_ = 0.0;
    double scale_ = 1.0;          // euclidean
    double r0sq_ = 1.0;           // sphere radius^2 at tau = 0
    double growth_ = 0.0;         // d(r^2)/dtau
    double lx_ = 0.0, ly_ = 0.0;  // torus
    int nx_ = 0, ny_ = 0;
    double t0_ = 0.0;
    std::vector<double> t_;  // forward times of the snapshots
    std::vector<FourierSeries> u_, R_;
    std::vector<double> snap_min_R_;
    bool cubic_ = true;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

}  // namespace plab
