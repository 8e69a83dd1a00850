#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "plab/lgeo/chart.hpp"

namespace plab {

// A path sampled on the uniform grid s_j = j sqrt(tau_bar) / steps, s = sqrt(tau), in chart
// coordinates (unwrapped on the torus). xhat = dx/ds; v = xhat(0) / 2 = lim sqrt(tau) X.
struct LPath {
    int n = 0;
    double tau_bar = 0.0;
    std::vector<double> s;
    std::vector<Vec3> x, xhat;

    std::size_t steps() const { return s.size() - 1; }
    double ds() const { return s[1] - s[0]; }
    const Vec3& p() const { return x.front(); }
    const Vec3& endpoint() const { return x.back(); }
    Vec3 v() const { return 0.5 * xhat.front(); }
};

class GeodesicBlowUp : public std::runtime_error {
public:
    GeodesicBlowUp(double s, double ratio)
        : std::runtime_error("L-geodesic speed exceeds ten times the a priori bound at s = " + std::to_string(s)),
          s(s), ratio(ratio) {}
    double s, ratio;
};

// The constant C(n) of the speed bound, which the theory only asserts to exist.
inline double speed_constant(int n) { return 20.0 * n; }
// Right side of the speed bound tau |X|^2 <= e^{6 C0 T}|v|^2 + C(n) T / min(T - tau_bar, 1/C0) (e^{6 C0 T} - 1).
double speed_bound(const LChart& c, double v_norm_sq, double tau_bar);

// Integration of the s-form geodesic equation
//   D xhat/ds - 2 s^2 grad R + 4 s Ric(xhat) = 0,  x(0) = p, xhat(0) = 2 v
// by rk4. Optionally carries dx/dxhat(0) (Jacobi fields vanishing at p) and the propagator
// of the rescaled transport equation D Z/ds = -2 s Ric(Z) (Y = s Z solves the frame equation).
struct Shot {
    LPath path;
    std::vector<Mat3> jacobi;  // J(s) with columns d x(s) / d xhat_i(0)
    std::vector<Mat3> frame;   // Psi(s), Psi(0) = identity
};
Shot shoot_full(const LChart& c, const Vec3& p, const Vec3& v, double tau_bar, int steps, bool jacobi, bool frame);
LPath shoot(const LChart& c, const Vec3& p, const Vec3& v, double tau_bar, int steps = 256);

// s-form length int (|xhat|^2 / 2 + 2 s^2 R) ds by composite Simpson.
double l_length(const LChart& c, const LPath& path);
// sup over interior samples of |D xhat/ds - 2 s^2 grad R + 4 s Ric(xhat)|_g, derivatives by
// fourth-order differences of the samples
double geodesic_residual(const LChart& c, const LPath& path);

// Dirichlet energy (1/2) int |dx/dt|^2 dt of a curve sampled uniformly on t in [0, 1]
// (an even number of intervals) in the chart of a fixed metric.
double dirichlet_energy(const Backend& m, const std::vector<Vec3>& pts);

// Analytic paths, used by the variation formulas.
struct PathJet {
    Vec3 x = Vec3::Zero(), xs = Vec3::Zero(), xss = Vec3::Zero();  // x and its s-derivatives
};
using PathFn = std::function<PathJet(double s)>;
using FieldFn = std::function<PathJet(double s)>;  // a variation field Y(s) with dY/ds

double l_length(const LChart& c, double tau_bar, int steps, const PathFn& path);
// delta_Y L = <xhat, Y>|_0^S + int <Y, 2 s^2 grad R - D xhat/ds - 4 s Ric(xhat)> ds
double first_variation(const LChart& c, double tau_bar, int steps, const PathFn& path, const FieldFn& Y);
// second variation along a geodesic for the coordinate variation x + eps Y (so nabla_Y Y = Gamma(Y, Y))
double second_variation(const LChart& c, double tau_bar, int steps, const PathFn& path, const FieldFn& Y);

struct BvpOptions {
    int steps = 256;
    double hit_tol = 1e-8;   // accepted endpoint error
    int lattice = 5;         // per-axis size of the fallback start lattice
    double tie_tol = 1e-6;   // distinct minimizers closer than this in L flag a cut-locus point
    int max_newton = 100;
};

struct BvpResult {
    LPath path;
    double L = 0.0;
    Vec3 target = Vec3::Zero();  // the lift of q that the geodesic ends at
    int n_minima = 0;            // distinct converged geodesics
    bool smooth = true;          // false when another minimizer ties within tie_tol
    double second_L = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double hit_error = 0.0;
};

class BvpFailure : public std::runtime_error {
public:
    explicit BvpFailure(const std::string& w) : std::runtime_error(w) {}
};

// Minimizing L-geodesic from (p, 0) to (q, tau_bar): damped Newton on the endpoint map from the
// constant-speed prediction of the chart on every periodic lift that can still beat the best length found,
// falling back to a lattice of starts over the ball allowed by the a priori bounds.
BvpResult solve_bvp(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar, const BvpOptions& opt = {});
// Newton towards one fixed lift from a given start; throws BvpFailure.
BvpResult solve_bvp_from(const LChart& c, const Vec3& p, const Vec3& target, double tau_bar, const Vec3& v0,
                         const BvpOptions& opt = {});

}  // namespace plab
