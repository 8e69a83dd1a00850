#include "plab/lgeo/reduced.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "plab/geometry/ops.hpp"
#include "plab/lgeo/parallel.hpp"

namespace plab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
double simpson(const std::vector<double>& s, F&& f) {
    const std::size_t N = s.size() - 1;
    const double h = s[1] - s[0];
    double acc = f(0) + f(N);
    for (std::size_t j = 1; j < N; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(j);
    return acc * h / 3.0;
}

// Re-integrates a stored geodesic from its initial data, refusing paths that are not geodesics.
Shot reshoot(const LChart& c, const LPath& path, bool jacobi, bool frame) {
    Shot sh = shoot_full(c, path.p(), path.v(), path.tau_bar, static_cast<int>(path.steps()), jacobi, frame);
    const double miss = (sh.path.endpoint() - path.endpoint()).norm();
    if (!(miss <= 1e-8 * (1.0 + path.endpoint().norm())))
        throw std::invalid_argument("path is not the L-geodesic of its initial data");
    return sh;
}

double d1(double fm2, double fm1, double fp1, double fp2, double h) { return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h); }
double d2(double fm2, double fm1, double f0, double fp1, double fp2, double h) {
    return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
}

struct Center {
    BvpResult bvp;
    ChartPoint cp;
    double K = 0.0;
};

Center solve_center(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar, const IdentityOptions& opt) {
    Center ctr;
    ctr.bvp = solve_bvp(c, p, q, tau_bar, opt.bvp);
    ctr.cp = c.at(ctr.bvp.target, tau_bar, 2);
    ctr.K = harnack_data(c, ctr.bvp.path, std::numeric_limits<double>::infinity()).K;
    return ctr;
}

double L_near(const LChart& c, const Vec3& p, const Center& ctr, const Vec3& dq, double tau, const IdentityOptions& opt) {
    const double tb = ctr.bvp.path.tau_bar;
    const Vec3 v0 = ctr.bvp.path.v() * std::sqrt(tb / tau);
    return solve_bvp_from(c, p, ctr.bvp.target + dq, tau, v0, opt.bvp).L;
}

// coordinate first and pure second derivatives of L at the center
void spatial_derivs(const LChart& c, const Vec3& p, const Center& ctr, const IdentityOptions& opt, Vec3& dL, Vec3& ddL) {
    const double tb = ctr.bvp.path.tau_bar;
    const double h = opt.h * std::sqrt(tb) * std::exp(-ctr.cp.u);
    dL.setZero();
    ddL.setZero();
    for (int i = 0; i < c.n(); ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        const double fm2 = L_near(c, p, ctr, -2 * e, tb, opt), fm1 = L_near(c, p, ctr, -e, tb, opt);
        const double fp1 = L_near(c, p, ctr, e, tb, opt), fp2 = L_near(c, p, ctr, 2 * e, tb, opt);
        dL[i] = d1(fm2, fm1, fp1, fp2, h);
        ddL[i] = d2(fm2, fm1, ctr.bvp.L, fp1, fp2, h);
    }
}

double laplacian(const ChartPoint& cp, int n, const Vec3& dL, const Vec3& ddL) {
    // Gamma^k_ii summed over i is (2 - n) du_k
    return std::exp(-2 * cp.u) * (ddL.head(n).sum() + (n - 2) * cp.du.dot(dL));
}

}  // namespace

double harnack_H(const ChartPoint& cp, double s, const Vec3& xhat) {
    if (s <= 0) return kNaN;
    return -cp.R_tau - cp.R / (s * s) - cp.dR.dot(xhat) / s + cp.rho * cp.e2u() * xhat.squaredNorm() / (2 * s * s);
}

HarnackData harnack_data(const LChart& c, const LPath& path, double tol) {
    if (geodesic_residual(c, path) > tol) throw std::invalid_argument("harnack_data needs an L-geodesic");
    HarnackData d;
    d.tau_bar = path.tau_bar;
    d.s = path.s;
    d.H.resize(path.s.size());
    std::vector<double> f(path.s.size());
    const auto sl = c.slices(path.tau_bar, static_cast<int>(path.steps()));
    for (std::size_t j = 0; j < path.s.size(); ++j) {
        const double s = path.s[j];
        const Vec3& w = path.xhat[j];
        const ChartPoint cp = c.at(path.x[j], (*sl)[2 * j], 1);
        d.H[j] = harnack_H(cp, s, w);
        // tau^{3/2} H dtau = 2 s^4 H ds
        f[j] = -2 * std::pow(s, 4) * cp.R_tau - 2 * s * s * cp.R - 2 * std::pow(s, 3) * cp.dR.dot(w) +
               s * s * cp.rho * cp.e2u() * w.squaredNorm();
    }
    d.K = simpson(path.s, [&](std::size_t j) { return f[j]; });
    return d;
}

FrameBundle transport_frame(const LChart& c, const LPath& path) {
    const ChartPoint end = c.at(path.endpoint(), path.tau_bar, 0);
    Mat3 seed = Mat3::Zero();
    for (int i = 0; i < c.n(); ++i) seed(i, i) = std::exp(-end.u);
    return transport_frame(c, path, seed);
}

FrameBundle transport_frame(const LChart& c, const LPath& path, const Mat3& seed) {
    const int n = c.n();
    const Shot sh = reshoot(c, path, false, true);
    const double S = path.s.back();
    const Eigen::MatrixXd psiS_inv = sh.frame.back().topLeftCorner(n, n).inverse();
    const Eigen::MatrixXd ZS = seed.topRows(n) / S;
    const ChartPoint end = c.at(path.endpoint(), path.tau_bar, 0);
    const Mat3 G0 = end.e2u() * seed.transpose() * seed;
    FrameBundle fb;
    fb.s = path.s;
    for (std::size_t j = 0; j < path.s.size(); ++j) {
        const double s = path.s[j];
        Mat3 Y = Mat3::Zero();
        Y.topRows(n) = s * (sh.frame[j].topLeftCorner(n, n) * psiS_inv * ZS);
        fb.Y.push_back(Y);
        const double e2u = c.at(path.x[j], s * s, 0).e2u();
        const Mat3 gram = e2u * Y.transpose() * Y - (s * s / path.tau_bar) * G0;
        fb.gram_error = std::max(fb.gram_error, gram.cwiseAbs().maxCoeff());
    }
    return fb;
}

std::vector<Vec3> ljacobi(const LChart& c, const LPath& path, const Vec3& seed) {
    const Shot sh = reshoot(c, path, true, false);
    std::vector<Vec3> J;
    J.reserve(sh.jacobi.size());
    for (const Mat3& m : sh.jacobi) J.push_back(m * seed);
    return J;
}

double lyh_quadratic(const ChartPoint& cp, double s, const Vec3& xhat, const Vec3& Z) {
    const double XX = cp.inner(xhat, xhat), ZZ = cp.inner(Z, Z), XZ = cp.inner(xhat, Z);
    const Vec3 drho = cp.dR / cp.n;
    return -s * s * Z.dot(cp.hess_R() * Z) + 0.5 * cp.kappa * (XX * ZZ - XZ * XZ) - 2 * s * drho.dot(xhat) * ZZ +
           2 * s * drho.dot(Z) * XZ - 2 * s * s * (cp.rho_tau + 2 * cp.rho * cp.u_tau) * ZZ +
           2 * cp.rho * cp.rho * s * s * ZZ - cp.rho * ZZ;
}

std::size_t ReducedField::failures() const {
    return std::count_if(points.begin(), points.end(), [](const ReducedPoint& r) { return !r.ok; });
}

double ReducedField::min_l() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : points)
        if (r.ok) m = std::min(m, r.l);
    return m;
}

double ReducedField::min_L() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : points)
        if (r.ok) m = std::min(m, r.L);
    return m;
}

ReducedField reduced_field(const LChart& c, const Vec3& p, double tau_bar, const std::vector<Vec3>& targets,
                           const BvpOptions& opt) {
    ReducedField f;
    f.p = p;
    f.tau_bar = tau_bar;
    f.points.resize(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
        ReducedPoint& r = f.points[i];
        r.q = targets[i];
        try {
            const BvpResult b = solve_bvp(c, p, targets[i], tau_bar, opt);
            r.L = b.L;
            r.l = b.L / (2 * std::sqrt(tau_bar));
            r.v = b.path.v();
            r.n_minima = b.n_minima;
            r.smooth = b.smooth;
            r.K = harnack_data(c, b.path, std::numeric_limits<double>::infinity()).K;
            r.R = c.at(b.target, tau_bar, 0).R;
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });
    return f;
}

IdentityReport identity_residuals(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar,
                                  const IdentityOptions& opt) {
    const int n = c.n();
    const Center ctr = solve_center(c, p, q, tau_bar, opt);
    const ChartPoint& cp = ctr.cp;
    const double tb = tau_bar, st = std::sqrt(tb);
    IdentityReport r;
    r.tau_bar = tb;
    r.smooth = ctr.bvp.smooth;
    r.L = ctr.bvp.L;
    r.l = r.L / (2 * st);
    r.K = ctr.K;
    r.R = cp.R;

    Vec3 dL, ddL;
    spatial_derivs(c, p, ctr, opt, dL, ddL);
    r.grad_L_sq = std::exp(-2 * cp.u) * dL.squaredNorm();
    r.lap_L = laplacian(cp, n, dL, ddL);
    r.grad_vs_velocity = std::exp(-cp.u) * (dL - cp.e2u() * ctr.bvp.path.xhat.back()).norm();

    const double k = opt.k * tb;
    auto Lt = [&](double tau) { return tau == tb ? ctr.bvp.L : L_near(c, p, ctr, Vec3::Zero(), tau, opt); };
    if (tb + 2 * k <= c.tau_max())
        r.dL_dtau = d1(Lt(tb - 2 * k), Lt(tb - k), Lt(tb + k), Lt(tb + 2 * k), k);
    else
        r.dL_dtau = (25 * Lt(tb) - 48 * Lt(tb - k) + 36 * Lt(tb - 2 * k) - 16 * Lt(tb - 3 * k) + 3 * Lt(tb - 4 * k)) / (12 * k);

    const double L = r.L, K = r.K, R = r.R;
    r.L_grad = r.grad_L_sq - (-4 * tb * R + 2 * L / st - 4 * K / st);
    r.L_time = r.dL_dtau - (2 * st * R - L / (2 * tb) + K / tb);
    r.L_lap_slack = (n / st - 2 * st * R - K / tb) - r.lap_L;

    const double l = r.l, t32 = tb * st;
    const double dl = r.dL_dtau / (2 * st) - L / (4 * t32);
    const double gl = r.grad_L_sq / (4 * tb);
    const double ll = r.lap_L / (2 * st);
    r.l_time = dl - (R - l / tb + K / (2 * t32));
    r.l_grad = gl - (-R + l / tb - K / t32);
    r.l_lap_slack = (-R + n / (2 * tb) - K / (2 * t32)) - ll;
    r.l_time_tau2 = dl - (R - l / tb + K / (2 * tb * tb));
    r.l_grad_tau2 = gl - (-R + l / tb - K / (2 * tb * tb));
    r.l_lap_slack_tau2 = (-R + n / (2 * tb) - K / (2 * tb * tb)) - ll;
    return r;
}

HessianReport hessian_bound_check(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar, const Vec3& y_in,
                                  const IdentityOptions& opt) {
    const int n = c.n();
    const Center ctr = solve_center(c, p, q, tau_bar, opt);
    const ChartPoint& cp = ctr.cp;
    const LPath& path = ctr.bvp.path;
    const double st = std::sqrt(tau_bar);
    HessianReport r;
    r.smooth = ctr.bvp.smooth;

    Vec3 y = Vec3::Zero();
    y.head(n) = y_in.head(n);
    if (!(y.norm() > 0)) throw std::invalid_argument("hessian_bound_check needs a nonzero direction");
    y /= std::sqrt(cp.inner(y, y));

    // covector dL from the boundary term of the first variation
    const Vec3 dL = cp.e2u() * path.xhat.back();
    const double h = opt.h * st;  // along the unit vector y
    auto f = [&](double e) { return e == 0.0 ? ctr.bvp.L : L_near(c, p, ctr, e * y, tau_bar, opt); };
    r.hess = d2(f(-2 * h), f(-h), f(0), f(h), f(2 * h), h) - cp.gamma(y, y).dot(dL);

    auto q_integral = [&](const FrameBundle& fb, int col) {
        return simpson(path.s, [&](std::size_t j) {
            const double s = path.s[j];
            if (s == 0.0) return 0.0;
            const ChartPoint pj = c.at(path.x[j], s * s, 2);
            return 2 * s * s * lyh_quadratic(pj, s, path.xhat[j], fb.Y[j].col(col) / s);
        });
    };
    Mat3 seed = Mat3::Zero();
    seed.col(0) = y;
    const FrameBundle one = transport_frame(c, path, seed);
    r.rhs = 1 / st - 2 * st * cp.rho - q_integral(one, 0);
    r.slack = r.rhs - r.hess;

    Vec3 dLfd, ddL;
    spatial_derivs(c, p, ctr, opt, dLfd, ddL);
    r.lap = laplacian(cp, n, dLfd, ddL);
    const FrameBundle fb = transport_frame(c, path);
    r.frame_gram_error = fb.gram_error;
    r.lap_rhs_frame = n / st - 2 * st * cp.R;
    for (int i = 0; i < n; ++i) r.lap_rhs_frame -= q_integral(fb, i);
    r.lap_slack_frame = r.lap_rhs_frame - r.lap;
    r.lap_rhs_K = n / st - 2 * st * cp.R - ctr.K / tau_bar;
    r.lap_slack_K = r.lap_rhs_K - r.lap;
    for (std::size_t j = 1; j < path.s.size(); ++j) {
        const double s = path.s[j];
        const ChartPoint pj = c.at(path.x[j], s * s, 2);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += lyh_quadratic(pj, s, path.xhat[j], fb.Y[j].col(i) / s);
        const double H = harnack_H(pj, s, path.xhat[j]);
        r.trace_error = std::max(r.trace_error, std::abs(sum - s * s / tau_bar * H));
    }
    return r;
}

VolumeTargets volume_targets(const LChart& c, const Vec3& p, double tau, int resolution) {
    VolumeTargets t;
    const int n = c.n();
    switch (c.kind()) {
        case LChart::Kind::torus: {
            const int stride = resolution > 0 ? resolution : 1;
            const double hx = c.lx() / c.nx(), hy = c.ly() / c.ny();
            const double cell = hx * hy * stride * stride;
            for (int j = 0; j < c.ny(); j += stride)
                for (int i = 0; i < c.nx(); i += stride) {
                    const Vec3 q(i * hx, j * hy, 0.0);
                    t.q.push_back(q);
                    t.w.push_back(c.at(q, tau, 0).e2u() * cell);
                }
            break;
        }
        case LChart::Kind::sphere: {
            if ((p - c.base_point()).norm() > 0) throw std::invalid_argument("sphere volume targets are centered at the base point");
            const int m = resolution > 0 ? resolution : 48;
            std::vector<double> th, w;
            gauss_legendre(m, 0.0, std::numbers::pi, th, w);
            const double rn = std::pow(c.sphere_radius(tau), n) * unit_sphere_area(n - 1);
            for (int j = 0; j < m; ++j) {
                t.q.push_back(c.sphere_target(th[j]));
                t.w.push_back(rn * w[j] * std::pow(std::sin(th[j]), n - 1));
            }
            break;
        }
        case LChart::Kind::euclidean: {
            const int N = resolution > 0 ? resolution : 24;
            const double e2u = c.at(p, 0.0, 0).e2u();
            const double W = 10 * std::sqrt(tau / e2u), h = 2 * W / N;
            const double w = std::pow(h, n) * std::pow(e2u, 0.5 * n);
            const int total = static_cast<int>(std::pow(N, n));
            for (int k = 0; k < total; ++k) {
                Vec3 q = p;
                int r = k;
                for (int a = 0; a < n; ++a, r /= N) q[a] += -W + (r % N + 0.5) * h;
                t.q.push_back(q);
                t.w.push_back(w);
            }
            break;
        }
    }
    return t;
}

std::vector<VolumeEntry> reduced_volume(const LChart& c, const Vec3& p, const std::vector<double>& taus,
                                        const VolumeOptions& opt, std::vector<ReducedField>* fields) {
    const int n = c.n();
    std::vector<VolumeEntry> out;
    for (const double tau : taus) {
        const VolumeTargets tg = volume_targets(c, p, tau, opt.resolution);
        const ReducedField f = reduced_field(c, p, tau, tg.q, opt.bvp);
        VolumeEntry e;
        e.tau = tau;
        e.points = tg.q.size();
        e.failures = f.failures();
        e.min_l = f.min_l();
        e.min_L = f.min_L();
        e.aborted = e.failures * 100 > e.points;
        if (!e.aborted) {
            double V = 0.0, B = 0.0;
            const double t32 = tau * std::sqrt(tau);
            for (std::size_t i = 0; i < tg.q.size(); ++i) {
                const ReducedPoint& r = f.points[i];
                if (!r.ok) continue;
                const double dens = tg.w[i] * std::pow(tau, -0.5 * n) * std::exp(-r.l);
                V += dens;
                const double l_tau = r.R - r.l / tau + r.K / (2 * t32);
                B += dens * (l_tau - r.R + n / (2 * tau));
            }
            e.V = V;
            e.balance_density = B;
        }
        out.push_back(e);
        if (fields) fields->push_back(f);
    }
    return out;
}

double volume_balance(const std::vector<VolumeEntry>& v) {
    if (v.size() < 2) throw std::invalid_argument("volume_balance needs at least two entries");
    const std::size_t m = v.size() - 1;
    const double h = (v.back().tau - v.front().tau) / m;
    bool uniform = m % 2 == 0;
    for (std::size_t i = 1; i <= m && uniform; ++i) uniform = std::abs(v[i].tau - v[i - 1].tau - h) <= 1e-9 * h;
    double integral = 0.0;
    if (uniform) {
        for (std::size_t i = 0; i <= m; ++i) integral += (i == 0 || i == m ? 1.0 : i % 2 ? 4.0 : 2.0) * v[i].balance_density;
        integral *= h / 3.0;
    } else {
        for (std::size_t i = 1; i <= m; ++i)
            integral += 0.5 * (v[i].tau - v[i - 1].tau) * (v[i].balance_density + v[i - 1].balance_density);
    }
    return v.back().V - v.front().V + integral;
}

double scalar_floor_slack(const LChart& c) {
    const double T = c.tau_max();
    const int n = c.n();
    if (!std::isfinite(T)) return c.min_R();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [tau, minR] : c.min_R_profile(T))
        if (tau < T * (1 - 1e-12)) worst = std::min(worst, minR + n / (2 * (T - tau)));
    return worst;
}

SpeedReport speed_bound_check(const LChart& c, const LPath& path) {
    SpeedReport r;
    const int n = c.n();
    const double tb = path.tau_bar, C0 = c.C0();
    const Vec3 v = path.v();
    const double bound = speed_bound(c, c.at(path.p(), 0.0, 0).inner(v, v), tb);
    r.bound_finite = std::isfinite(bound);
    const double L = l_length(c, path);
    const double Lc = L + 2.0 * n * C0 / 3.0 * std::pow(tb, 1.5);
    r.distance_slack = std::numeric_limits<double>::infinity();
    double min_speed = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < path.s.size(); ++j) {
        const double s = path.s[j], tau = s * s;
        const ChartPoint cp = c.at(path.x[j], tau, 0);
        const double speed = 0.25 * cp.inner(path.xhat[j], path.xhat[j]);
        if (r.bound_finite) r.max_ratio = std::max(r.max_ratio, bound > 0 ? speed / bound : (speed > 0 ? INFINITY : 0.0));
        if (j > 0 && j < path.steps()) min_speed = std::min(min_speed, speed);
        const double d = c.distance_bound(path.p(), path.x[j], 0.0);
        r.distance_slack = std::min(r.distance_slack, 2 * s * std::exp(2 * C0 * tau) * Lc - d * d);
    }
    r.best_speed_slack = L / (2 * std::sqrt(tb)) + n * C0 * tb / 3.0 - min_speed;
    return r;
}

}  // namespace plab
