#include "plab/lgeo/geodesic.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace plab {

namespace {

Mat3 proj(int n) {
    Mat3 p = Mat3::Zero();
    for (int i = 0; i < n; ++i) p(i, i) = 1.0;
    return p;
}

struct State {
    Vec3 x, w;
    Mat3 jx, jw, psi;
};

State axpy(const State& a, double h, const State& d) {
    return {a.x + h * d.x, a.w + h * d.w, a.jx + h * d.jx, a.jw + h * d.jw, a.psi + h * d.psi};
}

// geodesic acceleration: -Gamma(w, w) - 4 s rho w + 2 s^2 grad R
Vec3 accel(const ChartPoint& c, double s, const Vec3& w) {
    return -c.gamma(w, w) - 4.0 * s * c.rho * w + 2.0 * s * s * c.grad_R();
}

struct Rhs {
    const LChart& c;
    const LChart::SliceGrid& sl;
    bool jac, frame;
    Mat3 P;
    // k indexes the half-step slices: s = k ds / 2
    State operator()(int k, double s, const State& y) const {
        const ChartPoint cp = c.at(y.x, sl[k], jac ? 2 : 1);
        State d;
        d.x = y.w;
        d.w = accel(cp, s, y.w);
        d.jx.setZero();
        d.jw.setZero();
        d.psi.setZero();
        const Vec3& w = y.w;
        const Vec3 drho = cp.dR / c.n();
        if (jac) {
            const double em2u = std::exp(-2.0 * cp.u);
            const Mat3 ax = -2.0 * w * (cp.ddu * w).transpose() + w.squaredNorm() * cp.ddu -
                            4.0 * s * w * drho.transpose() +
                            2.0 * s * s * em2u * (cp.ddR - 2.0 * cp.dR * cp.du.transpose());
            const Mat3 aw = -2.0 * w * cp.du.transpose() - 2.0 * cp.du.dot(w) * P + 2.0 * cp.du * w.transpose() -
                            4.0 * s * cp.rho * P;
            d.jx = y.jw;
            d.jw = ax * y.jx + aw * y.jw;
        }
        if (frame) {
            const Mat3 B = -(cp.du.dot(w) * P + w * cp.du.transpose() - cp.du * w.transpose()) - 2.0 * s * cp.rho * P;
            d.psi = B * y.psi;
        }
        return d;
    }
};

template <class F>
double simpson(const std::vector<double>& s, F&& f) {
    const std::size_t N = s.size() - 1;
    if (N < 2 || N % 2) throw std::invalid_argument("Simpson quadrature needs an even number of intervals");
    const double h = s[1] - s[0];
    double acc = f(0) + f(N);
    for (std::size_t j = 1; j < N; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(j);
    return acc * h / 3.0;
}

std::vector<double> s_grid(double tau_bar, int steps) {
    if (!(tau_bar > 0)) throw std::invalid_argument("tau_bar must be positive");
    if (steps < 4 || steps % 2) throw std::invalid_argument("geodesic steps must be even and >= 4");
    std::vector<double> s(steps + 1);
    const double S = std::sqrt(tau_bar);
    for (int j = 0; j <= steps; ++j) s[j] = S * j / steps;
    return s;
}

}  // namespace

double speed_bound(const LChart& c, double v_norm_sq, double tau_bar) {
    const double C0 = c.C0();
    if (C0 == 0.0) return v_norm_sq;
    const double T = c.tau_max();
    if (!std::isfinite(T) || tau_bar >= T) return std::numeric_limits<double>::infinity();
    const double e = std::exp(std::min(6.0 * C0 * T, 700.0));
    return e * v_norm_sq + speed_constant(c.n()) * T / std::min(T - tau_bar, 1.0 / C0) * (e - 1.0);
}

Shot shoot_full(const LChart& c, const Vec3& p, const Vec3& v, double tau_bar, int steps, bool jacobi, bool frame) {
    if (tau_bar > c.tau_max() * (1 + 1e-12)) throw std::out_of_range("tau_bar beyond the history");
    const std::vector<double> s = s_grid(tau_bar, steps);
    const Mat3 P = proj(c.n());
    const auto slices = c.slices(tau_bar, steps);
    const Rhs f{c, *slices, jacobi, frame, P};
    State y{P * p, 2.0 * (P * v), Mat3::Zero(), P, P};
    const double v2 = c.at(p, 0.0, 0).inner(v, v);
    const double bound = 10.0 * speed_bound(c, v2, tau_bar) + 1e-12;

    Shot out;
    out.path.n = c.n();
    out.path.tau_bar = tau_bar;
    out.path.s = s;
    out.path.x.reserve(s.size());
    out.path.xhat.reserve(s.size());
    auto record = [&](const State& st) {
        out.path.x.push_back(st.x);
        out.path.xhat.push_back(st.w);
        if (jacobi) out.jacobi.push_back(st.jx);
        if (frame) out.frame.push_back(st.psi);
    };
    record(y);
    const double h = s[1] - s[0];
    for (int j = 0; j < steps; ++j) {
        const double sj = s[j];
        const State k1 = f(2 * j, sj, y);
        const State k2 = f(2 * j + 1, sj + 0.5 * h, axpy(y, 0.5 * h, k1));
        const State k3 = f(2 * j + 1, sj + 0.5 * h, axpy(y, 0.5 * h, k2));
        const State k4 = f(2 * j + 2, sj + h, axpy(y, h, k3));
        y.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
        y.w += h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
        if (jacobi) {
            y.jx += h / 6.0 * (k1.jx + 2.0 * k2.jx + 2.0 * k3.jx + k4.jx);
            y.jw += h / 6.0 * (k1.jw + 2.0 * k2.jw + 2.0 * k3.jw + k4.jw);
        }
        if (frame) y.psi += h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
        // tau |X|^2 = |xhat|^2 / 4
        const double speed = 0.25 * c.at(y.x, (*slices)[2 * j + 2], 0).inner(y.w, y.w);
        if (!std::isfinite(speed) || speed > bound) throw GeodesicBlowUp(s[j + 1], speed / (bound / 10.0));
        record(y);
    }
    return out;
}

LPath shoot(const LChart& c, const Vec3& p, const Vec3& v, double tau_bar, int steps) {
    return shoot_full(c, p, v, tau_bar, steps, false, false).path;
}

double l_length(const LChart& c, const LPath& path) {
    const auto sl = c.slices(path.tau_bar, static_cast<int>(path.steps()));
    return simpson(path.s, [&](std::size_t j) {
        const double s = path.s[j];
        const ChartPoint cp = c.at(path.x[j], (*sl)[2 * j], 0);
        return 0.5 * cp.inner(path.xhat[j], path.xhat[j]) + 2.0 * s * s * cp.R;
    });
}

double geodesic_residual(const LChart& c, const LPath& path) {
    const std::size_t N = path.steps();
    const double h = path.ds();
    const auto sl = c.slices(path.tau_bar, static_cast<int>(N));
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 <= N; ++j) {
        const Vec3& w = path.xhat[j];
        const Vec3 dw = (-path.xhat[j + 2] + 8.0 * path.xhat[j + 1] - 8.0 * path.xhat[j - 1] + path.xhat[j - 2]) / (12 * h);
        const double s = path.s[j];
        const ChartPoint cp = c.at(path.x[j], (*sl)[2 * j], 1);
        const Vec3 r = dw - accel(cp, s, w);
        worst = std::max(worst, std::sqrt(cp.inner(r, r)));
    }
    return worst;
}

double dirichlet_energy(const Backend& m, const std::vector<Vec3>& pts) {
    const LChart c(m);
    const std::size_t N = pts.size() - 1;
    if (pts.size() < 5 || N % 2) throw std::invalid_argument("dirichlet_energy needs an even number (>= 4) of intervals");
    const double h = 1.0 / N;
    std::vector<double> t(N + 1);
    for (std::size_t j = 0; j <= N; ++j) t[j] = j * h;
    auto vel = [&](std::size_t j) -> Vec3 {
        const auto& f = pts;
        if (j >= 2 && j + 2 <= N) return (-f[j + 2] + 8.0 * f[j + 1] - 8.0 * f[j - 1] + f[j - 2]) / (12 * h);
        if (j == 0) return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12 * h);
        if (j == 1) return (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12 * h);
        if (j == N) return (25.0 * f[N] - 48.0 * f[N - 1] + 36.0 * f[N - 2] - 16.0 * f[N - 3] + 3.0 * f[N - 4]) / (12 * h);
        return (3.0 * f[N] + 10.0 * f[N - 1] - 18.0 * f[N - 2] + 6.0 * f[N - 3] - f[N - 4]) / (12 * h);
    };
    return simpson(t, [&](std::size_t j) {
        const Vec3 d = vel(j);
        return 0.5 * c.at(pts[j], 0.0, 0).inner(d, d);
    });
}

double l_length(const LChart& c, double tau_bar, int steps, const PathFn& path) {
    const std::vector<double> s = s_grid(tau_bar, steps);
    return simpson(s, [&](std::size_t j) {
        const PathJet g = path(s[j]);
        const ChartPoint cp = c.at(g.x, s[j] * s[j], 0);
        return 0.5 * cp.inner(g.xs, g.xs) + 2.0 * s[j] * s[j] * cp.R;
    });
}

double first_variation(const LChart& c, double tau_bar, int steps, const PathFn& path, const FieldFn& Y) {
    const std::vector<double> s = s_grid(tau_bar, steps);
    auto boundary = [&](double sj) {
        const PathJet g = path(sj);
        return c.at(g.x, sj * sj, 0).inner(g.xs, Y(sj).x);
    };
    const double interior = simpson(s, [&](std::size_t j) {
        const double sj = s[j];
        const PathJet g = path(sj);
        const ChartPoint cp = c.at(g.x, sj * sj, 1);
        const Vec3 acc = g.xss + cp.gamma(g.xs, g.xs);  // D xhat / ds
        const Vec3 e = 2.0 * sj * sj * cp.grad_R() - acc - 4.0 * sj * cp.rho * g.xs;
        return cp.inner(Y(sj).x, e);
    });
    return boundary(s.back()) - boundary(0.0) + interior;
}

double second_variation(const LChart& c, double tau_bar, int steps, const PathFn& path, const FieldFn& Y) {
    const std::vector<double> s = s_grid(tau_bar, steps);
    auto boundary = [&](double sj) {
        const PathJet g = path(sj);
        const Vec3 y = Y(sj).x;
        const ChartPoint cp = c.at(g.x, sj * sj, 1);
        return cp.inner(cp.gamma(y, y), g.xs);
    };
    const double interior = simpson(s, [&](std::size_t j) {
        const double sj = s[j];
        const PathJet g = path(sj);
        const PathJet yj = Y(sj);
        const Vec3& y = yj.x;
        const Vec3& X = g.xs;
        const ChartPoint cp = c.at(g.x, sj * sj, 2);
        const Vec3 dY = yj.xs + cp.gamma(X, y);
        const double XX = cp.inner(X, X), YY = cp.inner(y, y), XY = cp.inner(X, y);
        const Vec3 drho = cp.dR / c.n();
        return cp.inner(dY, dY) - cp.kappa * (XX * YY - XY * XY) + 2.0 * sj * sj * y.dot(cp.hess_R() * y) +
               2.0 * sj * drho.dot(X) * YY - 4.0 * sj * drho.dot(y) * XY;
    });
    return boundary(s.back()) - boundary(0.0) + interior;
}

BvpResult solve_bvp_from(const LChart& c, const Vec3& p, const Vec3& target, double tau_bar, const Vec3& v0,
                         const BvpOptions& opt) {
    const int n = c.n();
    const double scale = std::max(1.0, (target - p).norm());
    Vec3 v = v0;
    Shot sh = shoot_full(c, p, v, tau_bar, opt.steps, true, false);
    Vec3 F = sh.path.endpoint() - target;
    double err = F.norm();
    int it = 0;
    // Gauss-Newton steps with Levenberg-Marquardt damping (Nielsen's update) once a full step
    // fails; damping matters near conjugate points, where the endpoint map is close to singular
    double mu = 0.0, nu = 2.0;
    for (; it < opt.max_newton && err > 1e-13 * scale; ++it) {
        const Eigen::MatrixXd J = 2.0 * sh.jacobi.back().topLeftCorner(n, n);
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * Eigen::VectorXd(F.head(n));
        const double floor_mu = 1e-14 * A.diagonal().maxCoeff();
        bool accepted = false;
        for (int k = 0; k < 40 && !accepted; ++k) {
            const Eigen::VectorXd step = -(A + mu * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(g);
            double Fnew = std::numeric_limits<double>::infinity();
            if (step.allFinite()) {
                Vec3 dv = Vec3::Zero();
                dv.head(n) = step;
                try {
                    Shot trial = shoot_full(c, p, v + dv, tau_bar, opt.steps, true, false);
                    const Vec3 Ft = trial.path.endpoint() - target;
                    Fnew = Ft.norm();
                    if (Fnew < err) {
                        const double predicted = 0.5 * step.dot(mu * step - g);
                        const double rho = predicted > 0 ? 0.5 * (err * err - Fnew * Fnew) / predicted : 1.0;
                        v += dv;
                        sh = std::move(trial);
                        F = Ft;
                        err = Fnew;
                        accepted = true;
                        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                        if (mu < floor_mu) mu = 0.0;
                        nu = 2.0;
                    }
                } catch (const GeodesicBlowUp&) {
                }
            }
            if (!accepted) {
                mu = mu == 0.0 ? 1e-3 * A.diagonal().maxCoeff() : mu * nu;
                nu *= 2.0;
            }
        }
        if (!accepted) break;
    }
    if (!(err <= opt.hit_tol)) throw BvpFailure("Newton did not reach the target (endpoint error " + std::to_string(err) + ")");
    BvpResult r;
    r.path = std::move(sh.path);
    r.L = l_length(c, r.path);
    r.target = target;
    r.iterations = it;
    r.hit_error = err;
    r.n_minima = 1;
    return r;
}

BvpResult solve_bvp(const LChart& c, const Vec3& p, const Vec3& q, double tau_bar, const BvpOptions& opt) {
    const double S = std::sqrt(tau_bar);
    const int n = c.n();
    std::vector<Vec3> lifts;
    if (c.kind() == LChart::Kind::torus) {
        Vec3 q0 = q;
        q0[0] -= c.lx() * std::round((q[0] - p[0]) / c.lx());
        q0[1] -= c.ly() * std::round((q[1] - p[1]) / c.ly());
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j) lifts.push_back(q0 + Vec3(i * c.lx(), j * c.ly(), 0.0));
        std::stable_sort(lifts.begin(), lifts.end(),
                         [&](const Vec3& a, const Vec3& b) { return (a - p).norm() < (b - p).norm(); });
    } else {
        lifts.push_back(q);
    }
    // no path to a lift is shorter than this
    const double curv_floor = c.curvature_floor(tau_bar);
    auto lower_bound = [&](const Vec3& t) {
        const double e = c.kind() == LChart::Kind::sphere ? 0.0 : c.min_e2u();
        return 0.5 * e * (t - p).squaredNorm() / S + curv_floor;
    };

    std::vector<BvpResult> found;
    auto best_L = [&] {
        double b = std::numeric_limits<double>::infinity();
        for (const auto& r : found) b = std::min(b, r.L);
        return b;
    };
    auto add = [&](BvpResult r) {
        for (const auto& o : found)
            if ((o.target - r.target).norm() < 1e-9 * (1 + r.target.norm()) &&
                (o.path.v() - r.path.v()).norm() < 1e-6 * (1 + r.path.v().norm()))
                return;
        found.push_back(std::move(r));
    };
    for (const Vec3& t : lifts) {
        if (lower_bound(t) > best_L() + opt.tie_tol) continue;
        try {
            add(solve_bvp_from(c, p, t, tau_bar, c.initial_velocity(p, t, tau_bar), opt));
        } catch (const BvpFailure&) {
        } catch (const GeodesicBlowUp&) {
        }
    }
    if (found.empty()) {
        // lattice over the ball of initial velocities permitted by the L and speed bounds
        const double C0 = c.C0();
        const double T = std::isfinite(c.tau_max()) ? c.tau_max() : tau_bar;
        const double d = c.distance_bound(p, lifts.front(), tau_bar);
        const double Lub = std::exp(2 * C0 * tau_bar) * d * d / (2 * S) + 2.0 * n * C0 / 3.0 * std::pow(tau_bar, 1.5);
        const double vg = std::sqrt(std::exp(std::min(6 * C0 * T, 30.0)) * (Lub / (2 * S) + n * C0 * tau_bar / 3.0));
        const double radius = vg * std::exp(-c.at(p, 0.0, 0).u);
        const int m = std::max(2, opt.lattice);
        const int total = static_cast<int>(std::pow(m, n));
        for (int k = 0; k < total; ++k) {
            Vec3 v0 = Vec3::Zero();
            int r = k;
            for (int a = 0; a < n; ++a, r /= m) v0[a] = radius * (2.0 * (r % m) / (m - 1) - 1.0);
            try {
                const Vec3 end = shoot(c, p, v0, tau_bar, opt.steps).endpoint();
                const Vec3* t = &lifts.front();
                for (const Vec3& l : lifts)
                    if ((l - end).norm() < (*t - end).norm()) t = &l;
                add(solve_bvp_from(c, p, *t, tau_bar, v0, opt));
            } catch (const BvpFailure&) {
            } catch (const GeodesicBlowUp&) {
            }
        }
    }
    if (found.empty()) throw BvpFailure("no start converged to an L-geodesic ending at the target");
    std::stable_sort(found.begin(), found.end(), [](const BvpResult& a, const BvpResult& b) { return a.L < b.L; });
    BvpResult best = found.front();
    best.n_minima = static_cast<int>(found.size());
    if (found.size() > 1) best.second_L = found[1].L;
    best.smooth = !(best.second_L - best.L <= opt.tie_tol);
    return best;
}

}  // namespace plab
