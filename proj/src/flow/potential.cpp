#include "plab/flow/potential.hpp"

#include <cmath>
#include <numbers>

#include "plab/geometry/ops.hpp"

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------- euclidean ----------

PotentialTrajectory euclid_trajectory(const MetricHistory& h, const GaussianMixture& w, PotentialMode mode,
                                      double tau0) {
    const auto& e = std::get<EuclideanSpace>(h.forward_snapshot(0));
    const double T = h.t0();
    PotentialTrajectory tr{mode, tau0, h, {}, {}, {}, {}, {}};
    if (mode == PotentialMode::gauge && w.parts.size() != 1)
        throw std::invalid_argument("gauge mode on euclidean space needs a single Gaussian");
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double t = h.forward_times()[k];
        GaussianMixture wt = w;
        for (auto& c : wt.parts) c.sigma += T - t;
        double offset = 0.0;
        if (mode == PotentialMode::normalized) offset = -0.5 * e.n * std::log(4 * kPi * (tau0 - t));
        tr.index.push_back(k);
        tr.t.push_back(t);
        if (mode == PotentialMode::gauge) {
            // pullback by the dilation about the center that is the identity at t0
            EuclideanSpace g = e;
            g.scale = e.scale * wt.parts[0].sigma / w.parts[0].sigma;
            tr.gauge_euclid.push_back(g);
            tr.f.push_back(mixture_log_potential(wt, e.n, g.scale));
        } else {
            tr.f.push_back(mixture_log_potential(wt, e.n, e.scale, offset));
        }
    }
    return tr;
}

// ---------- sphere ----------

// Zonal eigenfunctions of the round S^n as polynomials in x = cos(theta):
// Chebyshev T_l for n = 1, Gegenbauer C_l^{(n-1)/2} otherwise; eigenvalue -l(l+n-1)/r^2.
struct ZonalBasis {
    int n;
    int L;
    void eval(double x, std::vector<double>& p, std::vector<double>& dp, std::vector<double>& ddp) const {
        p.assign(L + 1, 0.0);
        dp.assign(L + 1, 0.0);
        ddp.assign(L + 1, 0.0);
        p[0] = 1.0;
        if (L == 0) return;
        const double lam = 0.5 * (n - 1);
        const double a1 = n == 1 ? 1.0 : 2.0 * lam;
        p[1] = a1 * x;
        dp[1] = a1;
        for (int l = 1; l < L; ++l) {
            const double a = n == 1 ? 2.0 : 2.0 * (l + lam) / (l + 1);
            const double b = n == 1 ? 1.0 : (l + 2.0 * lam - 1.0) / (l + 1);
            p[l + 1] = a * x * p[l] - b * p[l - 1];
            dp[l + 1] = a * p[l] + a * x * dp[l] - b * dp[l - 1];
            ddp[l + 1] = 2.0 * a * dp[l] + a * x * ddp[l] - b * ddp[l - 1];
        }
    }
};

// Gauss rule in x for the weight (1 - x^2)^{(n-2)/2}, exact to degree 2N - 1.
void zonal_rule(int n, int N, std::vector<double>& x, std::vector<double>& w) {
    x.assign(N, 0.0);
    w.assign(N, 0.0);
    if (n == 1) {
        for (int k = 0; k < N; ++k) x[k] = std::cos((2.0 * k + 1) * kPi / (2.0 * N)), w[k] = kPi / N;
    } else if (n == 2) {
        gauss_legendre(N, -1.0, 1.0, x, w);
    } else {
        for (int k = 0; k < N; ++k) {
            const double a = (k + 1.0) * kPi / (N + 1.0);
            x[k] = std::cos(a);
            w[k] = kPi / (N + 1.0) * std::sin(a) * std::sin(a);
        }
    }
}

struct ZonalDensity {
    ZonalBasis basis;
    std::vector<double> c;
    Jet1 log_jet(double theta, double offset) const {
        std::vector<double> p, dp, ddp;
        const double x = std::cos(theta), s = std::sin(theta);
        basis.eval(x, p, dp, ddp);
        double w = 0, wx = 0, wxx = 0;
        for (int l = 0; l <= basis.L; ++l) w += c[l] * p[l], wx += c[l] * dp[l], wxx += c[l] * ddp[l];
        if (!(w > 0)) throw std::domain_error("evolved density lost positivity");
        const double w1 = -s * wx, w2 = s * s * wxx - x * wx;
        return {-std::log(w) + offset, -w1 / w, -w2 / w + (w1 / w) * (w1 / w)};
    }
};

PotentialTrajectory sphere_trajectory(const MetricHistory& h, const ZonalField& fT, PotentialMode mode, double tau0,
                                      int stride) {
    if (mode == PotentialMode::gauge) throw std::invalid_argument("gauge mode is not available on the sphere");
    const auto& sT = std::get<RoundSphere>(h.forward_snapshot(h.size() - 1));
    const int n = sT.n, N = sT.nodes, L = N - 1;
    const double T = h.t0();
    auto offset_at = [&](double t) { return mode == PotentialMode::normalized ? -0.5 * n * std::log(4 * kPi * (tau0 - t)) : 0.0; };

    ZonalBasis basis{n, L};
    std::vector<double> x, w, p, dp, ddp;
    zonal_rule(n, N, x, w);
    std::vector<double> num(L + 1, 0.0), den(L + 1, 0.0);
    const double offT = offset_at(T);
    for (int k = 0; k < N; ++k) {
        const double dens = std::exp(-(fT.f(std::acos(x[k])).v - offT));
        basis.eval(x[k], p, dp, ddp);
        for (int l = 0; l <= L; ++l) num[l] += w[k] * dens * p[l], den[l] += w[k] * p[l] * p[l];
    }
    std::vector<double> cT(L + 1);
    for (int l = 0; l <= L; ++l) cT[l] = num[l] / den[l];

    PotentialTrajectory tr{mode, tau0, h, {}, {}, {}, {}, {}};
    const double rT2 = sT.r * sT.r;
    for (std::size_t k = 0; k < h.size(); k += stride) {
        const double t = h.forward_times()[k];
        const double r2 = std::pow(std::get<RoundSphere>(h.forward_snapshot(k)).r, 2);
        ZonalDensity zd{basis, cT};
        for (int l = 0; l <= L; ++l) {
            const double lam = l * (l + n - 1.0);
            // exp(-int_t^T (lam / r^2 + R) dt') in closed form
            const double decay = n == 1 ? std::exp(-lam * (T - t) / r2)
                                        : std::pow(rT2 / r2, (lam + n * (n - 1.0)) / (2.0 * (n - 1.0)));
            zd.c[l] = cT[l] * decay;
        }
        const double off = offset_at(t);
        tr.index.push_back(k);
        tr.t.push_back(t);
        tr.f.push_back(ZonalField{[zd, off](double th) { return zd.log_jet(th, off); }});
        if (k + stride >= h.size() && k != h.size() - 1) k = h.size() - 1 - stride;
    }
    return tr;
}

// ---------- torus ----------

// Density W = w e^{2u} with respect to dx dy obeys W_s = lap(W e^{-2u}) in s = t0 - t,
// because 2 u_s = R along the backward flow. The flat Laplacian sums to zero on the
// grid, so sum(W) is conserved to rounding.
std::vector<Grid> torus_densities(const MetricHistory& h, const Grid& WT) {
    const auto& t0 = std::get<ConformalTorus>(h.forward_snapshot(0));
    const Spectral2D sp = t0.spectral();
    const auto& ts = h.forward_times();
    std::vector<Grid> W(h.size());
    W.back() = WT;
    auto rhs = [&](const Grid& Wc, const Grid& u) { return sp.lap(Wc * (-2.0 * u).exp()); };
    for (std::size_t k = h.size() - 1; k > 0; --k) {
        const double ds = ts[k] - ts[k - 1];
        const Grid& uk = std::get<ConformalTorus>(h.forward_snapshot(k)).u;
        const Grid& uk1 = std::get<ConformalTorus>(h.forward_snapshot(k - 1)).u;
        const Grid um = h.sample_u(0.5 * (ts[k] + ts[k - 1]));
        const Grid& Wc = W[k];
        const Grid k1 = rhs(Wc, uk);
        const Grid k2 = rhs(Wc + 0.5 * ds * k1, um);
        const Grid k3 = rhs(Wc + 0.5 * ds * k2, um);
        const Grid k4 = rhs(Wc + ds * k3, uk1);
        W[k - 1] = Wc + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(W[k - 1] > 0.0).all()) throw std::domain_error("evolved density lost positivity; refine the grid");
    }
    return W;
}

PotentialTrajectory torus_gauge(const MetricHistory& h, const std::vector<Grid>& f, double tau0, int stride) {
    const auto& tor0 = std::get<ConformalTorus>(h.forward_snapshot(0));
    const Spectral2D sp = tor0.spectral();
    const int nx = tor0.nx, ny = tor0.ny;
    const auto& ts = h.forward_times();
    PotentialTrajectory tr{PotentialMode::gauge, tau0, h, {}, {}, {}, {}, {}};

    struct Fields {
        FourierSeries f, u;
    };
    auto fields = [&](std::size_t k) {
        return Fields{FourierSeries(sp, f[k]), FourierSeries(sp, std::get<ConformalTorus>(h.forward_snapshot(k)).u)};
    };
    // velocity -grad_g f evaluated at the displaced nodes
    auto velocity = [&](const Fields& F, const Grid& dx, const Grid& dy, Grid& vx, Grid& vy) {
        vx.resize(dx.size());
        vy.resize(dx.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int q = j * nx + i;
                const double px = sp.x(i) + dx[q], py = sp.y(j) + dy[q];
                const auto fv = F.f.eval(px, py, 1);
                const double em2u = std::exp(-2.0 * F.u.value(px, py));
                vx[q] = -em2u * fv.x;
                vy[q] = -em2u * fv.y;
            }
    };
    auto record = [&](std::size_t k, const Fields& F, const Grid& dx, const Grid& dy) {
        Grid ft(dx.size()), e2u(dx.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int q = j * nx + i;
                const double px = sp.x(i) + dx[q], py = sp.y(j) + dy[q];
                ft[q] = F.f.value(px, py);
                e2u[q] = std::exp(2.0 * F.u.value(px, py));
            }
        const Grid a11 = 1.0 + sp.dx(dx), a12 = sp.dy(dx);  // d psi^x / d(x, y)
        const Grid a21 = sp.dx(dy), a22 = 1.0 + sp.dy(dy);  // d psi^y / d(x, y)
        tr.gauge_torus.push_back({e2u * (a11 * a11 + a21 * a21), e2u * (a11 * a12 + a21 * a22),
                                  e2u * (a12 * a12 + a22 * a22)});
        tr.index.push_back(k);
        tr.t.push_back(ts[k]);
        tr.f.push_back(ft);
    };

    Grid dx = Grid::Zero(nx * ny), dy = Grid::Zero(nx * ny);
    Fields cur = fields(0);
    record(0, cur, dx, dy);
    const std::size_t step = 2 * static_cast<std::size_t>(stride);
    for (std::size_t k = 0; k + step < h.size(); k += step) {
        const std::size_t mid = k + stride, end = k + step;
        const double H = ts[end] - ts[k];
        const Fields Fm = fields(mid), Fe = fields(end);
        Grid k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        velocity(cur, dx, dy, k1x, k1y);
        velocity(Fm, dx + 0.5 * H * k1x, dy + 0.5 * H * k1y, k2x, k2y);
        velocity(Fm, dx + 0.5 * H * k2x, dy + 0.5 * H * k2y, k3x, k3y);
        velocity(Fe, dx + H * k3x, dy + H * k3y, k4x, k4y);
        dx += H / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        dy += H / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        cur = Fe;
        record(end, cur, dx, dy);
    }
    return tr;
}

PotentialTrajectory torus_trajectory(const MetricHistory& h, const Grid& fT, PotentialMode mode, double tau0,
                                     int stride) {
    const auto& tT = std::get<ConformalTorus>(h.forward_snapshot(h.size() - 1));
    check_grid(fT, tT.nx, tT.ny, "evolve_potential");
    const double T = h.t0();
    auto offset_at = [&](double t) { return mode == PotentialMode::normalized ? -std::log(4 * kPi * (tau0 - t)) : 0.0; };
    const Grid WT = (-(fT - offset_at(T))).exp() * (2.0 * tT.u).exp();
    const std::vector<Grid> W = torus_densities(h, WT);
    auto potential = [&](std::size_t k) {
        const auto& u = std::get<ConformalTorus>(h.forward_snapshot(k)).u;
        return Grid(-(W[k].log() - 2.0 * u) + offset_at(h.forward_times()[k]));
    };
    if (mode == PotentialMode::gauge) {
        std::vector<Grid> f(h.size());
        for (std::size_t k = 0; k < h.size(); ++k) f[k] = potential(k);
        return torus_gauge(h, f, tau0, stride);
    }
    PotentialTrajectory tr{mode, tau0, h, {}, {}, {}, {}, {}};
    for (std::size_t k = 0; k < h.size(); k += stride) {
        tr.index.push_back(k);
        tr.t.push_back(h.forward_times()[k]);
        tr.f.push_back(potential(k));
        if (k + stride >= h.size() && k != h.size() - 1) k = h.size() - 1 - stride;
    }
    return tr;
}

void check_tau(const MetricHistory& h, PotentialMode mode, double tau0) {
    if (mode != PotentialMode::normalized) return;
    if (!(tau0 - h.t0() > 0)) throw TauExhausted(tau0);
}

}  // namespace

EuclidField mixture_log_potential(const GaussianMixture& w, int n, double scale, double offset) {
    if (w.parts.empty()) throw std::invalid_argument("empty Gaussian mixture");
    for (const auto& c : w.parts)
        if (!(c.weight > 0) || !(c.sigma > 0)) throw std::invalid_argument("mixture weights and widths must be positive");
    Mat3 P = Mat3::Zero();
    for (int i = 0; i < n; ++i) P(i, i) = 1.0;
    return EuclidField{[w, n, scale, offset, P](const Vec3& x) {
        const std::size_t m = w.parts.size();
        std::vector<double> ell(m);
        std::vector<Vec3> g(m);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const auto& c = w.parts[i];
            const Vec3 d = P * (x - c.center);
            ell[i] = std::log(c.weight) - 0.5 * n * std::log(4 * kPi * c.sigma) - scale * d.squaredNorm() / (4 * c.sigma);
            g[i] = -scale * d / (2 * c.sigma);
            top = std::max(top, ell[i]);
        }
        double sum = 0.0;
        Vec3 gw = Vec3::Zero();
        Mat3 hw = Mat3::Zero();
        for (std::size_t i = 0; i < m; ++i) {
            const double r = std::exp(ell[i] - top);
            sum += r;
            gw += r * g[i];
            hw += r * (g[i] * g[i].transpose() - scale / (2 * w.parts[i].sigma) * P);
        }
        gw /= sum;
        hw /= sum;
        Jet j;
        j.v = -(top + std::log(sum)) + offset;
        j.g = -gw;
        j.h = -hw + gw * gw.transpose();
        return j;
    }};
}

PotentialTrajectory evolve_potential(const MetricHistory& h, const GaussianMixture& w_final, PotentialMode mode,
                                     double tau0) {
    if (!std::holds_alternative<EuclideanSpace>(h.forward_snapshot(0)))
        throw BackendMismatch("Gaussian mixtures live on euclidean histories");
    check_tau(h, mode, tau0);
    return euclid_trajectory(h.is_backward() ? backward_view(h) : h, w_final, mode, tau0);
}

PotentialTrajectory evolve_potential(const MetricHistory& h, const ScalarField& f_final, PotentialMode mode,
                                     double tau0, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be positive");
    check_tau(h, mode, tau0);
    if (h.is_backward()) return evolve_potential(backward_view(h), f_final, mode, tau0, stride);
    const Backend& b = h.forward_snapshot(0);
    if (std::holds_alternative<EuclideanSpace>(b))
        throw std::invalid_argument("euclidean potentials are evolved in closed form from a Gaussian mixture");
    if (std::holds_alternative<RoundSphere>(b)) {
        const auto* z = std::get_if<ZonalField>(&f_final);
        if (!z) throw BackendMismatch("evolve_potential: field does not live on this backend");
        return sphere_trajectory(h, *z, mode, tau0, stride);
    }
    const auto* g = std::get_if<Grid>(&f_final);
    if (!g) throw BackendMismatch("evolve_potential: field does not live on this backend");
    return torus_trajectory(h, *g, mode, tau0, stride);
}

}  // namespace plab
