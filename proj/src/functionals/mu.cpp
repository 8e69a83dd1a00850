#include "plab/functionals/mu.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "plab/functionals/eigen.hpp"

namespace plab {

namespace {

// K phi = -(a^{ij} d_ij phi + (d_i a^{ij}) d_j phi) with a = sqrt(det g) g^{-1}, so that
// sum cell * phi K phi is the Dirichlet energy. Second-derivative symbols keep the Nyquist
// mode; a collocated |grad phi|^2 would not, and the density could then sit on every other
// node at no gradient cost, lowering the discrete infimum by log 4.
struct Dirichlet {
    const TorusMetric& g;
    Grid a11, a12, a22, b1, b2;
    explicit Dirichlet(const TorusMetric& m) : g(m) {
        if (g.is_conformal()) return;
        a11 = g.sqrt_det * g.i11;
        a12 = g.sqrt_det * g.i12;
        a22 = g.sqrt_det * g.i22;
        b1 = g.sp().dx(a11) + g.sp().dy(a12);
        b2 = g.sp().dx(a12) + g.sp().dy(a22);
    }
    // (K + K^T) phi / cell and phi K phi / cell
    Grid sym(const Grid& phi, double& energy) const {
        const auto& sp = g.sp();
        if (g.is_conformal()) {
            const Grid k = -sp.lap(phi);
            energy = (phi * k).sum();
            return 2.0 * k;
        }
        const auto d = sp.all(phi);
        const Grid k = -(a11 * d.xx + 2.0 * a12 * d.xy + a22 * d.yy + b1 * d.x + b2 * d.y);
        const Grid kt = -(sp.dxx(a11 * phi) + 2.0 * sp.dxy(a12 * phi) + sp.dyy(a22 * phi) - sp.dx(b1 * phi) -
                          sp.dy(b2 * phi));
        energy = (phi * k).sum();
        return k + kt;
    }
};

// x log x with 0 log 0 = 0
Grid xlogx(const Grid& x) { return x.unaryExpr([](double v) { return v > 0 ? v * std::log(v) : 0.0; }); }

}  // namespace

double mu_objective(const TorusMetric& g, const Grid& P, double tau, const Grid& psi, Grid* grad) {
    const double N = 1.0 / (4 * std::numbers::pi * tau);  // n = 2
    const Grid w = g.weights();
    const double cell = g.cell();
    const double nrm = std::sqrt(N * (w * psi.square()).sum());
    const Grid phi = psi / nrm;
    const Grid x = phi.square();
    double E = 0.0;
    const Grid KK = Dirichlet(g).sym(phi, E);
    const Grid V = tau * P - 2.0;
    const double J = N * (4.0 * tau * cell * E + (w * (V * x - xlogx(x))).sum());
    if (grad) {
        const Grid logx = x.unaryExpr([](double v) { return v > 0 ? std::log(v) : -745.0; });
        // dJ/dphi, then through the normalization
        const Grid G = N * (4.0 * tau * cell * KK + 2.0 * w * phi * (V - logx - 1.0));
        const Grid gpsi = (G - N * w * phi * (G * phi).sum()) / nrm;
        *grad = gpsi / w;
    }
    return J;
}

namespace {

double wdot(const Grid& w, const Grid& a, const Grid& b) { return (w * a * b).sum(); }

// L-BFGS on the amplitude psi, phi = psi / |psi|. In f the Hessian carries a factor e^{-f}
// and the tails stall; in phi the functional is strongly convex near the minimizer.
MuResult descend(const TorusMetric& g, const Grid& P, double tau, const Grid& f0, const MuOptions& opt) {
    const Grid w = g.weights();
    const double N = 1.0 / (4 * std::numbers::pi * tau);
    Grid psi = (-0.5 * (f0 - f0.minCoeff())).exp();
    psi /= std::sqrt(N * wdot(w, psi, psi));
    Grid gr;
    double J = mu_objective(g, P, tau, psi, &gr);
    std::deque<std::pair<Grid, Grid>> mem;  // (s, y)
    MuResult r;
    long it = 0;
    int fails = 0;
    for (; it < opt.max_iter; ++it) {
        const double gn = std::sqrt(wdot(w, gr, gr));
        r.grad_norm = gn;
        if (gn <= opt.grad_tol) {
            r.converged = true;
            break;
        }
        // two-loop recursion in the L2(dV) inner product
        Grid q = gr;
        std::vector<double> alpha(mem.size());
        for (std::size_t i = mem.size(); i-- > 0;) {
            const auto& [s, y] = mem[i];
            alpha[i] = wdot(w, s, q) / wdot(w, y, s);
            q -= alpha[i] * y;
        }
        if (!mem.empty()) {
            const auto& [s, y] = mem.back();
            q *= wdot(w, s, y) / wdot(w, y, y);
        } else {
            q /= std::max(1.0, gn);
        }
        for (std::size_t i = 0; i < mem.size(); ++i) {
            const auto& [s, y] = mem[i];
            const double beta = wdot(w, y, q) / wdot(w, y, s);
            q += (alpha[i] - beta) * s;
        }
        Grid d = -q;
        double slope = wdot(w, gr, d);
        if (slope >= 0) {
            mem.clear();
            d = -gr / std::max(1.0, gn);
            slope = wdot(w, gr, d);
        }
        // backtracking from a unit step, halving under the Armijo condition
        double step = 1.0, Jn = 0.0;
        Grid gn_new;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Grid trial = psi + step * d;
            Jn = mu_objective(g, P, tau, trial, &gn_new);
            if (!std::isfinite(Jn)) {
                step *= 0.5;
                continue;
            }
            if (Jn <= J + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            // approximate Wolfe: once value differences are at rounding level, judge by the slope
            const double slope_n = wdot(w, gn_new, d);
            if (Jn <= J + 1e-13 * (1.0 + std::abs(J)) && 0.9 * slope <= slope_n && slope_n <= -0.8 * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            if (mem.empty() || ++fails > 2) break;  // no descent left at rounding level
            mem.clear();
            continue;
        }
        fails = 0;
        const Grid s = step * d, y = gn_new - gr;
        if (wdot(w, s, y) > 1e-300) {
            mem.emplace_back(s, y);
            if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
        }
        psi += s;
        psi /= std::sqrt(N * wdot(w, psi, psi));
        J = Jn;
        gr = gn_new;
    }
    r.iterations = it;
    r.mu = J;
    const Grid x = psi.square() / (N * wdot(w, psi, psi));
    r.f = Grid(-(x.max(1e-300)).log());
    return r;
}

}  // namespace

namespace {

// Gaussian potentials |x - c|^2 / 4 tau, measured with g at c, centred on the deepest strict local
// minima of P. For small tau W has several local minima and these starts reach the low ones.
std::vector<Grid> well_starts(const TorusMetric& g, const Grid& P, double tau, std::size_t count = 2) {
    const int nx = g.sp().nx(), ny = g.sp().ny();
    const double hx = g.sp().lx() / nx, hy = g.sp().ly() / ny;
    std::vector<std::pair<double, int>> wells;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int k = j * nx + i;
            bool strict = true;
            for (int dj = -1; dj <= 1 && strict; ++dj)
                for (int di = -1; di <= 1 && strict; ++di)
                    if (di || dj) strict = P[k] < P[((j + dj + ny) % ny) * nx + (i + di + nx) % nx];
            if (strict) wells.emplace_back(P[k], k);
        }
    std::sort(wells.begin(), wells.end());
    std::vector<Grid> out;
    for (std::size_t w = 0; w < std::min(count, wells.size()); ++w) {
        const int c = wells[w].second, ci = c % nx, cj = c / nx;
        Grid f(nx * ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double dx = std::remainder((i - ci) * hx, g.sp().lx());
                const double dy = std::remainder((j - cj) * hy, g.sp().ly());
                f[j * nx + i] = (g.g11[c] * dx * dx + 2 * g.g12[c] * dx * dy + g.g22[c] * dy * dy) / (4 * tau);
            }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace

MuResult mu_general(const TorusMetric& g, const Grid& P, double tau, const MuOptions& opt,
                    const std::vector<Grid>& extra_starts) {
    if (!(tau > 0)) throw std::invalid_argument("mu needs tau > 0");
    check_grid(P, g.sp().nx(), g.sp().ny(), "mu");
    MuResult best = descend(g, P, tau, Grid::Zero(P.size()), opt);
    best.start = "constant";
    auto consider = [&](MuResult r, const std::string& name) {
        if (r.mu < best.mu) {
            r.start = name;
            best = std::move(r);
        }
    };
    try {
        const SpectralResult ev = lowest_eigen(g, P);
        consider(descend(g, P, tau, std::get<Grid>(ev.f0), opt), "ground_state");
    } catch (const EigenNonConvergence&) {
        // the constant start alone still gives an upper bound
    }
    for (const Grid& b : well_starts(g, P, tau)) consider(descend(g, P, tau, b, opt), "well");
    for (std::size_t i = 0; i < extra_starts.size(); ++i)
        consider(descend(g, P, tau, extra_starts[i], opt), "extra_" + std::to_string(i));
    return best;
}

MuResult mu(const Backend& m, double tau, const MuOptions& opt) {
    validate(m);
    const auto* t = std::get_if<ConformalTorus>(&m);
    if (!t) throw std::invalid_argument("mu is implemented on the torus backend only");
    const TorusMetric g = TorusMetric::conformal(*t);
    return mu_general(g, g.R, tau, opt);
}

}  // namespace plab
