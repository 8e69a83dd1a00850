#include "plab/functionals/diffusion.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "plab/functionals/points.hpp"
#include "plab/geometry/ops.hpp"

namespace plab {

namespace {

struct TorusWeighted {
    TorusMetric g;
    Grid phi;
    double m;
};

TorusWeighted torus_of(const WeightedOperator& w) {
    if (!(w.mdim > dimension(w.m))) throw std::invalid_argument("weighted operator needs m > n");
    const auto* t = std::get_if<ConformalTorus>(&w.m);
    if (!t) throw std::invalid_argument("diffusion entropy is implemented on the torus backend");
    const auto* phi = std::get_if<Grid>(&w.phi);
    if (!phi) throw BackendMismatch("weight potential does not live on this backend");
    check_grid(*phi, t->nx, t->ny, "weighted operator");
    return {TorusMetric::conformal(*t), *phi, w.mdim};
}

void check_density(const TorusWeighted& tw, const Grid& u) {
    check_grid(u, tw.g.sp().nx(), tw.g.sp().ny(), "diffusion_entropy");
    if (!(u > 0.0).all()) throw std::domain_error("density must be positive");
    const double mass = tw.g.integrate(u * (-tw.phi).exp());
    if (std::abs(mass - 1.0) > 1e-8) throw std::domain_error("density must have unit mass, got " + std::to_string(mass));
}

Grid apply_L(const TorusWeighted& tw, const Grid& u) {
    // e^{phi} / sqrt(g) d_i(sqrt(g) e^{-phi} g^{ij} d_j u): symmetric in the e^{-phi} dV inner product
    const auto& sp = tw.g.sp();
    const Grid c = tw.g.sqrt_det * (-tw.phi).exp();
    const Grid ux = sp.dx(u), uy = sp.dy(u);
    const Grid& g = tw.g.sqrt_det;
    return tw.phi.exp() / g * (sp.dx(c * (tw.g.i11 * ux + tw.g.i12 * uy)) + sp.dy(c * (tw.g.i12 * ux + tw.g.i22 * uy)));
}

}  // namespace

Grid weighted_laplacian(const WeightedOperator& w, const Grid& u) { return apply_L(torus_of(w), u); }

DiffusionEntropy diffusion_entropy(const WeightedOperator& w, const Grid& u, double t) {
    if (!(t > 0)) throw std::invalid_argument("diffusion time must be positive");
    const TorusWeighted tw = torus_of(w);
    check_density(tw, u);
    const double m = tw.m, l4pt = std::log(4 * std::numbers::pi * t);
    const Grid dmu = tw.g.weights() * (-tw.phi).exp();
    const Grid logu = u.log();
    const Grid f = -logu - 0.5 * m * l4pt;
    const double ulogu = (dmu * u * logu).sum();
    DiffusionEntropy r;
    r.H = -ulogu - 0.5 * m * (l4pt + 1.0);
    r.H_opposite_sign = ulogu - 0.5 * m * l4pt - 0.5 * m;
    r.W = (dmu * (t * tw.g.grad_sq(f) + f - m) * u).sum();
    return r;
}

double diffusion_dW(const WeightedOperator& w, const Grid& u, double t) {
    const TorusWeighted tw = torus_of(w);
    check_density(tw, u);
    const double m = tw.m, n = 2.0;
    const Grid dmu = tw.g.weights() * (-tw.phi).exp();
    const Grid f = -u.log() - 0.5 * m * std::log(4 * std::numbers::pi * t);
    const PointSet pf = point_set(tw.g, f);
    const PointSet pp = point_set(tw.g, tw.phi);
    const Mat3 I = pf.id();
    double s = 0.0;
    for (std::size_t q = 0; q < pf.size(); ++q) {
        const Mat3 a = pf.H[q] - I / (2 * t);
        const Mat3 be = pf.Ric[q] + pp.H[q] - pp.df[q] * pp.df[q].transpose() / (m - n);
        const double drift = pp.df[q].dot(pf.df[q]) + (m - n) / (2 * t);
        s += dmu[q] * u[q] * (-2.0 * t * (a.squaredNorm() + pf.df[q].dot(be * pf.df[q])) - 2.0 / (m - n) * t * drift * drift);
    }
    return s;
}

std::vector<Grid> weighted_heat_flow(const WeightedOperator& w, const Grid& u0, double t0, double t1, int steps) {
    const TorusWeighted tw = torus_of(w);
    if (steps < 1 || !(t1 > t0)) throw std::invalid_argument("heat flow needs t1 > t0 and at least one step");
    const double dt = (t1 - t0) / steps;
    std::vector<Grid> out{u0};
    Grid u = u0;
    for (int k = 0; k < steps; ++k) {
        const Grid k1 = apply_L(tw, u);
        const Grid k2 = apply_L(tw, u + 0.5 * dt * k1);
        const Grid k3 = apply_L(tw, u + 0.5 * dt * k2);
        const Grid k4 = apply_L(tw, u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(u);
    }
    return out;
}

BakryEmery bakry_emery(const WeightedOperator& w) {
    validate(w.m);
    const int n = dimension(w.m);
    if (!(w.mdim > n)) throw std::invalid_argument("Bakry-Emery tensor needs m > n");
    const double c = 1.0 / (w.mdim - n);
    BakryEmery r;
    if (auto* t = std::get_if<ConformalTorus>(&w.m)) {
        const TorusMetric g = TorusMetric::conformal(*t);
        const Grid& phi = std::get<Grid>(w.phi);
        const TorusTensor H = g.hessian(phi);
        const Grid px = g.sp().dx(phi), py = g.sp().dy(phi);
        r.tensor = g.ricci() + H - c * TorusTensor{px * px, px * py, py * py};
    } else if (auto* s = std::get_if<RoundSphere>(&w.m)) {
        const auto phi = std::get<ZonalField>(w.phi).f;
        const double r2 = s->r * s->r, rho = (s->n - 1) / r2;
        r.tensor = ZonalTensor{[phi, r2, rho, c](double th) {
                                   const Jet1 j = phi(th);
                                   return rho + j.d2 / r2 - c * j.d1 * j.d1 / r2;
                               },
                               [phi, r2, rho](double th) { return rho + std::cos(th) / std::sin(th) * phi(th).d1 / r2; }};
    } else {
        const auto phi = std::get<EuclidField>(w.phi).f;
        r.tensor = EuclidTensor{[phi, c](const Vec3& x) {
            const Jet j = phi(x);
            return Mat3(j.h - c * j.g * j.g.transpose());
        }};
    }
    double lo = std::numeric_limits<double>::infinity();
    for (const Mat3& a : node_tensor(w.m, r.tensor)) {
        const Eigen::MatrixXd sub = a.topLeftCorner(n, n);
        lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sub).eigenvalues().minCoeff());
    }
    r.min_eigenvalue = lo;
    return r;
}

}  // namespace plab
