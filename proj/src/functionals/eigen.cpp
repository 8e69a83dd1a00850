#include "plab/functionals/eigen.hpp"

#include <cmath>

#include "plab/geometry/ops.hpp"

namespace plab {

namespace {

// The symmetrized operator y -> W^{-1/2} K W^{-1/2} y, with W the dV weights and K the
// stiffness-plus-potential matrix, shifted by -sigma.
struct SymOp {
    const TorusMetric& g;
    const Grid& V;
    double sigma;
    Grid isq;  // (sqrt det g)^{-1/2}
    Grid c11, c12, c22;

    SymOp(const TorusMetric& g_, const Grid& V_, double s) : g(g_), V(V_), sigma(s) {
        isq = g.sqrt_det.rsqrt();
        if (!g.is_conformal()) {
            c11 = g.sqrt_det * g.i11;
            c12 = g.sqrt_det * g.i12;
            c22 = g.sqrt_det * g.i22;
        }
    }

    Grid operator()(const Grid& y) const {
        const Grid b = isq * y;
        Grid stiff;
        if (g.is_conformal()) {
            stiff = -4.0 * g.sp().lap(b);
        } else {
            const Grid bx = g.sp().dx(b), by = g.sp().dy(b);
            stiff = -4.0 * (g.sp().dx(c11 * bx + c12 * by) + g.sp().dy(c12 * bx + c22 * by));
        }
        return isq * stiff + (V - sigma) * y;
    }
};

double dot(const Grid& a, const Grid& b) { return (a * b).sum(); }

// Preconditioned CG for the SPD system op x = b.
Grid pcg(const SymOp& op, const Grid& b, const Grid& x0, double c0, double c1, double rtol, int& iters) {
    const Spectral2D& sp = op.g.sp();
    Grid x = x0;
    Grid r = b - op(x);
    Grid z = sp.solve_helmholtz(r, c0, c1);
    Grid p = z;
    double rz = dot(r, z);
    const double bn = std::sqrt(dot(b, b));
    for (int it = 0; it < 2000; ++it) {
        if (std::sqrt(dot(r, r)) <= rtol * bn) {
            iters += it;
            return x;
        }
        const Grid Ap = op(p);
        const double alpha = rz / dot(p, Ap);
        x += alpha * p;
        r -= alpha * Ap;
        z = sp.solve_helmholtz(r, c0, c1);
        const double rz2 = dot(r, z);
        p = z + (rz2 / rz) * p;
        rz = rz2;
    }
    throw EigenNonConvergence("inner CG solve did not converge");
}

}  // namespace

Grid schrodinger_apply(const TorusMetric& g, const Grid& V, const Grid& u) {
    const SymOp op(g, V, 0.0);
    // W^{-1/2} K W^{-1/2} acts on W^{1/2} u; undo the outer scaling
    return op(Grid(g.sqrt_det.sqrt() * u)) / g.sqrt_det.sqrt();
}

SpectralResult lowest_eigen(const TorusMetric& g, const Grid& V, const Grid* warm) {
    check_grid(V, g.sp().nx(), g.sp().ny(), "lowest_eigen");
    // -4 lap_g is positive semidefinite, so min V bounds the spectrum from below
    const double vmin = V.minCoeff();
    const double margin = 1e-3 * (1.0 + V.abs().maxCoeff());
    const double sigma = vmin - margin;
    const SymOp op(g, V, sigma);
    const double c0 = V.mean() - sigma;
    const double c1 = 4.0 * (g.i11 + g.i22).mean() * 0.5;

    const Grid sq = g.sqrt_det.sqrt();
    Grid y = warm ? Grid(sq * *warm) : Grid(sq);
    y /= std::sqrt(dot(y, y));
    double lam = 0.0;
    int inner = 0;
    SpectralResult res;
    for (int outer = 1; outer <= 500; ++outer) {
        Grid x = pcg(op, y, y / c0, c0, c1, 1e-13, inner);
        x /= std::sqrt(dot(x, x));
        const Grid Ax = op(x);
        lam = dot(x, Ax) + sigma;
        // residual in the dV inner product equals the Euclidean norm in the symmetrized variables
        const double rn = std::sqrt((Ax + (sigma - lam) * x).square().sum());
        y = x;
        if (rn <= 1e-10 || (outer > 3 && rn <= 1e-9)) {
            res.iterations = outer;
            res.residual = rn;
            break;
        }
        if (outer == 500) throw EigenNonConvergence("inverse iteration did not converge");
    }
    Grid u = y / sq;
    if (u.sum() < 0) u = -u;
    u /= std::sqrt(g.integrate(u * u));
    if (!(u > 0.0).all()) throw EigenNonConvergence("ground state is not positive");
    res.lambda = lam;
    res.u0 = u;
    res.f0 = Grid(-2.0 * u.log());
    return res;
}

SpectralResult lambda_k(const Backend& m, double k, const Grid* warm) {
    if (!(k >= 1.0)) throw std::invalid_argument("lambda_k needs k >= 1");
    validate(m);
    if (std::holds_alternative<EuclideanSpace>(m)) throw std::invalid_argument("lambda_k needs a compact backend");
    if (auto* s = std::get_if<RoundSphere>(&m)) {
        const double R = s->n * (s->n - 1) / (s->r * s->r);
        const double vol = unit_sphere_area(s->n) * std::pow(s->r, s->n);
        const double c = 1.0 / std::sqrt(vol);
        SpectralResult r;
        r.lambda = k * R;
        r.u0 = ZonalField{[c](double) { return Jet1{c, 0.0, 0.0}; }};
        r.f0 = ZonalField{[vol](double) { return Jet1{std::log(vol), 0.0, 0.0}; }};
        return r;
    }
    const TorusMetric g = TorusMetric::conformal(std::get<ConformalTorus>(m));
    return lowest_eigen(g, Grid(k * g.R), warm);
}

}  // namespace plab
