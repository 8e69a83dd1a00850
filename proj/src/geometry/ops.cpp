#include "plab/geometry/ops.hpp"

#include <cmath>
#include <numbers>

#include "plab/geometry/torus_metric.hpp"

namespace plab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
const T& expect(const ScalarField& phi, const char* op) {
    if (const T* p = std::get_if<T>(&phi)) return *p;
    throw BackendMismatch(std::string(op) + ": field does not live on this backend");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Jet value_only(double v) {
    Jet j;
    j.v = v;
    j.g.setConstant(kNaN);
    j.h.setConstant(kNaN);
    return j;
}

Jet1 zonal_value_only(double v) { return {v, kNaN, kNaN}; }

}  // namespace

double unit_sphere_area(int k) {
    const double m = 0.5 * (k + 1);
    return 2.0 * std::pow(std::numbers::pi, m) / std::tgamma(m);
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = z;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
}

ScalarField scalar_curvature(const Backend& m) {
    validate(m);
    return std::visit(overloaded{[](const EuclideanSpace&) -> ScalarField {
                                     return EuclidField{[](const Vec3&) { return Jet{}; }};
                                 },
                                 [](const RoundSphere& s) -> ScalarField {
                                     const double R = s.n * (s.n - 1) / (s.r * s.r);
                                     return ZonalField{[R](double) { return Jet1{R, 0.0, 0.0}; }};
                                 },
                                 [](const ConformalTorus& t) -> ScalarField { return TorusMetric::conformal(t).R; }},
                      m);
}

ScalarField laplace_beltrami(const Backend& m, const ScalarField& phi) {
    validate(m);
    return std::visit(
        overloaded{[&](const EuclideanSpace& e) -> ScalarField {
                       auto f = expect<EuclidField>(phi, "laplace_beltrami").f;
                       const double c = e.scale;
                       return EuclidField{[f, c](const Vec3& x) { return value_only(f(x).h.trace() / c); }};
                   },
                   [&](const RoundSphere& s) -> ScalarField {
                       auto f = expect<ZonalField>(phi, "laplace_beltrami").f;
                       const int n = s.n;
                       const double r2 = s.r * s.r;
                       return ZonalField{[f, n, r2](double th) {
                           const Jet1 j = f(th);
                           return zonal_value_only((j.d2 + (n - 1) * std::cos(th) / std::sin(th) * j.d1) / r2);
                       }};
                   },
                   [&](const ConformalTorus& t) -> ScalarField {
                       const Grid& g = expect<Grid>(phi, "laplace_beltrami");
                       check_grid(g, t.nx, t.ny, "laplace_beltrami");
                       return Grid((-2.0 * t.u).exp() * t.spectral().lap(g));
                   }},
        m);
}

ScalarField grad_norm_sq(const Backend& m, const ScalarField& phi) {
    validate(m);
    return std::visit(overloaded{[&](const EuclideanSpace& e) -> ScalarField {
                                     auto f = expect<EuclidField>(phi, "grad_norm_sq").f;
                                     const double c = e.scale;
                                     return EuclidField{[f, c](const Vec3& x) { return value_only(f(x).g.squaredNorm() / c); }};
                                 },
                                 [&](const RoundSphere& s) -> ScalarField {
                                     auto f = expect<ZonalField>(phi, "grad_norm_sq").f;
                                     const double r2 = s.r * s.r;
                                     return ZonalField{[f, r2](double th) {
                                         const double d = f(th).d1;
                                         return zonal_value_only(d * d / r2);
                                     }};
                                 },
                                 [&](const ConformalTorus& t) -> ScalarField {
                                     const Grid& g = expect<Grid>(phi, "grad_norm_sq");
                                     check_grid(g, t.nx, t.ny, "grad_norm_sq");
                                     return TorusMetric::conformal(t).grad_sq(g);
                                 }},
                      m);
}

SymTensorField hessian(const Backend& m, const ScalarField& phi) {
    validate(m);
    return std::visit(overloaded{[&](const EuclideanSpace&) -> SymTensorField {
                                     auto f = expect<EuclidField>(phi, "hessian").f;
                                     return EuclidTensor{[f](const Vec3& x) { return f(x).h; }};
                                 },
                                 [&](const RoundSphere& s) -> SymTensorField {
                                     auto f = expect<ZonalField>(phi, "hessian").f;
                                     const double r2 = s.r * s.r;
                                     return ZonalTensor{[f, r2](double th) { return f(th).d2 / r2; },
                                                        [f, r2](double th) {
                                                            return std::cos(th) / std::sin(th) * f(th).d1 / r2;
                                                        }};
                                 },
                                 [&](const ConformalTorus& t) -> SymTensorField {
                                     const Grid& g = expect<Grid>(phi, "hessian");
                                     check_grid(g, t.nx, t.ny, "hessian");
                                     return TorusMetric::conformal(t).hessian(g);
                                 }},
                      m);
}

ScalarField metric_trace(const Backend& m, const SymTensorField& tf) {
    validate(m);
    return std::visit(
        overloaded{[&](const EuclideanSpace& e) -> ScalarField {
                       auto f = std::get<EuclidTensor>(tf).f;
                       const double c = e.scale;
                       return EuclidField{[f, c](const Vec3& x) { return value_only(f(x).trace() / c); }};
                   },
                   [&](const RoundSphere& s) -> ScalarField {
                       const auto& z = std::get<ZonalTensor>(tf);
                       const int n = s.n;
                       return ZonalField{[z, n](double th) { return zonal_value_only(z.radial(th) + (n - 1) * z.tangential(th)); }};
                   },
                   [&](const ConformalTorus& t) -> ScalarField {
                       return TorusMetric::conformal(t).trace(std::get<TorusTensor>(tf));
                   }},
        m);
}

double integrate(const Backend& m, const ScalarField& phi) {
    validate(m);
    return std::visit(
        overloaded{[&](const EuclideanSpace& e) -> double {
                       const auto& f = expect<EuclidField>(phi, "integrate").f;
                       const int n = e.n, N = e.nodes;
                       const double W = e.half_width, h = 2.0 * W / N;
                       // periodic-style trapezoid: nodes at -W + (k + 1/2) h avoid double counting the faces
                       double sum = 0.0, peak = 0.0, edge = 0.0;
                       const int ny = n >= 2 ? N : 1, nz = n >= 3 ? N : 1;
                       for (int k = 0; k < nz; ++k)
                           for (int j = 0; j < ny; ++j)
                               for (int i = 0; i < N; ++i) {
                                   Vec3 x = Vec3::Zero();
                                   x[0] = -W + (i + 0.5) * h;
                                   if (n >= 2) x[1] = -W + (j + 0.5) * h;
                                   if (n >= 3) x[2] = -W + (k + 0.5) * h;
                                   const double v = f(x).v;
                                   sum += v;
                                   peak = std::max(peak, std::abs(v));
                                   const bool face = i == 0 || i == N - 1 || (n >= 2 && (j == 0 || j == N - 1)) ||
                                                     (n >= 3 && (k == 0 || k == N - 1));
                                   if (face) edge = std::max(edge, std::abs(v));
                               }
                       if (!std::isfinite(sum)) throw NonDecayingIntegrand("integrand is not finite");
                       if (edge > 1e-12 * peak && edge > 0.0)
                           throw NonDecayingIntegrand("integrand does not decay inside the truncation box");
                       return sum * std::pow(h, n) * std::pow(e.scale, 0.5 * n);
                   },
                   [&](const RoundSphere& s) -> double {
                       const auto& f = expect<ZonalField>(phi, "integrate").f;
                       std::vector<double> x, w;
                       gauss_legendre(s.nodes, 0.0, std::numbers::pi, x, w);
                       double sum = 0.0;
                       for (int i = 0; i < s.nodes; ++i) sum += w[i] * f(x[i]).v * std::pow(std::sin(x[i]), s.n - 1);
                       return sum * unit_sphere_area(s.n - 1) * std::pow(s.r, s.n);
                   },
                   [&](const ConformalTorus& t) -> double {
                       const Grid& g = expect<Grid>(phi, "integrate");
                       check_grid(g, t.nx, t.ny, "integrate");
                       return (g * (2.0 * t.u).exp()).sum() * t.cell();
                   }},
        m);
}

Backend rescale(const Backend& m, double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("rescale factor must be positive");
    validate(m);
    return std::visit(overloaded{[&](EuclideanSpace e) -> Backend {
                                     e.scale *= alpha;
                                     return e;
                                 },
                                 [&](RoundSphere s) -> Backend {
                                     s.r *= std::sqrt(alpha);
                                     return s;
                                 },
                                 [&](ConformalTorus t) -> Backend {
                                     t.u += 0.5 * std::log(alpha);
                                     return t;
                                 }},
                      m);
}

double value_at(const ScalarField& phi, const Vec3& x) { return expect<EuclidField>(phi, "value_at").f(x).v; }
double value_at(const ScalarField& phi, double theta) { return expect<ZonalField>(phi, "value_at").f(theta).v; }

}  // namespace plab
