#include "plab/geometry/backend.hpp"

#include <cmath>

namespace plab {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void validate(const Backend& m) {
    std::visit(overloaded{
                   [](const EuclideanSpace& e) {
                       if (e.n < 1 || e.n > 3) throw std::invalid_argument("euclidean dimension must be 1..3");
                       if (!(e.scale > 0)) throw std::invalid_argument("euclidean scale must be positive");
                       if (!(e.half_width > 0) || e.nodes < 8)
                           throw std::invalid_argument("euclidean quadrature box is degenerate");
                   },
                   [](const RoundSphere& s) {
                       if (s.n < 1 || s.n > 3) throw std::invalid_argument("sphere dimension must be 1..3");
                       if (!(s.r > 0)) throw std::invalid_argument("sphere radius must be positive");
                       if (s.nodes < 8) throw std::invalid_argument("sphere quadrature needs >= 8 nodes");
                   },
                   [](const ConformalTorus& t) {
                       (void)t.spectral();
                       check_grid(t.u, t.nx, t.ny, "conformal torus");
                       if (!t.u.allFinite()) throw std::domain_error("conformal factor is not finite");
                   }},
               m);
}

int dimension(const Backend& m) {
    return std::visit(overloaded{[](const EuclideanSpace& e) { return e.n; }, [](const RoundSphere& s) { return s.n; },
                                 [](const ConformalTorus&) { return 2; }},
                      m);
}

bool is_compact(const Backend& m) { return !std::holds_alternative<EuclideanSpace>(m); }

const char* variant_name(const Backend& m) {
    return std::visit(overloaded{[](const EuclideanSpace&) { return "euclidean"; },
                                 [](const RoundSphere&) { return "sphere"; },
                                 [](const ConformalTorus&) { return "conformal_torus"; }},
                      m);
}

ConformalTorus make_torus(int nx, int ny, double lx, double ly) {
    ConformalTorus t{nx, ny, lx, ly, Grid::Zero(static_cast<Eigen::Index>(nx) * ny)};
    (void)t.spectral();
    return t;
}

ConformalTorus make_torus(int nx, int ny, double lx, double ly, const std::function<double(double, double)>& u) {
    ConformalTorus t = make_torus(nx, ny, lx, ly);
    t.u = std::get<Grid>(grid_field(t, u));
    return t;
}

ScalarField grid_field(const ConformalTorus& t, const std::function<double(double, double)>& f) {
    Grid g(static_cast<Eigen::Index>(t.nx) * t.ny);
    for (int j = 0; j < t.ny; ++j)
        for (int i = 0; i < t.nx; ++i) g[j * t.nx + i] = f(t.lx * i / t.nx, t.ly * j / t.ny);
    return g;
}

ScalarField constant_field(const Backend& m, double c) {
    return std::visit(overloaded{[c](const EuclideanSpace&) -> ScalarField {
                                     return EuclidField{[c](const Vec3&) { return Jet{c, Vec3::Zero(), Mat3::Zero()}; }};
                                 },
                                 [c](const RoundSphere&) -> ScalarField {
                                     return ZonalField{[c](double) { return Jet1{c, 0.0, 0.0}; }};
                                 },
                                 [c](const ConformalTorus& t) -> ScalarField {
                                     return Grid::Constant(static_cast<Eigen::Index>(t.nx) * t.ny, c);
                                 }},
                      m);
}

}  // namespace plab
