#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "plab/geometry/ops.hpp"
#include "plab/geometry/torus_metric.hpp"

using namespace plab;
using std::numbers::pi;

namespace {

const double L = 2 * pi;

double u_sin(double x, double) { return 0.1 * std::sin(2 * pi * x / L); }
double u_mixed(double x, double y) { return 0.1 * std::sin(x) + 0.05 * std::cos(2 * y + 0.3) + 0.03 * std::sin(x + y); }

double max_abs(const Grid& g) { return g.abs().maxCoeff(); }

EuclidField quadratic_over(double tau) {
    return EuclidField{[tau](const Vec3& x) {
        Jet j;
        j.v = x.squaredNorm() / (4 * tau);
        j.g = x / (2 * tau);
        j.h = Mat3::Identity() / (2 * tau);
        return j;
    }};
}

}  // namespace

TEST_CASE("scalar curvature: trivial backends") {
    Backend e = EuclideanSpace{3};
    CHECK(value_at(scalar_curvature(e), Vec3(0.3, -1, 2)) == 0.0);
    Backend s = RoundSphere{2, 1.0};
    CHECK(value_at(scalar_curvature(s), 0.7) == doctest::Approx(2.0));
}

TEST_CASE("scalar curvature on the torus matches a 4th-order stencil oracle at double resolution") {
    ConformalTorus t = make_torus(64, 64, L, L, u_mixed);
    const Grid R = std::get<Grid>(scalar_curvature(t));
    oracle::Stencil4 st{u_mixed, L / 128};
    double err = 0;
    for (int j = 0; j < 64; j += 3)
        for (int i = 0; i < 64; i += 3) {
            const double x = L * i / 64, y = L * j / 64;
            const double lap = st.dxx(x, y) + st.dyy(x, y);
            const double ref = -2 * std::exp(-2 * u_mixed(x, y)) * lap;
            err = std::max(err, std::abs(R[j * 64 + i] - ref));
        }
    CHECK(err < 1e-6);
}

TEST_CASE("laplace_beltrami examples") {
    Backend e = EuclideanSpace{2};
    EuclidField r2{[](const Vec3& x) {
        Jet j;
        j.v = x[0] * x[0] + x[1] * x[1];
        j.g = 2 * x;
        j.h = 2 * Mat3::Identity();
        j.h(2, 2) = 0;
        return j;
    }};
    CHECK(value_at(laplace_beltrami(e, r2), Vec3(0.4, 1.2, 0)) == doctest::Approx(4.0));

    ConformalTorus flat = make_torus(64, 64, L, L);
    const Grid c = Grid::Constant(64 * 64, 3.0);
    CHECK(max_abs(std::get<Grid>(laplace_beltrami(flat, c))) < 1e-12);

    const double lx = 3.0;
    ConformalTorus t = make_torus(64, 64, lx, lx);
    const Grid phi = std::get<Grid>(grid_field(t, [&](double x, double) { return std::sin(2 * pi * x / lx); }));
    const Grid lap = std::get<Grid>(laplace_beltrami(t, phi));
    const double k2 = std::pow(2 * pi / lx, 2);
    CHECK(max_abs(lap + k2 * phi) <= 1e-3 * k2);
}

TEST_CASE("laplace_beltrami is self-adjoint and integrates to zero on the torus") {
    for (int n : {16, 32, 64}) {
        ConformalTorus t = make_torus(n, n, L, 4.0, u_mixed);
        const Grid a = std::get<Grid>(grid_field(t, [](double x, double y) { return std::cos(x) * std::sin(3 * y) + 0.2; }));
        const Grid b = std::get<Grid>(grid_field(t, [](double x, double y) { return std::exp(std::sin(x + 2 * y)); }));
        const Grid la = std::get<Grid>(laplace_beltrami(t, a));
        const Grid lb = std::get<Grid>(laplace_beltrami(t, b));
        const double ab = integrate(t, a * lb), ba = integrate(t, b * la);
        const double scale = std::sqrt(integrate(t, a * a) * integrate(t, b * b));
        CHECK(std::abs(ab - ba) <= 1e-10 * scale);
        CHECK(std::abs(integrate(t, lb)) <= 1e-10);
    }
}

TEST_CASE("grad_norm_sq examples") {
    Backend e = EuclideanSpace{3};
    const double tau = 0.7;
    const Vec3 x(0.5, -1.0, 2.0);
    CHECK(value_at(grad_norm_sq(e, quadratic_over(tau)), x) == doctest::Approx(x.squaredNorm() / (4 * tau * tau)));

    ConformalTorus t = make_torus(64, 64, L, L, u_sin);
    const Grid phi = std::get<Grid>(grid_field(t, [](double, double y) { return std::cos(y); }));
    const Grid g2 = std::get<Grid>(grad_norm_sq(t, phi));
    CHECK(g2.minCoeff() >= 0.0);
    double err = 0;
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
            const double xx = L * i / 64, y = L * j / 64;
            const double ref = std::exp(-2 * u_sin(xx, y)) * std::pow(std::sin(y), 2);
            err = std::max(err, std::abs(g2[j * 64 + i] - ref));
        }
    CHECK(err < 1e-12);
}

TEST_CASE("hessian examples and trace identity") {
    Backend e = EuclideanSpace{3};
    const double tau = 0.4;
    const Mat3 H = std::get<EuclidTensor>(hessian(e, quadratic_over(tau))).f(Vec3(1, 2, 3));
    CHECK((H - Mat3::Identity() / (2 * tau)).norm() < 1e-15);

    ConformalTorus t = make_torus(64, 64, L, L, u_mixed);
    const Grid c = Grid::Constant(64 * 64, -1.5);
    const auto Hc = std::get<TorusTensor>(hessian(t, c));
    CHECK(max_abs(Hc.xx) + max_abs(Hc.xy) + max_abs(Hc.yy) < 1e-12);

    const Grid phi = std::get<Grid>(grid_field(t, [](double x, double y) { return std::sin(2 * x) * std::cos(y) + 0.3 * x * 0; }));
    const Grid tr = std::get<Grid>(metric_trace(t, hessian(t, phi)));
    const Grid lap = std::get<Grid>(laplace_beltrami(t, phi));
    CHECK(max_abs(tr - lap) <= 1e-10);
}

TEST_CASE("integrate examples") {
    ConformalTorus flat = make_torus(32, 48, 2.0, 5.0);
    CHECK(integrate(flat, Grid::Ones(32 * 48)) == doctest::Approx(10.0).epsilon(1e-15));

    for (int n = 1; n <= 3; ++n) {
        const double tau = 0.8;
        Backend e = EuclideanSpace{n, 1.0, 16.0, n == 3 ? 64 : 96};
        EuclidField g{[n, tau](const Vec3& x) {
            Jet j;
            j.v = std::pow(4 * pi * tau, -0.5 * n) * std::exp(-x.squaredNorm() / (4 * tau));
            return j;
        }};
        CHECK(std::abs(integrate(e, g) - 1.0) < 1e-10);
    }

    // volume of e^{2u} against a Richardson-extrapolated midpoint oracle
    ConformalTorus t = make_torus(64, 64, L, L, u_sin);
    auto dens = [](double x) { return std::exp(2 * u_sin(x, 0)); };
    auto mid = [&](int n) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += dens((i + 0.5) * L / n);
        return s * L / n * L;
    };
    const double ref = (4 * mid(400) - mid(200)) / 3;
    CHECK(std::abs(integrate(t, Grid::Ones(64 * 64)) - ref) < 1e-10);
}

TEST_CASE("integrate flags non-decaying euclidean integrands") {
    Backend e = EuclideanSpace{2};
    EuclidField one{[](const Vec3&) { return Jet{1.0}; }};
    CHECK_THROWS_AS(integrate(e, one), NonDecayingIntegrand);
}

TEST_CASE("backend mismatch is an error") {
    ConformalTorus t = make_torus(16, 16, L, L);
    CHECK_THROWS_AS(laplace_beltrami(t, Grid::Ones(10)), BackendMismatch);
    Backend s = RoundSphere{2, 1.0};
    CHECK_THROWS_AS(laplace_beltrami(s, Grid::Ones(10)), BackendMismatch);
}

TEST_CASE("rescale examples and the conformal scaling law") {
    Backend s = RoundSphere{2, 1.0};
    CHECK(std::get<RoundSphere>(rescale(s, 4.0)).r == doctest::Approx(2.0));
    ConformalTorus t = make_torus(32, 32, L, L, u_mixed);
    const ConformalTorus same = std::get<ConformalTorus>(rescale(t, 1.0));
    CHECK((same.u - t.u).abs().maxCoeff() == 0.0);
    for (double alpha : {0.3, 2.0, 7.5}) {
        const Grid R = std::get<Grid>(scalar_curvature(t));
        const Grid Ra = std::get<Grid>(scalar_curvature(rescale(t, alpha)));
        CHECK(max_abs(Ra - R / alpha) <= 1e-12 * std::max(1.0, max_abs(R)));
        const double Rs = value_at(scalar_curvature(rescale(s, alpha)), 1.0);
        CHECK(std::abs(Rs - 2.0 / alpha) <= 1e-12);
    }
    CHECK_THROWS_AS(rescale(t, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rescale(t, -1.0), std::invalid_argument);
}

TEST_CASE("general metric data reproduces the conformal closed forms") {
    ConformalTorus t = make_torus(32, 32, L, L, u_mixed);
    const TorusMetric c = TorusMetric::conformal(t);
    const Grid e2u = (2.0 * t.u).exp();
    const TorusMetric g = TorusMetric::general(32, 32, L, L, e2u, Grid::Zero(32 * 32), e2u);
    CHECK(max_abs(g.R - c.R) < 1e-9);
    const Grid phi = std::get<Grid>(grid_field(t, [](double x, double y) { return std::sin(x - y) + std::cos(2 * x); }));
    CHECK(max_abs(g.laplacian(phi) - c.laplacian(phi)) < 1e-9);
}

TEST_CASE("grid convergence of the curvature against the oracle is at least second order") {
    // u is not band limited, so the spectral error is visible at low resolution.
    auto u = [](double x, double y) { return 0.3 * std::exp(std::sin(x) * std::cos(y)) - 0.3; };
    double prev = 0;
    for (int n : {8, 16}) {
        ConformalTorus t = make_torus(n, n, L, L, u);
        const Grid R = std::get<Grid>(scalar_curvature(t));
        oracle::Stencil4 st{u, 1e-3};
        double err = 0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = L * i / n, y = L * j / n;
                err = std::max(err, std::abs(R[j * n + i] + 2 * std::exp(-2 * u(x, y)) * (st.dxx(x, y) + st.dyy(x, y))));
            }
        if (prev > 0) CHECK(std::log2(prev / err) >= 2.0);
        prev = err;
    }
}
