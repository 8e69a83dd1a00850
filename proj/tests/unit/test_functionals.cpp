#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "plab/flow/potential.hpp"
#include "plab/flow/ricci.hpp"
#include "plab/functionals/diffusion.hpp"
#include "plab/functionals/eigen.hpp"
#include "plab/functionals/entropy.hpp"
#include "plab/functionals/mu.hpp"
#include "plab/geometry/ops.hpp"

using namespace plab;
using std::numbers::pi;

namespace {

Mat3 proj(int n) {
    Mat3 p = Mat3::Zero();
    for (int i = 0; i < n; ++i) p(i, i) = 1.0;
    return p;
}

// |x|^2/(4 tau) + (n/2) log(4 pi tau) + c on the first n coordinates.
EuclidField gaussian(int n, double tau, double c = 0.0) {
    const Mat3 P = proj(n);
    return {[=](const Vec3& x) {
        const Vec3 y = P * x;
        Jet j;
        j.v = y.squaredNorm() / (4 * tau) + 0.5 * n * std::log(4 * pi * tau) + c;
        j.g = y / (2 * tau);
        j.h = P / (2 * tau);
        return j;
    }};
}

// The W-normalized Gaussian |x|^2/(4 tau).
EuclidField gaussian_w(int n, double tau) { return gaussian(n, tau, -0.5 * n * std::log(4 * pi * tau)); }

EuclidField shifted(const EuclidField& f, double c) {
    return {[f, c](const Vec3& x) {
        Jet j = f.f(x);
        j.v += c;
        return j;
    }};
}

// Smooth random field: low Fourier modes with seeded amplitudes.
Grid random_field(const ConformalTorus& t, std::mt19937& rng, double amp, int kmax = 2) {
    std::normal_distribution<double> nd(0.0, amp);
    std::vector<std::array<double, 4>> modes;
    for (int a = 0; a <= kmax; ++a)
        for (int b = -kmax; b <= kmax; ++b) modes.push_back({double(a), double(b), nd(rng), nd(rng)});
    return std::get<Grid>(grid_field(t, [&](double x, double y) {
        double s = 0.0;
        for (const auto& m : modes) {
            const double ph = 2 * pi * (m[0] * x / t.lx + m[1] * y / t.ly);
            s += m[2] * std::cos(ph) + m[3] * std::sin(ph);
        }
        return s;
    }));
}

ConformalTorus bumpy(int n) {
    return make_torus(n, n, 2 * pi, 2 * pi, [](double x, double y) { return 0.1 * std::sin(x) + 0.05 * std::cos(x + 2 * y); });
}

TorusMetric perturbed_general(const ConformalTorus& t, const TorusTensor& v, double eps) {
    const Grid e = (2.0 * t.u).exp();
    return TorusMetric::general(t.nx, t.ny, t.lx, t.ly, e + eps * v.xx, eps * v.xy, e + eps * v.yy);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

}  // namespace

TEST_CASE("eval_F closed forms") {
    for (int n = 1; n <= 3; ++n) {
        const double tau = 1.0;
        EuclideanSpace e{n};
        if (n == 3) e.nodes = 64;
        CHECK(eval_F(e, gaussian(n, tau)) == doctest::Approx(n / (2 * tau)).epsilon(1e-10));
    }
    const ConformalTorus flat = make_torus(16, 16, 2.0, 3.0);
    CHECK(std::abs(eval_F(flat, constant_field(flat, std::log(6.0)))) < 1e-14);
    const RoundSphere s{2, 1.0};
    for (double k : {1.0, 2.5})
        CHECK(eval_F(s, constant_field(s, std::log(4 * pi)), k) == doctest::Approx(2 * k).epsilon(1e-12));
}

TEST_CASE("F scaling law and W scale invariance") {
    const ConformalTorus t = bumpy(32);
    std::mt19937 rng(7);
    const Grid f = random_field(t, rng, 0.2);
    const double c = 1.7, b = 0.4;
    const double F0 = eval_F(t, f);
    const double F1 = eval_F(rescale(t, c * c), Grid(f + b));
    CHECK(std::abs(F1 - std::exp(-b) * F0) < 1e-12 * std::abs(F0) + 1e-14);
    const double tau = 0.3, alpha = 2.3;
    const PotentialConfig cfg = normalize_potential(t, f, tau);
    const double W0 = eval_W(t, cfg);
    const double W1 = eval_W(rescale(t, alpha), PotentialConfig{cfg.f, alpha * tau, true});
    CHECK(std::abs(W1 - W0) < 1e-12 * std::max(1.0, std::abs(W0)));
    const double W2 = eval_W(rescale(t, 1 / tau), PotentialConfig{cfg.f, 1.0, true});
    CHECK(std::abs(W2 - W0) < 1e-12 * std::max(1.0, std::abs(W0)));
}

TEST_CASE("delta_F matches central differences") {
    const double eps = 1e-5;
    SUBCASE("zero variation") {
        const ConformalTorus t = bumpy(16);
        const Grid z = Grid::Zero(16 * 16);
        CHECK(delta_F(t, constant_field(t, 0.3), VariationData{TorusTensor{z, z, z}, z, 0.0}) == 0.0);
    }
    SUBCASE("euclidean, constant h") {
        for (int n = 1; n <= 2; ++n) {
            EuclideanSpace e{n};
            const EuclidField f = gaussian(n, 0.8);
            const double c = 0.37;
            const EuclidTensor v0{[](const Vec3&) { return Mat3(Mat3::Zero()); }};
            const double d = delta_F(e, f, VariationData{v0, constant_field(e, c), 0.0});
            const double fd = (eval_F(e, shifted(f, eps * c)) - eval_F(e, shifted(f, -eps * c))) / (2 * eps);
            CHECK(rel(d, fd) < 1e-6);
        }
    }
    SUBCASE("torus, random v and h") {
        const ConformalTorus t = bumpy(32);
        std::mt19937 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const Grid f = random_field(t, rng, 0.3);
            const TorusTensor v{random_field(t, rng, 0.2), random_field(t, rng, 0.2), random_field(t, rng, 0.2)};
            const Grid h = random_field(t, rng, 0.2);
            const double k = trial % 4 == 3 ? 2.0 : 1.0;
            const double d = delta_F(t, f, VariationData{v, h, 0.0}, k);
            const double fd = (eval_F(perturbed_general(t, v, eps), Grid(f + eps * h), k) -
                               eval_F(perturbed_general(t, v, -eps), Grid(f - eps * h), k)) /
                              (2 * eps);
            CHECK(rel(d, fd) < 1e-4);
        }
    }
}

TEST_CASE("delta_W matches central differences") {
    const double eps = 1e-5;
    SUBCASE("euclidean, sigma only") {
        EuclideanSpace e{2};
        const double tau = 0.6;
        const PotentialConfig cfg{gaussian_w(2, tau), tau, true};
        const EuclidTensor v0{[](const Vec3&) { return Mat3(Mat3::Zero()); }};
        const double d = delta_W(e, cfg, VariationData{v0, constant_field(e, 0.0), 1.0});
        const double fd = (eval_W_raw(e, cfg.f, tau + eps) - eval_W_raw(e, cfg.f, tau - eps)) / (2 * eps);
        CHECK(std::abs(d - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
    SUBCASE("torus, random v, h, sigma") {
        const ConformalTorus t = bumpy(32);
        std::mt19937 rng(23);
        const double tau = 0.4;
        for (int trial = 0; trial < 20; ++trial) {
            const PotentialConfig cfg = normalize_potential(t, random_field(t, rng, 0.3), tau);
            const Grid& f = std::get<Grid>(cfg.f);
            const TorusTensor v{random_field(t, rng, 0.2), random_field(t, rng, 0.2), random_field(t, rng, 0.2)};
            const Grid h = random_field(t, rng, 0.2);
            const double sigma = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
            const double d = delta_W(t, cfg, VariationData{v, h, sigma});
            const double fd = (eval_W_raw(perturbed_general(t, v, eps), Grid(f + eps * h), tau + eps * sigma) -
                               eval_W_raw(perturbed_general(t, v, -eps), Grid(f - eps * h), tau - eps * sigma)) /
                              (2 * eps);
            CHECK(rel(d, fd) < 1e-4);
        }
    }
}

TEST_CASE("production formulas") {
    for (int n = 1; n <= 3; ++n) {
        const double tau = 0.7;
        EuclideanSpace e{n};
        if (n == 3) e.nodes = 64;
        CHECK(production_F(e, gaussian(n, tau)) == doctest::Approx(n / (2 * tau * tau)).epsilon(1e-10));
        CHECK(std::abs(production_W(e, PotentialConfig{gaussian_w(n, tau), tau, true})) < 1e-10);
    }
    const ConformalTorus flat = make_torus(16, 16, 2 * pi, 2 * pi);
    const double tau = 0.5, V = 4 * pi * pi;
    const PotentialConfig cfg = normalize_potential(flat, constant_field(flat, 0.0), tau);
    // mass (4 pi tau)^{-1} int e^{-f} = 1, so the integrand 2 tau n (1/2tau)^2 integrates to n/(2 tau)
    CHECK(production_W(flat, cfg) == doctest::Approx(2.0 / (2 * tau)).epsilon(1e-12));
    CHECK(production_F(flat, constant_field(flat, std::log(V))) == doctest::Approx(0.0));

    const ConformalTorus t = bumpy(32);
    // the central difference is second order in the snapshot spacing
    const MetricHistory h = run_history(t, 0.05, FlowConfig{0.0, Scheme::rk4, 0.05});
    std::mt19937 rng(5);
    const PotentialTrajectory tr = evolve_potential(h, random_field(t, rng, 0.2), PotentialMode::plain);
    for (std::size_t i = 1; i + 1 < tr.t.size(); i += tr.t.size() / 5) {
        const double dF = (eval_F(tr.metric(i + 1), tr.f[i + 1]) - eval_F(tr.metric(i - 1), tr.f[i - 1])) /
                          (tr.t[i + 1] - tr.t[i - 1]);
        const double P = production_F(tr.metric(i), tr.f[i]);
        CHECK(P >= 0.0);
        CHECK(rel(dF, P) < 1e-4);
    }
}

TEST_CASE("W examples") {
    for (int n = 1; n <= 3; ++n) {
        EuclideanSpace e{n};
        if (n == 3) e.nodes = 64;
        const double tau = 1.3;
        CHECK(std::abs(eval_W(e, PotentialConfig{gaussian_w(n, tau), tau, true})) < 1e-10);
    }
    EuclideanSpace e{2};
    const double tau = 0.5;
    std::mt19937 rng(3);
    std::normal_distribution<double> nd(0.0, 0.3);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = nd(rng), b = nd(rng), c = nd(rng);
        const EuclidField base = gaussian_w(2, tau);
        const EuclidField f{[=](const Vec3& x) {
            Jet j = base.f(x);
            const double s = std::sin(x[0] + c), co = std::cos(x[0] + c), s2 = std::sin(2 * x[1]), c2 = std::cos(2 * x[1]);
            j.v += a * s + b * c2;
            j.g[0] += a * co;
            j.g[1] += -2 * b * s2;
            j.h(0, 0) += -a * s;
            j.h(1, 1) += -4 * b * c2;
            return j;
        }};
        CHECK(eval_W(e, normalize_potential(e, f, tau)) >= -1e-9);
    }
    const double Lx = 2.0, Ly = 3.0, tau2 = 0.2;
    const ConformalTorus flat = make_torus(16, 16, Lx, Ly);
    const PotentialConfig cfg = normalize_potential(flat, constant_field(flat, 0.0), tau2);
    const double fc = std::log(Lx * Ly / (4 * pi * tau2));
    CHECK(std::get<Grid>(cfg.f)[0] == doctest::Approx(fc).epsilon(1e-13));
    CHECK(eval_W(flat, cfg) == doctest::Approx(fc - 2).epsilon(1e-13));
    CHECK_THROWS_AS(eval_W(flat, PotentialConfig{constant_field(flat, 0.0), tau2, true}), IncompatiblePotential);
    CHECK_THROWS_AS(eval_W(flat, PotentialConfig{cfg.f, tau2, false}), IncompatiblePotential);
}

TEST_CASE("normalize_potential") {
    EuclideanSpace e{2};
    const double tau = 0.9;
    const PotentialConfig cfg = normalize_potential(e, gaussian_w(2, tau), tau);
    CHECK(cfg.compatible);
    CHECK(value_at(cfg.f, Vec3(0.3, -0.2, 0)) == doctest::Approx(value_at(gaussian_w(2, tau), Vec3(0.3, -0.2, 0))).epsilon(1e-12));
    const ConformalTorus t = bumpy(32);
    const PotentialConfig c1 = normalize_potential(t, constant_field(t, 0.0), tau);
    const double V = integrate(t, constant_field(t, 1.0));
    CHECK(std::get<Grid>(c1.f)[5] == doctest::Approx(std::log(V / (4 * pi * tau))).epsilon(1e-13));
    const PotentialConfig c2 = normalize_potential(t, c1.f, tau);
    CHECK((std::get<Grid>(c2.f) - std::get<Grid>(c1.f)).abs().maxCoeff() < 1e-13);
    CHECK(compat_mass(t, c2.f, tau) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("lambda: closed forms and the dense oracle") {
    const ConformalTorus flat = make_torus(16, 16, 2 * pi, 2 * pi);
    const SpectralResult r0 = lambda_k(flat, 1.0);
    CHECK(std::abs(r0.lambda) < 1e-10);
    const Grid& u0 = std::get<Grid>(r0.u0);
    CHECK(u0.maxCoeff() - u0.minCoeff() < 1e-8);
    CHECK(integrate(flat, Grid(u0 * u0)) == doctest::Approx(1.0).epsilon(1e-12));
    for (double k : {1.0, 3.0}) CHECK(lambda_k(RoundSphere{2, 1.0}, k).lambda == doctest::Approx(2 * k).epsilon(1e-14));
    CHECK_THROWS(lambda_k(EuclideanSpace{2}, 1.0));

    const int N = 32;
    const ConformalTorus t = make_torus(N, N, 2 * pi, 2 * pi, [](double x, double) { return 0.1 * std::sin(x); });
    const TorusMetric g = TorusMetric::conformal(t);
    const Grid V = g.R;
    // dense operator, columns from unit vectors, then symmetrized by the dV weights
    const int M = N * N;
    Eigen::MatrixXd A(M, M);
    for (int j = 0; j < M; ++j) {
        Grid e = Grid::Zero(M);
        e[j] = 1.0;
        Grid col = -4.0 * (-2.0 * t.u).exp() * g.sp().lap(e) + V * e;
        A.col(j) = col.matrix();
    }
    const Eigen::VectorXd d = g.weights().sqrt().matrix();
    Eigen::MatrixXd S = d.asDiagonal() * A * d.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    const double oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()[0];
    const SpectralResult r = lambda_k(t, 1.0);
    CHECK(std::abs(r.lambda - oracle) < 1e-8);
    CHECK(r.residual < 1e-8);
    CHECK(std::get<Grid>(r.u0).minCoeff() > 0.0);
    CHECK(integrate(t, Grid((-std::get<Grid>(r.f0)).exp())) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mu on the flat torus follows the closed form") {
    const double L = 0.5;
    const ConformalTorus flat = make_torus(16, 16, L, L);
    double prev = -1e300;
    for (double tau : {0.05, 0.02, 0.01, 0.005}) {
        const MuResult r = mu(flat, tau);
        CHECK(r.converged);
        CHECK(r.mu == doctest::Approx(std::log(L * L / (4 * pi * tau)) - 2).epsilon(1e-9));
        CHECK(r.mu > prev);
        prev = r.mu;
    }
    CHECK(mu(flat, 0.01).mu < 0.0);
}

TEST_CASE("mu bounds W from below on a perturbed torus") {
    const ConformalTorus t = bumpy(24);
    std::mt19937 rng(99);
    for (double tau : {0.5, 0.1}) {
        const MuResult r = mu(t, tau);
        CHECK(r.converged);
        CHECK(r.grad_norm <= 1e-7);
        for (int trial = 0; trial < 20; ++trial) {
            const PotentialConfig cfg = normalize_potential(t, random_field(t, rng, 0.5, 3), tau);
            CHECK(r.mu <= eval_W(t, cfg) + 1e-12);
        }
    }
    // a spread-out minimizer: the pointwise entropy at the minimizer agrees
    const MuResult r = mu(t, 0.5);
    CHECK(std::abs(eval_W(t, PotentialConfig{r.f, 0.5, true}) - r.mu) < 1e-7);
}

TEST_CASE("mu of a concentrated minimizer is resolution independent") {
    // at tau = 0.1 the minimizer's tails reach f ~ 50; the value is grid independent while the
    // pointwise entropy of the minimizer converges to it as the grid refines
    const double tau = 0.1;
    double gap_prev = 1e300, mu24 = 0.0;
    for (int n : {24, 32, 48}) {
        const ConformalTorus t = bumpy(n);
        const MuResult r = mu(t, tau);
        CHECK(r.converged);
        if (n == 24) mu24 = r.mu;
        CHECK(std::abs(r.mu - mu24) < 1e-8);
        const double gap = std::abs(eval_W(t, PotentialConfig{r.f, tau, true}) - r.mu);
        CHECK(gap < gap_prev);
        gap_prev = gap;
    }
    CHECK(gap_prev < 1e-4);
}

TEST_CASE("diffusion entropy") {
    const ConformalTorus flat = make_torus(32, 32, 2 * pi, 2 * pi);
    const double V = 4 * pi * pi;
    SUBCASE("uniform density") {
        const WeightedOperator w{flat, constant_field(flat, 0.0), 3.0};
        const double t = 0.7;
        const DiffusionEntropy e = diffusion_entropy(w, Grid::Constant(32 * 32, 1 / V), t);
        CHECK(e.H_opposite_sign == doctest::Approx(-std::log(V) - 1.5 * std::log(4 * pi * t) - 1.5).epsilon(1e-13));
        CHECK(e.H == doctest::Approx(std::log(V) - 1.5 * (std::log(4 * pi * t) + 1)).epsilon(1e-13));
        CHECK_THROWS(diffusion_entropy(w, Grid::Constant(32 * 32, 2 / V), t));
        CHECK_THROWS(diffusion_entropy(WeightedOperator{flat, constant_field(flat, 0.0), 2.0}, Grid::Constant(32 * 32, 1 / V), t));
    }
    SUBCASE("heat flow identities") {
        for (double amp : {0.0, 0.1}) {
            const Grid phi = std::get<Grid>(grid_field(flat, [amp](double, double y) { return amp * std::cos(y); }));
            const WeightedOperator w{flat, phi, 4.0};
            Grid u = std::get<Grid>(grid_field(flat, [](double x, double y) {
                return std::exp(0.6 * std::sin(x) + 0.4 * std::cos(x + y));
            }));
            const TorusMetric g = TorusMetric::conformal(flat);
            u /= g.integrate(u * (-phi).exp());
            const double t0 = 1.0, t1 = 1.2;
            const int steps = 100;
            const double dt = (t1 - t0) / steps;
            const std::vector<Grid> us = weighted_heat_flow(w, u, t0, t1, steps);
            std::vector<DiffusionEntropy> e;
            for (int k = 0; k <= steps; ++k) e.push_back(diffusion_entropy(w, us[k], t0 + k * dt));
            for (int k = 1; k < steps; k += 9) {
                const double tk = t0 + k * dt;
                const double dtH = ((tk + dt) * e[k + 1].H - (tk - dt) * e[k - 1].H) / (2 * dt);
                CHECK(std::abs(dtH - e[k].W) < 1e-4);
                const double dW = (e[k + 1].W - e[k - 1].W) / (2 * dt);
                CHECK(rel(diffusion_dW(w, us[k], tk), dW) < 1e-3);
                if (amp == 0.0) CHECK(dW <= 1e-12);
            }
        }
    }
}

TEST_CASE("Bakry-Emery tensor") {
    const ConformalTorus flat = make_torus(16, 16, 2 * pi, 2 * pi);
    const BakryEmery z = bakry_emery(WeightedOperator{flat, constant_field(flat, 0.0), 3.0});
    const auto& zt = std::get<TorusTensor>(z.tensor);
    CHECK(zt.xx.abs().maxCoeff() + zt.xy.abs().maxCoeff() + zt.yy.abs().maxCoeff() == 0.0);
    CHECK(z.min_eigenvalue == 0.0);
    const RoundSphere s{3, 2.0};
    const BakryEmery se = bakry_emery(WeightedOperator{s, constant_field(s, 0.0), 4.0});
    CHECK(se.min_eigenvalue == doctest::Approx(2.0 / 4.0).epsilon(1e-14));
    CHECK_THROWS(bakry_emery(WeightedOperator{s, constant_field(s, 0.0), 3.0}));

    const int N = 32;
    const ConformalTorus t = make_torus(N, N, 2 * pi, 2 * pi, [](double x, double y) { return 0.1 * std::sin(x + y); });
    auto phi_f = [](double, double y) { return 0.1 * std::cos(y); };
    const double m = 4.0;
    const BakryEmery be = bakry_emery(WeightedOperator{t, grid_field(t, phi_f), m});
    const auto& T = std::get<TorusTensor>(be.tensor);
    // conformal Hessian: d_ij phi - Gamma^k_ij d_k phi with Gamma from u
    auto uf = [](double x, double y) { return 0.1 * std::sin(x + y); };
    const oracle::Stencil4 P{phi_f, 2 * pi / (2 * N)}, U{uf, 2 * pi / (2 * N)};
    const oracle::Stencil4 Pxy{[&](double x, double y) { return P.dy(x, y); }, 2 * pi / (2 * N)};
    double err = 0.0;
    for (int j = 0; j < N; j += 3)
        for (int i = 0; i < N; i += 3) {
            const double x = 2 * pi * i / N, y = 2 * pi * j / N;
            const double px = P.dx(x, y), py = P.dy(x, y), ux = U.dx(x, y), uy = U.dy(x, y);
            const double lapu = U.dxx(x, y) + U.dyy(x, y);
            const double R2 = -std::exp(-2 * uf(x, y)) * lapu;  // R/2
            const double e2u = std::exp(2 * uf(x, y));
            const double hxx = P.dxx(x, y) - (ux * px - uy * py);
            const double hyy = P.dyy(x, y) - (-ux * px + uy * py);
            const double hxy = Pxy.dx(x, y) - (uy * px + ux * py);
            const double c = 1 / (m - 2);
            const std::size_t q = static_cast<std::size_t>(j) * N + i;
            err = std::max({err, std::abs(T.xx[q] - (R2 * e2u + hxx - c * px * px)),
                            std::abs(T.xy[q] - (hxy - c * px * py)), std::abs(T.yy[q] - (R2 * e2u + hyy - c * py * py))});
        }
    CHECK(err < 1e-6);
}

TEST_CASE("gauge-fixed and modified flows share their F trajectory") {
    const ConformalTorus t = bumpy(32);
    const MetricHistory h = run_history(t, 0.04);
    std::mt19937 rng(17);
    const Grid fT = random_field(t, rng, 0.08);
    const PotentialTrajectory plain = evolve_potential(h, fT, PotentialMode::plain);
    const PotentialTrajectory gauge = evolve_potential(h, fT, PotentialMode::gauge);
    REQUIRE(gauge.t.size() >= 3);
    for (std::size_t i = 0; i < gauge.t.size(); ++i) {
        const std::size_t k = gauge.index[i];
        CHECK(std::abs(eval_F(gauge, i) - eval_F(plain, k)) < 1e-5 * std::abs(eval_F(plain, k)));
    }
    // the pulled-back potential solves f_t = -lap f - R for the pulled-back metric
    for (std::size_t i = 1; i + 1 < gauge.t.size(); i += 3) {
        const auto metric = [&](std::size_t j) {
            const TorusTensor& g = gauge.gauge_torus[j];
            return TorusMetric::general(t.nx, t.ny, t.lx, t.ly, g.xx, g.xy, g.yy);
        };
        const TorusMetric g = metric(i);
        const Grid& f = std::get<Grid>(gauge.f[i]);
        const Grid ft = (std::get<Grid>(gauge.f[i + 1]) - std::get<Grid>(gauge.f[i - 1])) / (gauge.t[i + 1] - gauge.t[i - 1]);
        const Grid rhs = -g.laplacian(f) - g.R;
        CHECK((ft - rhs).abs().maxCoeff() < 1e-3 * rhs.abs().maxCoeff());
        // and g_t = -2 (Ric + Hess f)
        const TorusTensor H = g.hessian(f);
        const Grid gt = (gauge.gauge_torus[i + 1].xx - gauge.gauge_torus[i - 1].xx) / (gauge.t[i + 1] - gauge.t[i - 1]);
        const Grid grhs = -2.0 * (0.5 * g.R * g.g11 + H.xx);
        CHECK((gt - grhs).abs().maxCoeff() < 1e-3 * grhs.abs().maxCoeff());
    }
}

TEST_CASE("gauge equivalence on euclidean space") {
    const MetricHistory h = run_history(EuclideanSpace{2}, 0.5);
    const GaussianMixture w{{GaussianComponent{1.0, Vec3::Zero(), 0.3}}};
    const PotentialTrajectory plain = evolve_potential(h, w, PotentialMode::plain);
    const PotentialTrajectory gauge = evolve_potential(h, w, PotentialMode::gauge);
    for (std::size_t i = 0; i < gauge.t.size(); ++i)
        CHECK(eval_F(gauge, i) == doctest::Approx(eval_F(plain, gauge.index[i])).epsilon(1e-10));
}
