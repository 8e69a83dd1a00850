#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "plab/flow/potential.hpp"
#include "plab/flow/ricci.hpp"
#include "plab/geometry/ops.hpp"

using namespace plab;
using std::numbers::pi;

namespace {

const double L = 2 * pi;
double u_sin(double x, double) { return 0.1 * std::sin(x); }
double u_mixed(double x, double y) { return 0.1 * std::sin(x) + 0.05 * std::cos(2 * y + 0.3); }

const ConformalTorus& torus(const Backend& b) { return std::get<ConformalTorus>(b); }

}  // namespace

TEST_CASE("step_forward on analytic backends") {
    Backend e = EuclideanSpace{3};
    CHECK(std::get<EuclideanSpace>(step_forward(e, 0.7)).scale == 1.0);
    Backend s = RoundSphere{2, 1.0};
    CHECK(std::pow(std::get<RoundSphere>(step_forward(s, 0.1)).r, 2) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(step_forward(s, 0.6), Extinction);
    try {
        step_forward(s, 0.6);
    } catch (const Extinction& x) {
        CHECK(x.extinction_time == doctest::Approx(0.5));
    }
}

TEST_CASE("step_forward rejects steps above the CFL bound") {
    ConformalTorus t = make_torus(32, 32, L, L, u_sin);
    const double lim = cfl_dt(t, 0.2);
    CHECK_NOTHROW(step_forward(t, lim));
    CHECK_THROWS_AS(step_forward(t, 1.5 * lim), CflViolation);
    CHECK_THROWS_AS(step_forward(t, -1.0), std::invalid_argument);
}

TEST_CASE("torus Ricci flow: sup|u| decays and rk4 converges at fourth order") {
    ConformalTorus t0 = make_torus(16, 16, L, L, u_mixed);
    const double T = 0.6;
    std::vector<Grid> finals;
    for (int steps : {24, 48, 96}) {
        FlowConfig cfg;
        cfg.dt = T / steps;
        cfg.cfl = 1.0;
        const MetricHistory h = run_history(t0, T, cfg);
        double prev = 1e300;
        for (std::size_t k = 0; k < h.size(); ++k) {
            const double sup = torus(h.snapshot(k)).u.abs().maxCoeff();
            CHECK(sup <= prev + 1e-14);
            prev = sup;
        }
        finals.push_back(torus(h.snapshot(h.size() - 1)).u);
    }
    const double e1 = (finals[0] - finals[1]).abs().maxCoeff();
    const double e2 = (finals[1] - finals[2]).abs().maxCoeff();
    CHECK(e1 > 0);
    CHECK(std::log2(e1 / e2) > 3.6);
}

TEST_CASE("run_history closed forms") {
    const MetricHistory he = run_history(EuclideanSpace{2}, 1.3);
    for (std::size_t k = 0; k < he.size(); ++k) CHECK(std::get<EuclideanSpace>(he.snapshot(k)).scale == 1.0);

    const MetricHistory hs = run_history(RoundSphere{3, 1.0}, 0.2);
    const auto& last = std::get<RoundSphere>(hs.snapshot(hs.size() - 1));
    CHECK(last.r * last.r == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(value_at(scalar_curvature(last), 0.3) == doctest::Approx(30.0).epsilon(1e-12));
    CHECK_THROWS_AS(run_history(RoundSphere{2, 1.0}, 0.5), Extinction);
    CHECK_THROWS_AS(run_history(EuclideanSpace{2}, 0.0), std::invalid_argument);
}

TEST_CASE("torus volume obeys dV/dt = -R dV") {
    const MetricHistory h = run_history(make_torus(64, 64, L, L, u_mixed), 0.05);
    double worst = 0;
    for (std::size_t k = 1; k + 1 < h.size(); k += 7) {
        auto vol = [&](std::size_t i) { return integrate(h.snapshot(i), Grid::Ones(64 * 64)); };
        const double num = (vol(k + 1) - vol(k - 1)) / (h.time(k + 1) - h.time(k - 1));
        const Backend& b = h.snapshot(k);
        const double exact = -integrate(b, scalar_curvature(b));
        worst = std::max(worst, std::abs(num - exact));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("backward_view") {
    const MetricHistory h = run_history(RoundSphere{2, 1.0}, 0.3);
    const MetricHistory b = backward_view(h);
    CHECK(b.is_backward());
    CHECK(b.start() == 0.0);
    CHECK(b.end() == doctest::Approx(0.3));
    const double r0 = std::get<RoundSphere>(h.snapshot(h.size() - 1)).r;
    for (double tau : {0.0, 0.05, 0.123, 0.3}) {
        const double r = std::get<RoundSphere>(b.sample(tau)).r;
        CHECK(r * r == doctest::Approx(r0 * r0 + 2 * tau).epsilon(1e-13));
    }
    CHECK(backward_view(b) == h);
    CHECK_FALSE(b == h);

    // scalar curvature floor along the backward torus flow
    const MetricHistory ht = run_history(make_torus(32, 32, L, L, u_mixed), 0.2);
    const MetricHistory bt = backward_view(ht);
    const double taubar = bt.end();
    for (std::size_t k = 0; k + 1 < bt.size(); k += 5) {
        const double Rmin = std::get<Grid>(scalar_curvature(bt.snapshot(k))).minCoeff();
        CHECK(Rmin >= -2.0 / (2.0 * (taubar - bt.time(k))) - 1e-6);
    }
}

TEST_CASE("sample interpolation") {
    const MetricHistory hs = run_history(RoundSphere{2, 1.0}, 0.2);
    const double r = std::get<RoundSphere>(hs.sample(0.0123)).r;
    CHECK(r * r == doctest::Approx(1 - 2 * 0.0123).epsilon(1e-14));
    CHECK_THROWS_AS(hs.sample(0.3), std::out_of_range);

    ConformalTorus t0 = make_torus(16, 16, L, L, u_mixed);
    FlowConfig cfg;
    cfg.cfl = 1.0;
    cfg.dt = 0.02;
    const MetricHistory h = run_history(t0, 0.4, cfg);
    CHECK((h.sample_u(h.time(3)) - torus(h.snapshot(3)).u).abs().maxCoeff() == 0.0);
    cfg.dt = 0.01;
    const MetricHistory fine = run_history(t0, 0.4, cfg);
    // t = 0.21 is a snapshot of the fine run and lies mid-step in the coarse one
    const double err = (h.sample_u(0.21) - fine.sample_u(0.21)).abs().maxCoeff();
    CHECK(err < std::pow(0.02, 3));
}

TEST_CASE("history text round trip is bit exact") {
    const MetricHistory h = run_history(make_torus(8, 8, L, 3.0, u_mixed), 0.05, FlowConfig{0.005, Scheme::rk4, 1.0});
    std::stringstream ss;
    h.save(ss);
    const MetricHistory back = MetricHistory::load(ss);
    CHECK(back == h);
    std::stringstream s2;
    backward_view(run_history(RoundSphere{3, 2.0}, 0.1)).save(s2);
    const MetricHistory sb = MetricHistory::load(s2);
    CHECK(sb.is_backward());
    std::stringstream bad("plab-history 2");
    CHECK_THROWS(MetricHistory::load(bad));
}

TEST_CASE("euclidean potentials keep the Gaussian form") {
    for (int n = 1; n <= 3; ++n) {
        const double tau0 = 1.0, T = 0.5;
        const MetricHistory h = run_history(EuclideanSpace{n}, T);
        GaussianMixture w{{{1.0, Vec3::Zero(), tau0 - T}}};
        const PotentialTrajectory tr = evolve_potential(h, w, PotentialMode::plain);
        const Vec3 x(0.3, -0.7, 1.1);
        Vec3 xn = Vec3::Zero();
        for (int i = 0; i < n; ++i) xn[i] = x[i];
        for (std::size_t k = 0; k < tr.t.size(); k += 10) {
            const double tau = tau0 - tr.t[k];
            const double want = xn.squaredNorm() / (4 * tau) + 0.5 * n * std::log(4 * pi * tau);
            CHECK(value_at(tr.f[k], x) == doctest::Approx(want).epsilon(1e-13));
        }
        const PotentialTrajectory nz = evolve_potential(h, w, PotentialMode::normalized, tau0);
        CHECK(value_at(nz.f[0], x) == doctest::Approx(xn.squaredNorm() / 4.0).epsilon(1e-13));
        CHECK_THROWS_AS(evolve_potential(h, w, PotentialMode::normalized, 0.4), TauExhausted);
    }
}

TEST_CASE("torus potentials conserve their mass") {
    const MetricHistory h = run_history(make_torus(64, 64, L, L, u_mixed), 0.1);
    const Backend& bT = h.snapshot(h.size() - 1);
    Grid fT = std::get<Grid>(grid_field(torus(bT), [](double x, double y) { return 0.3 * std::cos(x - y) + 0.2 * std::sin(2 * y); }));
    fT += std::log(integrate(bT, Grid((-fT).exp())));
    const PotentialTrajectory tr = evolve_potential(h, fT, PotentialMode::plain, 0.0, 4);
    double worst = 0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        worst = std::max(worst, std::abs(integrate(tr.metric(i), Grid((-std::get<Grid>(tr.f[i])).exp())) - 1.0));
    CHECK(worst < 1e-12);
    CHECK(tr.t.back() == doctest::Approx(0.1));

    const double tau0 = 0.6;
    Grid gT = fT - std::log(4 * pi * (tau0 - 0.1));
    const PotentialTrajectory nz = evolve_potential(h, gT, PotentialMode::normalized, tau0, 4);
    worst = 0;
    for (std::size_t i = 0; i < nz.t.size(); ++i) {
        const Grid w = (-std::get<Grid>(nz.f[i])).exp() / (4 * pi * nz.tau(i));
        worst = std::max(worst, std::abs(integrate(nz.metric(i), w) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("sphere potentials conserve their mass") {
    for (int n = 1; n <= 3; ++n) {
        const MetricHistory h = run_history(RoundSphere{n, 1.0, 48}, n == 1 ? 0.3 : 0.1);
        const ZonalField fT{[](double th) {
            return Jet1{0.4 * std::cos(th) + 0.1 * std::cos(2 * th), -0.4 * std::sin(th) - 0.2 * std::sin(2 * th),
                        -0.4 * std::cos(th) - 0.4 * std::cos(2 * th)};
        }};
        const PotentialTrajectory tr = evolve_potential(h, fT, PotentialMode::plain, 0.0, 10);
        const double m0 = integrate(tr.metric(tr.t.size() - 1), ZonalField{[&](double th) { return Jet1{std::exp(-fT.f(th).v)}; }});
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            const auto& fi = std::get<ZonalField>(tr.f[i]).f;
            const double m = integrate(tr.metric(i), ZonalField{[&](double th) { return Jet1{std::exp(-fi(th).v)}; }});
            CHECK(m == doctest::Approx(m0).epsilon(1e-12));
        }
        // terminal data is reproduced
        CHECK(value_at(tr.f.back(), 0.7) == doctest::Approx(fT.f(0.7).v).epsilon(1e-10));
    }
}
