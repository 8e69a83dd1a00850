#include "plab/flow/ricci.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace plab {

CflViolation::CflViolation(double dt_, double limit_)
    : std::domain_error("time step " + std::to_string(dt_) + " exceeds the CFL limit " + std::to_string(limit_)),
      dt(dt_),
      limit(limit_) {}

Extinction::Extinction(double t_ext)
    : std::domain_error("round sphere becomes extinct at t = " + std::to_string(t_ext)), extinction_time(t_ext) {}

double cfl_dt(const ConformalTorus& t, double safety) {
    if (!(safety > 0 && safety <= 1)) throw std::invalid_argument("CFL safety factor must lie in (0, 1]");
    const double h = std::min(t.lx / t.nx, t.ly / t.ny);
    return safety * h * h * (2.0 * t.u).exp().minCoeff() / 4.0;
}

Grid ricci_rhs(const ConformalTorus& t) { return (-2.0 * t.u).exp() * t.spectral().lap(t.u); }

double sphere_extinction_time(const RoundSphere& s) {
    if (s.n == 1) return std::numeric_limits<double>::infinity();
    return s.r * s.r / (2.0 * (s.n - 1));
}

namespace {

ConformalTorus with_u(const ConformalTorus& t, Grid u) {
    ConformalTorus o = t;
    o.u = std::move(u);
    return o;
}

// Extinction threshold: runs stop once r^2 falls to 1e-6 of its starting value.
constexpr double kExtinctFraction = 1e-6;

}  // namespace

Backend step_forward(const Backend& m, double dt, Scheme scheme, double cfl) {
    if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
    validate(m);
    if (std::holds_alternative<EuclideanSpace>(m)) return m;
    if (auto* s = std::get_if<RoundSphere>(&m)) {
        const double r2 = s->r * s->r - 2.0 * (s->n - 1) * dt;
        if (r2 <= 0.0) throw Extinction(sphere_extinction_time(*s));
        RoundSphere o = *s;
        o.r = std::sqrt(r2);
        return o;
    }
    const auto& t = std::get<ConformalTorus>(m);
    const double limit = cfl_dt(t, cfl);
    if (dt > limit * (1 + 1e-6)) throw CflViolation(dt, limit);
    if (scheme == Scheme::euler) return with_u(t, t.u + dt * ricci_rhs(t));
    const Grid k1 = ricci_rhs(t);
    const Grid k2 = ricci_rhs(with_u(t, t.u + 0.5 * dt * k1));
    const Grid k3 = ricci_rhs(with_u(t, t.u + 0.5 * dt * k2));
    const Grid k4 = ricci_rhs(with_u(t, t.u + dt * k3));
    return with_u(t, t.u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

MetricHistory run_history(const Backend& m0, double T, const FlowConfig& cfg) {
    if (!(T > 0)) throw std::invalid_argument("run length must be positive");
    if (!(cfg.cfl > 0 && cfg.cfl <= 1)) throw std::invalid_argument("CFL safety factor must lie in (0, 1]");
    validate(m0);
    if (auto* s = std::get_if<RoundSphere>(&m0)) {
        const double te = sphere_extinction_time(*s);
        if (s->n > 1 && s->r * s->r - 2.0 * (s->n - 1) * T <= kExtinctFraction * s->r * s->r) throw Extinction(te);
    }
    double dt = cfg.dt;
    if (dt <= 0) {
        if (auto* t = std::get_if<ConformalTorus>(&m0))
            dt = cfl_dt(*t, cfg.cfl);
        else
            dt = T / 100.0;
    }
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    if (steps > cfg.max_steps) throw std::length_error("run needs more steps than the configured maximum");
    dt = T / steps;

    std::vector<double> ts{0.0};
    std::vector<Backend> snaps{m0};
    ts.reserve(steps + 1);
    snaps.reserve(steps + 1);
    if (auto* s = std::get_if<RoundSphere>(&m0)) {
        // closed form, no accumulation of rounding across steps
        for (long k = 1; k <= steps; ++k) {
            RoundSphere o = *s;
            const double t = k == steps ? T : k * dt;
            o.r = std::sqrt(s->r * s->r - 2.0 * (s->n - 1) * t);
            ts.push_back(t);
            snaps.push_back(o);
        }
    } else {
        Backend cur = m0;
        for (long k = 1; k <= steps; ++k) {
            cur = step_forward(cur, dt, cfg.scheme, cfg.cfl);
            ts.push_back(k == steps ? T : k * dt);
            snaps.push_back(cur);
        }
    }
    return MetricHistory(std::move(ts), std::move(snaps), dt, cfg.interp);
}

}  // namespace plab
