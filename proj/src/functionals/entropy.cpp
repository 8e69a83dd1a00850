#include "plab/functionals/entropy.hpp"

#include <cmath>
#include <numbers>

#include "plab/geometry/ops.hpp"

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

double frob(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

void check_k(double k) {
    if (!(k >= 1.0)) throw std::invalid_argument("F_k needs k >= 1");
}

void check_tau(double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
}

void check_sizes(const PointSet& p, std::size_t a, std::size_t b) {
    if (a != p.size() || b != p.size()) throw BackendMismatch("variation does not match the backend");
}

}  // namespace

ScalarField shift_field(const ScalarField& f, double c) {
    if (auto* g = std::get_if<Grid>(&f)) return Grid(*g + c);
    if (auto* e = std::get_if<EuclidField>(&f))
        return EuclidField{[F = e->f, c](const Vec3& x) {
            Jet j = F(x);
            j.v += c;
            return j;
        }};
    const auto& z = std::get<ZonalField>(f);
    return ZonalField{[F = z.f, c](double th) {
        Jet1 j = F(th);
        j.v += c;
        return j;
    }};
}

double eval_F(const PointSet& p, double k) {
    check_k(k);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.w[i] * (k * p.R[i] + p.df[i].squaredNorm()) * std::exp(-p.f[i]);
    return s;
}

double eval_F(const PotentialTrajectory& tr, std::size_t i, double k) {
    if (tr.mode != PotentialMode::gauge) return eval_F(tr.metric(i), tr.f[i], k);
    if (!tr.gauge_euclid.empty()) return eval_F(Backend(tr.gauge_euclid.at(i)), tr.f[i], k);
    const auto& t = std::get<ConformalTorus>(tr.metric(i));
    const TorusTensor& g = tr.gauge_torus.at(i);
    return eval_F(TorusMetric::general(t.nx, t.ny, t.lx, t.ly, g.xx, g.xy, g.yy), std::get<Grid>(tr.f[i]), k);
}

double eval_F(const Backend& m, const ScalarField& f, double k) { return eval_F(point_set(m, f), k); }
double eval_F(const TorusMetric& g, const Grid& f, double k) { return eval_F(point_set(g, f), k); }

double delta_F(const PointSet& p, const std::vector<Mat3>& v, const std::vector<double>& h) {
    check_sizes(p, v.size(), h.size());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double tr = v[i].trace();
        const double bracket = 2.0 * p.lap[i] - p.df[i].squaredNorm() + p.R[i];
        s += p.w[i] * std::exp(-p.f[i]) * (-frob(v[i], p.Ric[i] + p.H[i]) + (0.5 * tr - h[i]) * bracket);
    }
    return s;
}

double delta_F(const Backend& m, const ScalarField& f, const VariationData& var, double k) {
    check_k(k);
    if (k == 1.0) return delta_F(point_set(m, f), node_tensor(m, var.v), node_values(m, var.h));
    const auto* t = std::get_if<ConformalTorus>(&m);
    if (!t) throw std::invalid_argument("delta_F with k != 1 is only available on the torus");
    const auto& v = std::get<TorusTensor>(var.v);
    const Grid& fg = std::get<Grid>(f);
    const Grid& h = std::get<Grid>(var.h);
    const Grid e2u = (2.0 * t->u).exp();
    const double eps = 1e-5;
    auto at = [&](double e) {
        const TorusMetric g =
            TorusMetric::general(t->nx, t->ny, t->lx, t->ly, e2u + e * v.xx, e * v.xy, e2u + e * v.yy);
        return eval_F(g, Grid(fg + e * h), k);
    };
    return (at(eps) - at(-eps)) / (2 * eps);
}

double production_F(const PointSet& p, double k) {
    check_k(k);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Mat3 a = p.Ric[i] + p.H[i];
        s += p.w[i] * std::exp(-p.f[i]) * (2.0 * (k - 1.0) * p.Ric[i].squaredNorm() + 2.0 * a.squaredNorm());
    }
    return s;
}

double production_F(const Backend& m, const ScalarField& f, double k) { return production_F(point_set(m, f), k); }

double compat_mass(const Backend& m, const ScalarField& f, double tau) {
    check_tau(tau);
    const PointSet p = point_set(m, f);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.w[i] * std::exp(-p.f[i]);
    return s * std::pow(4 * kPi * tau, -0.5 * p.n);
}

PotentialConfig normalize_potential(const Backend& m, const ScalarField& f, double tau) {
    const double M = compat_mass(m, f, tau);
    if (!(M > 0) || !std::isfinite(M)) throw std::domain_error("normalization integral diverges");
    const double c = std::log(M);
    return {c == 0.0 ? f : shift_field(f, c), tau, true};
}

double eval_W_raw(const PointSet& p, double tau) {
    check_tau(tau);
    const double norm = std::pow(4 * kPi * tau, -0.5 * p.n);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += p.w[i] * (tau * (p.R[i] + p.df[i].squaredNorm()) + p.f[i] - p.n) * std::exp(-p.f[i]);
    return s * norm;
}

double eval_W_raw(const Backend& m, const ScalarField& f, double tau) { return eval_W_raw(point_set(m, f), tau); }
double eval_W_raw(const TorusMetric& g, const Grid& f, double tau) { return eval_W_raw(point_set(g, f), tau); }

double eval_W(const Backend& m, const PotentialConfig& cfg) {
    if (!cfg.compatible) throw IncompatiblePotential("eval_W needs a compatible potential");
    const double M = compat_mass(m, cfg.f, cfg.tau);
    if (std::abs(M - 1.0) > 1e-8) throw IncompatiblePotential("potential is flagged compatible but has mass " + std::to_string(M));
    return eval_W_raw(m, cfg.f, cfg.tau);
}

double delta_W(const PointSet& p, double tau, const std::vector<Mat3>& v, const std::vector<double>& h,
               double sigma) {
    check_tau(tau);
    check_sizes(p, v.size(), h.size());
    const double norm = std::pow(4 * kPi * tau, -0.5 * p.n);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double g2 = p.df[i].squaredNorm();
        const double tr = v[i].trace();
        const double bracket = tau * (2.0 * p.lap[i] - g2 + p.R[i]) + p.f[i] - p.n;
        const double integrand = sigma * (p.R[i] + g2) - tau * frob(v[i], p.Ric[i] + p.H[i]) + h[i] +
                                 bracket * (0.5 * tr - h[i] - 0.5 * p.n * sigma / tau);
        s += p.w[i] * integrand * std::exp(-p.f[i]);
    }
    return s * norm;
}

double delta_W(const Backend& m, const PotentialConfig& cfg, const VariationData& var) {
    return delta_W(point_set(m, cfg.f), cfg.tau, node_tensor(m, var.v), node_values(m, var.h), var.sigma);
}

double production_W(const PointSet& p, double tau) {
    check_tau(tau);
    const double norm = std::pow(4 * kPi * tau, -0.5 * p.n);
    const Mat3 I = p.id();
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Mat3 a = p.Ric[i] + p.H[i] - I / (2 * tau);
        s += p.w[i] * 2.0 * tau * a.squaredNorm() * std::exp(-p.f[i]);
    }
    return s * norm;
}

double production_W(const Backend& m, const PotentialConfig& cfg) { return production_W(point_set(m, cfg.f), cfg.tau); }

}  // namespace plab
