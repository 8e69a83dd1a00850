#include "plab/variants/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "plab/flow/ricci.hpp"

namespace plab {

bool VariantMetric::conformal() const {
    if (h11.size() == 0) return true;
    const double d = std::max({(h11 - 1.0).abs().maxCoeff(), h12.abs().maxCoeff(), (h22 - 1.0).abs().maxCoeff()});
    return d <= 1e-14;
}

TorusMetric VariantMetric::metric() const {
    if (conformal()) return TorusMetric::conformal(base);
    const Grid e2u = (2.0 * base.u).exp();
    return TorusMetric::general(base.nx, base.ny, base.lx, base.ly, e2u * h11, e2u * h12, e2u * h22);
}

double VariantMetric::cfl_dt(double safety) const {
    if (!(safety > 0 && safety <= 1)) throw std::invalid_argument("CFL safety factor must lie in (0, 1]");
    if (h11.size() == 0) return plab::cfl_dt(base, safety);
    const Grid half_tr = 0.5 * (h11 + h22);
    const Grid lam = half_tr - ((0.5 * (h11 - h22)).square() + h12.square()).sqrt();
    const double h = std::min(base.lx / base.nx, base.ly / base.ny);
    return safety * h * h * ((2.0 * base.u).exp() * lam).minCoeff() / 4.0;
}

VariantMetric variant_metric(const ConformalTorus& t) {
    validate(Backend(t));
    return VariantMetric{t, {}, {}, {}};
}

std::pair<long, double> plan_steps(double T, double limit, const VariantFlowConfig& cfg) {
    if (!(T > 0)) throw std::invalid_argument("run length must be positive");
    const double target = cfg.dt > 0 ? cfg.dt : limit;
    if (cfg.dt > limit * (1 + 1e-6)) throw CflViolation(cfg.dt, limit);
    long n = static_cast<long>(std::ceil(T / target - 1e-9));
    n = std::max(2L, n + (n % 2));
    if (n > cfg.max_steps) throw std::domain_error("run needs more than max_steps steps");
    return {n, T / n};
}

std::vector<Grid> conjugate_density(const std::vector<TorusMetric>& g, const std::vector<Grid>& P, double dt,
                                    const Grid& w_final) {
    if (g.size() != P.size() || g.size() < 3 || g.size() % 2 == 0)
        throw std::invalid_argument("conjugate_density needs an odd number (>= 3) of snapshots");
    if (!(dt > 0)) throw std::invalid_argument("snapshot spacing must be positive");
    auto rhs = [&](std::size_t k, const Grid& w) { return Grid(g[k].laplacian(w) - P[k] * w); };
    const std::size_t N = g.size() - 1;
    std::vector<Grid> out(N / 2 + 1);
    Grid w = w_final;
    out.back() = w;
    const double H = 2 * dt;
    for (std::size_t k = N; k >= 2; k -= 2) {
        const Grid k1 = rhs(k, w);
        const Grid k2 = rhs(k - 1, w + 0.5 * H * k1);
        const Grid k3 = rhs(k - 1, w + 0.5 * H * k2);
        const Grid k4 = rhs(k - 2, w + H * k3);
        w += H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!w.allFinite()) throw std::domain_error("conjugate heat solve diverged");
        out[k / 2 - 1] = w;
    }
    return out;
}

std::vector<double> central_rate(const std::vector<double>& y, double h) {
    std::vector<double> r(y.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 2; i + 2 < y.size(); ++i) r[i] = (y[i - 2] - 8 * y[i - 1] + 8 * y[i + 1] - y[i + 2]) / (12 * h);
    return r;
}

}  // namespace plab
