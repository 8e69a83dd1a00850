#include "plab/lgeo/chart.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <numbers>

#include "plab/geometry/ops.hpp"
#include "plab/geometry/torus_metric.hpp"

namespace plab {

namespace {

// Fourier modes below this fraction of the largest coefficient are dropped; the snapshots are
// analytic, so this only removes roundoff-level modes.
constexpr double kDropTol = 1e-14;

Mat3 proj(int n) {
    Mat3 p = Mat3::Zero();
    for (int i = 0; i < n; ++i) p(i, i) = 1.0;
    return p;
}

void fill_torus(ChartPoint& c, const FourierSeries::Value& u, const FourierSeries::Value& R, double u_tau, double R_tau) {
    c.u = u.v;
    c.u_tau = u_tau;
    c.R = R.v;
    c.R_tau = R_tau;
    c.du = Vec3(u.x, u.y, 0.0);
    c.dR = Vec3(R.x, R.y, 0.0);
    c.ddu << u.xx, u.xy, 0, u.xy, u.yy, 0, 0, 0, 0;
    c.ddR << R.xx, R.xy, 0, R.xy, R.yy, 0, 0, 0, 0;
    c.rho = 0.5 * c.R;
    c.rho_tau = 0.5 * c.R_tau;
    c.kappa = 0.5 * c.R;
}

// stereographic chart from the pole e_{n+1}, embedded through R^4
Eigen::Vector4d sphere_lift(const Vec3& x) {
    const double q = x.squaredNorm();
    Eigen::Vector4d w;
    w << 2 * x[0], 2 * x[1], 2 * x[2], q - 1.0;
    return w / (q + 1.0);
}

Vec3 sphere_project(const Eigen::Vector4d& y) { return y.head<3>() / (1.0 - y[3]); }

}  // namespace

struct LChart::Cache {
    std::mutex mu;
    std::deque<std::pair<std::pair<double, int>, std::shared_ptr<const SliceGrid>>> entries;
};

Mat3 ChartPoint::hess_R() const {
    // nabla_i nabla_j R = d_ij R - Gamma^k_ij d_k R
    return ddR - (du * dR.transpose() + dR * du.transpose()) + du.dot(dR) * proj(n);
}

LChart::LChart(const MetricHistory& bh) {
    if (!bh.is_backward()) throw std::invalid_argument("L-geometry needs a backward history view");
    tau_max_ = bh.end();
    t0_ = bh.t0();
    const Backend& b0 = bh.forward_snapshot(bh.size() - 1);  // tau = 0
    cubic_ = bh.interp() == Interp::cubic;
    if (auto* e = std::get_if<EuclideanSpace>(&b0)) {
        kind_ = Kind::euclidean;
        n_ = e->n;
        scale_ = e->scale;
        min_e2u_ = max_e2u_ = scale_;
        static_ = true;
    } else if (auto* s = std::get_if<RoundSphere>(&b0)) {
        kind_ = Kind::sphere;
        n_ = s->n;
        if (n_ < 2) throw std::invalid_argument("L-geometry on the sphere needs n >= 2");
        r0sq_ = s->r * s->r;
        growth_ = 2.0 * (n_ - 1);
        const double rsq_first = std::pow(std::get<RoundSphere>(bh.forward_snapshot(0)).r, 2);
        if (std::abs(rsq_first - (r0sq_ + growth_ * tau_max_)) > 1e-9 * rsq_first)
            throw std::invalid_argument("sphere history is not a Ricci flow");
        C0_ = std::max(std::sqrt(2.0 * n_ * (n_ - 1)), std::sqrt(double(n_)) * (n_ - 1)) / r0sq_;
        min_R_ = n_ * (n_ - 1) / (r0sq_ + growth_ * tau_max_);
        // chart factor 4 r^2 / (1 + |x|^2)^2 is unbounded below; min/max are not used on the sphere
    } else {
        kind_ = Kind::torus;
        n_ = 2;
        std::vector<const ConformalTorus*> snaps;
        for (std::size_t i = 0; i < bh.size(); ++i) snaps.push_back(&std::get<ConformalTorus>(bh.forward_snapshot(i)));
        init_torus(bh.forward_times(), snaps, t0_);
    }
}

LChart::LChart(const Backend& m) {
    validate(m);
    static_ = true;
    tau_max_ = std::numeric_limits<double>::infinity();
    if (auto* e = std::get_if<EuclideanSpace>(&m)) {
        kind_ = Kind::euclidean;
        n_ = e->n;
        scale_ = e->scale;
        min_e2u_ = max_e2u_ = scale_;
    } else if (auto* s = std::get_if<RoundSphere>(&m)) {
        kind_ = Kind::sphere;
        n_ = s->n;
        if (n_ < 2) throw std::invalid_argument("L-geometry on the sphere needs n >= 2");
        r0sq_ = s->r * s->r;
        C0_ = std::max(std::sqrt(2.0 * n_ * (n_ - 1)), std::sqrt(double(n_)) * (n_ - 1)) / r0sq_;
        min_R_ = n_ * (n_ - 1) / r0sq_;
    } else {
        kind_ = Kind::torus;
        n_ = 2;
        init_torus({0.0}, {&std::get<ConformalTorus>(m)}, 0.0);
    }
}

void LChart::init_torus(const std::vector<double>& t, const std::vector<const ConformalTorus*>& snaps, double t0) {
    const ConformalTorus& a = *snaps.front();
    lx_ = a.lx;
    ly_ = a.ly;
    nx_ = a.nx;
    ny_ = a.ny;
    t_ = t;
    t0_ = t0;
    const Spectral2D sp = a.spectral();
    min_e2u_ = std::numeric_limits<double>::infinity();
    max_e2u_ = 0.0;
    min_R_ = std::numeric_limits<double>::infinity();
    for (const ConformalTorus* s : snaps) {
        const TorusMetric g = TorusMetric::conformal(*s);
        u_.emplace_back(sp, s->u, kDropTol);
        R_.emplace_back(sp, g.R, kDropTol);
        const Grid e2u = (2.0 * s->u).exp();
        min_e2u_ = std::min(min_e2u_, e2u.minCoeff());
        max_e2u_ = std::max(max_e2u_, e2u.maxCoeff());
        min_R_ = std::min(min_R_, g.R.minCoeff());
        snap_min_R_.push_back(g.R.minCoeff());
        // in two dimensions |Rm| = |R| and |Ric| = |R| / sqrt 2
        C0_ = std::max(C0_, g.R.abs().maxCoeff());
    }
    // one mode set for every snapshot, so time blends are plain coefficient mixes
    for (auto* series : {&u_, &R_}) {
        std::vector<const FourierSeries*> ptrs;
        for (const auto& f : *series) ptrs.push_back(&f);
        const FourierSeries mask = FourierSeries::mode_union(ptrs);
        for (auto& f : *series) f = f.restricted_to(mask);
    }
    cache_ = std::make_shared<Cache>();
}

void LChart::stencil(double tau, std::size_t& lo, int& count, double w[4], double dw[4]) const {
    // weights for the value and for d/dtau at forward time t = t0 - tau
    const double t = t0_ - tau;
    const std::size_t N = t_.size();
    if (N == 1) {
        lo = 0;
        count = 1;
        w[0] = 1.0;
        dw[0] = 0.0;
        return;
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin() - 1);
    i = std::min(i, N - 2);
    if (!cubic_ || N < 4) {
        lo = i;
        count = 2;
        const double h = t_[i + 1] - t_[i];
        w[1] = (t - t_[i]) / h;
        w[0] = 1.0 - w[1];
        dw[0] = 1.0 / h;  // d/dtau = -d/dt
        dw[1] = -1.0 / h;
        return;
    }
    lo = i == 0 ? 0 : i - 1;
    lo = std::min(lo, N - 4);
    count = 4;
    for (int a = 0; a < 4; ++a) {
        const double ta = t_[lo + a];
        double p = 1.0, den = 1.0, d = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            den *= ta - t_[lo + b];
            p *= t - t_[lo + b];
        }
        for (int c = 0; c < 4; ++c) {
            if (c == a) continue;
            double q = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a && b != c) q *= t - t_[lo + b];
            d += q;
        }
        w[a] = p / den;
        dw[a] = -d / den;
    }
}

ChartPoint LChart::at(const Vec3& x, double tau, int order) const {
    ChartPoint c;
    c.n = n_;
    switch (kind_) {
        case Kind::euclidean:
            c.u = 0.5 * std::log(scale_);
            return c;
        case Kind::sphere: {
            const Mat3 P = proj(n_);
            const Vec3 y = P * x;
            const double q = 1.0 + y.squaredNorm();
            const double rsq = r0sq_ + growth_ * tau;
            c.u = 0.5 * std::log(4.0 * rsq) - std::log(q);
            c.u_tau = 0.5 * growth_ / rsq;
            c.du = -2.0 * y / q;
            c.ddu = -2.0 * P / q + 4.0 * y * y.transpose() / (q * q);
            c.R = n_ * (n_ - 1) / rsq;
            c.R_tau = -c.R * growth_ / rsq;
            c.rho = (n_ - 1) / rsq;
            c.rho_tau = -c.rho * growth_ / rsq;
            c.kappa = 1.0 / rsq;
            return c;
        }
        case Kind::torus: {
            std::size_t lo;
            int count;
            double w[4], dw[4];
            stencil(tau, lo, count, w, dw);
            FourierSeries::Value u, R;
            double u_tau = 0.0, R_tau = 0.0;
            for (int a = 0; a < count; ++a) {
                const auto ua = u_[lo + a].eval(x[0], x[1], order);
                const auto Ra = R_[lo + a].eval(x[0], x[1], order);
                for (auto [dst, src] : {std::pair{&u, &ua}, std::pair{&R, &Ra}}) {
                    dst->v += w[a] * src->v;
                    dst->x += w[a] * src->x;
                    dst->y += w[a] * src->y;
                    dst->xx += w[a] * src->xx;
                    dst->xy += w[a] * src->xy;
                    dst->yy += w[a] * src->yy;
                }
                u_tau += dw[a] * ua.v;
                R_tau += dw[a] * Ra.v;
            }
            fill_torus(c, u, R, u_tau, R_tau);
            return c;
        }
    }
    return c;
}

std::shared_ptr<const LChart::SliceGrid> LChart::slices(double tau_bar, int steps) const {
    if (kind_ != Kind::torus || !cache_) {
        auto g = std::make_shared<SliceGrid>(2 * steps + 1);
        for (int k = 0; k <= 2 * steps; ++k) (*g)[k].tau = std::pow(std::sqrt(tau_bar) * k / (2.0 * steps), 2);
        return g;
    }
    const std::pair<double, int> key{tau_bar, steps};
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        for (const auto& e : cache_->entries)
            if (e.first == key) return e.second;
    }
    auto g = std::make_shared<SliceGrid>(2 * steps + 1);
    for (int k = 0; k <= 2 * steps; ++k) {
        Slice& sl = (*g)[k];
        sl.tau = std::pow(std::sqrt(tau_bar) * k / (2.0 * steps), 2);
        std::size_t lo;
        int count;
        double w[4], dw[4];
        stencil(sl.tau, lo, count, w, dw);
        std::vector<const FourierSeries*> us, Rs;
        for (int a = 0; a < count; ++a) {
            us.push_back(&u_[lo + a]);
            Rs.push_back(&R_[lo + a]);
        }
        sl.u = FourierSeries::combine(us, {w, w + count});
        sl.R = FourierSeries::combine(Rs, {w, w + count});
        sl.u_tau = FourierSeries::combine(us, {dw, dw + count});
        sl.R_tau = FourierSeries::combine(Rs, {dw, dw + count});
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    for (const auto& e : cache_->entries)
        if (e.first == key) return e.second;
    cache_->entries.emplace_back(key, g);
    if (cache_->entries.size() > 6) cache_->entries.pop_front();
    return g;
}

ChartPoint LChart::at(const Vec3& x, const Slice& sl, int order) const {
    if (kind_ != Kind::torus) return at(x, sl.tau, order);
    ChartPoint c;
    c.n = n_;
    fill_torus(c, sl.u.eval(x[0], x[1], order), sl.R.eval(x[0], x[1], order), sl.u_tau.value(x[0], x[1]),
               sl.R_tau.value(x[0], x[1]));
    return c;
}

double LChart::curvature_floor(double tau_bar) const {
    switch (kind_) {
        case Kind::euclidean:
            return 0.0;
        case Kind::sphere:
            // R decreases in tau
            return 2.0 / 3.0 * std::pow(tau_bar, 1.5) * n_ * (n_ - 1) / (r0sq_ + growth_ * tau_bar);
        case Kind::torus: {
            if (t_.size() == 1) return 2.0 / 3.0 * std::pow(tau_bar, 1.5) * min_R_;
            // per snapshot interval, the smaller endpoint minimum minus a margin for interpolation overshoot
            const double margin = 1e-3 * C0_;
            double acc = 0.0;
            for (std::size_t i = t_.size() - 1; i > 0; --i) {
                const double a = t0_ - t_[i], b = std::min(t0_ - t_[i - 1], tau_bar);
                if (a >= tau_bar) break;
                const double m = std::min(snap_min_R_[i], snap_min_R_[i - 1]) - margin;
                acc += 2.0 / 3.0 * (std::pow(b, 1.5) - std::pow(a, 1.5)) * m;
            }
            return acc;
        }
    }
    return 0.0;
}

Vec3 LChart::base_point() const { return kind_ == Kind::sphere ? Vec3(1.0, 0.0, 0.0) : Vec3::Zero(); }

Vec3 LChart::sphere_target(double theta) const {
    if (kind_ != Kind::sphere) throw BackendMismatch("sphere_target needs a sphere chart");
    return Vec3(std::cos(theta), std::sin(theta), 0.0);
}

double LChart::sphere_radius(double tau) const {
    if (kind_ != Kind::sphere) throw BackendMismatch("sphere_radius needs a sphere chart");
    return std::sqrt(r0sq_ + growth_ * tau);
}

double LChart::distance_bound(const Vec3& a, const Vec3& b, double tau) const {
    switch (kind_) {
        case Kind::euclidean:
            return std::sqrt(scale_) * (b - a).norm();
        case Kind::sphere: {
            const double c = std::clamp(sphere_lift(a).dot(sphere_lift(b)), -1.0, 1.0);
            return sphere_radius(tau) * std::acos(c);
        }
        case Kind::torus: {
            // length of the straight coordinate segment, with Gauss-Legendre in the parameter
            std::vector<double> s, w;
            gauss_legendre(32, 0.0, 1.0, s, w);
            double len = 0.0;
            for (int i = 0; i < 32; ++i) len += w[i] * std::exp(at(a + s[i] * (b - a), tau, 0).u);
            return len * (b - a).norm();
        }
    }
    return 0.0;
}

Vec3 LChart::initial_velocity(const Vec3& p, const Vec3& target, double tau_bar) const {
    const double S = std::sqrt(tau_bar);
    if (kind_ != Kind::sphere) return (target - p) / (2 * S);
    // constant-speed great circle: push its unit tangent at p through the chart
    const Eigen::Vector4d P = sphere_lift(p), Q = sphere_lift(target);
    const double c = std::clamp(P.dot(Q), -1.0, 1.0);
    Eigen::Vector4d T = Q - c * P;
    if (T.norm() < 1e-14) return Vec3::Zero();
    T.normalize();
    const double eps = 1e-6;
    const Vec3 dir = (sphere_project((P + eps * T).normalized()) - sphere_project((P - eps * T).normalized())) / (2 * eps);
    return std::acos(c) / (2 * S) * dir;
}

std::vector<std::pair<double, double>> LChart::min_R_profile(double tau_hi) const {
    std::vector<std::pair<double, double>> out;
    if (kind_ == Kind::torus) {
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const double tau = t0_ - t_[i];
            if (tau <= tau_hi + 1e-12) out.push_back({tau, snap_min_R_[i]});
        }
        std::reverse(out.begin(), out.end());
    } else if (kind_ == Kind::sphere) {
        for (int i = 0; i <= 64; ++i) {
            const double tau = tau_hi * i / 64;
            out.push_back({tau, n_ * (n_ - 1) / (r0sq_ + growth_ * tau)});
        }
    } else {
        out.push_back({0.0, 0.0});
        out.push_back({tau_hi, 0.0});
    }
    return out;
}

}  // namespace plab
