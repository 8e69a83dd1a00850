#include "plab/functionals/points.hpp"

#include <cmath>
#include <numbers>

#include "plab/geometry/ops.hpp"

namespace plab {

namespace {

template <class T>
const T& expect(const ScalarField& phi, const char* op) {
    if (const T* p = std::get_if<T>(&phi)) return *p;
    throw BackendMismatch(std::string(op) + ": field does not live on this backend");
}

// Midpoint nodes of the euclidean truncation box, in the order used by integrate.
template <class F>
void euclid_nodes(const EuclideanSpace& e, F&& visit) {
    const int n = e.n, N = e.nodes;
    const double W = e.half_width, h = 2.0 * W / N;
    const int ny = n >= 2 ? N : 1, nz = n >= 3 ? N : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < N; ++i) {
                Vec3 x = Vec3::Zero();
                x[0] = -W + (i + 0.5) * h;
                if (n >= 2) x[1] = -W + (j + 0.5) * h;
                if (n >= 3) x[2] = -W + (k + 0.5) * h;
                const bool face = i == 0 || i == N - 1 || (n >= 2 && (j == 0 || j == N - 1)) ||
                                  (n >= 3 && (k == 0 || k == N - 1));
                visit(x, face);
            }
}

double euclid_weight(const EuclideanSpace& e) {
    return std::pow(2.0 * e.half_width / e.nodes, e.n) * std::pow(e.scale, 0.5 * e.n);
}

struct SphereRule {
    std::vector<double> theta, w;
};

SphereRule sphere_rule(const RoundSphere& s) {
    SphereRule r;
    std::vector<double> x, w;
    gauss_legendre(s.nodes, 0.0, std::numbers::pi, x, w);
    const double c = unit_sphere_area(s.n - 1) * std::pow(s.r, s.n);
    for (int i = 0; i < s.nodes; ++i) {
        r.theta.push_back(x[i]);
        r.w.push_back(w[i] * std::pow(std::sin(x[i]), s.n - 1) * c);
    }
    return r;
}

}  // namespace

Mat3 PointSet::id() const {
    Mat3 I = Mat3::Zero();
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

double node_integral(const PointSet& p, const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p.w[i] * a[i];
    return s;
}

PointSet point_set(const TorusMetric& g, const Grid& f) {
    check_grid(f, g.sp().nx(), g.sp().ny(), "point_set");
    PointSet p;
    p.n = 2;
    const auto d = g.sp().all(f);
    const TorusTensor H = g.hessian(f);
    const Grid lap = g.laplacian(f);
    const Grid w = g.weights();
    const std::size_t N = f.size();
    p.w.resize(N);
    p.R.resize(N);
    p.f.resize(N);
    p.lap.resize(N);
    p.df.resize(N);
    p.H.resize(N);
    p.Ric.resize(N);
    for (std::size_t q = 0; q < N; ++q) {
        Eigen::Matrix2d G;
        G << g.g11[q], g.g12[q], g.g12[q], g.g22[q];
        const Eigen::Matrix2d Lc = G.llt().matrixL();
        const Eigen::Matrix2d P = Lc.transpose().inverse();  // P^T G P = I
        Eigen::Matrix2d h2;
        h2 << H.xx[q], H.xy[q], H.xy[q], H.yy[q];
        const Eigen::Vector2d grad = P.transpose() * Eigen::Vector2d(d.x[q], d.y[q]);
        p.w[q] = w[q];
        p.R[q] = g.R[q];
        p.f[q] = f[q];
        p.lap[q] = lap[q];
        p.df[q] = Vec3(grad[0], grad[1], 0.0);
        p.H[q].setZero();
        p.H[q].topLeftCorner<2, 2>() = P.transpose() * h2 * P;
        p.Ric[q].setZero();
        p.Ric[q](0, 0) = p.Ric[q](1, 1) = 0.5 * g.R[q];
    }
    return p;
}

PointSet point_set(const Backend& m, const ScalarField& f) {
    validate(m);
    if (auto* t = std::get_if<ConformalTorus>(&m)) return point_set(TorusMetric::conformal(*t), expect<Grid>(f, "point_set"));
    PointSet p;
    p.n = dimension(m);
    if (auto* e = std::get_if<EuclideanSpace>(&m)) {
        const auto& F = expect<EuclidField>(f, "point_set").f;
        const double wq = euclid_weight(*e), c = e->scale;
        double peak = 0.0, edge = 0.0;
        euclid_nodes(*e, [&](const Vec3& x, bool face) {
            const Jet j = F(x);
            p.w.push_back(wq);
            p.R.push_back(0.0);
            p.f.push_back(j.v);
            p.df.push_back(j.g / std::sqrt(c));
            p.H.push_back(j.h / c);
            p.lap.push_back(j.h.trace() / c);
            p.Ric.push_back(Mat3::Zero());
            const double mass = std::exp(-j.v);
            peak = std::max(peak, mass);
            if (face) edge = std::max(edge, mass);
        });
        if (!std::isfinite(peak) || edge > 1e-12 * peak)
            throw NonDecayingIntegrand("e^{-f} does not decay inside the truncation box");
        return p;
    }
    const auto& s = std::get<RoundSphere>(m);
    const auto& F = expect<ZonalField>(f, "point_set").f;
    const SphereRule rule = sphere_rule(s);
    const double r2 = s.r * s.r, R = s.n * (s.n - 1) / r2;
    for (std::size_t i = 0; i < rule.theta.size(); ++i) {
        const double th = rule.theta[i];
        const Jet1 j = F(th);
        Mat3 H = Mat3::Zero();
        H(0, 0) = j.d2 / r2;
        for (int a = 1; a < s.n; ++a) H(a, a) = std::cos(th) / std::sin(th) * j.d1 / r2;
        Mat3 Ric = Mat3::Zero();
        for (int a = 0; a < s.n; ++a) Ric(a, a) = R / s.n;
        p.w.push_back(rule.w[i]);
        p.R.push_back(R);
        p.f.push_back(j.v);
        p.df.push_back(Vec3(j.d1 / s.r, 0.0, 0.0));
        p.H.push_back(H);
        p.lap.push_back(H.trace());
        p.Ric.push_back(Ric);
    }
    return p;
}

std::vector<double> node_values(const Backend& m, const ScalarField& h) {
    std::vector<double> out;
    if (auto* t = std::get_if<ConformalTorus>(&m)) {
        const Grid& g = expect<Grid>(h, "node_values");
        check_grid(g, t->nx, t->ny, "node_values");
        out.assign(g.data(), g.data() + g.size());
    } else if (auto* e = std::get_if<EuclideanSpace>(&m)) {
        const auto& F = expect<EuclidField>(h, "node_values").f;
        euclid_nodes(*e, [&](const Vec3& x, bool) { out.push_back(F(x).v); });
    } else {
        const auto& F = expect<ZonalField>(h, "node_values").f;
        for (double th : sphere_rule(std::get<RoundSphere>(m)).theta) out.push_back(F(th).v);
    }
    return out;
}

std::vector<Mat3> node_tensor(const TorusMetric& g, const TorusTensor& v) {
    check_grid(v.xx, g.sp().nx(), g.sp().ny(), "node_tensor");
    std::vector<Mat3> out(v.xx.size());
    for (Eigen::Index q = 0; q < v.xx.size(); ++q) {
        Eigen::Matrix2d G, V;
        G << g.g11[q], g.g12[q], g.g12[q], g.g22[q];
        V << v.xx[q], v.xy[q], v.xy[q], v.yy[q];
        const Eigen::Matrix2d P = Eigen::Matrix2d(G.llt().matrixL()).transpose().inverse();
        out[q].setZero();
        out[q].topLeftCorner<2, 2>() = P.transpose() * V * P;
    }
    return out;
}

std::vector<Mat3> node_tensor(const Backend& m, const SymTensorField& v) {
    if (auto* t = std::get_if<ConformalTorus>(&m)) {
        const auto* tt = std::get_if<TorusTensor>(&v);
        if (!tt) throw BackendMismatch("node_tensor: tensor does not live on this backend");
        return node_tensor(TorusMetric::conformal(*t), *tt);
    }
    std::vector<Mat3> out;
    if (auto* e = std::get_if<EuclideanSpace>(&m)) {
        const auto* et = std::get_if<EuclidTensor>(&v);
        if (!et) throw BackendMismatch("node_tensor: tensor does not live on this backend");
        euclid_nodes(*e, [&](const Vec3& x, bool) { out.push_back(et->f(x) / e->scale); });
        return out;
    }
    const auto& s = std::get<RoundSphere>(m);
    const auto* zt = std::get_if<ZonalTensor>(&v);
    if (!zt) throw BackendMismatch("node_tensor: tensor does not live on this backend");
    for (double th : sphere_rule(s).theta) {
        Mat3 V = Mat3::Zero();
        V(0, 0) = zt->radial(th);
        for (int a = 1; a < s.n; ++a) V(a, a) = zt->tangential(th);
        out.push_back(V);
    }
    return out;
}

}  // namespace plab
