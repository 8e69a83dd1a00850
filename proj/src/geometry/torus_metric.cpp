#include "plab/geometry/torus_metric.hpp"

namespace plab {

TorusTensor operator+(const TorusTensor& a, const TorusTensor& b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
TorusTensor operator-(const TorusTensor& a, const TorusTensor& b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
TorusTensor operator*(const Grid& s, const TorusTensor& a) { return {s * a.xx, s * a.xy, s * a.yy}; }
TorusTensor operator*(double s, const TorusTensor& a) { return {s * a.xx, s * a.xy, s * a.yy}; }

TorusMetric TorusMetric::conformal(const ConformalTorus& t) {
    TorusMetric m(t.spectral());
    check_grid(t.u, t.nx, t.ny, "conformal torus");
    m.conformal_ = true;
    m.u = t.u;
    const Grid e2u = (2.0 * t.u).exp();
    const Grid em2u = (-2.0 * t.u).exp();
    const Grid zero = Grid::Zero(t.u.size());
    m.g11 = e2u;
    m.g12 = zero;
    m.g22 = e2u;
    m.i11 = em2u;
    m.i12 = zero;
    m.i22 = em2u;
    m.sqrt_det = e2u;
    const auto d = m.sp_.all(t.u);
    m.R = -2.0 * em2u * (d.xx + d.yy);
    // Gamma^k_ij = delta_ik u_j + delta_jk u_i - delta_ij u_k
    m.gamma[0] = {d.x, d.y, -d.x};
    m.gamma[1] = {-d.y, d.x, d.y};
    return m;
}

TorusMetric TorusMetric::general(int nx, int ny, double lx, double ly, const Grid& g11, const Grid& g12,
                                 const Grid& g22) {
    TorusMetric m(Spectral2D(nx, ny, lx, ly));
    check_grid(g11, nx, ny, "metric component");
    check_grid(g12, nx, ny, "metric component");
    check_grid(g22, nx, ny, "metric component");
    const Grid det = g11 * g22 - g12 * g12;
    if ((det <= 0.0).any() || (g11 <= 0.0).any()) throw std::domain_error("metric is not positive definite");
    m.g11 = g11;
    m.g12 = g12;
    m.g22 = g22;
    m.i11 = g22 / det;
    m.i12 = -g12 / det;
    m.i22 = g11 / det;
    m.sqrt_det = det.sqrt();

    const auto& sp = m.sp_;
    // dg[l][a]: derivative along l of component a
    const std::array<Grid, 3> comp = {g11, g12, g22};
    std::array<std::array<Grid, 3>, 2> dg;
    for (int a = 0; a < 3; ++a) {
        dg[0][a] = sp.dx(comp[a]);
        dg[1][a] = sp.dy(comp[a]);
    }
    auto idx = [](int i, int j) { return i + j; };  // (0,0)->0, (0,1)->1, (1,1)->2
    auto ginv = [&](int k, int l) -> const Grid& { return idx(k, l) == 0 ? m.i11 : (idx(k, l) == 1 ? m.i12 : m.i22); };
    // lowered Christoffel: Gamma_{l,ij} = 0.5 (d_i g_lj + d_j g_li - d_l g_ij)
    std::array<std::array<Grid, 3>, 2> low;
    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j)
                low[l][idx(i, j)] = 0.5 * (dg[i][idx(l, j)] + dg[j][idx(l, i)] - dg[l][idx(i, j)]);
    for (int k = 0; k < 2; ++k)
        for (int a = 0; a < 3; ++a) m.gamma[k][a] = ginv(k, 0) * low[0][a] + ginv(k, 1) * low[1][a];

    auto G = [&](int k, int i, int j) -> const Grid& { return m.gamma[k][idx(std::min(i, j), std::max(i, j))]; };
    auto D = [&](int k, const Grid& f) { return k == 0 ? sp.dx(f) : sp.dy(f); };
    // R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
    std::array<Grid, 3> ric;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            Grid r = Grid::Zero(g11.size());
            for (int k = 0; k < 2; ++k) {
                r += D(k, G(k, i, j));
                r -= D(j, G(k, i, k));
                for (int l = 0; l < 2; ++l) r += G(k, k, l) * G(l, i, j) - G(k, j, l) * G(l, i, k);
            }
            ric[idx(i, j)] = r;
        }
    }
    m.R = m.i11 * ric[0] + 2.0 * m.i12 * ric[1] + m.i22 * ric[2];
    return m;
}

Grid TorusMetric::laplacian(const Grid& f) const {
    if (conformal_) return (-2.0 * u).exp() * sp_.lap(f);
    const Grid fx = sp_.dx(f), fy = sp_.dy(f);
    return (sp_.dx(sqrt_det * (i11 * fx + i12 * fy)) + sp_.dy(sqrt_det * (i12 * fx + i22 * fy))) / sqrt_det;
}

Grid TorusMetric::inner_grad(const Grid& a, const Grid& b) const {
    const Grid ax = sp_.dx(a), ay = sp_.dy(a);
    const Grid bx = sp_.dx(b), by = sp_.dy(b);
    return i11 * ax * bx + i12 * (ax * by + ay * bx) + i22 * ay * by;
}

Grid TorusMetric::grad_sq(const Grid& f) const {
    const Grid fx = sp_.dx(f), fy = sp_.dy(f);
    return i11 * fx * fx + 2.0 * i12 * fx * fy + i22 * fy * fy;
}

TorusTensor TorusMetric::hessian(const Grid& f) const {
    const auto d = sp_.all(f);
    return {d.xx - gamma[0][0] * d.x - gamma[1][0] * d.y, d.xy - gamma[0][1] * d.x - gamma[1][1] * d.y,
            d.yy - gamma[0][2] * d.x - gamma[1][2] * d.y};
}

Grid TorusMetric::contract(const TorusTensor& a, const TorusTensor& b) const {
    // g^{ik} g^{jl} a_ij b_kl for symmetric a, b
    const Grid ra11 = i11 * a.xx + i12 * a.xy, ra12 = i11 * a.xy + i12 * a.yy;
    const Grid ra21 = i12 * a.xx + i22 * a.xy, ra22 = i12 * a.xy + i22 * a.yy;
    const Grid rb11 = i11 * b.xx + i12 * b.xy, rb12 = i11 * b.xy + i12 * b.yy;
    const Grid rb21 = i12 * b.xx + i22 * b.xy, rb22 = i12 * b.xy + i22 * b.yy;
    // tr(A^T B) with A = g^{-1} a, B = g^{-1} b; equals tr(A B) because g^{-1}a g^{-1} b traces agree
    return ra11 * rb11 + ra12 * rb21 + ra21 * rb12 + ra22 * rb22;
}

Grid TorusMetric::trace(const TorusTensor& a) const { return i11 * a.xx + 2.0 * i12 * a.xy + i22 * a.yy; }

Grid TorusMetric::covector_sq(const Grid& a1, const Grid& a2) const {
    return i11 * a1 * a1 + 2.0 * i12 * a1 * a2 + i22 * a2 * a2;
}

}  // namespace plab
