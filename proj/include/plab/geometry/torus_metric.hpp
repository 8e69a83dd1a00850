#pragma once

#include <array>

#include "plab/geometry/backend.hpp"

namespace plab {

// Geometric data of a (not necessarily conformal) metric on a periodic grid.
// Conformal metrics use the closed forms R = -2 e^{-2u} lap u and lap_g = e^{-2u} lap;
// general metrics go through Christoffel symbols and the divergence-form Laplacian.
class TorusMetric {
public:
    static TorusMetric conformal(const ConformalTorus& t);
    static TorusMetric general(int nx, int ny, double lx, double ly, const Grid& g11, const Grid& g12,
                               const Grid& g22);

    const Spectral2D& sp() const { return sp_; }
    bool is_conformal() const { return conformal_; }
    int n() const { return 2; }
    int size() const { return sp_.nx() * sp_.ny(); }
    double cell() const { return sp_.lx() * sp_.ly() / size(); }

    Grid g11, g12, g22;
    Grid i11, i12, i22;
    Grid sqrt_det;
    Grid R;
    Grid u;  // conformal factor, empty for general metrics
    // gamma[k][a] with a = 0:(11), 1:(12), 2:(22)
    std::array<std::array<Grid, 3>, 2> gamma;

    Grid weights() const { return sqrt_det * cell(); }
    double integrate(const Grid& f) const { return (f * sqrt_det).sum() * cell(); }
    double volume() const { return sqrt_det.sum() * cell(); }

    Grid laplacian(const Grid& f) const;
    Grid grad_sq(const Grid& f) const;
    Grid inner_grad(const Grid& a, const Grid& b) const;
    TorusTensor hessian(const Grid& f) const;
    TorusTensor metric() const { return {g11, g12, g22}; }
    TorusTensor ricci() const { return {0.5 * R * g11, 0.5 * R * g12, 0.5 * R * g22}; }
    Grid contract(const TorusTensor& a, const TorusTensor& b) const;
    Grid norm_sq(const TorusTensor& a) const { return contract(a, a); }
    Grid trace(const TorusTensor& a) const;
    // Norm squared of a covector field (a1, a2).
    Grid covector_sq(const Grid& a1, const Grid& a2) const;

private:
    explicit TorusMetric(const Spectral2D& sp) : sp_(sp) {}
    Spectral2D sp_;
    bool conformal_ = false;
};

TorusTensor operator+(const TorusTensor& a, const TorusTensor& b);
TorusTensor operator-(const TorusTensor& a, const TorusTensor& b);
TorusTensor operator*(const Grid& s, const TorusTensor& a);
TorusTensor operator*(double s, const TorusTensor& a);

}  // namespace plab
