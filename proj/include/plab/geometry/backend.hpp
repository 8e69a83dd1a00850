#pragma once

#include <functional>
#include <variant>

#include "plab/geometry/spectral.hpp"
#include "plab/geometry/types.hpp"

namespace plab {

// Flat R^n with metric scale * delta, integrated on the box [-half_width, half_width]^n.
struct EuclideanSpace {
    int n = 2;
    double scale = 1.0;
    double half_width = 16.0;
    int nodes = 96;
};

// Round S^n of radius r; fields are zonal functions of the polar angle.
struct RoundSphere {
    int n = 2;
    double r = 1.0;
    int nodes = 64;
};

// T^2 = [0,lx) x [0,ly) with metric e^{2u} (dx^2 + dy^2).
struct ConformalTorus {
    int nx = 64;
    int ny = 64;
    double lx = 6.283185307179586;
    double ly = 6.283185307179586;
    Grid u;

    Spectral2D spectral() const { return Spectral2D(nx, ny, lx, ly); }
    double cell() const { return lx * ly / (static_cast<double>(nx) * ny); }
};

using Backend = std::variant<EuclideanSpace, RoundSphere, ConformalTorus>;

void validate(const Backend& m);
int dimension(const Backend& m);
bool is_compact(const Backend& m);
const char* variant_name(const Backend& m);

ConformalTorus make_torus(int nx, int ny, double lx, double ly);
ConformalTorus make_torus(int nx, int ny, double lx, double ly, const std::function<double(double, double)>& u);

// Closed-form scalar fields on the analytic backends.
struct EuclidField {
    std::function<Jet(const Vec3&)> f;
};
struct ZonalField {
    std::function<Jet1(double)> f;
};
using ScalarField = std::variant<Grid, EuclidField, ZonalField>;

// Symmetric 2-tensors. Torus and euclidean store coordinate components with lower
// indices; zonal tensors store the radial and tangential eigenvalues in an orthonormal frame.
struct TorusTensor {
    Grid xx, xy, yy;
};
struct EuclidTensor {
    std::function<Mat3(const Vec3&)> f;
};
struct ZonalTensor {
    std::function<double(double)> radial;
    std::function<double(double)> tangential;
};
using SymTensorField = std::variant<TorusTensor, EuclidTensor, ZonalTensor>;

ScalarField constant_field(const Backend& m, double c);
ScalarField grid_field(const ConformalTorus& t, const std::function<double(double, double)>& f);

}  // namespace plab
