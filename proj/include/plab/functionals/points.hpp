#pragma once

#include <vector>

#include "plab/geometry/backend.hpp"
#include "plab/geometry/torus_metric.hpp"

namespace plab {

// Quadrature nodes of a backend with the local geometry of a potential f, all tensors
// expressed in an orthonormal frame so that contractions are plain matrix products.
// Unused dimensions of the 3x3 blocks stay zero.
struct PointSet {
    int n = 0;
    std::vector<double> w;  // dV weights
    std::vector<double> R, f, lap;
    std::vector<Vec3> df;
    std::vector<Mat3> H, Ric;
    std::size_t size() const { return w.size(); }
    Mat3 id() const;
};

PointSet point_set(const Backend& m, const ScalarField& f);
PointSet point_set(const TorusMetric& g, const Grid& f);

// Values of a scalar field and frame components of a tensor, in node order.
std::vector<double> node_values(const Backend& m, const ScalarField& h);
std::vector<Mat3> node_tensor(const Backend& m, const SymTensorField& v);
std::vector<Mat3> node_tensor(const TorusMetric& g, const TorusTensor& v);

// Sum of w * a over the nodes.
double node_integral(const PointSet& p, const std::vector<double>& a);

}  // namespace plab
