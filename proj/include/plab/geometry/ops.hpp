#pragma once

#include "plab/geometry/backend.hpp"

namespace plab {

ScalarField scalar_curvature(const Backend& m);
ScalarField laplace_beltrami(const Backend& m, const ScalarField& phi);
ScalarField grad_norm_sq(const Backend& m, const ScalarField& phi);
SymTensorField hessian(const Backend& m, const ScalarField& phi);
double integrate(const Backend& m, const ScalarField& phi);
Backend rescale(const Backend& m, double alpha);

// Pointwise evaluation helpers for the analytic backends.
double value_at(const ScalarField& phi, const Vec3& x);
double value_at(const ScalarField& phi, double theta);

// Trace with respect to g of a symmetric tensor, as a scalar field.
ScalarField metric_trace(const Backend& m, const SymTensorField& t);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

// Area of the unit sphere S^{k}.
double unit_sphere_area(int k);

}  // namespace plab
