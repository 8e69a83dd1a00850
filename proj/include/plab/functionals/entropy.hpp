#pragma once

#include <stdexcept>

#include "plab/flow/potential.hpp"
#include "plab/functionals/points.hpp"

namespace plab {

struct PotentialConfig {
    ScalarField f;
    double tau = 1.0;
    bool compatible = false;
};

// First-order variation (delta g, delta f, delta tau).
struct VariationData {
    SymTensorField v;
    ScalarField h;
    double sigma = 0.0;
};

class IncompatiblePotential : public std::invalid_argument {
public:
    explicit IncompatiblePotential(const std::string& w) : std::invalid_argument(w) {}
};

double eval_F(const Backend& m, const ScalarField& f, double k = 1.0);
double eval_F(const TorusMetric& g, const Grid& f, double k = 1.0);
double eval_F(const PointSet& p, double k = 1.0);

// k != 1 is evaluated by central differences of eval_F through the general torus metric.
double delta_F(const Backend& m, const ScalarField& f, const VariationData& var, double k = 1.0);
double delta_F(const PointSet& p, const std::vector<Mat3>& v, const std::vector<double>& h);

// F at a stored trajectory entry; gauge-mode entries use the pulled-back metric.
double eval_F(const PotentialTrajectory& tr, std::size_t i, double k = 1.0);

double production_F(const Backend& m, const ScalarField& f, double k = 1.0);
double production_F(const PointSet& p, double k = 1.0);

// int (4 pi tau)^{-n/2} e^{-f} dV
double compat_mass(const Backend& m, const ScalarField& f, double tau);
PotentialConfig normalize_potential(const Backend& m, const ScalarField& f, double tau);

double eval_W(const Backend& m, const PotentialConfig& cfg);
// No compatibility check; used by difference quotients and descent.
double eval_W_raw(const Backend& m, const ScalarField& f, double tau);
double eval_W_raw(const TorusMetric& g, const Grid& f, double tau);
double eval_W_raw(const PointSet& p, double tau);

double delta_W(const Backend& m, const PotentialConfig& cfg, const VariationData& var);
double delta_W(const PointSet& p, double tau, const std::vector<Mat3>& v, const std::vector<double>& h, double sigma);

double production_W(const Backend& m, const PotentialConfig& cfg);
double production_W(const PointSet& p, double tau);

// Shift a scalar field by a constant on any backend.
ScalarField shift_field(const ScalarField& f, double c);

}  // namespace plab
