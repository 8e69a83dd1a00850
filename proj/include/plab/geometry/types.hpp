#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace plab {

// Grid values are stored x-fastest: index = j * nx + i.
using Grid = Eigen::ArrayXd;

// Analytic backends work in at most three dimensions; unused components stay zero.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Jet {
    double v = 0.0;
    Vec3 g = Vec3::Zero();
    Mat3 h = Mat3::Zero();
};

// Value and first two derivatives of a zonal function of the polar angle.
struct Jet1 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

class BackendMismatch : public std::invalid_argument {
public:
    explicit BackendMismatch(const std::string& what) : std::invalid_argument(what) {}
};

class NonDecayingIntegrand : public std::domain_error {
public:
    explicit NonDecayingIntegrand(const std::string& what) : std::domain_error(what) {}
};

}  // namespace plab
