#pragma once

#include <stdexcept>

#include "plab/flow/history.hpp"

namespace plab {

enum class Scheme { rk4, euler };

struct FlowConfig {
    double dt = 0.0;  // 0 picks the CFL step (torus) or T/100 (analytic backends)
    Scheme scheme = Scheme::rk4;
    double cfl = 0.2;
    long max_steps = 1000000;
    Interp interp = Interp::cubic;
};

class CflViolation : public std::domain_error {
public:
    CflViolation(double dt, double limit);
    double dt, limit;
};

class Extinction : public std::domain_error {
public:
    explicit Extinction(double t_ext);
    double extinction_time;
};

// Largest stable step for the torus diffusion: safety * h^2 * min(e^{2u}) / 4.
double cfl_dt(const ConformalTorus& t, double safety);

// Time derivative of u under Ricci flow, e^{-2u} lap u.
Grid ricci_rhs(const ConformalTorus& t);

Backend step_forward(const Backend& m, double dt, Scheme scheme = Scheme::rk4, double cfl = 0.2);
MetricHistory run_history(const Backend& m0, double T, const FlowConfig& cfg = {});

// Closed-form extinction time of the round sphere, infinite for n = 1.
double sphere_extinction_time(const RoundSphere& s);

}  // namespace plab
