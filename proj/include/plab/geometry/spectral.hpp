#pragma once

#include <complex>
#include <vector>

#include "plab/geometry/types.hpp"

namespace plab {

using Spectrum = std::vector<std::complex<double>>;

// Fourier pseudo-spectral derivatives on a doubly periodic grid.
// Odd derivatives drop the Nyquist mode so that D is real and antisymmetric;
// second derivatives keep it, which makes tr(Hess) and the Laplacian agree exactly.
class Spectral2D {
public:
    Spectral2D(int nx, int ny, double lx, double ly);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nkx() const { return nx_ / 2 + 1; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double kx(int i) const { return kx_[i]; }
    double ky(int j) const { return ky_[j]; }
    bool nyquist_x(int i) const { return 2 * i == nx_; }
    bool nyquist_y(int j) const { return 2 * j == ny_; }

    Spectrum forward(const Grid& a) const;
    Grid inverse(Spectrum s) const;  // includes the 1/N normalization

    Grid dx(const Grid& a) const;
    Grid dy(const Grid& a) const;
    Grid dxx(const Grid& a) const;
    Grid dyy(const Grid& a) const;
    Grid dxy(const Grid& a) const;
    Grid lap(const Grid& a) const;

    struct Derivs {
        Grid x, y, xx, yy, xy;
    };
    Derivs all(const Grid& a) const;

    // Solve (c0 - c1 * lap) x = b in Fourier space; c0 > 0 or zero-mean b required.
    Grid solve_helmholtz(const Grid& b, double c0, double c1) const;

    // Node coordinates.
    double x(int i) const { return lx_ * i / nx_; }
    double y(int j) const { return ly_ * j / ny_; }

private:
    int nx_, ny_;
    double lx_, ly_;
    std::vector<double> kx_, ky_;

    template <class F>
    Grid apply(const Grid& a, F&& symbol) const;
};

// Trigonometric interpolant of grid data, evaluable anywhere on the torus.
// Nyquist modes are dropped and modes below drop_tol * max|c| are skipped.
class FourierSeries {
public:
    struct Value {
        double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;
    };
    FourierSeries() = default;
    FourierSeries(const Spectral2D& sp, const Grid& a, double drop_tol = 0.0);

    // Same mode set, coefficients mixed linearly (all inputs must share one mode set).
    static FourierSeries combine(const std::vector<const FourierSeries*>& s, const std::vector<double>& w);
    // Restrict to the modes kept by another series built on the same grid.
    FourierSeries restricted_to(const FourierSeries& mask) const;
    // Union of the mode sets of several series on one grid, all coefficients zero.
    static FourierSeries mode_union(const std::vector<const FourierSeries*>& s);

    double value(double x, double y) const;
    // order 1 fills the gradient, order 2 the Hessian as well
    Value eval(double x, double y, int order) const;
    std::size_t modes() const { return ix_.size(); }

private:
    double lx_ = 1, ly_ = 1;
    int nkx_ = 0, ny_ = 0;
    std::vector<int> ix_, iy_;
    std::vector<double> kx_, ky_;
    std::vector<std::complex<double>> c_;  // includes the Hermitian doubling factor and 1/N
};

void check_grid(const Grid& a, int nx, int ny, const char* what);

}  // namespace plab
