#include "plab/geometry/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace plab {

namespace {

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// FFTW planning is not thread safe; execution of an existing plan on new arrays is.
const Plans& plans_for(int nx, int ny) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, Plans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({nx, ny});
    if (it != cache.end()) return it->second;
    const int nk = nx / 2 + 1;
    std::vector<double> real(static_cast<size_t>(nx) * ny);
    std::vector<fftw_complex> spec(static_cast<size_t>(nk) * ny);
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_r2c_2d(ny, nx, real.data(), spec.data(), flags);
    p.bwd = fftw_plan_dft_c2r_2d(ny, nx, spec.data(), real.data(), flags);
    return cache.emplace(std::make_pair(nx, ny), p).first->second;
}

}  // namespace

void check_grid(const Grid& a, int nx, int ny, const char* what) {
    if (a.size() != static_cast<Eigen::Index>(nx) * ny)
        throw BackendMismatch(std::string(what) + ": grid shape does not match backend");
}

Spectral2D::Spectral2D(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
    if (nx < 8 || ny < 8 || nx % 2 || ny % 2)
        throw std::invalid_argument("torus grid sizes must be even and >= 8");
    if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("torus periods must be positive");
    const double two_pi = 2.0 * std::numbers::pi;
    kx_.resize(nkx());
    for (int i = 0; i < nkx(); ++i) kx_[i] = two_pi * i / lx;
    ky_.resize(ny);
    for (int j = 0; j < ny; ++j) ky_[j] = two_pi * (j <= ny / 2 ? j : j - ny) / ly;
}

Spectrum Spectral2D::forward(const Grid& a) const {
    check_grid(a, nx_, ny_, "spectral transform");
    Spectrum s(static_cast<size_t>(nkx()) * ny_);
    fftw_execute_dft_r2c(plans_for(nx_, ny_).fwd, const_cast<double*>(a.data()),
                         reinterpret_cast<fftw_complex*>(s.data()));
    return s;
}

Grid Spectral2D::inverse(Spectrum s) const {
    Grid out(static_cast<Eigen::Index>(nx_) * ny_);
    fftw_execute_dft_c2r(plans_for(nx_, ny_).bwd, reinterpret_cast<fftw_complex*>(s.data()), out.data());
    out /= static_cast<double>(nx_) * ny_;
    return out;
}

template <class F>
Grid Spectral2D::apply(const Grid& a, F&& symbol) const {
    Spectrum s = forward(a);
    const int nk = nkx();
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nk; ++i) s[static_cast<size_t>(j) * nk + i] *= symbol(i, j);
    return inverse(std::move(s));
}

Grid Spectral2D::dx(const Grid& a) const {
    return apply(a, [&](int i, int) { return nyquist_x(i) ? std::complex<double>(0) : std::complex<double>(0, kx_[i]); });
}

Grid Spectral2D::dy(const Grid& a) const {
    return apply(a, [&](int, int j) { return nyquist_y(j) ? std::complex<double>(0) : std::complex<double>(0, ky_[j]); });
}

Grid Spectral2D::dxx(const Grid& a) const {
    return apply(a, [&](int i, int) { return std::complex<double>(-kx_[i] * kx_[i]); });
}

Grid Spectral2D::dyy(const Grid& a) const {
    return apply(a, [&](int, int j) { return std::complex<double>(-ky_[j] * ky_[j]); });
}

Grid Spectral2D::dxy(const Grid& a) const {
    return apply(a, [&](int i, int j) {
        return (nyquist_x(i) || nyquist_y(j)) ? std::complex<double>(0) : std::complex<double>(-kx_[i] * ky_[j]);
    });
}

Grid Spectral2D::lap(const Grid& a) const {
    return apply(a, [&](int i, int j) { return std::complex<double>(-kx_[i] * kx_[i] - ky_[j] * ky_[j]); });
}

Spectral2D::Derivs Spectral2D::all(const Grid& a) const {
    const Spectrum s = forward(a);
    const int nk = nkx();
    Spectrum sx(s.size()), sy(s.size()), sxx(s.size()), syy(s.size()), sxy(s.size());
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nk; ++i) {
            const size_t k = static_cast<size_t>(j) * nk + i;
            const bool nqx = nyquist_x(i), nqy = nyquist_y(j);
            sx[k] = nqx ? 0.0 : std::complex<double>(0, kx_[i]) * s[k];
            sy[k] = nqy ? 0.0 : std::complex<double>(0, ky_[j]) * s[k];
            sxx[k] = -kx_[i] * kx_[i] * s[k];
            syy[k] = -ky_[j] * ky_[j] * s[k];
            sxy[k] = (nqx || nqy) ? 0.0 : -kx_[i] * ky_[j] * s[k];
        }
    }
    return {inverse(std::move(sx)), inverse(std::move(sy)), inverse(std::move(sxx)), inverse(std::move(syy)),
            inverse(std::move(sxy))};
}

Grid Spectral2D::solve_helmholtz(const Grid& b, double c0, double c1) const {
    return apply(b, [&](int i, int j) {
        const double d = c0 + c1 * (kx_[i] * kx_[i] + ky_[j] * ky_[j]);
        return std::complex<double>(d == 0.0 ? 0.0 : 1.0 / d);
    });
}

FourierSeries::FourierSeries(const Spectral2D& sp, const Grid& a, double drop_tol)
    : lx_(sp.lx()), ly_(sp.ly()), nkx_(sp.nkx()), ny_(sp.ny()) {
    const Spectrum s = sp.forward(a);
    const double norm = 1.0 / (static_cast<double>(sp.nx()) * sp.ny());
    double cmax = 0.0;
    for (const auto& c : s) cmax = std::max(cmax, std::abs(c));
    const double cut = drop_tol * cmax;
    for (int j = 0; j < ny_; ++j) {
        if (sp.nyquist_y(j)) continue;
        for (int i = 0; i < nkx_; ++i) {
            if (sp.nyquist_x(i)) continue;
            const auto c = s[static_cast<size_t>(j) * nkx_ + i];
            if (std::abs(c) <= cut && cut > 0) continue;
            if (c == 0.0 && cut == 0.0) continue;
            ix_.push_back(i);
            iy_.push_back(j);
            kx_.push_back(sp.kx(i));
            ky_.push_back(sp.ky(j));
            c_.push_back(c * norm * (i == 0 ? 1.0 : 2.0));
        }
    }
}

FourierSeries FourierSeries::combine(const std::vector<const FourierSeries*>& s, const std::vector<double>& w) {
    if (s.empty() || s.size() != w.size()) throw std::invalid_argument("combine needs matching series and weights");
    FourierSeries out = *s[0];
    for (auto& c : out.c_) c *= w[0];
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k]->ix_ != out.ix_ || s[k]->iy_ != out.iy_) throw std::invalid_argument("combine needs one mode set");
        for (std::size_t m = 0; m < out.c_.size(); ++m) out.c_[m] += w[k] * s[k]->c_[m];
    }
    return out;
}

FourierSeries FourierSeries::restricted_to(const FourierSeries& mask) const {
    FourierSeries out = mask;
    std::map<std::pair<int, int>, std::complex<double>> mine;
    for (std::size_t m = 0; m < c_.size(); ++m) mine[{ix_[m], iy_[m]}] = c_[m];
    for (std::size_t m = 0; m < out.c_.size(); ++m) {
        auto it = mine.find({out.ix_[m], out.iy_[m]});
        out.c_[m] = it == mine.end() ? 0.0 : it->second;
    }
    return out;
}

FourierSeries FourierSeries::mode_union(const std::vector<const FourierSeries*>& s) {
    if (s.empty()) throw std::invalid_argument("mode_union needs at least one series");
    std::map<std::pair<int, int>, std::pair<double, double>> modes;
    for (const FourierSeries* f : s)
        for (std::size_t m = 0; m < f->c_.size(); ++m) modes[{f->iy_[m], f->ix_[m]}] = {f->kx_[m], f->ky_[m]};
    FourierSeries out;
    out.lx_ = s[0]->lx_;
    out.ly_ = s[0]->ly_;
    out.nkx_ = s[0]->nkx_;
    out.ny_ = s[0]->ny_;
    for (const auto& [key, k] : modes) {
        out.iy_.push_back(key.first);
        out.ix_.push_back(key.second);
        out.kx_.push_back(k.first);
        out.ky_.push_back(k.second);
        out.c_.push_back(0.0);
    }
    return out;
}

double FourierSeries::value(double x, double y) const { return eval(x, y, 0).v; }

FourierSeries::Value FourierSeries::eval(double x, double y, int order) const {
    const double two_pi = 2.0 * std::numbers::pi;
    // e^{i kx x} for kx index i, built by repeated multiplication from the unit step
    thread_local std::vector<std::complex<double>> ex, ey;
    ex.resize(nkx_);
    ey.resize(ny_);
    const std::complex<double> sx = std::polar(1.0, two_pi * x / lx_), sy = std::polar(1.0, two_pi * y / ly_);
    ex[0] = 1.0;
    for (int i = 1; i < nkx_; ++i) ex[i] = i % 16 ? ex[i - 1] * sx : std::polar(1.0, two_pi * i * x / lx_);
    ey[0] = 1.0;
    const int half = ny_ / 2;
    for (int j = 1; j <= half; ++j) ey[j] = j % 16 ? ey[j - 1] * sy : std::polar(1.0, two_pi * j * y / ly_);
    for (int j = half + 1; j < ny_; ++j) ey[j] = std::conj(ey[ny_ - j]);
    Value r;
    for (std::size_t m = 0; m < c_.size(); ++m) {
        const std::complex<double> z = c_[m] * ex[ix_[m]] * ey[iy_[m]];
        r.v += z.real();
        if (order >= 1) {
            // d/dx of Re(z) = Re(i kx z) = -kx Im z
            r.x -= kx_[m] * z.imag();
            r.y -= ky_[m] * z.imag();
        }
        if (order >= 2) {
            r.xx -= kx_[m] * kx_[m] * z.real();
            r.xy -= kx_[m] * ky_[m] * z.real();
            r.yy -= ky_[m] * ky_[m] * z.real();
        }
    }
    return r;
}

}  // namespace plab
