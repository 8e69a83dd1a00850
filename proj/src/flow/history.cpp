#include "plab/flow/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace plab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::istream& is) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("history: unexpected end of input");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw std::runtime_error("history: bad number '" + tok + "'");
    return v;
}

template <class T>
T parse_int(std::istream& is) {
    const double v = parse_double(is);
    if (v != std::floor(v)) throw std::runtime_error("history: expected an integer");
    return static_cast<T>(v);
}

void expect_word(std::istream& is, const std::string& w) {
    std::string tok;
    if (!(is >> tok) || tok != w) throw std::runtime_error("history: expected '" + w + "'");
}

}  // namespace

MetricHistory::MetricHistory(std::vector<double> t, std::vector<Backend> snaps, double dt, Interp interp) {
    if (t.empty() || t.size() != snaps.size()) throw std::invalid_argument("history needs matching nonempty times and snapshots");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("history times must be strictly increasing");
        if (snaps[i].index() != snaps[0].index()) throw BackendMismatch("history snapshots mix backend variants");
        if (auto* a = std::get_if<ConformalTorus>(&snaps[i])) {
            const auto& b = std::get<ConformalTorus>(snaps[0]);
            if (a->nx != b.nx || a->ny != b.ny || a->lx != b.lx || a->ly != b.ly)
                throw BackendMismatch("history snapshots differ in grid shape");
        }
    }
    if (!(dt > 0)) throw std::invalid_argument("history step must be positive");
    data_ = std::make_shared<const Data>(Data{std::move(t), std::move(snaps), dt, interp});
}

double MetricHistory::time(std::size_t i) const {
    if (!backward_) return data_->t.at(i);
    return t0() - data_->t.at(size() - 1 - i);
}

const Backend& MetricHistory::snapshot(std::size_t i) const {
    return backward_ ? data_->snaps.at(size() - 1 - i) : data_->snaps.at(i);
}

MetricHistory backward_view(const MetricHistory& h) {
    MetricHistory r = h;
    r.backward_ = !h.backward_;
    return r;
}

bool MetricHistory::operator==(const MetricHistory& o) const {
    if (backward_ != o.backward_) return false;
    if (data_ == o.data_) return true;
    if (data_->t != o.data_->t || data_->dt != o.data_->dt || data_->interp != o.data_->interp) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        const Backend &a = data_->snaps[i], &b = o.data_->snaps[i];
        if (a.index() != b.index()) return false;
        if (auto* x = std::get_if<ConformalTorus>(&a)) {
            const auto& y = std::get<ConformalTorus>(b);
            if (x->nx != y.nx || x->ny != y.ny || x->lx != y.lx || x->ly != y.ly || (x->u != y.u).any()) return false;
        } else if (auto* x = std::get_if<RoundSphere>(&a)) {
            const auto& y = std::get<RoundSphere>(b);
            if (x->n != y.n || x->r != y.r || x->nodes != y.nodes) return false;
        } else {
            const auto& ea = std::get<EuclideanSpace>(a);
            const auto& eb = std::get<EuclideanSpace>(b);
            if (ea.n != eb.n || ea.scale != eb.scale || ea.half_width != eb.half_width || ea.nodes != eb.nodes)
                return false;
        }
    }
    return true;
}

long MetricHistory::exact_index(double t) const {
    const auto& ts = data_->t;
    const double tol = 1e-12 * std::max(1.0, std::abs(t0()));
    auto it = std::lower_bound(ts.begin(), ts.end(), t - tol);
    if (it != ts.end() && std::abs(*it - t) <= tol) return it - ts.begin();
    return -1;
}

void MetricHistory::locate(double t, std::size_t& i) const {
    const auto& ts = data_->t;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin() - 1);
    i = std::min(i, ts.size() - 2);
}

Grid MetricHistory::sample_u(double p) const {
    const Backend b = sample(p);
    const auto* tor = std::get_if<ConformalTorus>(&b);
    if (!tor) throw BackendMismatch("sample_u needs a torus history");
    return tor->u;
}

Backend MetricHistory::sample(double p) const {
    const double t = to_forward(p);
    const double tol = 1e-12 * std::max(1.0, std::abs(t0()));
    if (t < t_first() - tol || t > t0() + tol) throw std::out_of_range("history sample outside the stored range");
    const long k = exact_index(t);
    if (k >= 0) return data_->snaps[k];
    const auto& ts = data_->t;
    const auto& sn = data_->snaps;
    std::size_t i;
    locate(t, i);
    if (std::holds_alternative<EuclideanSpace>(sn[i])) return sn[i];
    if (auto* s = std::get_if<RoundSphere>(&sn[i])) {
        // r^2 is affine in t along the flow
        const double a = std::pow(s->r, 2), b = std::pow(std::get<RoundSphere>(sn[i + 1]).r, 2);
        const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        RoundSphere out = *s;
        out.r = std::sqrt((1 - w) * a + w * b);
        return out;
    }
    ConformalTorus out = std::get<ConformalTorus>(sn[i]);
    if (data_->interp == Interp::linear || ts.size() < 4) {
        const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        out.u = (1 - w) * out.u + w * std::get<ConformalTorus>(sn[i + 1]).u;
        return out;
    }
    // four-point Lagrange stencil around [t_i, t_{i+1}], shifted inward at the ends
    std::size_t lo = i == 0 ? 0 : i - 1;
    lo = std::min(lo, ts.size() - 4);
    out.u.setZero();
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double w = 1.0;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) w *= (t - ts[b]) / (ts[a] - ts[b]);
        out.u += w * std::get<ConformalTorus>(sn[a]).u;
    }
    return out;
}

void MetricHistory::save(std::ostream& os) const {
    const Backend& b0 = data_->snaps.front();
    os << "plab-history 1\n";
    os << "variant " << variant_name(b0) << " view " << (backward_ ? "backward" : "forward") << " interp "
       << (data_->interp == Interp::cubic ? "cubic" : "linear") << " dt " << fmt17(data_->dt) << " count " << size()
       << '\n';
    if (auto* e = std::get_if<EuclideanSpace>(&b0))
        os << "shape " << e->n << ' ' << fmt17(e->half_width) << ' ' << e->nodes << '\n';
    else if (auto* s = std::get_if<RoundSphere>(&b0))
        os << "shape " << s->n << ' ' << s->nodes << '\n';
    else {
        const auto& t = std::get<ConformalTorus>(b0);
        os << "shape " << t.nx << ' ' << t.ny << ' ' << fmt17(t.lx) << ' ' << fmt17(t.ly) << '\n';
    }
    for (std::size_t i = 0; i < size(); ++i) {
        os << "t " << fmt17(data_->t[i]) << '\n';
        const Backend& b = data_->snaps[i];
        if (auto* e = std::get_if<EuclideanSpace>(&b))
            os << fmt17(e->scale) << '\n';
        else if (auto* s = std::get_if<RoundSphere>(&b))
            os << fmt17(s->r) << '\n';
        else {
            const auto& t = std::get<ConformalTorus>(b);
            for (int j = 0; j < t.ny; ++j) {
                for (int k = 0; k < t.nx; ++k) os << (k ? " " : "") << fmt17(t.u[j * t.nx + k]);
                os << '\n';
            }
        }
    }
}

MetricHistory MetricHistory::load(std::istream& is) {
    expect_word(is, "plab-history");
    if (parse_int<int>(is) != 1) throw std::runtime_error("history: unsupported format version");
    std::string variant, view, interp;
    expect_word(is, "variant");
    is >> variant;
    expect_word(is, "view");
    is >> view;
    expect_word(is, "interp");
    is >> interp;
    expect_word(is, "dt");
    const double dt = parse_double(is);
    expect_word(is, "count");
    const auto count = parse_int<std::size_t>(is);
    expect_word(is, "shape");
    std::vector<double> ts;
    std::vector<Backend> snaps;
    if (variant == "euclidean") {
        EuclideanSpace e;
        e.n = parse_int<int>(is);
        e.half_width = parse_double(is);
        e.nodes = parse_int<int>(is);
        for (std::size_t i = 0; i < count; ++i) {
            expect_word(is, "t");
            ts.push_back(parse_double(is));
            e.scale = parse_double(is);
            snaps.push_back(e);
        }
    } else if (variant == "sphere") {
        RoundSphere s;
        s.n = parse_int<int>(is);
        s.nodes = parse_int<int>(is);
        for (std::size_t i = 0; i < count; ++i) {
            expect_word(is, "t");
            ts.push_back(parse_double(is));
            s.r = parse_double(is);
            snaps.push_back(s);
        }
    } else if (variant == "conformal_torus") {
        const int nx = parse_int<int>(is), ny = parse_int<int>(is);
        const double lx = parse_double(is), ly = parse_double(is);
        for (std::size_t i = 0; i < count; ++i) {
            expect_word(is, "t");
            ts.push_back(parse_double(is));
            ConformalTorus t = make_torus(nx, ny, lx, ly);
            for (Eigen::Index k = 0; k < t.u.size(); ++k) t.u[k] = parse_double(is);
            snaps.push_back(std::move(t));
        }
    } else {
        throw std::runtime_error("history: unknown variant '" + variant + "'");
    }
    MetricHistory h(std::move(ts), std::move(snaps), dt, interp == "linear" ? Interp::linear : Interp::cubic);
    if (view == "backward") h.backward_ = true;
    return h;
}

}  // namespace plab
