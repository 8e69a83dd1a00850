#include "common.hpp"

#include <array>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

namespace plab::cli {

using std::numbers::pi;

void Run::phase(const std::string& name, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        report.fail(name, std::string("aborted: ") + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    report.wall.emplace_back(name, dt.count());
}

std::mt19937_64 Run::rng(const std::string& phase) const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : phase) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return std::mt19937_64(cfg.seed ^ h);
}

ConformalTorus torus_from(const ExperimentConfig& cfg, const std::string& prefix, int n, double amp,
                          const std::string& profile) {
    const int nx = static_cast<int>(cfg.get_int(prefix + ".nx", n));
    const int ny = static_cast<int>(cfg.get_int(prefix + ".ny", nx));
    const double lx = cfg.get_double(prefix + ".lx", 2 * pi);
    const double ly = cfg.get_double(prefix + ".ly", lx);
    const double a = cfg.get_double(prefix + ".amp", amp);
    const std::string p = cfg.get(prefix + ".profile", profile);
    std::function<double(double, double)> f;
    if (p == "flat")
        f = [](double, double) { return 0.0; };
    else if (p == "sin")
        f = [](double X, double) { return std::sin(X); };
    else if (p == "mixed")
        f = [](double X, double Y) { return std::sin(X) + 0.5 * std::cos(2 * Y + 0.3); };
    else if (p == "product")
        f = [](double X, double Y) { return std::sin(X) * std::cos(Y); };
    else if (p == "bumpy")
        f = [](double X, double Y) { return std::sin(X) + 0.5 * std::cos(X + 2 * Y); };
    else if (p == "twisted")
        f = [](double X, double Y) { return std::sin(X) * std::cos(Y) + 0.5 * std::cos(2 * X + Y); };
    else
        throw ConfigError({prefix + ".profile: unknown profile '" + p + "'"});
    if (nx < 4 || ny < 4) throw ConfigError({prefix + ": grid needs at least 4 points per axis"});
    if (!(lx > 0) || !(ly > 0)) throw ConfigError({prefix + ": lengths must be positive"});
    return make_torus(nx, ny, lx, ly, [=](double x, double y) { return a * f(2 * pi * x / lx, 2 * pi * y / ly); });
}

void add_torus_keys(ConfigSchema& s, const std::string& prefix) {
    s[prefix + ".nx"] = KeyType::integer;
    s[prefix + ".ny"] = KeyType::integer;
    s[prefix + ".lx"] = KeyType::real;
    s[prefix + ".ly"] = KeyType::real;
    s[prefix + ".amp"] = KeyType::real;
    s[prefix + ".profile"] = KeyType::text;
}

Grid random_field(const ConformalTorus& t, std::mt19937_64& rng, double amp, int kmax) {
    std::normal_distribution<double> nd(0.0, amp);
    std::vector<std::array<double, 4>> modes;
    for (int a = 0; a <= kmax; ++a)
        for (int b = -kmax; b <= kmax; ++b) {
            const double c = nd(rng), s = nd(rng);
            modes.push_back({double(a), double(b), c, s});
        }
    return std::get<Grid>(grid_field(t, [&](double x, double y) {
        double v = 0.0;
        for (const auto& m : modes) {
            const double ph = 2 * pi * (m[0] * x / t.lx + m[1] * y / t.ly);
            v += m[2] * std::cos(ph) + m[3] * std::sin(ph);
        }
        return v;
    }));
}

double rel_error(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

double min_increment(const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i] - v[i - 1]);
    return m;
}

bool suite_on(const ExperimentConfig& cfg, const std::string& suite) {
    const std::string s = cfg.get("suite", "all");
    if (s == "all" || s == suite) return true;
    std::size_t a = 0;
    while (a <= s.size()) {
        std::size_t b = s.find(',', a);
        if (b == std::string::npos) b = s.size();
        std::string item = s.substr(a, b - a);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (item == suite) return true;
        a = b + 1;
    }
    return false;
}

int resolution(const ExperimentConfig& cfg, int fallback) { return static_cast<int>(cfg.get_int("resolution", fallback)); }

void check_order(RunReport& r, const std::string& name, double coarse, double fine, double min_order, double floor) {
    const std::string detail = "coarse " + format_number(coarse) + ", fine " + format_number(fine);
    if (std::abs(fine) < floor)
        r.check_le(name + " (fine error at roundoff floor)", std::abs(fine), floor, detail);
    else
        r.check_ge(name, std::log2(std::abs(coarse) / std::abs(fine)), min_order, detail);
}

}  // namespace plab::cli
