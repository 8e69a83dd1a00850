#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "plab/geometry/backend.hpp"

namespace plab {

enum class Interp { linear, cubic };

// Time-ordered Ricci-flow snapshots. Snapshots are always stored in forward time;
// a backward view reads the same data through tau = t0 - t.
class MetricHistory {
public:
    MetricHistory(std::vector<double> t, std::vector<Backend> snaps, double dt, Interp interp = Interp::cubic);

    bool is_backward() const { return backward_; }
    double t0() const { return data_->t.back(); }
    double t_first() const { return data_->t.front(); }
    double dt() const { return data_->dt; }
    Interp interp() const { return data_->interp; }
    std::size_t size() const { return data_->t.size(); }
    const char* variant() const { return variant_name(data_->snaps.front()); }

    // Parameter range in the view's own time (t forward, tau backward).
    double start() const { return backward_ ? 0.0 : t_first(); }
    double end() const { return backward_ ? t0() - t_first() : t0(); }

    // Snapshots ordered by increasing view parameter.
    double time(std::size_t i) const;
    const Backend& snapshot(std::size_t i) const;

    Backend sample(double p) const;
    // Conformal factor only; avoids building a backend per query on the torus.
    Grid sample_u(double p) const;

    // Forward-time accessors independent of the view.
    const std::vector<double>& forward_times() const { return data_->t; }
    const Backend& forward_snapshot(std::size_t i) const { return data_->snaps[i]; }
    double to_forward(double p) const { return backward_ ? t0() - p : p; }

    friend MetricHistory backward_view(const MetricHistory& h);
    bool operator==(const MetricHistory& o) const;

    void save(std::ostream& os) const;
    static MetricHistory load(std::istream& is);

private:
    struct Data {
        std::vector<double> t;
        std::vector<Backend> snaps;
        double dt;
        Interp interp;
    };
    std::shared_ptr<const Data> data_;
    bool backward_ = false;

    // Index of the stored snapshot at forward time t, or -1.
    long exact_index(double t) const;
    void locate(double t, std::size_t& i) const;
};

MetricHistory backward_view(const MetricHistory& h);

}  // namespace plab
