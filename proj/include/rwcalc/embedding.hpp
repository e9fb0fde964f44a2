#pragma once

// Skorohod embedding of a level-m walk into a continuous piecewise-linear
// path: successive first-crossing times of +-2^-m barriers around the
// previous stopped value. Embedded values stay on the origin-shifted 2^-m
// lattice by construction; only the crossing times are real numbers.

#include <cstdint>
#include <memory>
#include <vector>

#include "rwcalc/walks.hpp"

namespace rwcalc {

// Continuous piecewise-linear path on [0, duration]. Two storage modes:
// explicit knot arrays, or a view over a lattice walk's grid (value j equals
// origin + pos[j] * 2^-level at time j * dt), which avoids materializing
// doubles for multi-million-knot paths and keeps crossings integer-exact.
class PiecewisePath {
  public:
    PiecewisePath(std::vector<double> times, std::vector<double> values);

    // Uniformly spaced knots: value[j] at time j * dt.
    static PiecewisePath from_samples(double dt, std::vector<double> values);

    // View of a walk's grid, with the time axis stretched so knot j sits at
    // j * (2^-2level / time_scale); time_scale c turns B(t) into B(c t).
    static PiecewisePath from_walk(std::shared_ptr<const LatticeWalk> walk,
                                   double time_scale = 1.0);

    std::int64_t segment_count() const;
    double duration() const { return knot_time(segment_count()); }
    double knot_time(std::int64_t j) const;
    double knot_value(std::int64_t j) const;
    double evaluate(double t) const;

    // Lattice-view accessors (nullptr / 0 in knot mode).
    const LatticeWalk* lattice_walk() const { return walk_.get(); }
    double knot_spacing() const { return dt_; }

  private:
    PiecewisePath() = default;
    // knot mode
    std::vector<double> times_, values_;
    // uniform / lattice mode
    double dt_ = 0;
    std::shared_ptr<const LatticeWalk> walk_;
};

struct EmbeddedWalk {
    std::uint32_t level = 0;
    double origin = 0;                      // path value at time 0
    std::vector<double> stop_times;         // s(0) = 0 < s(1) < ...
    std::vector<std::int64_t> offsets;      // lattice offsets from origin, |step| = 1
    bool complete = true;                   // reached the requested crossing count

    std::int64_t crossing_count() const { return std::int64_t(offsets.size()) - 1; }
    double value(std::int64_t k) const;
    int increment_sign(std::int64_t r) const {  // r in [1, crossing_count]
        return int(offsets[std::size_t(r)] - offsets[std::size_t(r) - 1]);
    }
    // Piecewise-linear interpolation of the values over the nominal grid
    // k * 2^-2level (not over the stop times).
    double value_on_grid(double t) const;
};

// Collects ceil(K * 4^m) first-crossing events, or as many as the path
// allows (then complete = false). Crossings that land exactly on a knot are
// taken at the knot time; mid-segment crossings at the exact interpolated
// time anchored at the segment start.
EmbeddedWalk skorohod_embed(const PiecewisePath& path, std::uint32_t m, double horizon);

// Embedding of the family's own finest path, computed through the composed
// bridge-time map instead of a scan. For nested paths the two routes agree
// exactly; this one is O(crossings) instead of O(fine knots).
EmbeddedWalk embed_nested(const NestedWalks& walks, std::uint32_t m);

struct EquidReport {
    double max_lag = 0;   // max_k |T_{m,n}(k) 4^-n - k 4^-m|, k <= K 4^m
    double bound = 0;     // (42 C K log*K)^(1/2) m^(1/2) 2^-m
    bool within = false;  // max_lag <= bound
};

// Diagnostic comparing realized composed-time lags against the a.s. bound
// with constant C > 1; log*K = max(log K, 1).
EquidReport equid_diagnostic(const NestedWalks& walks, std::uint32_t m, std::uint32_t n,
                             double horizon, double C);

}  // namespace rwcalc
