#pragma once

// Simple symmetric random walks on the integer lattice, and the nested
// "twist and shrink" family built from them. Level m lives on the spatial
// lattice 2^-m Z with time step 2^-2m; all construction state is kept in
// integer lattice units and reals only appear at evaluation time.

#include <cstdint>
#include <limits>
#include <vector>

#include "rwcalc/coin_source.hpp"

namespace rwcalc {

// One walk at a fixed level. Stores the prefix positions S(0..n) in lattice
// units relative to the origin, so increments are position differences and
// values are (origin_num + position) * 2^-level.
class LatticeWalk {
  public:
    LatticeWalk(std::uint32_t level, std::vector<std::int32_t> positions,
                std::int64_t origin_num = 0);

    std::uint32_t level() const { return level_; }
    std::int64_t origin_num() const { return origin_num_; }
    double origin() const;

    std::int64_t step_count() const { return std::int64_t(pos_.size()) - 1; }
    // Covered horizon in shrunken time: step_count * 2^-2level.
    double duration() const;

    std::int32_t position(std::int64_t j) const { return pos_[std::size_t(j)]; }
    int increment(std::int64_t r) const {  // r in [1, step_count]
        return int(pos_[std::size_t(r)]) - int(pos_[std::size_t(r) - 1]);
    }
    const std::vector<std::int32_t>& positions() const { return pos_; }

    // Value at grid time k * 2^-2level.
    double value_at_grid(std::int64_t k) const;
    // Piecewise-linear interpolation between grid values. Throws OutOfHorizon
    // outside [0, duration].
    double evaluate(double t) const;

  private:
    std::uint32_t level_;
    std::int64_t origin_num_;
    std::vector<std::int32_t> pos_;
};

// Walk-step indices T(0) = 0 < T(1) < ... marking successive events (for the
// bridge decomposition: exits from a +-2 band). `complete` is true when the
// walk ends exactly at the last event, i.e. no trailing partial bridge.
struct StoppingSequence {
    std::vector<std::int64_t> entries;
    bool complete = true;
};

// The first n steps of the raw (untwisted) level-m walk.
LatticeWalk raw_walk(const CoinMatrix& coins, std::uint32_t m, std::int64_t n);

// T(0) = 0 and T(k+1) = first n > T(k) with |S(n) - S(T(k))| = 2.
StoppingSequence bridge_times(const LatticeWalk& walk);

// Twists `raw` so that each complete bridge of `raw` reproduces one increment
// of `prev` (times two): the bridge's increments are kept if its displacement
// already equals 2 * prev-increment, negated otherwise. Output covers exactly
// as many bridges as prev has increments. Throws InsufficientBridges if raw
// ends first.
LatticeWalk twist(const LatticeWalk& prev, const LatticeWalk& raw);

struct BuildOptions {
    // Hard cap on raw coins consumed per level before giving up.
    std::uint64_t max_raw_steps_per_level = 1ull << 34;
    // Keep the per-level bridge-time arrays (needed by compose_T and the
    // composed embedding; the top level's array is large).
    bool store_bridge_times = true;
};

// Levels 0..max_level of the nested construction, built lazily from one coin
// matrix. Level m covers at least ceil(horizon * 4^m) steps; coverage beyond
// that is whatever the bridge decomposition happened to produce.
class NestedWalks {
  public:
    static NestedWalks build(const CoinMatrix& coins, std::uint32_t max_level,
                             double horizon, const BuildOptions& options = {});

    std::uint32_t max_level() const { return std::uint32_t(levels_.size()) - 1; }
    double horizon() const { return horizon_; }

    const LatticeWalk& level(std::uint32_t m) const { return levels_[m]; }

    // T_m for m >= 1: entry k is the raw/twisted step index closing bridge k.
    const StoppingSequence& bridge_times(std::uint32_t m) const;

    // Composed index map from the level-m grid to the level-n grid,
    // T_{m,n}(k) = T_n(...T_{m+1}(k)...); identity when n == m. Throws
    // OutOfHorizon when k runs past the bridges actually built.
    std::int64_t compose_T(std::uint32_t m, std::uint32_t n, std::int64_t k) const;

  private:
    NestedWalks() = default;
    std::vector<LatticeWalk> levels_;
    std::vector<StoppingSequence> bridges_;  // [m], empty sequence at m = 0
    double horizon_ = 0;
};

// build_nested is the construction entry point named in the CLI and harness.
inline NestedWalks build_nested(const CoinMatrix& coins, std::uint32_t max_level,
                                double horizon, const BuildOptions& options = {}) {
    return NestedWalks::build(coins, max_level, horizon, options);
}

}  // namespace rwcalc
