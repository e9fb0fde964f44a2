#pragma once

// Discrete local times: for each lattice site x, the number of up-crossings
// (steps x -> x+1) and down-crossings (steps x -> x-1) made before a given
// step index. Scaled by 2^-m and interpolated bilinearly on the
// (2^-2m, 2^-m) grid, these fields approximate half the Brownian local time.

#include <cstdint>
#include <span>
#include <vector>

#include "rwcalc/embedding.hpp"
#include "rwcalc/walks.hpp"

namespace rwcalc {

enum class Direction { Up, Down, Both };

class LocalTimeField {
  public:
    // Counts crossings along offsets[0..steps]: transition j contributes an
    // up event at offsets[j] when offsets[j+1] = offsets[j] + 1, a down event
    // when it drops. steps <= offsets.size() - 1.
    LocalTimeField(std::uint32_t level, double origin, Direction direction,
                   std::span<const std::int32_t> offsets, std::int64_t steps);
    LocalTimeField(std::uint32_t level, double origin, Direction direction,
                   std::span<const std::int64_t> offsets, std::int64_t steps);

    std::uint32_t level() const { return level_; }
    double origin() const { return origin_; }
    Direction direction() const { return direction_; }
    std::int64_t step_count() const { return steps_; }
    double duration() const;

    std::int64_t x_min() const { return x_min_; }
    std::int64_t x_max() const { return x_max_; }

    // Crossing events (step indices, ascending) at lattice offset x.
    std::span<const std::uint32_t> events(Direction d, std::int64_t x_off) const;

    // Number of events at offset x among steps j < k, in the field's own
    // direction (Both sums the two lists).
    std::int64_t count_before(std::int64_t x_off, std::int64_t k) const;

    // 2^-level * count at grid time k * 2^-2level and lattice offset x.
    double value_at_grid(std::int64_t k, std::int64_t x_off) const;

    // Bilinear interpolation at real (t, x); zero outside the visited range,
    // frozen at the final counts for t past the covered horizon.
    double evaluate(double t, double x) const;

  private:
    std::uint32_t level_;
    double origin_;
    Direction direction_;
    std::int64_t steps_;
    std::int64_t x_min_ = 0, x_max_ = -1;
    std::vector<std::vector<std::uint32_t>> up_, down_;
};

// Field of a walk, counting steps with index < floor(horizon * 4^m).
LocalTimeField discrete_local_time(const LatticeWalk& walk, Direction direction,
                                   double horizon);
LocalTimeField discrete_local_time(const EmbeddedWalk& walk, Direction direction,
                                   double horizon);

inline double eval_local_time(const LocalTimeField& field, double t, double x) {
    return field.evaluate(t, x);
}

}  // namespace rwcalc
