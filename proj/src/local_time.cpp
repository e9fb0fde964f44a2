#include "rwcalc/local_time.hpp"

#include <algorithm>
#include <cmath>

#include "rwcalc/errors.hpp"

namespace rwcalc {

namespace {

template <class Int>
void build_events(std::span<const Int> offsets, std::int64_t steps, std::int64_t& x_min,
                  std::int64_t& x_max, std::vector<std::vector<std::uint32_t>>& up,
                  std::vector<std::vector<std::uint32_t>>& down) {
    if (steps < 0 || steps > std::int64_t(offsets.size()) - 1)
        throw InvalidConfig("step count outside the offset sequence");
    if (steps == 0) return;

    auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.begin() + steps);
    x_min = *lo;
    x_max = *hi;
    up.assign(std::size_t(x_max - x_min + 1), {});
    down.assign(std::size_t(x_max - x_min + 1), {});
    for (std::int64_t j = 0; j < steps; ++j) {
        std::int64_t x = offsets[std::size_t(j)];
        std::int64_t d = offsets[std::size_t(j) + 1] - x;
        if (d == 1)
            up[std::size_t(x - x_min)].push_back(std::uint32_t(j));
        else if (d == -1)
            down[std::size_t(x - x_min)].push_back(std::uint32_t(j));
        else
            throw InvalidConfig("offset sequence must move by exactly one site per step");
    }
}

std::int64_t events_before(const std::vector<std::uint32_t>& list, std::int64_t k) {
    return std::upper_bound(list.begin(), list.end(),
                            std::uint32_t(std::min<std::int64_t>(k, UINT32_MAX) - 1)) -
           list.begin();
}

}  // namespace

LocalTimeField::LocalTimeField(std::uint32_t level, double origin, Direction direction,
                               std::span<const std::int32_t> offsets, std::int64_t steps)
    : level_(level), origin_(origin), direction_(direction), steps_(steps) {
    build_events(offsets, steps, x_min_, x_max_, up_, down_);
}

LocalTimeField::LocalTimeField(std::uint32_t level, double origin, Direction direction,
                               std::span<const std::int64_t> offsets, std::int64_t steps)
    : level_(level), origin_(origin), direction_(direction), steps_(steps) {
    build_events(offsets, steps, x_min_, x_max_, up_, down_);
}

double LocalTimeField::duration() const {
    return std::ldexp(double(steps_), -2 * int(level_));
}

std::span<const std::uint32_t> LocalTimeField::events(Direction d, std::int64_t x_off) const {
    static const std::vector<std::uint32_t> empty;
    if (d == Direction::Both) throw InvalidConfig("pick one event list");
    if (x_off < x_min_ || x_off > x_max_) return empty;
    const auto& lists = (d == Direction::Up) ? up_ : down_;
    return lists[std::size_t(x_off - x_min_)];
}

std::int64_t LocalTimeField::count_before(std::int64_t x_off, std::int64_t k) const {
    if (x_off < x_min_ || x_off > x_max_ || k <= 0) return 0;
    std::int64_t total = 0;
    if (direction_ != Direction::Down)
        total += events_before(up_[std::size_t(x_off - x_min_)], k);
    if (direction_ != Direction::Up)
        total += events_before(down_[std::size_t(x_off - x_min_)], k);
    return total;
}

double LocalTimeField::value_at_grid(std::int64_t k, std::int64_t x_off) const {
    return std::ldexp(double(count_before(x_off, std::min(k, steps_))), -int(level_));
}

double LocalTimeField::evaluate(double t, double x) const {
    if (t < 0) return 0;
    double u = std::min(std::ldexp(t, 2 * int(level_)), double(steps_));
    auto k = std::int64_t(u);
    double th = u - double(k);

    double xi = std::ldexp(x - origin_, int(level_));
    double fl = std::floor(xi);
    auto x0 = std::int64_t(fl);
    double tx = xi - fl;

    auto corner = [&](std::int64_t kk, std::int64_t xx) {
        return double(count_before(xx, std::min(kk, steps_)));
    };
    double c00 = corner(k, x0), c01 = corner(k, x0 + 1);
    double c10 = corner(k + 1, x0), c11 = corner(k + 1, x0 + 1);
    double at_k = c00 + tx * (c01 - c00);
    double at_k1 = c10 + tx * (c11 - c10);
    return std::ldexp(at_k + th * (at_k1 - at_k), -int(level_));
}

namespace {

std::int64_t horizon_steps(std::uint32_t level, double horizon, std::int64_t available) {
    if (!(horizon >= 0)) throw InvalidConfig("horizon must be non-negative");
    double u = std::floor(std::ldexp(horizon, 2 * int(level)));
    return std::min(available, std::int64_t(std::min(u, 9e15)));
}

}  // namespace

LocalTimeField discrete_local_time(const LatticeWalk& walk, Direction direction,
                                   double horizon) {
    std::int64_t steps = horizon_steps(walk.level(), horizon, walk.step_count());
    return LocalTimeField(walk.level(), walk.origin(), direction,
                          std::span<const std::int32_t>(walk.positions()), steps);
}

LocalTimeField discrete_local_time(const EmbeddedWalk& walk, Direction direction,
                                   double horizon) {
    std::int64_t steps = horizon_steps(walk.level, horizon, walk.crossing_count());
    return LocalTimeField(walk.level, walk.origin, direction,
                          std::span<const std::int64_t>(walk.offsets), steps);
}

}  // namespace rwcalc
