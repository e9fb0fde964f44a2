#include "rwcalc/walks.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>

#include "rwcalc/errors.hpp"

namespace rwcalc {

LatticeWalk::LatticeWalk(std::uint32_t level, std::vector<std::int32_t> positions,
                         std::int64_t origin_num)
    : level_(level), origin_num_(origin_num), pos_(std::move(positions)) {
    if (pos_.empty()) throw InvalidConfig("a walk needs at least its starting position");
    if (pos_.front() != 0) throw InvalidConfig("walk positions are relative: pos[0] must be 0");
}

double LatticeWalk::origin() const {
    return std::ldexp(double(origin_num_), -int(level_));
}

double LatticeWalk::duration() const {
    return std::ldexp(double(step_count()), -2 * int(level_));
}

double LatticeWalk::value_at_grid(std::int64_t k) const {
    if (k < 0 || k > step_count()) throw OutOfHorizon("grid index outside walk");
    return std::ldexp(double(origin_num_ + pos_[std::size_t(k)]), -int(level_));
}

double LatticeWalk::evaluate(double t) const {
    double u = std::ldexp(t, 2 * int(level_));
    if (t < 0 || u > double(step_count())) throw OutOfHorizon("time outside walk horizon");
    auto i = std::int64_t(u);
    if (i == step_count()) return value_at_grid(i);
    double theta = u - double(i);
    double a = double(origin_num_ + pos_[std::size_t(i)]);
    double b = double(origin_num_ + pos_[std::size_t(i) + 1]);
    return std::ldexp(a + theta * (b - a), -int(level_));
}

LatticeWalk raw_walk(const CoinMatrix& coins, std::uint32_t m, std::int64_t n) {
    if (n < 0) throw InvalidConfig("raw walk length must be non-negative");
    std::vector<std::int32_t> pos;
    pos.reserve(std::size_t(n) + 1);
    pos.push_back(0);
    auto row = coins.row(m);
    std::int32_t s = 0;
    for (std::int64_t k = 1; k <= n; ++k) {
        s += row.at(std::uint64_t(k));
        pos.push_back(s);
    }
    return LatticeWalk(m, std::move(pos));
}

StoppingSequence bridge_times(const LatticeWalk& walk) {
    StoppingSequence out;
    out.entries.push_back(0);
    std::int32_t base = walk.position(0);
    for (std::int64_t j = 1; j <= walk.step_count(); ++j) {
        std::int32_t p = walk.position(j);
        if (p - base == 2 || p - base == -2) {
            out.entries.push_back(j);
            base = p;
        }
    }
    out.complete = (out.entries.back() == walk.step_count());
    return out;
}

LatticeWalk twist(const LatticeWalk& prev, const LatticeWalk& raw) {
    if (raw.level() != prev.level() + 1)
        throw InvalidConfig("twist expects raw one level below prev");
    std::vector<std::int32_t> pos;
    pos.push_back(0);
    std::int32_t last = 0;
    std::int64_t j = 0;  // raw cursor, sits on a bridge boundary
    std::int32_t base = raw.position(0);
    for (std::int64_t k = 1; k <= prev.step_count(); ++k) {
        std::int64_t start = j;
        std::int32_t p = base;
        do {
            ++j;
            if (j > raw.step_count())
                throw InsufficientBridges("raw walk ends inside bridge");
            p = raw.position(j);
        } while (p - base != 2 && p - base != -2);
        bool flip = (p - base != 2 * prev.increment(k));
        for (std::int64_t i = start + 1; i <= j; ++i) {
            int inc = raw.increment(i);
            last += flip ? -inc : inc;
            pos.push_back(last);
        }
        base = p;
    }
    return LatticeWalk(prev.level() + 1, std::move(pos));
}

namespace {

struct LevelState {
    std::vector<std::int32_t> pos{0};     // twisted prefix positions
    std::vector<std::int64_t> bridge{0};  // raw step index closing bridge k
    std::int64_t raw_steps = 0;           // raw coins consumed so far
    std::int32_t raw_pos = 0;             // raw partial sum at raw_steps
};

class Builder {
  public:
    Builder(const CoinMatrix& coins, std::uint32_t max_level, const BuildOptions& options)
        : coins_(coins), options_(options), state_(max_level + 1) {}

    void ensure(std::uint32_t m, std::int64_t target_steps) {
        LevelState& st = state_[m];
        if (m == 0) {
            auto row = coins_.row(0);
            std::int32_t s = st.pos.back();
            for (auto k = std::int64_t(st.pos.size()); k <= target_steps; ++k) {
                s += row.at(std::uint64_t(k));
                st.pos.push_back(s);
            }
            return;
        }
        auto row = coins_.row(m);
        std::vector<std::int8_t> bridge_buf;
        while (std::int64_t(st.pos.size()) - 1 < target_steps) {
            std::int64_t done = std::int64_t(st.bridge.size()) - 1;
            LevelState& prev = state_[m - 1];
            if (std::int64_t(prev.pos.size()) - 1 < done + 1) {
                // Extend the coarser level far enough to feed the remaining
                // bridges (mean bridge length is 4), with a little slack.
                std::int64_t remaining = target_steps - (std::int64_t(st.pos.size()) - 1);
                ensure(m - 1, done + 1 + (remaining * 9) / 32 + 16);
            }
            int prev_inc = int(prev.pos[std::size_t(done) + 1]) - int(prev.pos[std::size_t(done)]);

            bridge_buf.clear();
            std::int32_t s = st.raw_pos;
            std::int32_t base = st.raw_pos;
            do {
                if (std::uint64_t(st.raw_steps) >= options_.max_raw_steps_per_level)
                    throw StepBudgetExceeded("raw step cap reached during nested build");
                ++st.raw_steps;
                int c = row.at(std::uint64_t(st.raw_steps));
                s += c;
                bridge_buf.push_back(std::int8_t(c));
            } while (s - base != 2 && s - base != -2);
            st.raw_pos = s;

            bool flip = (s - base != 2 * prev_inc);
            std::int32_t last = st.pos.back();
            for (std::int8_t c : bridge_buf) {
                last += flip ? -c : c;
                st.pos.push_back(last);
            }
            st.bridge.push_back(st.raw_steps);
        }
    }

    std::vector<LevelState> take() { return std::move(state_); }

  private:
    const CoinMatrix& coins_;
    BuildOptions options_;
    std::vector<LevelState> state_;
};

}  // namespace

NestedWalks NestedWalks::build(const CoinMatrix& coins, std::uint32_t max_level,
                               double horizon, const BuildOptions& options) {
    if (!(horizon > 0)) throw InvalidConfig("horizon must be positive");
    Builder builder(coins, max_level, options);
    for (std::uint32_t m = 0; m <= max_level; ++m) {
        double steps = std::ceil(std::ldexp(horizon, 2 * int(m)));
        if (steps > double(std::int64_t(1) << 40))
            throw InvalidConfig("requested grid is too large to materialize");
        builder.ensure(m, std::int64_t(steps));
    }
    auto state = builder.take();

    NestedWalks out;
    out.horizon_ = horizon;
    out.levels_.reserve(state.size());
    out.bridges_.resize(state.size());
    for (std::uint32_t m = 0; m < state.size(); ++m) {
        out.levels_.emplace_back(m, std::move(state[m].pos));
        if (m >= 1 && options.store_bridge_times) {
            out.bridges_[m].entries = std::move(state[m].bridge);
            out.bridges_[m].complete = true;
        }
    }
    return out;
}

const StoppingSequence& NestedWalks::bridge_times(std::uint32_t m) const {
    if (m < 1 || m >= bridges_.size() || bridges_[m].entries.empty())
        throw InvalidConfig("bridge times not stored for this level");
    return bridges_[m];
}

std::int64_t NestedWalks::compose_T(std::uint32_t m, std::uint32_t n, std::int64_t k) const {
    if (n < m || n > max_level()) throw InvalidConfig("compose_T needs m <= n <= max level");
    if (k < 0) throw OutOfHorizon("negative grid index");
    std::int64_t idx = k;
    for (std::uint32_t l = m + 1; l <= n; ++l) {
        const auto& entries = bridge_times(l).entries;
        if (idx >= std::int64_t(entries.size()))
            throw OutOfHorizon("composed index runs past built bridges");
        idx = entries[std::size_t(idx)];
    }
    return idx;
}

}  // namespace rwcalc
