#include "rwcalc/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "rwcalc/errors.hpp"

namespace rwcalc {

PiecewisePath::PiecewisePath(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.size() < 2)
        throw InvalidConfig("a path needs matching time/value arrays with >= 2 knots");
    if (times_.front() != 0) throw InvalidConfig("paths start at time 0");
    for (std::size_t j = 1; j < times_.size(); ++j)
        if (!(times_[j] > times_[j - 1]))
            throw InvalidConfig("knot times must be strictly increasing");
}

PiecewisePath PiecewisePath::from_samples(double dt, std::vector<double> values) {
    if (!(dt > 0) || values.size() < 2)
        throw InvalidConfig("uniform path needs dt > 0 and >= 2 samples");
    PiecewisePath p;
    p.dt_ = dt;
    p.values_ = std::move(values);
    return p;
}

PiecewisePath PiecewisePath::from_walk(std::shared_ptr<const LatticeWalk> walk,
                                       double time_scale) {
    if (!walk || walk->step_count() < 1) throw InvalidConfig("empty walk");
    if (!(time_scale > 0)) throw InvalidConfig("time scale must be positive");
    PiecewisePath p;
    p.dt_ = std::ldexp(1.0, -2 * int(walk->level())) / time_scale;
    p.walk_ = std::move(walk);
    return p;
}

std::int64_t PiecewisePath::segment_count() const {
    if (walk_) return walk_->step_count();
    if (dt_ > 0) return std::int64_t(values_.size()) - 1;
    return std::int64_t(times_.size()) - 1;
}

double PiecewisePath::knot_time(std::int64_t j) const {
    if (dt_ > 0) return double(j) * dt_;
    return times_[std::size_t(j)];
}

double PiecewisePath::knot_value(std::int64_t j) const {
    if (walk_) return walk_->value_at_grid(j);
    return values_[std::size_t(j)];
}

double PiecewisePath::evaluate(double t) const {
    if (t < 0) throw OutOfHorizon("time before path start");
    std::int64_t j;
    if (dt_ > 0) {
        double u = t / dt_;
        if (u > double(segment_count())) throw OutOfHorizon("time beyond path end");
        j = std::min(std::int64_t(u), segment_count() - 1);
    } else {
        if (t > times_.back()) throw OutOfHorizon("time beyond path end");
        j = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin() - 1;
        j = std::min(j, std::int64_t(times_.size()) - 2);
    }
    double t0 = knot_time(j), t1 = knot_time(j + 1);
    double v0 = knot_value(j), v1 = knot_value(j + 1);
    double theta = (t - t0) / (t1 - t0);
    return v0 + theta * (v1 - v0);
}

double EmbeddedWalk::value(std::int64_t k) const {
    return origin + std::ldexp(double(offsets[std::size_t(k)]), -int(level));
}

double EmbeddedWalk::value_on_grid(double t) const {
    double u = std::ldexp(t, 2 * int(level));
    if (t < 0 || u > double(crossing_count())) throw OutOfHorizon("time outside walk grid");
    auto i = std::int64_t(u);
    if (i == crossing_count()) return value(i);
    double theta = u - double(i);
    double a = double(offsets[std::size_t(i)]);
    double b = double(offsets[std::size_t(i) + 1]);
    return origin + std::ldexp(a + theta * (b - a), -int(level));
}

namespace {

std::int64_t crossing_target(std::uint32_t m, double horizon) {
    if (!(horizon > 0)) throw InvalidConfig("horizon must be positive");
    double target = std::ceil(std::ldexp(horizon, 2 * int(m)));
    if (target > double(std::int64_t(1) << 40))
        throw InvalidConfig("requested crossing count is too large");
    return std::int64_t(target);
}

// Integer scan for lattice-view paths whose own lattice refines the 2^-m
// barrier lattice: every crossing lands exactly on a knot.
EmbeddedWalk embed_lattice(const PiecewisePath& path, std::uint32_t m,
                           std::int64_t target) {
    const LatticeWalk& walk = *path.lattice_walk();
    std::int64_t span = std::int64_t(1) << (walk.level() - m);
    double dt = path.knot_spacing();

    EmbeddedWalk out;
    out.level = m;
    out.origin = walk.origin();
    out.stop_times.reserve(std::size_t(target) + 1);
    out.offsets.reserve(std::size_t(target) + 1);
    out.stop_times.push_back(0.0);
    out.offsets.push_back(0);

    std::int64_t o = 0;
    std::int64_t up = span, dn = -span;
    const auto& pos = walk.positions();
    for (std::size_t j = 1; j < pos.size() && out.crossing_count() < target; ++j) {
        std::int64_t p = pos[j];
        if (p == up || p == dn) {
            o += (p == up) ? 1 : -1;
            out.stop_times.push_back(double(j) * dt);
            out.offsets.push_back(o);
            up = (o + 1) * span;
            dn = (o - 1) * span;
        }
    }
    out.complete = (out.crossing_count() == target);
    return out;
}

}  // namespace

EmbeddedWalk skorohod_embed(const PiecewisePath& path, std::uint32_t m, double horizon) {
    std::int64_t target = crossing_target(m, horizon);
    if (const LatticeWalk* w = path.lattice_walk(); w && w->level() >= m)
        return embed_lattice(path, m, target);

    EmbeddedWalk out;
    out.level = m;
    out.origin = path.knot_value(0);
    out.stop_times.push_back(0.0);
    out.offsets.push_back(0);

    double step = std::ldexp(1.0, -int(m));
    std::int64_t o = 0;
    std::int64_t segments = path.segment_count();
    for (std::int64_t j = 0; j < segments && out.crossing_count() < target; ++j) {
        double t0 = path.knot_time(j), t1 = path.knot_time(j + 1);
        double v0 = path.knot_value(j), v1 = path.knot_value(j + 1);
        if (v1 == v0) continue;
        int dir = v1 > v0 ? 1 : -1;
        while (out.crossing_count() < target) {
            double b = out.origin + double(o + dir) * step;
            if (dir > 0 ? v1 < b : v1 > b) break;
            // Anchoring at the segment start keeps a knot-exact barrier hit
            // at exactly t1 and avoids drift across crossings in one segment.
            double ts = (v1 == b) ? t1 : t0 + (b - v0) / (v1 - v0) * (t1 - t0);
            o += dir;
            out.stop_times.push_back(ts);
            out.offsets.push_back(o);
        }
    }
    out.complete = (out.crossing_count() == target);
    return out;
}

EmbeddedWalk embed_nested(const NestedWalks& walks, std::uint32_t m) {
    std::uint32_t n = walks.max_level();
    if (m > n) throw InvalidConfig("embedding level exceeds the built family");
    const LatticeWalk& coarse = walks.level(m);

    // Compose the bridge-time maps level by level, trimming to what was built.
    std::int64_t count = coarse.step_count();
    std::vector<std::int64_t> idx(std::size_t(count) + 1);
    for (std::int64_t k = 0; k <= count; ++k) idx[std::size_t(k)] = k;
    for (std::uint32_t l = m + 1; l <= n; ++l) {
        const auto& entries = walks.bridge_times(l).entries;
        // idx is strictly increasing, so drop trailing values that run past
        // the bridges actually built at this level.
        std::int64_t avail = std::int64_t(entries.size()) - 1;
        while (count > 0 && idx[std::size_t(count)] > avail) --count;
        idx.resize(std::size_t(count) + 1);
        for (auto& v : idx) v = entries[std::size_t(v)];
    }

    EmbeddedWalk out;
    out.level = m;
    out.origin = coarse.origin();
    out.offsets.assign(coarse.positions().begin(),
                       coarse.positions().begin() + (count + 1));
    out.stop_times.resize(std::size_t(count) + 1);
    for (std::int64_t k = 0; k <= count; ++k)
        out.stop_times[std::size_t(k)] =
            std::ldexp(double(idx[std::size_t(k)]), -2 * int(n));
    out.complete = true;
    return out;
}

EquidReport equid_diagnostic(const NestedWalks& walks, std::uint32_t m, std::uint32_t n,
                             double horizon, double C) {
    if (!(m >= 1 && n > m)) throw InvalidConfig("equid diagnostic needs n > m >= 1");
    if (!(C > 1)) throw InvalidConfig("constant C must exceed 1");
    std::int64_t kmax = std::int64_t(std::ldexp(horizon, 2 * int(m)));

    EquidReport report;
    for (std::int64_t k = 0; k <= kmax; ++k) {
        double lag = std::ldexp(double(walks.compose_T(m, n, k)), -2 * int(n)) -
                     std::ldexp(double(k), -2 * int(m));
        report.max_lag = std::max(report.max_lag, std::abs(lag));
    }
    double logstar = std::max(std::log(horizon), 1.0);
    report.bound = std::sqrt(42.0 * C * horizon * logstar) * std::sqrt(double(m)) *
                   std::ldexp(1.0, -int(m));
    report.within = report.max_lag <= report.bound;
    return report;
}

}  // namespace rwcalc
