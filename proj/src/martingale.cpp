#include "rwcalc/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "rwcalc/errors.hpp"
#include "rwcalc/numeric.hpp"

namespace rwcalc {

QuadraticVariationFn::QuadraticVariationFn(std::vector<double> times,
                                           std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.size() < 2)
        throw InvalidConfig("clock needs matching time/value knots");
    if (times_.front() != 0 || values_.front() != 0)
        throw InvalidConfig("clock must start at (0, 0)");
    slopes_.resize(times_.size() - 1);
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        double dt = times_[i + 1] - times_[i];
        double dv = values_[i + 1] - values_[i];
        if (!(dt > 0) || dv < 0) throw InvalidConfig("clock must be nondecreasing");
        slopes_[i] = dv / dt;
    }
}

double QuadraticVariationFn::operator()(double t) const {
    if (t <= 0) return 0;
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    auto i = std::size_t(it - times_.begin()) - 1;
    return values_[i] + (t - times_[i]) * slopes_[i];
}

double QuadraticVariationFn::inverse(double v) const {
    if (v <= 0) return 0;
    if (v > values_.back())
        throw BeyondTotalQV("requested clock value " + std::to_string(v) +
                            " exceeds the total " + std::to_string(values_.back()));
    auto it = std::lower_bound(values_.begin(), values_.end(), v);
    auto j = std::size_t(it - values_.begin());  // first knot value >= v, j >= 1
    return times_[j - 1] + (v - values_[j - 1]) / slopes_[j - 1];
}

namespace {

// Aliasing pointer to the finest level, kept alive by the family.
std::shared_ptr<const LatticeWalk> fine_walk(const std::shared_ptr<const NestedWalks>& family) {
    return {family, &family->level(family->max_level())};
}

RealizedMartingale realize_scaled(const MartingaleSpec& spec, const CoinMatrix& coins) {
    if (!(spec.c > 0)) throw InvalidConfig("scale must be positive");
    BuildOptions options;
    options.store_bridge_times = false;
    auto family = std::make_shared<const NestedWalks>(build_nested(
        coins, spec.fine_level, spec.c * spec.horizon * spec.margin, options));
    PiecewisePath path = PiecewisePath::from_walk(fine_walk(family), spec.c);
    double covered = path.duration();
    double budget = family->level(spec.fine_level).duration();  // = c * covered
    QuadraticVariationFn qv({0, covered}, {0, budget});
    return {spec, family, std::move(path), std::move(qv), budget};
}

RealizedMartingale realize_volatility(const MartingaleSpec& spec, const CoinMatrix& coins) {
    if (spec.vol_times.empty() || spec.vol_times.size() != spec.vol_values.size())
        throw InvalidConfig("volatility needs matching breakpoints and values");
    if (spec.vol_times.front() != 0)
        throw InvalidConfig("volatility breakpoints must start at 0");

    BuildOptions options;
    options.store_bridge_times = false;
    auto family = std::make_shared<const NestedWalks>(
        build_nested(coins, spec.fine_level, spec.horizon * spec.margin, options));
    const LatticeWalk& driver = family->level(spec.fine_level);
    const std::int64_t steps = driver.step_count();
    const double grid_dt = std::ldexp(1.0, -2 * int(spec.fine_level));
    const double dx = std::ldexp(1.0, -int(spec.fine_level));

    // Snap breakpoints to the driver grid (clipped to the covered range).
    std::vector<std::int64_t> break_steps;
    for (double t : spec.vol_times) {
        auto k = std::int64_t(std::llround(t / grid_dt));
        k = std::clamp(k, std::int64_t(0), steps);
        if (!break_steps.empty() && k <= break_steps.back())
            throw InvalidConfig("volatility breakpoints must increase on the driver grid");
        break_steps.push_back(k);
    }

    std::vector<double> values(std::size_t(steps) + 1);
    KahanSum acc;
    std::size_t seg = 0;
    values[0] = 0;
    for (std::int64_t j = 0; j < steps; ++j) {
        while (seg + 1 < break_steps.size() && j >= break_steps[seg + 1]) ++seg;
        acc.add(spec.vol_values[seg] * double(driver.increment(j + 1)) * dx);
        values[std::size_t(j) + 1] = acc.value();
    }
    PiecewisePath path = PiecewisePath::from_samples(grid_dt, std::move(values));

    // Quadratic-variation knots at the breakpoints and the covered end.
    std::vector<double> qt{0}, qval{0};
    KahanSum qacc;
    for (std::size_t i = 0; i < break_steps.size(); ++i) {
        std::int64_t hi = i + 1 < break_steps.size() ? break_steps[i + 1] : steps;
        if (hi <= break_steps[i]) continue;
        double h = spec.vol_values[i];
        qacc.add(h * h * double(hi - break_steps[i]) * grid_dt);
        qt.push_back(double(hi) * grid_dt);
        qval.push_back(qacc.value());
    }
    QuadraticVariationFn qv(std::move(qt), std::move(qval));
    double budget = qv.total();
    return {spec, family, std::move(path), std::move(qv), budget};
}

}  // namespace

RealizedMartingale realize_martingale(const MartingaleSpec& spec, const CoinMatrix& coins) {
    if (!(spec.horizon > 0) || !(spec.margin >= 1))
        throw InvalidConfig("need a positive horizon and margin >= 1");
    if (spec.fine_level < 1 || spec.fine_level > 20)
        throw InvalidConfig("driver level out of range");
    return spec.kind == MartingaleSpec::Kind::ScaledBrownian
               ? realize_scaled(spec, coins)
               : realize_volatility(spec, coins);
}

PiecewisePath dds_path(const RealizedMartingale& M) {
    if (M.spec.kind == MartingaleSpec::Kind::ScaledBrownian)
        return PiecewisePath::from_walk(fine_walk(M.family), 1.0);

    // Reparametrize the knots by the clock, dropping flat stretches (the
    // martingale is constant there, so nothing is lost).
    std::int64_t n = M.path.segment_count();
    std::vector<double> vt, vv;
    vt.reserve(std::size_t(n) + 1);
    vv.reserve(std::size_t(n) + 1);
    for (std::int64_t j = 0; j <= n; ++j) {
        double v = M.qv(M.path.knot_time(j));
        if (!vt.empty() && !(v > vt.back())) continue;
        vt.push_back(v);
        vv.push_back(M.path.knot_value(j));
    }
    return PiecewisePath(std::move(vt), std::move(vv));
}

double dds_inverse(const RealizedMartingale& M, double v) { return M.qv.inverse(v); }

EmbeddedWalk martingale_stopping(const PiecewisePath& path, std::uint32_t m,
                                 double qv_budget) {
    return skorohod_embed(path, m, qv_budget);
}

double discrete_qv(const EmbeddedWalk& tau_walk, double t) {
    auto it = std::upper_bound(tau_walk.stop_times.begin(), tau_walk.stop_times.end(), t);
    auto count = std::int64_t(it - tau_walk.stop_times.begin()) - 1;
    if (count < 0) count = 0;
    return std::ldexp(double(count), -2 * int(tau_walk.level));
}

double qv_max_deviation(const EmbeddedWalk& tau_walk, const QuadraticVariationFn& qv,
                        double t_max) {
    double q = std::ldexp(1.0, -2 * int(tau_walk.level));
    double sup = 0;
    std::int64_t r = 1;
    for (; r < std::int64_t(tau_walk.stop_times.size()); ++r) {
        double tau = tau_walk.stop_times[std::size_t(r)];
        if (tau > t_max) break;
        double clock = qv(tau);
        sup = std::max(sup, std::abs(double(r) * q - clock));
        sup = std::max(sup, std::abs(double(r - 1) * q - clock));
    }
    sup = std::max(sup, std::abs(double(r - 1) * q - qv(t_max)));
    return sup;
}

double ito_sum_m(const GridFunction& f, const EmbeddedWalk& tau_walk, double t) {
    return ito_sum_by_time(f, tau_walk, t);
}

double time_change_residual(const GridFunction& f, const RealizedMartingale& M,
                            std::uint32_t m, double t) {
    if (t > M.path.duration())
        throw OutOfHorizon("time past the realized horizon");
    EmbeddedWalk tau = martingale_stopping(M.path, m, M.qv_budget);
    EmbeddedWalk beta = skorohod_embed(dds_path(M), m, M.qv_budget);
    return ito_sum_by_time(f, tau, t) - ito_sum_by_time(f, beta, M.qv(t));
}

LocalTimeField martingale_local_time(const EmbeddedWalk& tau_walk, Direction direction) {
    return LocalTimeField(tau_walk.level, tau_walk.origin, direction,
                          std::span<const std::int64_t>(tau_walk.offsets),
                          tau_walk.crossing_count());
}

double eval_martingale_local_time(const LocalTimeField& field,
                                  const EmbeddedWalk& tau_walk, double t, double x) {
    auto it = std::upper_bound(tau_walk.stop_times.begin(), tau_walk.stop_times.end(), t);
    auto count = std::int64_t(it - tau_walk.stop_times.begin()) - 1;
    if (count < 0) count = 0;
    return field.evaluate(std::ldexp(double(count), -2 * int(field.level())), x);
}

}  // namespace rwcalc
