#include "rwcalc/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "rwcalc/errors.hpp"
#include "rwcalc/numeric.hpp"

namespace rwcalc {

namespace {

// Cutoff index floor(t 4^m), checked against the walk's crossing count.
std::int64_t grid_cutoff(const EmbeddedWalk& walk, double t) {
    if (t < 0) throw OutOfHorizon("negative time");
    auto k = std::int64_t(std::floor(std::ldexp(t, 2 * int(walk.level))));
    if (k > walk.crossing_count())
        throw OutOfHorizon("time " + std::to_string(t) + " needs " + std::to_string(k) +
                           " crossings, walk has " + std::to_string(walk.crossing_count()));
    return k;
}

}  // namespace

double ito_sum(const GridFunction& f, const EmbeddedWalk& walk, double t) {
    std::int64_t k = grid_cutoff(walk, t);
    double dx = std::ldexp(1.0, -int(walk.level));
    KahanSum acc;
    for (std::int64_t r = 1; r <= k; ++r)
        acc.add(f(walk.value(r - 1)) * dx * double(walk.increment_sign(r)));
    return acc.value();
}

double ito_sum_by_time(const GridFunction& f, const EmbeddedWalk& walk, double s) {
    if (s < 0) return 0;
    auto it = std::upper_bound(walk.stop_times.begin(), walk.stop_times.end(), s);
    auto k = std::int64_t(it - walk.stop_times.begin()) - 1;  // stop_times[0] = 0 <= s
    double dx = std::ldexp(1.0, -int(walk.level));
    KahanSum acc;
    for (std::int64_t r = 1; r <= k; ++r)
        acc.add(f(walk.value(r - 1)) * dx * double(walk.increment_sign(r)));
    return acc.value();
}

double stratonovich_sum(const GridFunction& f, const EmbeddedWalk& walk, double t) {
    std::int64_t k = grid_cutoff(walk, t);
    double dx = std::ldexp(1.0, -int(walk.level));
    KahanSum acc;
    double prev = f(walk.value(0));
    for (std::int64_t r = 1; r <= k; ++r) {
        double cur = f(walk.value(r));
        acc.add(0.5 * (prev + cur) * dx * double(walk.increment_sign(r)));
        prev = cur;
    }
    return acc.value();
}

std::vector<double> ito_sum_prefix(const GridFunction& f, const EmbeddedWalk& walk,
                                   std::int64_t max_k) {
    if (max_k < 0 || max_k > walk.crossing_count())
        throw OutOfHorizon("prefix length exceeds the walk's crossings");
    double dx = std::ldexp(1.0, -int(walk.level));
    std::vector<double> prefix(std::size_t(max_k) + 1);
    KahanSum acc;
    prefix[0] = 0;
    for (std::int64_t r = 1; r <= max_k; ++r) {
        acc.add(f(walk.value(r - 1)) * dx * double(walk.increment_sign(r)));
        prefix[std::size_t(r)] = acc.value();
    }
    return prefix;
}

ConvexDiffSpec convex_abs(double a) {
    ConvexDiffSpec spec;
    spec.g = gridfn::abs_shift(a);
    char buf[64];
    std::snprintf(buf, sizeof buf, "absdl:%g", a);
    spec.left_derivative = GridFunction{buf, [a](double x) { return x <= a ? -1.0 : 1.0; }};
    spec.atoms.push_back({a, 2.0});
    return spec;
}

ConvexDiffSpec convex_square() {
    ConvexDiffSpec spec;
    spec.g = gridfn::square();
    spec.left_derivative = GridFunction{"2x", [](double x) { return 2 * x; }};
    spec.pieces.push_back({-1e300, 1e300, 2.0});
    return spec;
}

ConvexDiffSpec convex_linear(double alpha, double beta) {
    ConvexDiffSpec spec;
    char buf[96];
    std::snprintf(buf, sizeof buf, "lin:%g,%g", alpha, beta);
    spec.g = GridFunction{buf, [alpha, beta](double x) { return alpha + beta * x; }};
    spec.left_derivative = GridFunction{"const", [beta](double) { return beta; }};
    return spec;
}

ItoTanakaEvaluator::ItoTanakaEvaluator(const ConvexDiffSpec& spec, const EmbeddedWalk& walk,
                                       const LocalTimeField& up, const LocalTimeField& down)
    : walk_(&walk), up_(&up), down_(&down), atoms_(spec.atoms) {
    std::int64_t n = walk.crossing_count();
    double dx = std::ldexp(1.0, -int(walk.level));

    drift_prefix_.resize(std::size_t(n) + 1);
    KahanSum acc;
    drift_prefix_[0] = 0;
    for (std::int64_t r = 1; r <= n; ++r) {
        acc.add(spec.left_derivative(walk.value(r - 1)) * dx * double(walk.increment_sign(r)));
        drift_prefix_[std::size_t(r)] = acc.value();
    }

    // Each density piece becomes a lattice trapezoid: full weight at interior
    // sites, half weight at the end sites. Clipping to one site beyond the
    // visited range is harmless (the counts there are zero) and makes the
    // trapezoid exact for pieces that cover the whole range.
    for (const DensityPiece& piece : spec.pieces) {
        if (!(piece.hi > piece.lo) || piece.density == 0) continue;
        double lo = std::max(piece.lo, walk.origin + double(up.x_min() - 1) * dx);
        double hi = std::min(piece.hi, walk.origin + double(up.x_max() + 1) * dx);
        if (!(hi > lo)) continue;
        auto i_lo = std::int64_t(std::ceil((lo - walk.origin) / dx - 1e-9));
        auto i_hi = std::int64_t(std::floor((hi - walk.origin) / dx + 1e-9));
        if (i_lo >= i_hi) continue;

        std::vector<std::pair<std::int64_t, double>> events;
        for (std::int64_t x = i_lo; x <= i_hi; ++x) {
            double w = (x == i_lo || x == i_hi) ? 0.5 : 1.0;
            for (std::uint32_t j : up.events(Direction::Up, x))
                events.emplace_back(std::int64_t(j), w);
            for (std::uint32_t j : down.events(Direction::Down, x))
                events.emplace_back(std::int64_t(j), w);
        }
        std::sort(events.begin(), events.end());

        PieceTable table;
        table.density = piece.density;
        table.steps.reserve(events.size());
        table.wcum.reserve(events.size() + 1);
        table.wcum.push_back(0);
        KahanSum wsum;
        for (auto& [step, w] : events) {
            table.steps.push_back(step);
            wsum.add(w);
            table.wcum.push_back(wsum.value());
        }
        pieces_.push_back(std::move(table));
    }
}

ItoTanakaTerms ItoTanakaEvaluator::at(double t) const {
    if (t < 0) throw OutOfHorizon("negative time");
    auto n = double(walk_->crossing_count());
    double u = std::min(std::ldexp(t, 2 * int(walk_->level)), n);
    auto k = std::int64_t(std::floor(u));
    double theta = u - double(k);
    double scale = std::ldexp(1.0, -2 * int(walk_->level));

    ItoTanakaTerms out;
    KahanSum integral;
    for (const MeasureAtom& atom : atoms_)
        integral.add(atom.mass *
                     (up_->evaluate(t, atom.location) + down_->evaluate(t, atom.location)));
    for (const PieceTable& piece : pieces_) {
        // weighted events strictly before step k, plus theta of those at k
        auto lo = std::lower_bound(piece.steps.begin(), piece.steps.end(), k);
        auto hi = std::upper_bound(lo, piece.steps.end(), k);
        auto i = std::size_t(lo - piece.steps.begin());
        auto j = std::size_t(hi - piece.steps.begin());
        double count = piece.wcum[i] + theta * (piece.wcum[j] - piece.wcum[i]);
        integral.add(piece.density * scale * count);
    }
    out.integral_term = integral.value();
    out.full_rhs = drift_prefix_[std::size_t(k)] + 0.5 * out.integral_term;
    return out;
}

ItoTanakaTerms ito_tanaka_rhs(const ConvexDiffSpec& spec, const EmbeddedWalk& walk,
                              const LocalTimeField& up, const LocalTimeField& down,
                              double t) {
    return ItoTanakaEvaluator(spec, walk, up, down).at(t);
}

double tanaka_check(const EmbeddedWalk& walk, const LocalTimeField& up,
                    const LocalTimeField& down, double a, double t) {
    double q = std::ldexp(a - walk.origin, int(walk.level));
    double qi = std::round(q);
    if (std::abs(q - qi) > 1e-9 * (1 + std::abs(q)))
        throw OffLattice("level " + std::to_string(walk.level) +
                         " has no lattice point at " + std::to_string(a));
    auto n = double(walk.crossing_count());
    double u = std::min(std::ldexp(t, 2 * int(walk.level)), n);
    auto k = std::int64_t(std::floor(u));
    if (k > up.step_count() || k > down.step_count())
        throw OutOfHorizon("local-time fields cover fewer steps than requested");

    double ltime = up.evaluate(t, a) + down.evaluate(t, a);
    double stopped = std::abs(walk.value(k) - a) - std::abs(walk.origin - a);
    double drift = ito_sum(gridfn::sign_shift(a), walk, double(k) * std::ldexp(1.0, -2 * int(walk.level)));
    return ltime - (stopped - drift);
}

double occupation_check(const GridFunction& h, const EmbeddedWalk& walk,
                        const LocalTimeField& up, const LocalTimeField& down,
                        double t) {
    std::int64_t k = grid_cutoff(walk, t);
    if (k > up.step_count() || k > down.step_count())
        throw OutOfHorizon("local-time fields cover fewer steps than requested");
    double dx = std::ldexp(1.0, -int(walk.level));
    double scale = dx * dx;

    KahanSum lhs;
    for (std::int64_t r = 1; r <= k; ++r) lhs.add(h(walk.value(r - 1)) * scale);

    KahanSum rhs;
    for (std::int64_t x = up.x_min(); x <= up.x_max(); ++x) {
        auto cnt = double(up.count_before(x, k) + down.count_before(x, k));
        if (cnt != 0) rhs.add(h(walk.origin + double(x) * dx) * cnt * scale);
    }
    return lhs.value() - rhs.value();
}

double kernel_value(const PredictableSpec& spec, double t, double w) {
    double v = 0;
    switch (spec.kernel) {
        case PredictableSpec::Kernel::Brownian: v = w; break;
        case PredictableSpec::Kernel::SineOfW: v = std::sin(w); break;
        case PredictableSpec::Kernel::TimeTimesW: v = t * w; break;
        case PredictableSpec::Kernel::IndicatorPositive: v = w > 0 ? 1.0 : 0.0; break;
        case PredictableSpec::Kernel::Constant: v = spec.constant; break;
    }
    return std::clamp(v, -spec.truncation, spec.truncation);
}

PredictableSpec parse_kernel(const std::string& id, double truncation) {
    PredictableSpec spec;
    spec.truncation = truncation;
    if (id == "w" || id == "brownian") {
        spec.kernel = PredictableSpec::Kernel::Brownian;
    } else if (id == "sin_w" || id == "sin") {
        spec.kernel = PredictableSpec::Kernel::SineOfW;
    } else if (id == "t_w" || id == "tw") {
        spec.kernel = PredictableSpec::Kernel::TimeTimesW;
    } else if (id == "ind_pos" || id == "indicator") {
        spec.kernel = PredictableSpec::Kernel::IndicatorPositive;
    } else if (id.rfind("const", 0) == 0) {
        spec.kernel = PredictableSpec::Kernel::Constant;
        spec.constant = id.size() > 6 && id[5] == ':' ? std::stod(id.substr(6)) : 1.0;
    } else {
        throw InvalidConfig("unknown kernel id: " + id);
    }
    return spec;
}

SimpleProcess simple_process(const PredictableSpec& spec, const EmbeddedWalk& walk) {
    SimpleProcess process;
    process.level = walk.level;
    auto n = std::size_t(walk.crossing_count());
    process.xi.resize(n + 1);
    for (std::size_t r = 0; r <= n; ++r)
        process.xi[r] = kernel_value(spec, walk.stop_times[r], walk.value(std::int64_t(r)));
    return process;
}

double predictable_sum(const SimpleProcess& process, const EmbeddedWalk& walk, double t) {
    if (process.level != walk.level)
        throw InvalidConfig("process and walk live on different levels");
    std::int64_t k = grid_cutoff(walk, t);
    double dx = std::ldexp(1.0, -int(walk.level));
    KahanSum acc;
    for (std::int64_t r = 1; r <= k; ++r)
        acc.add(process.xi[std::size_t(r) - 1] * dx * double(walk.increment_sign(r)));
    return acc.value();
}

namespace {

struct Welford {
    std::size_t n = 0;
    double mean = 0, m2 = 0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }
    double stderr_of_mean() const {
        return n > 1 ? std::sqrt(m2 / double(n - 1) / double(n)) : 0;
    }
};

}  // namespace

IsometryReport isometry_check(const PredictableSpec& spec, std::uint32_t m,
                              double horizon, std::size_t replications, Seed seed) {
    if (replications == 0) throw InvalidConfig("need at least one replication");
    const std::uint32_t fine = m + 3;
    const double build_horizon = horizon * 1.25;
    auto cutoff = std::int64_t(std::floor(std::ldexp(horizon, 2 * int(m))));
    double dx = std::ldexp(1.0, -int(m));

    Welford sums, squares, quads, diffs;
    for (std::size_t rep = 0; rep < replications; ++rep) {
        CoinMatrix coins(derive_seed(seed, std::uint64_t(rep)));
        NestedWalks family = build_nested(coins, fine, build_horizon);
        EmbeddedWalk walk = embed_nested(family, m);
        if (walk.crossing_count() < cutoff)
            throw OutOfHorizon("replication " + std::to_string(rep) +
                               " ran out of crossings; raise the build margin");
        SimpleProcess process = simple_process(spec, walk);

        KahanSum s, q;
        for (std::int64_t r = 1; r <= cutoff; ++r) {
            double xi = process.xi[std::size_t(r) - 1];
            s.add(xi * dx * double(walk.increment_sign(r)));
            q.add(xi * xi * dx * dx);
        }
        double sv = s.value(), qv = q.value();
        sums.add(sv);
        squares.add(sv * sv);
        quads.add(qv);
        diffs.add(sv * sv - qv);
    }

    IsometryReport report;
    report.lhs = squares.mean;
    report.rhs = quads.mean;
    report.stderr_diff = diffs.stderr_of_mean();
    report.sum_mean = sums.mean;
    report.sum_stderr = sums.stderr_of_mean();
    report.replications = replications;
    return report;
}

}  // namespace rwcalc
