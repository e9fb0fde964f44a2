#include "rwcalc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rwcalc/discrete_calculus.hpp"
#include "rwcalc/embedding.hpp"
#include "rwcalc/errors.hpp"
#include "rwcalc/integrals.hpp"
#include "rwcalc/local_time.hpp"
#include "rwcalc/martingale.hpp"
#include "rwcalc/numeric.hpp"
#include "rwcalc/walks.hpp"

namespace rwcalc {

namespace {

// Runs work(0..count-1), each index exactly once. Callers write results into
// per-index slots, so the schedule cannot affect the merged output.
void for_each_index(std::size_t count, unsigned threads,
                    const std::function<void(std::size_t)>& work) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                work(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned spawn = std::min<unsigned>(threads, unsigned(count));
    pool.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

void push_row(std::vector<TableRow>& rows, const std::string& experiment,
              std::uint32_t level, std::uint64_t seed, const char* metric, double value) {
    rows.push_back({experiment, level, seed, metric, value});
}

// Largest grid index covered by time t at the given level.
std::int64_t grid_steps(double t, std::uint32_t level) {
    return std::int64_t(std::floor(std::ldexp(t, 2 * int(level))));
}

// sup_t |level-m path - reference path| over every knot of the reference
// grid in [0, K]; exact for piecewise-linear paths. Integer arithmetic.
double path_sup_distance(const LatticeWalk& coarse, const LatticeWalk& fine, double K) {
    const std::uint32_t m = coarse.level(), n = fine.level();
    const std::int64_t span = std::int64_t(1) << (2 * (n - m));
    const std::int64_t km = grid_steps(K, m);
    const auto& cp = coarse.positions();
    const auto& fp = fine.positions();
    std::int64_t sup = 0;
    for (std::int64_t k = 0; k < km; ++k) {
        auto a = std::int64_t(cp[std::size_t(k)]);
        auto d = std::int64_t(cp[std::size_t(k) + 1]) - a;
        std::int64_t lerp = a * span;
        const std::int32_t* f = fp.data() + k * span;
        const std::int64_t scale = std::int64_t(1) << (n - m);
        for (std::int64_t j = 0; j < span; ++j, lerp += d) {
            std::int64_t diff = std::int64_t(f[j]) * scale - lerp;
            sup = std::max(sup, diff < 0 ? -diff : diff);
        }
    }
    std::int64_t last = km * span;
    std::int64_t end = std::int64_t(fp[std::size_t(last)]) * (std::int64_t(1) << (n - m)) -
                       std::int64_t(cp[std::size_t(km)]) * span;
    sup = std::max(sup, end < 0 ? -end : end);
    return std::ldexp(double(sup), int(m) - 2 * int(n));
}

std::vector<TableRow> brownian_rep(const ExperimentConfig& cfg, std::size_t rep) {
    const Seed seed = derive_seed(cfg.seed, rep);
    CoinMatrix coins(seed);
    const std::uint32_t n = cfg.fine_level;
    const double K = cfg.horizon;
    NestedWalks fam = build_nested(coins, n, K * cfg.build_margin);

    std::vector<TableRow> rows;
    auto put = [&](std::uint32_t m, const char* metric, double v) {
        push_row(rows, cfg.experiment, m, seed.value, metric, v);
    };

    const std::uint32_t mcap = std::min(cfg.max_level, n - 1);
    LocalTimeField fine_field = discrete_local_time(fam.level(n), Direction::Both, K);
    const LatticeWalk& ref = fam.level(n);
    const ConvexDiffSpec spec_abs = convex_abs(0.0);
    const ConvexDiffSpec spec_sq = convex_square();
    const GridFunction ident = gridfn::identity();

    for (std::uint32_t m = cfg.min_level; m <= mcap; ++m) {
        const double dx = std::ldexp(1.0, -int(m));
        const double dt = std::ldexp(1.0, -2 * int(m));
        const std::int64_t km = grid_steps(K, m);

        // refinement: the next level, sampled at its bridge closes, doubles
        // this level's lattice positions
        {
            const auto& cp = fam.level(m).positions();
            const auto& np = fam.level(m + 1).positions();
            const auto& T = fam.bridge_times(m + 1).entries;
            std::int64_t kmax = std::min<std::int64_t>(km, std::int64_t(T.size()) - 1);
            std::int64_t bad = 0;
            for (std::int64_t k = 0; k <= kmax; ++k)
                bad += np[std::size_t(T[std::size_t(k)])] != 2 * cp[std::size_t(k)];
            put(m, "refine_violations", double(bad));
        }

        put(m, "bm_sup", path_sup_distance(fam.level(m), fam.level(n), K));

        EmbeddedWalk emb = embed_nested(fam, m);
        const std::int64_t kstar = std::min(km, emb.crossing_count());
        const double tstar = double(kstar) * dt;

        if (m >= 1 && m <= 10) {
            double lag = 0;
            for (std::int64_t r = 0; r <= kstar; ++r)
                lag = std::max(lag, std::abs(emb.stop_times[std::size_t(r)] - double(r) * dt));
            put(m, "lag_sup", lag);
            put(m, "lag_window", tstar);
        }

        {
            double v = emb.value(kstar), o = emb.value(0);
            double closed = 0.5 * (v * v - o * o - double(kstar) * dt);
            double got = ito_sum(ident, emb, tstar);
            put(m, "ito_relerr", std::abs(got - closed) / (1 + std::abs(closed)));
        }

        if (m >= 2 && m <= 10) {
            LocalTimeField up = discrete_local_time(fam.level(m), Direction::Up, K);
            LocalTimeField down = discrete_local_time(fam.level(m), Direction::Down, K);

            double lt_max = 0;
            for (std::int64_t x = up.x_min(); x <= up.x_max(); ++x)
                lt_max = std::max(lt_max,
                                  double(up.count_before(x, km) + down.count_before(x, km)) * dx);
            put(m, "lt_max", lt_max);

            // total crossing mass recovers elapsed time exactly: every step of
            // the walk is one up or one down event at some site
            {
                double mass_dev = 0;
                for (std::int64_t k : {std::int64_t(1), km / 4, km / 2, km}) {
                    if (k < 1) continue;
                    std::int64_t total = 0;
                    for (std::int64_t x = up.x_min(); x <= up.x_max(); ++x)
                        total += up.count_before(x, k) + down.count_before(x, k);
                    mass_dev = std::max(mass_dev,
                                        std::abs(double(total) * dt - double(k) * dt));
                }
                put(m, "occ_mass_dev", mass_dev);
            }

            if (m <= 9) {
                double sup = 0;
                double origin = fam.level(m).origin();
                for (std::int64_t j = 0; j <= 256; ++j) {
                    double t = double(j) * K / 256.0;
                    for (std::int64_t x = up.x_min() - 2; x <= up.x_max() + 2; ++x) {
                        double xv = origin + double(x) * dx;
                        double coarse = up.evaluate(t, xv) + down.evaluate(t, xv);
                        sup = std::max(sup, std::abs(coarse - fine_field.evaluate(t, xv)));
                    }
                }
                put(m, "localtime_sup", sup);
            }

            if (m <= 9) {
                ItoTanakaEvaluator eval_abs(spec_abs, emb, up, down);
                ItoTanakaEvaluator eval_sq(spec_sq, emb, up, down);
                const double g0 = ref.origin();
                double sup_abs = 0, sup_sq = 0;
                for (std::int64_t j = 0; j <= 4096; ++j) {
                    double t = double(j) * tstar / 4096.0;
                    double w = ref.evaluate(t);
                    double va = spec_abs.g(w) - spec_abs.g(g0);
                    double vs = spec_sq.g(w) - spec_sq.g(g0);
                    sup_abs = std::max(sup_abs, std::abs(va - eval_abs.at(t).full_rhs));
                    sup_sq = std::max(sup_sq, std::abs(vs - eval_sq.at(t).full_rhs));
                }
                put(m, "itotanaka_abs_sup", sup_abs);
                put(m, "itotanaka_sq_sup", sup_sq);
            }

            put(m, "tanaka_resid", std::abs(tanaka_check(emb, up, down, 0.0, tstar)));
        }
    }

    // the closed-form check is cheap, so push it past max_level up to the
    // reference level itself
    for (std::uint32_t m = mcap + 1; m <= n; ++m) {
        EmbeddedWalk emb = embed_nested(fam, m);
        const double dt = std::ldexp(1.0, -2 * int(m));
        const std::int64_t kstar = std::min(grid_steps(K, m), emb.crossing_count());
        double v = emb.value(kstar), o = emb.value(0);
        double closed = 0.5 * (v * v - o * o - double(kstar) * dt);
        double got = ito_sum(ident, emb, double(kstar) * dt);
        put(m, "ito_relerr", std::abs(got - closed) / (1 + std::abs(closed)));
    }
    return rows;
}

MartingaleSpec martingale_spec_from(const ExperimentConfig& cfg) {
    MartingaleSpec ms;
    if (cfg.mart_kind == "scaled") {
        ms.kind = MartingaleSpec::Kind::ScaledBrownian;
        ms.c = cfg.mart_scale;
    } else if (cfg.mart_kind == "vol") {
        ms.kind = MartingaleSpec::Kind::VolatilityIntegral;
        parse_vol_spec(cfg.vol_spec, ms.vol_times, ms.vol_values);
    } else {
        throw InvalidConfig("unknown martingale kind: " + cfg.mart_kind);
    }
    ms.fine_level = cfg.fine_level;
    ms.horizon = cfg.horizon;
    ms.margin = cfg.build_margin;
    return ms;
}

std::vector<TableRow> qv_rep(const ExperimentConfig& cfg, std::size_t rep) {
    const Seed seed = derive_seed(cfg.seed, rep);
    CoinMatrix coins(seed);
    RealizedMartingale M = realize_martingale(martingale_spec_from(cfg), coins);

    std::vector<TableRow> rows;
    for (std::uint32_t m = cfg.min_level; m <= cfg.max_level; ++m) {
        EmbeddedWalk tau = martingale_stopping(M.path, m, M.qv_budget);
        push_row(rows, cfg.experiment, m, seed.value, "qv_dev",
                 qv_max_deviation(tau, M.qv, cfg.horizon));
        LocalTimeField field = martingale_local_time(tau, Direction::Both);
        push_row(rows, cfg.experiment, m, seed.value, "mart_lt",
                 eval_martingale_local_time(field, tau, cfg.horizon, 0.25));
    }
    return rows;
}

std::vector<TableRow> time_change_rep(const ExperimentConfig& cfg, std::size_t rep) {
    const Seed seed = derive_seed(cfg.seed, rep);
    CoinMatrix coins(seed);
    RealizedMartingale M = realize_martingale(martingale_spec_from(cfg), coins);
    const GridFunction f = gridfn::by_name(cfg.function_id);
    const GridFunction one{"one", [](double) { return 1.0; }};
    const PiecewisePath beta_path = dds_path(M);
    const double t = cfg.horizon;

    std::vector<TableRow> rows;
    for (std::uint32_t m = cfg.min_level; m <= cfg.max_level; ++m) {
        EmbeddedWalk tau = martingale_stopping(M.path, m, M.qv_budget);
        EmbeddedWalk beta = skorohod_embed(beta_path, m, M.qv_budget);
        double resid = ito_sum_by_time(f, tau, t) - ito_sum_by_time(f, beta, M.qv(t));
        push_row(rows, cfg.experiment, m, seed.value, "tc_resid", std::abs(resid));
        double dev = ito_sum_by_time(one, tau, t) - (M.path.evaluate(t) - tau.origin);
        push_row(rows, cfg.experiment, m, seed.value, "tc_one_dev", std::abs(dev));
    }
    return rows;
}

ConvergenceTable run_isometry(const ExperimentConfig& cfg) {
    PredictableSpec spec = parse_kernel(cfg.kernel_id, cfg.truncation);
    ConvergenceTable table;
    for (std::uint32_t m = cfg.min_level; m <= cfg.max_level; ++m) {
        IsometryReport report =
            isometry_check(spec, m, cfg.horizon, cfg.replications, cfg.seed);
        auto put = [&](const char* metric, double v) {
            push_row(table.rows, cfg.experiment, m, cfg.seed.value, metric, v);
        };
        put("iso_lhs", report.lhs);
        put("iso_rhs", report.rhs);
        put("iso_gap", std::abs(report.lhs - report.rhs));
        put("iso_se", report.stderr_diff);
        put("iso_sum_mean", report.sum_mean);
        put("iso_sum_se", report.sum_stderr);
    }
    return table;
}

ConvergenceTable run_replicated(
    const ExperimentConfig& cfg,
    const std::function<std::vector<TableRow>(const ExperimentConfig&, std::size_t)>& rep_fn) {
    std::vector<std::vector<TableRow>> slots(cfg.replications);
    for_each_index(cfg.replications, cfg.threads,
                   [&](std::size_t rep) { slots[rep] = rep_fn(cfg, rep); });
    ConvergenceTable table;
    for (auto& slot : slots)
        table.rows.insert(table.rows.end(), std::make_move_iterator(slot.begin()),
                          std::make_move_iterator(slot.end()));
    return table;
}

}  // namespace

std::vector<std::string> experiment_ids() {
    return {"brownian_suite", "qv", "time_change", "isometry"};
}

ConvergenceTable run_experiment(const ExperimentConfig& cfg) {
    if (cfg.min_level > cfg.max_level) throw InvalidConfig("min_level exceeds max_level");
    if (!(cfg.horizon > 0)) throw InvalidConfig("horizon must be positive");
    if (!(cfg.build_margin >= 1)) throw InvalidConfig("build margin must be at least 1");
    if (cfg.replications == 0) throw InvalidConfig("need at least one replication");

    if (cfg.experiment == "brownian_suite") {
        if (cfg.fine_level <= cfg.max_level)
            throw InvalidConfig("reference level must exceed max_level");
        return run_replicated(cfg, brownian_rep);
    }
    if (cfg.experiment == "qv" || cfg.experiment == "time_change") {
        if (cfg.fine_level < cfg.max_level + 2)
            throw InvalidConfig("driver level must exceed max_level by at least 2");
        return run_replicated(cfg, cfg.experiment == "qv" ? qv_rep : time_change_rep);
    }
    if (cfg.experiment == "isometry") return run_isometry(cfg);
    throw InvalidConfig("unknown experiment: " + cfg.experiment);
}

std::string to_csv(const ConvergenceTable& table) {
    std::string out = "experiment,level,seed,metric,value\n";
    char buf[192];
    for (const TableRow& row : table.rows) {
        std::snprintf(buf, sizeof buf, ",%u,%llu,", row.level,
                      static_cast<unsigned long long>(row.seed));
        out += row.experiment;
        out += buf;
        out += row.metric;
        std::snprintf(buf, sizeof buf, ",%.17g\n", row.value);
        out += buf;
    }
    return out;
}

ConvergenceTable from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "experiment,level,seed,metric,value")
        throw InvalidConfig("unrecognized table header");
    ConvergenceTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t p0 = line.find(',');
        std::size_t p1 = line.find(',', p0 + 1);
        std::size_t p2 = line.find(',', p1 + 1);
        std::size_t p3 = line.find(',', p2 + 1);
        if (p0 == std::string::npos || p1 == std::string::npos ||
            p2 == std::string::npos || p3 == std::string::npos)
            throw InvalidConfig("malformed table row: " + line);
        TableRow row;
        row.experiment = line.substr(0, p0);
        row.level = std::uint32_t(std::strtoul(line.c_str() + p0 + 1, nullptr, 10));
        row.seed = std::strtoull(line.c_str() + p1 + 1, nullptr, 10);
        row.metric = line.substr(p2 + 1, p3 - p2 - 1);
        row.value = std::strtod(line.c_str() + p3 + 1, nullptr);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string to_json(const ConvergenceTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const TableRow& row : table.rows)
        rows.push_back({{"experiment", row.experiment},
                        {"level", row.level},
                        {"seed", row.seed},
                        {"metric", row.metric},
                        {"value", row.value}});
    return nlohmann::json{{"rows", rows}}.dump(2) + "\n";
}

RateEstimate estimate_rate(const ConvergenceTable& table, const std::string& metric,
                           std::uint32_t min_level, std::uint32_t max_level) {
    std::map<std::uint32_t, std::vector<double>> by_level;
    for (const TableRow& row : table.rows)
        if (row.metric == metric && row.level >= min_level && row.level <= max_level &&
            std::isfinite(row.value))
            by_level[row.level].push_back(row.value);
    std::vector<double> xs, ys;
    for (auto& [level, values] : by_level) {
        double med = median(values);
        if (!(med > 0))
            throw NonPositiveMetric("metric " + metric + " has nonpositive median at level " +
                                    std::to_string(level));
        xs.push_back(double(level));
        ys.push_back(std::log2(med));
    }
    if (by_level.size() < 3)
        throw InsufficientData("rate fit needs at least three levels of metric " + metric);
    return {ls_slope(xs, ys), by_level.size()};
}

void parse_vol_spec(const std::string& text, std::vector<double>& times,
                    std::vector<double>& values) {
    times.clear();
    values.clear();
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw InvalidConfig("volatility entries look like t:h, got: " + item);
        try {
            times.push_back(std::stod(item.substr(0, colon)));
            values.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw InvalidConfig("bad volatility entry: " + item);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (times.empty()) throw InvalidConfig("empty volatility description");
}

}  // namespace rwcalc
