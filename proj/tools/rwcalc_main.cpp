// rwcalc: random-walk construction of Brownian motion and the discrete
// stochastic calculus that comes with it. Subcommands emit flat tables
// (CSV by default, JSON with --format json) to stdout or --out.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwcalc/coin_source.hpp"
#include "rwcalc/discrete_calculus.hpp"
#include "rwcalc/embedding.hpp"
#include "rwcalc/errors.hpp"
#include "rwcalc/harness.hpp"
#include "rwcalc/integrals.hpp"
#include "rwcalc/local_time.hpp"
#include "rwcalc/martingale.hpp"
#include "rwcalc/walks.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
    std::string seed_text = "20260819";
    std::string out;
    std::string format = "csv";
    unsigned threads = 1;

    rwcalc::Seed seed() const { return rwcalc::parse_seed(seed_text); }
};

std::string format_cell(const json& cell) {
    if (cell.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", cell.get<double>());
        return buf;
    }
    return cell.get<std::string>();
}

// Column-named table of numbers/strings, rendered as CSV or JSON.
struct OutputTable {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void row(std::initializer_list<json> cells) { rows.emplace_back(cells); }

    std::string render(const std::string& format) const {
        if (format == "json") {
            json out = json::array();
            for (const auto& r : rows) {
                json obj;
                for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = r[i];
                out.push_back(obj);
            }
            return json{{"rows", out}}.dump(2) + "\n";
        }
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out += columns[i];
            out += i + 1 < columns.size() ? ',' : '\n';
        }
        for (const auto& r : rows)
            for (std::size_t i = 0; i < r.size(); ++i) {
                out += format_cell(r[i]);
                out += i + 1 < r.size() ? ',' : '\n';
            }
        return out;
    }
};

void emit(const GlobalOpts& global, const std::string& rendered) {
    if (global.out.empty()) {
        std::cout << rendered;
        return;
    }
    std::ofstream file(global.out, std::ios::binary);
    if (!file) throw rwcalc::InvalidConfig("cannot open output file: " + global.out);
    file << rendered;
}

double mesh_point(double horizon, std::int64_t j, std::int64_t points) {
    return points <= 1 ? horizon : double(j) * horizon / double(points - 1);
}

void cmd_construct(const GlobalOpts& global, std::uint32_t level, double horizon,
                   std::int64_t grid_t) {
    rwcalc::CoinMatrix coins(global.seed());
    rwcalc::NestedWalks fam = rwcalc::build_nested(coins, level, horizon);
    OutputTable table;
    table.columns = {"t", "value"};
    for (std::int64_t j = 0; j < grid_t; ++j) {
        double t = mesh_point(horizon, j, grid_t);
        table.row({t, fam.level(level).evaluate(t)});
    }
    emit(global, table.render(global.format));
}

void cmd_embed(const GlobalOpts& global, std::uint32_t level, std::uint32_t fine,
               double horizon) {
    rwcalc::CoinMatrix coins(global.seed());
    rwcalc::NestedWalks fam = rwcalc::build_nested(coins, fine, horizon);
    rwcalc::EmbeddedWalk walk = rwcalc::embed_nested(fam, level);
    OutputTable table;
    table.columns = {"k", "s", "value"};
    for (std::int64_t k = 0; k <= walk.crossing_count(); ++k)
        table.row({double(k), walk.stop_times[std::size_t(k)], walk.value(k)});
    emit(global, table.render(global.format));
}

void cmd_localtime(const GlobalOpts& global, std::uint32_t level, double horizon,
                   std::int64_t grid_t) {
    rwcalc::CoinMatrix coins(global.seed());
    rwcalc::NestedWalks fam = rwcalc::build_nested(coins, level, horizon);
    const rwcalc::LatticeWalk& walk = fam.level(level);
    rwcalc::LocalTimeField up = rwcalc::discrete_local_time(walk, rwcalc::Direction::Up, horizon);
    rwcalc::LocalTimeField down =
        rwcalc::discrete_local_time(walk, rwcalc::Direction::Down, horizon);
    double dx = std::ldexp(1.0, -int(level));
    OutputTable table;
    table.columns = {"t", "x", "up", "down"};
    for (std::int64_t j = 0; j <= grid_t; ++j) {
        double t = mesh_point(horizon, j, grid_t + 1);
        for (std::int64_t x = up.x_min(); x <= up.x_max(); ++x) {
            double xv = walk.origin() + double(x) * dx;
            table.row({t, xv, up.evaluate(t, xv), down.evaluate(t, xv)});
        }
    }
    emit(global, table.render(global.format));
}

void cmd_identities(const GlobalOpts& global, std::int64_t count, std::int64_t length) {
    rwcalc::CoinMatrix coins(global.seed());
    std::vector<rwcalc::GridFunction> fns = {
        rwcalc::gridfn::identity(),      rwcalc::gridfn::square(),
        rwcalc::gridfn::abs_shift(0.5),  rwcalc::gridfn::sine(),
        rwcalc::gridfn::indicator(0.25), rwcalc::gridfn::exponential(),
    };
    std::vector<int> signs(static_cast<std::size_t>(length));
    OutputTable table;
    table.columns = {"function", "stratonovich", "ito", "ito_tanaka", "occupation"};
    for (const auto& fn : fns) {
        double worst[4] = {0, 0, 0, 0};
        for (std::int64_t i = 0; i < count; ++i) {
            for (std::int64_t r = 0; r < length; ++r)
                signs[std::size_t(r)] = coins.coin(std::uint32_t(i), r + 1);
            double a = 0.125 * double(i % 5), dx = 0.25;
            worst[0] = std::max(worst[0],
                                std::abs(rwcalc::stratonovich_residual(fn, a, dx, signs)));
            worst[1] = std::max(worst[1], std::abs(rwcalc::ito_residual(fn, a, dx, signs)));
            worst[2] =
                std::max(worst[2], std::abs(rwcalc::ito_tanaka_residual(fn, a, dx, signs)));
            worst[3] =
                std::max(worst[3], std::abs(rwcalc::occupation_residual(fn, a, dx, signs)));
        }
        table.row({fn.name, worst[0], worst[1], worst[2], worst[3]});
    }
    emit(global, table.render(global.format));
}

void cmd_integrate(const GlobalOpts& global, std::uint32_t level, std::uint32_t fine,
                   double horizon, const std::string& function_id, std::int64_t grid_t) {
    rwcalc::CoinMatrix coins(global.seed());
    rwcalc::GridFunction f = rwcalc::gridfn::by_name(function_id);
    rwcalc::NestedWalks fam = rwcalc::build_nested(coins, fine, horizon * 1.25);
    rwcalc::EmbeddedWalk walk = rwcalc::embed_nested(fam, level);
    double window = std::min(
        horizon, std::ldexp(double(walk.crossing_count()), -2 * int(level)));
    OutputTable table;
    table.columns = {"t", "ito", "stratonovich"};
    for (std::int64_t j = 0; j < grid_t; ++j) {
        double t = mesh_point(window, j, grid_t);
        table.row({t, rwcalc::ito_sum(f, walk, t), rwcalc::stratonovich_sum(f, walk, t)});
    }
    emit(global, table.render(global.format));
}

void cmd_isometry(const GlobalOpts& global, std::uint32_t level, const std::string& kernel_id,
                  double truncation, double horizon, std::size_t replications) {
    rwcalc::PredictableSpec spec = rwcalc::parse_kernel(kernel_id, truncation);
    rwcalc::IsometryReport report =
        rwcalc::isometry_check(spec, level, horizon, replications, global.seed());
    OutputTable table;
    table.columns = {"lhs", "rhs", "gap", "se", "sum_mean", "sum_se", "replications"};
    table.row({report.lhs, report.rhs, std::abs(report.lhs - report.rhs), report.stderr_diff,
               report.sum_mean, report.sum_stderr, double(report.replications)});
    emit(global, table.render(global.format));
}

void cmd_martingale(const GlobalOpts& global, const std::string& kind, double scale,
                    const std::string& vol, std::uint32_t level, std::uint32_t fine,
                    double horizon, std::int64_t grid_t) {
    rwcalc::MartingaleSpec spec;
    if (kind == "scaled") {
        spec.kind = rwcalc::MartingaleSpec::Kind::ScaledBrownian;
        spec.c = scale;
    } else if (kind == "vol") {
        spec.kind = rwcalc::MartingaleSpec::Kind::VolatilityIntegral;
        rwcalc::parse_vol_spec(vol, spec.vol_times, spec.vol_values);
    } else {
        throw rwcalc::InvalidConfig("kind must be scaled or vol");
    }
    spec.fine_level = fine;
    spec.horizon = horizon;
    rwcalc::CoinMatrix coins(global.seed());
    rwcalc::RealizedMartingale M = rwcalc::realize_martingale(spec, coins);
    rwcalc::EmbeddedWalk tau = rwcalc::martingale_stopping(M.path, level, M.qv_budget);
    OutputTable table;
    table.columns = {"t", "m_value", "n_m", "qv"};
    for (std::int64_t j = 0; j < grid_t; ++j) {
        double t = mesh_point(horizon, j, grid_t);
        table.row({t, M.path.evaluate(t), rwcalc::discrete_qv(tau, t), M.qv(t)});
    }
    emit(global, table.render(global.format));
}

void cmd_converge(const GlobalOpts& global, rwcalc::ExperimentConfig config,
                  const std::vector<std::string>& rate_metrics) {
    config.seed = global.seed();
    config.threads = global.threads;
    rwcalc::ConvergenceTable table = rwcalc::run_experiment(config);
    emit(global, global.format == "json" ? rwcalc::to_json(table) : rwcalc::to_csv(table));
    for (const std::string& metric : rate_metrics) {
        rwcalc::RateEstimate rate =
            rwcalc::estimate_rate(table, metric, config.min_level, config.max_level);
        std::fprintf(stderr, "rate %s: slope %.4f over %zu levels\n", metric.c_str(),
                     rate.slope, rate.levels);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk Brownian motion and discrete stochastic calculus"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed_text, "base seed (decimal or 0x hex)");
    app.add_option("--out", global.out, "write the table to this file instead of stdout");
    app.add_option("--format", global.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", global.threads, "worker threads for converge");

    std::uint32_t level = 6, fine = 10;
    double horizon = 1.0, truncation = 4.0, scale = 4.0;
    std::int64_t grid_t = 257, count = 64, length = 4096;
    std::string function_id = "square", kernel_id = "w", kind = "scaled", vol;
    std::size_t replications = 256;

    auto* construct = app.add_subcommand("construct", "sample a nested walk's path");
    construct->add_option("--level", level, "walk level");
    construct->add_option("--horizon", horizon, "time horizon");
    construct->add_option("--grid-t", grid_t, "number of sample times");

    auto* embed = app.add_subcommand("embed", "first-crossing times of the fine path");
    embed->add_option("--level", level, "embedded level");
    embed->add_option("--fine", fine, "fine construction level");
    embed->add_option("--horizon", horizon, "time horizon");

    auto* localtime = app.add_subcommand("localtime", "crossing counts per site");
    localtime->add_option("--level", level, "walk level");
    localtime->add_option("--horizon", horizon, "time horizon");
    localtime->add_option("--grid-t", grid_t, "number of time rows (plus t = 0)");

    auto* identities = app.add_subcommand("identities", "exact pathwise identity residuals");
    identities->add_option("--count", count, "number of sign sequences");
    identities->add_option("--length", length, "steps per sequence");

    auto* integrate = app.add_subcommand("integrate", "running stochastic sums");
    integrate->add_option("--level", level, "walk level");
    integrate->add_option("--fine", fine, "fine construction level");
    integrate->add_option("--horizon", horizon, "time horizon");
    integrate->add_option("--function", function_id, "integrand id");
    integrate->add_option("--grid-t", grid_t, "number of sample times");

    auto* isometry = app.add_subcommand("isometry", "second-moment identity check");
    isometry->add_option("--level", level, "walk level");
    isometry->add_option("--kernel", kernel_id, "kernel id (w, sin_w, t_w, ind_pos, const)");
    isometry->add_option("--truncation", truncation, "kernel clamp");
    isometry->add_option("--horizon", horizon, "time horizon");
    isometry->add_option("--reps", replications, "Monte Carlo replications");

    auto* martingale = app.add_subcommand("martingale", "time-changed martingale clocks");
    martingale->add_option("--kind", kind, "scaled or vol");
    martingale->add_option("--c", scale, "clock rate for kind=scaled");
    martingale->add_option("--vol", vol, "t0:h0,t1:h1,... for kind=vol");
    martingale->add_option("--level", level, "crossing level");
    martingale->add_option("--fine", fine, "driver level");
    martingale->add_option("--horizon", horizon, "time horizon");
    martingale->add_option("--grid-t", grid_t, "number of sample times");

    rwcalc::ExperimentConfig config;
    std::vector<std::string> rate_metrics;
    auto* converge = app.add_subcommand("converge", "convergence experiment tables");
    converge->add_option("--experiment", config.experiment,
                         "brownian_suite, qv, time_change, or isometry");
    converge->add_option("--min-level", config.min_level, "smallest level");
    converge->add_option("--max-level", config.max_level, "largest level");
    converge->add_option("--fine-level", config.fine_level, "reference / driver level");
    converge->add_option("--horizon", config.horizon, "time horizon");
    converge->add_option("--margin", config.build_margin, "construction margin");
    converge->add_option("--reps", config.replications, "replications");
    converge->add_option("--function", config.function_id, "integrand id");
    converge->add_option("--kernel", config.kernel_id, "predictable kernel id");
    converge->add_option("--truncation", config.truncation, "kernel clamp");
    converge->add_option("--scale", config.mart_scale, "martingale clock rate");
    converge->add_option("--kind", config.mart_kind, "martingale kind");
    converge->add_option("--vol", config.vol_spec, "volatility description");
    converge->add_option("--rate", rate_metrics, "report a decay slope for this metric");

    for (CLI::App* sub : {construct, embed, localtime, identities, integrate, isometry,
                          martingale, converge})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (construct->parsed()) cmd_construct(global, level, horizon, grid_t);
        if (embed->parsed()) cmd_embed(global, level, fine, horizon);
        if (localtime->parsed()) cmd_localtime(global, level, horizon, grid_t);
        if (identities->parsed()) cmd_identities(global, count, length);
        if (integrate->parsed()) cmd_integrate(global, level, fine, horizon, function_id, grid_t);
        if (isometry->parsed())
            cmd_isometry(global, level, kernel_id, truncation, horizon, replications);
        if (martingale->parsed())
            cmd_martingale(global, kind, scale, vol, level, fine, horizon, grid_t);
        if (converge->parsed()) cmd_converge(global, config, rate_metrics);
    } catch (const rwcalc::StepBudgetExceeded& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const rwcalc::InvalidConfig& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
