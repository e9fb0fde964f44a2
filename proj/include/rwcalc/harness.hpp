#pragma once

// Convergence experiments: run a catalog of level sweeps against a reference
// level, collect per-replication metrics into a flat table, serialize it, and
// estimate decay rates. Tables are deterministic for a given config: the
// thread count only changes scheduling, never values or row order.

#include <cstdint>
#include <string>
#include <vector>

#include "rwcalc/coin_source.hpp"

namespace rwcalc {

struct ExperimentConfig {
    std::string experiment = "brownian_suite";
    Seed seed{20260819};
    std::uint32_t min_level = 2;
    std::uint32_t max_level = 8;
    std::uint32_t fine_level = 10;  // reference / driver level
    double horizon = 1.0;
    double build_margin = 1.25;     // construction covers horizon * margin
    std::size_t replications = 8;
    std::string function_id = "sign:0.25";  // integrand for time_change
    std::string kernel_id = "w";            // predictable kernel for isometry
    double truncation = 4.0;                // kernel clamp
    double mart_scale = 4.0;                // clock rate of the scaled martingale
    std::string mart_kind = "scaled";       // "scaled" | "vol"
    std::string vol_spec;                   // "t0:h0,t1:h1,..." for mart_kind=vol
    unsigned threads = 1;
};

struct TableRow {
    std::string experiment;
    std::uint32_t level = 0;
    std::uint64_t seed = 0;  // derived per-replication seed
    std::string metric;
    double value = 0;
};

struct ConvergenceTable {
    std::vector<TableRow> rows;
};

std::vector<std::string> experiment_ids();

// Dispatches on config.experiment:
//  - "brownian_suite": one nested family per replication; per-level rows for
//    refinement violations, path sup-distance to the reference level,
//    stopping-time lag (and the realized window), local-time sup-distance,
//    max local time, convex-difference identity sup gaps, the Tanaka
//    residual, and the relative error of the closed-form quadratic identity.
//  - "qv": scaled martingale per replication; per-level sup deviation of the
//    crossing-count clock from the true one, plus the crossing local time.
//  - "time_change": crossing sums of a martingale against the same sums along
//    its recovered Brownian path, plus the f = 1 telescoping deviation.
//  - "isometry": second-moment identity for a predictable kernel; one batch
//    of replications per level.
ConvergenceTable run_experiment(const ExperimentConfig& config);

std::string to_csv(const ConvergenceTable& table);
ConvergenceTable from_csv(const std::string& text);
std::string to_json(const ConvergenceTable& table);

struct RateEstimate {
    double slope = 0;        // least-squares slope of log2(median) against level
    std::size_t levels = 0;  // distinct levels that entered the fit
};

// Median over replications per level, then a log2 regression. Throws
// InsufficientData with fewer than two levels, NonPositiveMetric when a
// median is not positive.
RateEstimate estimate_rate(const ConvergenceTable& table, const std::string& metric,
                           std::uint32_t min_level, std::uint32_t max_level);

// "0:1,0.25:0.5,0.5:2" -> breakpoint times and volatility values.
void parse_vol_spec(const std::string& text, std::vector<double>& times,
                    std::vector<double>& values);

}  // namespace rwcalc
