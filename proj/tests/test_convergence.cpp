#include <catch2/catch_amalgamated.hpp>

// Moderate-size statistical runs: decay rates of the level sweeps, the
// equidistribution diagnostic across seeds, and the second-moment identity
// at Monte Carlo scale. Everything is seeded, so outcomes are reproducible.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rwcalc/coin_source.hpp"
#include "rwcalc/embedding.hpp"
#include "rwcalc/harness.hpp"
#include "rwcalc/integrals.hpp"
#include "rwcalc/numeric.hpp"
#include "rwcalc/walks.hpp"

using namespace rwcalc;

TEST_CASE("crossing times equidistribute within the diagnostic bound") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CoinMatrix coins(Seed{seed});
        NestedWalks fam = build_nested(coins, 8, 1.25);
        EquidReport rep = equid_diagnostic(fam, 4, 8, 1.0, 2.0);
        INFO("seed " << seed << " lag " << rep.max_lag << " bound " << rep.bound);
        CHECK(rep.within);
        CHECK(rep.max_lag > 0.0);
    }
}

TEST_CASE("walk suite decay rates sit in their expected bands") {
    ExperimentConfig cfg;
    cfg.experiment = "brownian_suite";
    cfg.seed = Seed{424242};
    cfg.min_level = 2;
    cfg.max_level = 8;
    cfg.fine_level = 10;
    cfg.horizon = 1.0;
    cfg.build_margin = 1.25;
    cfg.replications = 8;
    ConvergenceTable table = run_experiment(cfg);

    // path sup-distance to the reference decays like a square root or better
    RateEstimate bm = estimate_rate(table, "bm_sup", 3, 8);
    INFO("bm_sup slope " << bm.slope);
    CHECK(bm.levels == 6);
    CHECK(bm.slope < -0.15);
    CHECK(bm.slope > -1.0);

    // stopping-time lag collapses about linearly in the level
    RateEstimate lag = estimate_rate(table, "lag_sup", 2, 8);
    INFO("lag_sup slope " << lag.slope);
    CHECK(lag.slope < -0.6);

    // local-time field converges to the fine reference
    RateEstimate lt = estimate_rate(table, "localtime_sup", 3, 7);
    INFO("localtime_sup slope " << lt.slope);
    CHECK(lt.slope < -0.1);

    // convex-difference identities track the reference at matching rates
    RateEstimate ab = estimate_rate(table, "itotanaka_abs_sup", 3, 7);
    RateEstimate sq = estimate_rate(table, "itotanaka_sq_sup", 3, 7);
    INFO("itotanaka slopes " << ab.slope << " " << sq.slope);
    CHECK(ab.slope < -0.1);
    CHECK(sq.slope < -0.1);

    // structural identities stay exact at every level and replication
    for (const TableRow& row : table.rows) {
        INFO(row.metric << " @ " << row.level);
        if (row.metric == "refine_violations") CHECK(row.value == 0.0);
        if (row.metric == "occ_mass_dev") CHECK(row.value == 0.0);
        if (row.metric == "tanaka_resid") CHECK(row.value == 0.0);
        if (row.metric == "ito_relerr") CHECK(row.value <= 1e-12);
    }

    // medians stay under the analytic sup-error envelope
    std::map<std::uint32_t, std::vector<double>> sup_by_level;
    for (const TableRow& row : table.rows)
        if (row.metric == "bm_sup") sup_by_level[row.level].push_back(row.value);
    for (std::uint32_t m : {6u, 8u}) {
        std::vector<double> v = sup_by_level.at(m);
        double med = median(v);
        double bound = 27.0 * std::pow(double(m), 0.75) * std::ldexp(1.0, -int(m) / 2);
        INFO("level " << m << " median " << med << " bound " << bound);
        CHECK(med <= bound);
    }
}

TEST_CASE("discrete clock of a scaled martingale converges to its ramp") {
    ExperimentConfig cfg;
    cfg.experiment = "qv";
    cfg.seed = Seed{777};
    cfg.min_level = 4;
    cfg.max_level = 7;
    cfg.fine_level = 9;
    cfg.horizon = 1.0;
    cfg.build_margin = 1.0625;
    cfg.replications = 8;
    cfg.mart_scale = 4.0;
    ConvergenceTable table = run_experiment(cfg);

    RateEstimate qv = estimate_rate(table, "qv_dev", 4, 7);
    INFO("qv_dev slope " << qv.slope);
    CHECK(qv.slope < -0.6);
    CHECK(qv.slope > -1.4);
    for (const TableRow& row : table.rows)
        if (row.metric == "mart_lt") CHECK(row.value >= 0.0);
}

TEST_CASE("crossing sums survive a volatility time change") {
    ExperimentConfig cfg;
    cfg.experiment = "time_change";
    cfg.seed = Seed{31415};
    cfg.min_level = 3;
    cfg.max_level = 5;
    cfg.fine_level = 8;
    cfg.horizon = 1.0;
    cfg.build_margin = 1.0625;
    cfg.replications = 8;
    cfg.function_id = "sign:0.25";
    cfg.mart_kind = "vol";
    cfg.vol_spec = "0:1,0.5:2";
    ConvergenceTable table = run_experiment(cfg);

    // the crossing clock rides the quadratic variation, so the substitution
    // is exact up to at most a one-increment boundary flip
    for (const TableRow& row : table.rows) {
        INFO(row.metric << " @ " << row.level << " = " << row.value);
        if (row.metric == "tc_resid")
            CHECK(row.value <= std::ldexp(1.0, -int(row.level)));
        if (row.metric == "tc_one_dev")
            CHECK(row.value <= std::ldexp(1.0, -int(row.level)));
    }
}

TEST_CASE("second-moment identity holds at Monte Carlo scale") {
    PredictableSpec spec = parse_kernel("w", 3.0);
    IsometryReport rep = isometry_check(spec, 5, 1.0, 400, Seed{20260819});
    INFO("lhs " << rep.lhs << " rhs " << rep.rhs << " se " << rep.stderr_diff);
    CHECK(rep.replications == 400);
    CHECK(std::abs(rep.lhs - rep.rhs) <= 4.0 * rep.stderr_diff);
    INFO("sum mean " << rep.sum_mean << " se " << rep.sum_stderr);
    CHECK(std::abs(rep.sum_mean) <= 4.0 * rep.sum_stderr);
    CHECK(rep.rhs > 0.0);
}
