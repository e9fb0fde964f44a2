#pragma once

// Continuous martingales driven by a Brownian path: a catalog of time changes
// (scaled Brownian motion, volatility integrals with piecewise-constant
// volatility), their quadratic variation, the underlying Brownian path
// recovered by running the martingale on its quadratic-variation clock, and
// walk approximations read off first-crossing times of the martingale itself.

#include <cstdint>
#include <memory>
#include <vector>

#include "rwcalc/coin_source.hpp"
#include "rwcalc/discrete_calculus.hpp"
#include "rwcalc/embedding.hpp"
#include "rwcalc/integrals.hpp"
#include "rwcalc/local_time.hpp"
#include "rwcalc/walks.hpp"

namespace rwcalc {

struct MartingaleSpec {
    enum class Kind { ScaledBrownian, VolatilityIntegral };
    Kind kind = Kind::ScaledBrownian;

    // ScaledBrownian: M(t) = W(c t).
    double c = 1.0;

    // VolatilityIntegral: M(t) = sum of vol(s) dW(s) with vol piecewise
    // constant; vol_times must start at 0 and increase, vol_values[i] applies
    // on [vol_times[i], vol_times[i+1]). Breakpoints are snapped to the
    // driver's grid so increments split exactly at them.
    std::vector<double> vol_times;
    std::vector<double> vol_values;

    std::uint32_t fine_level = 10;  // level of the driving walk
    double horizon = 1.0;           // M is needed on [0, horizon]
    double margin = 1.0625;         // driver covers horizon * margin
};

// Piecewise-linear nondecreasing clock v = qv(t) with qv(0) = 0.
class QuadraticVariationFn {
  public:
    QuadraticVariationFn(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;  // clamped to [0, total] outside the knots
    // First t with qv(t) = v. Throws BeyondTotalQV when v > total.
    double inverse(double v) const;
    double total() const { return values_.back(); }

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> times_, values_, slopes_;
};

struct RealizedMartingale {
    MartingaleSpec spec;
    std::shared_ptr<const NestedWalks> family;  // driving construction
    PiecewisePath path;                         // M on [0, covered horizon]
    QuadraticVariationFn qv;                    // on the same range
    double qv_budget = 0;                       // qv at the covered horizon
};

// Builds the driving walk family at spec.fine_level and assembles M, its
// quadratic variation, and the covered budget.
RealizedMartingale realize_martingale(const MartingaleSpec& spec, const CoinMatrix& coins);

// The path v -> M(inverse clock at v) on [0, qv_budget]: the Brownian motion
// hiding inside M. For ScaledBrownian this is literally the driver's path.
PiecewisePath dds_path(const RealizedMartingale& M);

// First t with qv(t) = v.
double dds_inverse(const RealizedMartingale& M, double v);

// First-crossing walk of the martingale itself: successive hits of +-2^-m
// barriers along `path`. `qv_budget` sets the crossing target (about
// qv_budget * 4^m of them); the scan stops early at the end of the path.
EmbeddedWalk martingale_stopping(const PiecewisePath& path, std::uint32_t m,
                                 double qv_budget);

// 2^-2m * (number of crossings completed by time t).
double discrete_qv(const EmbeddedWalk& tau_walk, double t);

// Exact sup over [0, t_max] of |discrete_qv(t) - qv(t)|: the maximum is
// attained just before or at a crossing time, or at t_max.
double qv_max_deviation(const EmbeddedWalk& tau_walk, const QuadraticVariationFn& qv,
                        double t_max);

// sum f(M(tau_{r-1})) 2^-m dM over crossings with tau_r <= t (the crossing
// clock of the martingale runs on its quadratic variation, so the cutoff is
// by stop time, not by index).
double ito_sum_m(const GridFunction& f, const EmbeddedWalk& tau_walk, double t);

// ito_sum_m(f, ., t) minus the same sum along the recovered Brownian path cut
// at qv(t). Exactly zero when the time change maps crossings one-to-one,
// e.g. for ScaledBrownian with dyadic c.
double time_change_residual(const GridFunction& f, const RealizedMartingale& M,
                            std::uint32_t m, double t);

// Crossing counts of the tau-walk on its own index clock; evaluate through
// eval_martingale_local_time to query at martingale times.
LocalTimeField martingale_local_time(const EmbeddedWalk& tau_walk, Direction direction);

double eval_martingale_local_time(const LocalTimeField& field,
                                  const EmbeddedWalk& tau_walk, double t, double x);

}  // namespace rwcalc
