#pragma once

// Stochastic sums along embedded walks: Ito and Stratonovich approximations,
// the Ito-Tanaka right-hand side for convex-difference functions, Tanaka and
// occupation-time cross-checks, and simple predictable integrands with the
// discrete isometry. All sums use compensated accumulation.

#include <cstdint>
#include <vector>

#include "rwcalc/coin_source.hpp"
#include "rwcalc/discrete_calculus.hpp"
#include "rwcalc/embedding.hpp"
#include "rwcalc/local_time.hpp"

namespace rwcalc {

// sum_{r <= floor(t 4^m)} f(value(r-1)) 2^-m X(r). Throws OutOfHorizon when
// the cutoff exceeds the walk's crossings.
double ito_sum(const GridFunction& f, const EmbeddedWalk& walk, double t);

// Same sum, but over the crossings completed by path time s: r with
// stop_times(r) <= s. This is the natural cutoff when the walk's clock is
// read off another process (see the martingale layer).
double ito_sum_by_time(const GridFunction& f, const EmbeddedWalk& walk, double s);

// sum_{r <= floor(t 4^m)} (f(value(r-1)) + f(value(r)))/2 2^-m X(r).
double stratonovich_sum(const GridFunction& f, const EmbeddedWalk& walk, double t);

// Running prefix of ito_sum at every grid index k = 0..max_k;
// prefix[k] equals ito_sum(f, walk, k 2^-2m).
std::vector<double> ito_sum_prefix(const GridFunction& f, const EmbeddedWalk& walk,
                                   std::int64_t max_k);

// A function of the walk's value written as a difference of convex functions:
// g itself, its left derivative, and the curvature measure g'' as point
// masses plus a piecewise-constant density.
struct MeasureAtom {
    double location = 0;
    double mass = 0;
};
struct DensityPiece {
    double lo = 0, hi = 0;  // half-open in spirit; lattice trapezoid in practice
    double density = 0;
};
struct ConvexDiffSpec {
    GridFunction g;
    GridFunction left_derivative;
    std::vector<MeasureAtom> atoms;
    std::vector<DensityPiece> pieces;
    double support_bound = 1e300;
};

ConvexDiffSpec convex_abs(double a);     // |x - a|,  curvature 2 delta_a
ConvexDiffSpec convex_square();          // x^2,      curvature density 2
ConvexDiffSpec convex_linear(double alpha, double beta);  // alpha + beta x

struct ItoTanakaTerms {
    double integral_term = 0;  // integral of L(t, x) against the curvature measure
    double full_rhs = 0;       // ito_sum(left derivative) + integral_term / 2
};

// Precomputes prefix tables so `at` is cheap; the walk and fields must
// outlive the evaluator. `up`/`down` are the one-sided fields of `walk`.
class ItoTanakaEvaluator {
  public:
    ItoTanakaEvaluator(const ConvexDiffSpec& spec, const EmbeddedWalk& walk,
                       const LocalTimeField& up, const LocalTimeField& down);
    ItoTanakaTerms at(double t) const;

  private:
    struct PieceTable {
        std::vector<std::int64_t> steps;  // event step indices, ascending
        std::vector<double> wcum;         // prefix sums of trapezoid weights
        double density = 0;
    };

    const EmbeddedWalk* walk_;
    const LocalTimeField* up_;
    const LocalTimeField* down_;
    std::vector<MeasureAtom> atoms_;
    std::vector<double> drift_prefix_;
    std::vector<PieceTable> pieces_;
};

ItoTanakaTerms ito_tanaka_rhs(const ConvexDiffSpec& spec, const EmbeddedWalk& walk,
                              const LocalTimeField& up, const LocalTimeField& down,
                              double t);

// L(t,a) - ( |B(t_m) - a| - |origin - a| - ito_sum(sgn(. - a), t) ), where L
// is the two-sided field. `a` must be on the walk's lattice.
double tanaka_check(const EmbeddedWalk& walk, const LocalTimeField& up,
                    const LocalTimeField& down, double a, double t);

// sum_r h(value(r-1)) 2^-2m  -  sum_x h(x) L(t, x) 2^-m, both cut at
// k = floor(t 4^m); exactly zero for h = 1 at any grid t.
double occupation_check(const GridFunction& h, const EmbeddedWalk& walk,
                        const LocalTimeField& up, const LocalTimeField& down,
                        double t);

// Predictable integrands: a kernel of (t, W(t)) truncated to [-b, b] and
// sampled at the walk's stopping times.
struct PredictableSpec {
    enum class Kernel { Brownian, SineOfW, TimeTimesW, IndicatorPositive, Constant };
    Kernel kernel = Kernel::Brownian;
    double constant = 1.0;   // value for Kernel::Constant
    double truncation = 3.0; // b
};

// Kernel value at (t, w), clamped to [-b, b].
double kernel_value(const PredictableSpec& spec, double t, double w);
PredictableSpec parse_kernel(const std::string& id, double truncation);

struct SimpleProcess {
    std::uint32_t level = 0;
    std::vector<double> xi;  // xi[r] = clamped kernel at (s(r), value(r))
};

SimpleProcess simple_process(const PredictableSpec& spec, const EmbeddedWalk& walk);

// sum_{r <= floor(t 4^m)} xi(r-1) 2^-m X(r).
double predictable_sum(const SimpleProcess& process, const EmbeddedWalk& walk, double t);

struct IsometryReport {
    double lhs = 0;         // mean of squared sums
    double rhs = 0;         // mean of sum xi(r-1)^2 2^-2m
    double stderr_diff = 0; // standard error of (lhs_i - rhs_i)
    double sum_mean = 0;    // mean of the sums themselves
    double sum_stderr = 0;  // its standard error
    std::size_t replications = 0;
};

// Monte Carlo over fresh walks (replication r uses derive_seed(seed, r));
// each replication embeds a fine nested path at level m over [0, horizon].
IsometryReport isometry_check(const PredictableSpec& spec, std::uint32_t m,
                              double horizon, std::size_t replications, Seed seed);

}  // namespace rwcalc
