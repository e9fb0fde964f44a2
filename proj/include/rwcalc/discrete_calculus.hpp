#pragma once

// Exact discrete calculus over arbitrary +-1 increment sequences on a lattice
// a + dx Z: trapezoidal sums along the range of a walk, and the residuals of
// the discrete Stratonovich, Ito, Ito-Tanaka, and occupation-time identities.
// Each identity holds exactly in rational arithmetic; in doubles the residual
// is rounding noise, which is what the tests pin down.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rwcalc {

// A scalar function with a name, so tables and CLIs can refer to it.
struct GridFunction {
    std::string name;
    std::function<double(double)> f;

    double operator()(double x) const { return f(x); }
};

// Catalog used across tests and the CLI.
namespace gridfn {
GridFunction identity();
GridFunction square();
GridFunction abs_shift(double a);      // |x - a|
GridFunction sign_shift(double a);     // sgn(x - a), sgn(0) = 0
GridFunction sine();
GridFunction exponential();
GridFunction indicator(double a);      // 1{x >= a}
GridFunction piecewise_linear(std::vector<double> xs, std::vector<double> ys);
// Lookup by catalog id ("identity", "square", "abs:1.5", "sign:0", "sine",
// "exp", "indicator:0.5", ...). Throws InvalidConfig for unknown ids.
GridFunction by_name(const std::string& id);
}  // namespace gridfn

// Signed trapezoidal sum of f over the lattice points from a to b in steps
// of dx: sgn(b-a) dx [ f(a)/2 + interior points + f(b)/2 ], zero when b = a.
// (b - a) / dx must be an integer; otherwise OffLattice.
double trapezoidal_sum(const GridFunction& f, double a, double b, double dx);

// The walks below are given by a start a, a spacing dx > 0, and signs +-1;
// partial sums S_r = a + (X_1 + ... + X_r) dx are tracked in integer lattice
// units so the lattice is exact.

// trapezoid(a -> S_n) - sum (f(S_r) + f(S_{r-1}))/2 X_r dx
double stratonovich_residual(const GridFunction& f, double a, double dx,
                             std::span<const int> signs);

// trapezoid(a -> S_n) - [ sum f(S_{r-1}) X_r dx
//                         + 1/2 sum (f(S_r) - f(S_{r-1})) / (X_r dx) dx^2 ]
double ito_residual(const GridFunction& f, double a, double dx,
                    std::span<const int> signs);

// trapezoid(a -> S_n) - [ sum f(S_{r-1}) X_r dx
//   + 1/2 sum_x ( L+(n,x) (f(x+dx) - f(x)) + L-(n,x) (f(x) - f(x-dx)) ) ]
// where L+-(n,x) = dx * (number of up/down crossings at x before step n).
double ito_tanaka_residual(const GridFunction& f, double a, double dx,
                           std::span<const int> signs);

// sum_r h_{X_r dx}(S_{r-1}) dx^2 - sum_x ( h_dx(x) L+(n,x) + h_{-dx}(x) L-(n,x) ) dx
// with h_{+-dx}(x) = (f(x +- dx) - f(x)) / (+-dx).
double occupation_residual(const GridFunction& f, double a, double dx,
                           std::span<const int> signs);

}  // namespace rwcalc
