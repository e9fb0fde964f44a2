#include "rwcalc/discrete_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rwcalc/errors.hpp"
#include "rwcalc/numeric.hpp"

namespace rwcalc {

namespace gridfn {

GridFunction identity() {
    return {"identity", [](double x) { return x; }};
}

GridFunction square() {
    return {"square", [](double x) { return x * x; }};
}

GridFunction abs_shift(double a) {
    char name[48];
    std::snprintf(name, sizeof name, "abs:%g", a);
    return {name, [a](double x) { return std::abs(x - a); }};
}

GridFunction sign_shift(double a) {
    char name[48];
    std::snprintf(name, sizeof name, "sign:%g", a);
    return {name, [a](double x) { return x > a ? 1.0 : (x < a ? -1.0 : 0.0); }};
}

GridFunction sine() {
    return {"sine", [](double x) { return std::sin(x); }};
}

GridFunction exponential() {
    return {"exp", [](double x) { return std::exp(x); }};
}

GridFunction indicator(double a) {
    char name[48];
    std::snprintf(name, sizeof name, "indicator:%g", a);
    return {name, [a](double x) { return x >= a ? 1.0 : 0.0; }};
}

GridFunction piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidConfig("piecewise-linear table needs >= 2 matching nodes");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw InvalidConfig("table nodes must increase");
    auto eval = [xs = std::move(xs), ys = std::move(ys)](double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        std::size_t j = std::size_t(std::upper_bound(xs.begin(), xs.end(), x) -
                                    xs.begin()) - 1;
        double th = (x - xs[j]) / (xs[j + 1] - xs[j]);
        return ys[j] + th * (ys[j + 1] - ys[j]);
    };
    return {"table", std::move(eval)};
}

GridFunction by_name(const std::string& id) {
    auto param = [&](std::size_t colon) {
        return std::stod(id.substr(colon + 1));
    };
    if (id == "identity") return identity();
    if (id == "square") return square();
    if (id == "sine") return sine();
    if (id == "exp") return exponential();
    if (id.rfind("abs:", 0) == 0) return abs_shift(param(3));
    if (id.rfind("sign:", 0) == 0) return sign_shift(param(4));
    if (id.rfind("indicator:", 0) == 0) return indicator(param(9));
    if (id == "abs") return abs_shift(0);
    if (id == "sign") return sign_shift(0);
    if (id == "indicator") return indicator(0);
    throw InvalidConfig("unknown function id: " + id);
}

}  // namespace gridfn

double trapezoidal_sum(const GridFunction& f, double a, double b, double dx) {
    if (!(dx > 0)) throw InvalidConfig("dx must be positive");
    double q = (b - a) / dx;
    double k = std::round(q);
    if (std::abs(q - k) > 1e-9 * (1 + std::abs(q)))
        throw OffLattice("endpoints are not dx-commensurable");
    auto steps = std::int64_t(std::abs(k));
    if (steps == 0) return 0;
    double sgn = k > 0 ? 1.0 : -1.0;

    KahanSum sum;
    sum.add(0.5 * f(a));
    for (std::int64_t j = 1; j < steps; ++j) sum.add(f(a + sgn * double(j) * dx));
    sum.add(0.5 * f(b));
    return sgn * dx * sum.value();
}

namespace {

// Cumulative lattice offsets c_r with S_r = a + c_r dx; c_0 = 0.
std::vector<std::int64_t> lattice_offsets(std::span<const int> signs) {
    std::vector<std::int64_t> c(signs.size() + 1, 0);
    for (std::size_t r = 0; r < signs.size(); ++r) {
        if (signs[r] != 1 && signs[r] != -1)
            throw InvalidConfig("signs must be +-1");
        c[r + 1] = c[r] + signs[r];
    }
    return c;
}

struct CrossingTally {
    std::int64_t min_off = 0;
    std::vector<std::int64_t> up, down;  // indexed by offset - min_off
};

CrossingTally tally_crossings(const std::vector<std::int64_t>& c) {
    CrossingTally t;
    if (c.size() <= 1) return t;
    auto [lo, hi] = std::minmax_element(c.begin(), c.end() - 1);
    t.min_off = *lo;
    t.up.assign(std::size_t(*hi - *lo + 1), 0);
    t.down.assign(std::size_t(*hi - *lo + 1), 0);
    for (std::size_t r = 0; r + 1 < c.size(); ++r) {
        auto slot = std::size_t(c[r] - t.min_off);
        if (c[r + 1] > c[r])
            ++t.up[slot];
        else
            ++t.down[slot];
    }
    return t;
}

}  // namespace

double stratonovich_residual(const GridFunction& f, double a, double dx,
                             std::span<const int> signs) {
    auto c = lattice_offsets(signs);
    double lhs = trapezoidal_sum(f, a, a + double(c.back()) * dx, dx);
    KahanSum rhs;
    for (std::size_t r = 0; r < signs.size(); ++r) {
        double prev = a + double(c[r]) * dx;
        double cur = a + double(c[r + 1]) * dx;
        rhs.add(0.5 * (f(cur) + f(prev)) * double(signs[r]) * dx);
    }
    return lhs - rhs.value();
}

double ito_residual(const GridFunction& f, double a, double dx,
                    std::span<const int> signs) {
    auto c = lattice_offsets(signs);
    double lhs = trapezoidal_sum(f, a, a + double(c.back()) * dx, dx);
    KahanSum drift, correction;
    for (std::size_t r = 0; r < signs.size(); ++r) {
        double prev = a + double(c[r]) * dx;
        double cur = a + double(c[r + 1]) * dx;
        drift.add(f(prev) * double(signs[r]) * dx);
        correction.add((f(cur) - f(prev)) / (double(signs[r]) * dx) * dx * dx);
    }
    return lhs - drift.value() - 0.5 * correction.value();
}

double ito_tanaka_residual(const GridFunction& f, double a, double dx,
                           std::span<const int> signs) {
    auto c = lattice_offsets(signs);
    double lhs = trapezoidal_sum(f, a, a + double(c.back()) * dx, dx);
    KahanSum drift;
    for (std::size_t r = 0; r < signs.size(); ++r)
        drift.add(f(a + double(c[r]) * dx) * double(signs[r]) * dx);

    auto t = tally_crossings(c);
    KahanSum local;
    for (std::size_t i = 0; i < t.up.size(); ++i) {
        double x = a + double(t.min_off + std::int64_t(i)) * dx;
        if (t.up[i]) local.add(double(t.up[i]) * dx * (f(x + dx) - f(x)));
        if (t.down[i]) local.add(double(t.down[i]) * dx * (f(x) - f(x - dx)));
    }
    return lhs - drift.value() - 0.5 * local.value();
}

double occupation_residual(const GridFunction& f, double a, double dx,
                           std::span<const int> signs) {
    auto c = lattice_offsets(signs);
    KahanSum lhs;
    for (std::size_t r = 0; r < signs.size(); ++r) {
        double prev = a + double(c[r]) * dx;
        double h = (f(prev + double(signs[r]) * dx) - f(prev)) / (double(signs[r]) * dx);
        lhs.add(h * dx * dx);
    }

    auto t = tally_crossings(c);
    KahanSum rhs;
    for (std::size_t i = 0; i < t.up.size(); ++i) {
        double x = a + double(t.min_off + std::int64_t(i)) * dx;
        if (t.up[i]) rhs.add((f(x + dx) - f(x)) / dx * double(t.up[i]) * dx * dx);
        if (t.down[i]) rhs.add((f(x - dx) - f(x)) / (-dx) * double(t.down[i]) * dx * dx);
    }
    return lhs.value() - rhs.value();
}

}  // namespace rwcalc
