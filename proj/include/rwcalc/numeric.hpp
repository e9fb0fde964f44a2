#pragma once

// Small numeric utilities shared across modules.

#include <cmath>
#include <vector>

namespace rwcalc {

// Kahan-Babuska compensated accumulator.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0, comp_ = 0;
};

// Median of a scratch copy; the input need not be sorted.
double median(std::vector<double> values);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rwcalc
