// Shared error types and numeric helpers.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigseg {

// Raised when a configured size cap is exceeded (CLI exit code 3).
struct resource_cap_error : std::runtime_error {
    explicit resource_cap_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the spectral solver under the strict tail policy (see solvers.hpp).
struct truncation_error : std::runtime_error {
    explicit truncation_error(const std::string& what) : std::runtime_error(what) {}
};

// Neumaier-compensated running sum; error stays O(eps) independent of length.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(const std::vector<double>& xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

}  // namespace sigseg
