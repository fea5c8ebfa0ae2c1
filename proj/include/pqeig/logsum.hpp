#pragma once

#include <cmath>
#include <limits>

namespace pqeig {

/// Online log-sum-exp accumulator for sums of positive terms given by their
/// logs.  Keeps the running max as the scaling pivot so p*log|.| exponents in
/// the hundreds neither overflow nor flush the whole sum to zero.
struct LogSum {
    double pivot = -std::numeric_limits<double>::infinity();
    double sum = 0.0; // sum of exp(term - pivot)

    void add(double log_term) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (sum == 0.0) {
            pivot = log_term;
            sum = 1.0;
            return;
        }
        if (log_term > pivot) {
            sum = sum * std::exp(pivot - log_term) + 1.0;
            pivot = log_term;
        } else {
            sum += std::exp(log_term - pivot);
        }
    }

    bool empty() const { return sum == 0.0; }

    double log() const {
        if (empty()) return -std::numeric_limits<double>::infinity();
        return pivot + std::log(sum);
    }

    double value() const { return empty() ? 0.0 : std::exp(log()); }
};

inline double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace pqeig
