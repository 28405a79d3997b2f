#pragma once
// Compensated (Neumaier) summation. Weight magnitudes span several orders of
// magnitude across frames, so every multi-term accumulation in the estimators
// goes through this instead of a bare double.

#include <cmath>
#include <cstddef>
#include <span>

namespace mfy {

class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

    void reset() { sum_ = 0.0; comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    NeumaierSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

} // namespace mfy
