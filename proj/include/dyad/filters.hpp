#pragma once

// Causal moving-average smoothing.

#include "dyad/math.hpp"

#include <deque>
#include <vector>

namespace dyad {

/// Causal moving mean; the first (window - 1) samples average over the
/// history seen so far.
inline std::vector<double> moving_average(const std::vector<double>& signal,
                                          std::size_t window)
{
    if (window == 0) throw InvalidParameter("window must be >= 1");
    std::vector<double> out(signal.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        acc += signal[i];
        if (i >= window) acc -= signal[i - window];
        out[i] = acc / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

/// Streaming variant.
class MovingAverage {
public:
    explicit MovingAverage(std::size_t window) : window_(window)
    {
        if (window == 0) throw InvalidParameter("window must be >= 1");
    }

    double push(double value)
    {
        history_.push_back(value);
        acc_ += value;
        if (history_.size() > window_) {
            acc_ -= history_.front();
            history_.pop_front();
        }
        return acc_ / static_cast<double>(history_.size());
    }

private:
    std::size_t window_;
    std::deque<double> history_;
    double acc_{0.0};
};

}  // namespace dyad
