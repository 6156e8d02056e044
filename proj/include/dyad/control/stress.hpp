#pragma once

// Ergonomic stress feedback: thresholding of the smoothed lumbar torque
// magnitude into the low/high states shown to the operator.

#include "dyad/filters.hpp"

#include <vector>

namespace dyad {

enum class StressLevel { Low, High };

inline const char* stress_name(StressLevel s)
{
    return s == StressLevel::Low ? "low" : "high";
}

/// Hysteresis-free classification of a torque-magnitude stream after
/// moving-average smoothing.
inline std::vector<StressLevel> stress_feedback(const std::vector<double>& torque_magnitude,
                                                double threshold,
                                                std::size_t smoothing_window = 2)
{
    if (!(threshold > 0.0)) throw InvalidParameter("stress threshold must be > 0");
    const auto smooth = moving_average(torque_magnitude, smoothing_window);
    std::vector<StressLevel> out(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        out[i] = std::abs(smooth[i]) > threshold ? StressLevel::High : StressLevel::Low;
    }
    return out;
}

/// Streaming variant used by the simulations.
class StressMonitor {
public:
    StressMonitor(double threshold, std::size_t window = 2)
        : threshold_(threshold), filter_(window)
    {
        if (!(threshold > 0.0)) throw InvalidParameter("stress threshold must be > 0");
    }

    StressLevel push(double torque_magnitude)
    {
        const double smooth = filter_.push(std::abs(torque_magnitude));
        return smooth > threshold_ ? StressLevel::High : StressLevel::Low;
    }

private:
    double threshold_;
    MovingAverage filter_;
};

}  // namespace dyad
