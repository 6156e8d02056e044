#pragma once

// Deterministic unicycle footstep planner: alternating left/right
// placements along the commanded path, a single/double-support activation
// schedule and a CoM reference interpolating the support midpoints.

#include "dyad/math.hpp"

#include <array>
#include <vector>

namespace dyad {

struct UnicycleCommand {
    double forward_velocity{0.0};   ///< [m/s]
    double turn_rate{0.0};          ///< [rad/s]
};

struct StepParams {
    double step_length_max{0.35};
    double step_duration{0.5};          ///< single-support time [s]
    double double_support{0.2};         ///< overlap with both feet down [s]
    double foot_separation{0.2};        ///< lateral distance between feet
    double com_height{0.45};
    int n_steps{10};
    bool step_in_place_when_idle{false};

    void validate() const
    {
        if (!(step_length_max > 0.0) || !(step_duration > 0.0) ||
            !(double_support >= 0.0) || !(foot_separation > 0.0) ||
            !(com_height > 0.0) || n_steps < 0) {
            throw InvalidParameter("invalid step parameters");
        }
    }
};

struct Footstep {
    int foot;          ///< 0 left, 1 right
    Vec3 position;     ///< planned ground contact point
    double yaw;        ///< heading at placement
    double touchdown;  ///< time the swing ends
    double liftoff;    ///< time the swing starts
};

/// Nominal plan consumed by the receding-horizon controller and the
/// walking simulation.
struct ContactPlan {
    std::array<Vec3, 2> initial_feet;
    std::vector<Footstep> steps;
    double com_height{0.45};
    double total_duration{0.0};
    double total_mass_hint{0.0};  ///< optional, for reference momentum
    bool saturated{false};        ///< command exceeded the step-length limit

    /// Activation flag per foot at time t (false while swinging).
    std::array<bool, 2> active_at(double t) const
    {
        std::array<bool, 2> active{true, true};
        for (const auto& s : steps) {
            if (t >= s.liftoff && t < s.touchdown) active[s.foot] = false;
        }
        return active;
    }

    /// Planned placement the foot should be at (or move toward) at time t.
    Vec3 nominal_foot(int foot, double t) const
    {
        Vec3 p = initial_feet[foot];
        for (const auto& s : steps) {
            if (s.foot != foot) continue;
            if (t >= s.liftoff) p = s.position;
        }
        return p;
    }

    /// Heading of the last placement at or before time t.
    double nominal_yaw(int foot, double t) const
    {
        double yaw = 0.0;
        for (const auto& s : steps) {
            if (s.foot != foot) continue;
            if (t >= s.liftoff) yaw = s.yaw;
        }
        return yaw;
    }

    Vec3 support_midpoint(double t) const
    {
        return 0.5 * (nominal_foot(0, t) + nominal_foot(1, t)) +
               Vec3(0.0, 0.0, com_height);
    }

    /// CoM reference: support midpoints blended over each step cycle.
    Vec3 com_position_ref(double t) const
    {
        const double horizon = 1e-3;
        return support_midpoint(t + horizon);
    }

    Vec3 com_velocity_ref(double t, double dt = 0.05) const
    {
        return (com_position_ref(t + dt) - com_position_ref(std::max(0.0, t - dt))) /
               (dt + std::min(t, dt));
    }
};

/// Plans nominal footsteps along the unicycle path.
inline ContactPlan unicycle_footstep_plan(const UnicycleCommand& command,
                                          const StepParams& params,
                                          const Vec3& start_position = Vec3::Zero(),
                                          double start_yaw = 0.0)
{
    params.validate();
    ContactPlan plan;
    plan.com_height = params.com_height;

    auto lateral = [&](double yaw, int foot) -> Vec3 {
        const double sign = foot == 0 ? +1.0 : -1.0;
        return Vec3(-std::sin(yaw), std::cos(yaw), 0.0) * sign * 0.5 *
               params.foot_separation;
    };
    plan.initial_feet[0] = start_position + lateral(start_yaw, 0);
    plan.initial_feet[1] = start_position + lateral(start_yaw, 1);

    const bool idle = std::abs(command.forward_velocity) < 1e-12 &&
                      std::abs(command.turn_rate) < 1e-12;
    if (idle && !params.step_in_place_when_idle) {
        plan.total_duration = params.n_steps * (params.step_duration +
                                                params.double_support);
        return plan;
    }

    // Unicycle pose integrated one step period at a time.
    double x = start_position.x();
    double y = start_position.y();
    double yaw = start_yaw;
    const double period = params.step_duration + params.double_support;
    double t = params.double_support;  // settle before the first swing
    int foot = command.turn_rate > 0.0 ? 1 : 0;  // inner foot first

    for (int k = 0; k < params.n_steps; ++k) {
        const double yaw_next = yaw + command.turn_rate * period;
        double dx;
        double dy;
        if (std::abs(command.turn_rate) < 1e-9) {
            dx = command.forward_velocity * period * std::cos(yaw);
            dy = command.forward_velocity * period * std::sin(yaw);
        } else {
            const double radius = command.forward_velocity / command.turn_rate;
            dx = radius * (std::sin(yaw_next) - std::sin(yaw));
            dy = radius * (std::cos(yaw) - std::cos(yaw_next));
        }
        // Saturate the per-period advance: the longitudinal gap between the
        // landing foot and the stance foot is the step length.
        const double advance = std::hypot(dx, dy);
        if (advance > params.step_length_max) {
            const double scale = params.step_length_max / advance;
            dx *= scale;
            dy *= scale;
            plan.saturated = true;
        }
        x += dx;
        y += dy;
        yaw = yaw_next;

        Footstep step;
        step.foot = foot;
        step.position = Vec3(x, y, 0.0) + lateral(yaw, foot);
        step.yaw = yaw;
        step.liftoff = t;
        step.touchdown = t + params.step_duration;
        plan.steps.push_back(step);
        t += period;
        foot = 1 - foot;
    }
    plan.total_duration = t;
    return plan;
}

}  // namespace dyad
