#pragma once

// Task-space and joint-space acceleration references: PD(+I) feedback on the
// pose error, with the orientation error through the SO(3) logarithm.

#include "dyad/control/gains.hpp"
#include "dyad/math.hpp"

namespace dyad {

struct TaskReference {
    Transform pose;
    Vec6 velocity{Vec6::Zero()};
    Vec6 acceleration{Vec6::Zero()};
};

struct TaskState {
    Transform pose;
    Vec6 velocity{Vec6::Zero()};
};

/// 6D pose error [position; orientation log] of reference relative to actual.
inline Vec6 task_error(const Transform& reference, const Transform& actual)
{
    Vec6 e;
    e.head<3>() = reference.translation - actual.translation;
    e.tail<3>() = log_so3(reference.rotation * actual.rotation.transpose());
    return e;
}

/// Commanded task acceleration
///   xddot* = xddot_r + Kd (xdot_r - xdot) + Kp e + Ki int(e),
/// updating the integral state in place (anti-windup clamp from the gains).
inline Vec6 task_accel_reference(const TaskReference& ref, const TaskState& actual,
                                 const Gains& gains, Vec6& integral_state, double dt)
{
    const Vec6 e = task_error(ref.pose, actual.pose);
    if (dt > 0.0 && (gains.task_ki.array() > 0.0).any()) {
        integral_state += dt * e;
        integral_state = integral_state.cwiseMax(-gains.integral_clamp)
                                       .cwiseMin(gains.integral_clamp);
    }
    return ref.acceleration + gains.task_kd.cwiseProduct(ref.velocity - actual.velocity) +
           gains.task_kp.cwiseProduct(e) + gains.task_ki.cwiseProduct(integral_state);
}

/// Joint-space companion: sddot* = sddot_r + kd (sdot_r - sdot) + kp (s_r - s).
inline VecX joint_accel_reference(const VecX& s_ref, const VecX& sd_ref, const VecX& sdd_ref,
                                  const VecX& s, const VecX& sd, double kp, double kd)
{
    return sdd_ref + kd * (sd_ref - sd) + kp * (s_ref - s);
}

}  // namespace dyad
