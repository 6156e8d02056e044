#pragma once

// Controller gain containers.

#include "dyad/math.hpp"

namespace dyad {

struct Gains {
    Vec6 task_kp{Vec6::Zero()};
    Vec6 task_kd{Vec6::Zero()};
    Vec6 task_ki{Vec6::Zero()};
    double joint_kp{0.0};
    double joint_kd{0.0};
    double follower_gain{10.0};  ///< k_psi, reactivity of the hand follower
    double integral_clamp{10.0};

    void validate() const
    {
        if ((task_kp.array() < 0.0).any() || (task_kd.array() < 0.0).any() ||
            (task_ki.array() < 0.0).any() || joint_kp < 0.0 || joint_kd < 0.0) {
            throw InvalidParameter("gains must be non-negative");
        }
        if (!(follower_gain > 0.0)) {
            throw InvalidParameter("follower gain must be positive");
        }
    }

    static Gains pd(double kp, double kd)
    {
        Gains g;
        g.task_kp = Vec6::Constant(kp);
        g.task_kd = Vec6::Constant(kd);
        g.joint_kp = kp;
        g.joint_kd = kd;
        return g;
    }
};

}  // namespace dyad
