#pragma once

// Master-follower trajectory parametrization for collaborative lifting: the
// robot configuration interpolates between two joint postures s1 and s2
// through a free parameter psi in [0, 1], driven by the human hand height.

#include "dyad/math.hpp"

namespace dyad {

struct FollowerReference {
    VecX positions;
    VecX velocities;
    double psi;
    double psi_rate;
};

class TrajectoryParametrization {
public:
    TrajectoryParametrization(VecX s1, VecX s2, double psi0 = 0.0)
        : s1_(std::move(s1)), s2_(std::move(s2)), psi_(std::clamp(psi0, 0.0, 1.0))
    {
        if (s1_.size() != s2_.size()) {
            throw InvalidParameter("posture endpoints must have equal size");
        }
    }

    double psi() const { return psi_; }
    const VecX& lower_posture() const { return s1_; }
    const VecX& upper_posture() const { return s2_; }

    VecX positions_at(double psi) const { return s1_ + psi * (s2_ - s1_); }

    /// Advances psi from the master height z_master: the follower hand
    /// height z_follower is servoed with gain k_psi, the resulting vertical
    /// hand velocity maps to psi through the pseudo-inverse of
    /// J_z (s2 - s1). Saturation at the ends freezes the follower when the
    /// master leaves the admissible range.
    FollowerReference update(double z_master, double z_follower, double k_psi,
                             const VecX& hand_jacobian_z_joints, double dt,
                             double pinv_cutoff = 1e-8)
    {
        const double z_rate = k_psi * (z_master - z_follower);
        const double sensitivity = hand_jacobian_z_joints.dot(s2_ - s1_);
        double psi_rate = pseudo_inverse_scalar(sensitivity, pinv_cutoff) * z_rate;
        if ((psi_ >= 1.0 && psi_rate > 0.0) || (psi_ <= 0.0 && psi_rate < 0.0)) {
            psi_rate = 0.0;
        }
        psi_ = std::clamp(psi_ + dt * psi_rate, 0.0, 1.0);

        FollowerReference out;
        out.psi = psi_;
        out.psi_rate = psi_rate;
        out.positions = positions_at(psi_);
        out.velocities = (s2_ - s1_) * psi_rate;
        return out;
    }

private:
    VecX s1_;
    VecX s2_;
    double psi_;
};

}  // namespace dyad
