#pragma once

// Floating-base configuration and velocity. The base orientation is stored
// as a rotation matrix; velocities use the mixed convention (base-origin
// linear velocity and angular velocity, both in world coordinates).

#include "dyad/math.hpp"
#include "dyad/model.hpp"

namespace dyad {

struct SystemState {
    Vec3 base_position{Vec3::Zero()};
    Mat3 base_orientation{Mat3::Identity()};
    VecX joint_positions;
    Vec6 base_velocity{Vec6::Zero()};  ///< [linear; angular]
    VecX joint_velocities;

    static SystemState zero(const MultibodyModel& model)
    {
        SystemState s;
        s.joint_positions = VecX::Zero(model.n_dof());
        s.joint_velocities = VecX::Zero(model.n_dof());
        return s;
    }

    int n_dof() const { return static_cast<int>(joint_positions.size()); }

    /// Stacked generalized velocity [base linear; base angular; joints].
    VecX generalized_velocity() const
    {
        VecX nu(6 + joint_positions.size());
        nu.head<6>() = base_velocity;
        nu.tail(joint_positions.size()) = joint_velocities;
        return nu;
    }

    void set_generalized_velocity(const VecX& nu)
    {
        base_velocity = nu.head<6>();
        joint_velocities = nu.tail(nu.size() - 6);
    }

    void validate(const MultibodyModel& model, bool check_limits = false) const
    {
        if (joint_positions.size() != model.n_dof() ||
            joint_velocities.size() != model.n_dof()) {
            throw InvalidParameter("state dimension does not match model dof");
        }
        const double orth = (base_orientation.transpose() * base_orientation -
                             Mat3::Identity()).norm();
        if (orth > 1e-9) throw InvalidParameter("base orientation is not orthonormal");
        if (base_orientation.determinant() < 0.0) {
            throw InvalidParameter("base orientation is not a proper rotation");
        }
        if (check_limits) {
            for (int j = 0; j < model.n_joints(); ++j) {
                const int dof = model.joint_dof(j);
                if (dof < 0) continue;
                const auto& jd = model.joint(j);
                if (joint_positions(dof) < jd.position_min - 1e-9 ||
                    joint_positions(dof) > jd.position_max + 1e-9) {
                    throw InvalidParameter("joint '" + jd.name + "' outside position limits");
                }
            }
        }
    }
};

}  // namespace dyad
