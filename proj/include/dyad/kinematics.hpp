#pragma once

// Forward kinematics for the floating-base tree: world poses, mixed-frame
// Jacobians and bias accelerations (Jdot * nu) of arbitrary link-fixed
// points, with joint placements scaled by the link length multipliers.

#include "dyad/math.hpp"
#include "dyad/model.hpp"
#include "dyad/state.hpp"

#include <string>
#include <vector>

namespace dyad {

struct FrameKinematics {
    Transform pose;
    MatX jacobian;            ///< 6 x (6 + n), rows [linear; angular]
    Vec6 velocity;            ///< jacobian * nu
    Vec6 bias_acceleration;   ///< d(jacobian * nu)/dt with nu held constant
};

class KinematicsCache {
public:
    KinematicsCache(const MultibodyModel& model, const SystemState& state,
                    const DesignParams& params = {})
        : model_(&model), n_dof_(model.n_dof())
    {
        state.validate(model);
        const int n_links = model.n_links();
        transforms_.resize(n_links);
        origin_velocity_.resize(n_links);
        angular_velocity_.resize(n_links);
        origin_bias_acc_.resize(n_links);
        angular_bias_acc_.resize(n_links);
        joint_axis_world_.assign(model.n_joints(), Vec3::Zero());

        transforms_[0] = {state.base_orientation, state.base_position};
        origin_velocity_[0] = state.base_velocity.head<3>();
        angular_velocity_[0] = state.base_velocity.tail<3>();
        origin_bias_acc_[0] = Vec3::Zero();
        angular_bias_acc_[0] = Vec3::Zero();

        for (int j = 0; j < model.n_joints(); ++j) {
            const auto& jd = model.joint(j);
            const int p = jd.parent_link;
            const int c = jd.child_link;
            const double lm_parent = effective_multiplier(p, params);

            // Joint placement rides outward when the parent link stretches.
            Transform origin = jd.origin;
            origin.translation = model.stretch_point(p, origin.translation, lm_parent);
            const Transform joint_world = transforms_[p] * origin;

            double s = 0.0;
            double sd = 0.0;
            if (jd.kind == JointKind::Revolute) {
                const int dof = model.joint_dof(j);
                s = state.joint_positions(dof);
                sd = state.joint_velocities(dof);
            }
            const Vec3 axis_world = joint_world.rotation * jd.axis;
            joint_axis_world_[j] = axis_world;

            transforms_[c] = {joint_world.rotation * rotation_about(jd.axis, s),
                              joint_world.translation};

            const Vec3 r = transforms_[c].translation - transforms_[p].translation;
            const Vec3& wp = angular_velocity_[p];
            angular_velocity_[c] = wp + sd * axis_world;
            origin_velocity_[c] = origin_velocity_[p] + wp.cross(r);
            angular_bias_acc_[c] = angular_bias_acc_[p] + sd * wp.cross(axis_world);
            origin_bias_acc_[c] = origin_bias_acc_[p] + angular_bias_acc_[p].cross(r) +
                                  wp.cross(wp.cross(r));
        }
    }

    int n_dof() const { return n_dof_; }

    const Transform& link_transform(int link) const { return transforms_.at(link); }
    const Vec3& link_angular_velocity(int link) const { return angular_velocity_.at(link); }

    Vec3 point_world(int link, const Vec3& local_point) const
    {
        return transforms_.at(link).apply(local_point);
    }

    /// World velocity [linear; angular] of a point fixed on a link.
    Vec6 point_velocity(int link, const Vec3& world_point) const
    {
        Vec6 v;
        const Vec3 r = world_point - transforms_[link].translation;
        v.head<3>() = origin_velocity_[link] + angular_velocity_[link].cross(r);
        v.tail<3>() = angular_velocity_[link];
        return v;
    }

    /// 6 x (6 + n) Jacobian mapping nu to the point's [linear; angular]
    /// world velocity.
    MatX point_jacobian(int link, const Vec3& world_point) const
    {
        MatX jac = MatX::Zero(6, 6 + n_dof_);
        jac.block<3, 3>(0, 0) = Mat3::Identity();
        jac.block<3, 3>(0, 3) = -skew(world_point - transforms_[0].translation);
        jac.block<3, 3>(3, 3) = Mat3::Identity();
        for (int j = model_->parent_joint_of_link(link); j >= 0;
             j = model_->parent_joint_of_link(model_->joint(j).parent_link)) {
            const int dof = model_->joint_dof(j);
            if (dof >= 0) {
                const Vec3& a = joint_axis_world_[j];
                const Vec3 o = transforms_[model_->joint(j).child_link].translation;
                jac.block<3, 1>(0, 6 + dof) = a.cross(world_point - o);
                jac.block<3, 1>(3, 6 + dof) = a;
            }
        }
        return jac;
    }

    /// Bias acceleration (Jdot * nu) of a link-fixed point.
    Vec6 point_bias_acceleration(int link, const Vec3& world_point) const
    {
        Vec6 a;
        const Vec3 r = world_point - transforms_[link].translation;
        const Vec3& w = angular_velocity_[link];
        a.head<3>() = origin_bias_acc_[link] + angular_bias_acc_[link].cross(r) +
                      w.cross(w.cross(r));
        a.tail<3>() = angular_bias_acc_[link];
        return a;
    }

    FrameKinematics frame_kinematics(int link, const Transform& offset) const
    {
        FrameKinematics out;
        out.pose = transforms_.at(link) * offset;
        out.jacobian = point_jacobian(link, out.pose.translation);
        out.velocity = point_velocity(link, out.pose.translation);
        out.bias_acceleration = point_bias_acceleration(link, out.pose.translation);
        return out;
    }

    FrameKinematics frame_kinematics(const std::string& frame_name) const
    {
        const auto& att = model_->frame(frame_name);
        return frame_kinematics(att.link_index, att.offset);
    }

    const MultibodyModel& model() const { return *model_; }

private:
    double effective_multiplier(int link, const DesignParams& params) const
    {
        double lm = params.multiplier(link);
        const auto& body = model_->link(link).body;
        if (body) lm *= body->length_multiplier;
        // Links without geometry have no stretch axis; multiplier is inert.
        return lm;
    }

    const MultibodyModel* model_;
    int n_dof_;
    std::vector<Transform> transforms_;
    std::vector<Vec3> origin_velocity_;
    std::vector<Vec3> angular_velocity_;
    std::vector<Vec3> origin_bias_acc_;
    std::vector<Vec3> angular_bias_acc_;
    std::vector<Vec3> joint_axis_world_;
};

/// Pose, Jacobian and bias acceleration of a named frame.
inline FrameKinematics frame_kinematics(const MultibodyModel& model, const SystemState& state,
                                        const std::string& frame_name,
                                        const DesignParams& params = {})
{
    KinematicsCache cache(model, state, params);
    return cache.frame_kinematics(frame_name);
}

}  // namespace dyad
