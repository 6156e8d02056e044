#pragma once

// Desk-scale robots used by the closed-loop scenarios: a pedestal
// manipulator for the collaborative lifting task and a small biped for the
// walking inverse-kinematics layer.

#include "dyad/model.hpp"

namespace dyad {

/// Pedestal lifter: a bolted-down column with torso, shoulder and elbow
/// pitch joints. The hand covers heights of roughly 0.5 to 1.7 m.
inline MultibodyModel desk_lift_robot()
{
    MultibodyModel m;
    ParametrizedLink pedestal;
    pedestal.shape = ShapeGeom::box(0.3, 0.3, 0.8);
    pedestal.density = 12.0 / (0.3 * 0.3 * 0.8);
    pedestal.frame.translation = Vec3(0.0, 0.0, 0.4);
    m.add_base_link("pedestal", pedestal);
    m.add_frame("base_mount", 0, Transform::identity());

    JointDescriptor torso;
    torso.name = "torso_pitch";
    torso.parent_link = 0;
    torso.origin.translation = Vec3(0.0, 0.0, 0.8);
    torso.axis = Vec3::UnitY();
    torso.position_min = -0.9;
    torso.position_max = 0.9;
    ParametrizedLink torso_link;
    torso_link.shape = ShapeGeom::cylinder(0.06, 0.3);
    torso_link.density = 4.0 / (std::numbers::pi * 0.06 * 0.06 * 0.3);
    torso_link.frame.translation = Vec3(0.0, 0.0, 0.15);
    const int torso_idx = m.add_link("torso", torso_link, torso);

    JointDescriptor shoulder;
    shoulder.name = "shoulder_pitch";
    shoulder.parent_link = torso_idx;
    shoulder.origin.translation = Vec3(0.0, 0.0, 0.3);
    shoulder.axis = Vec3::UnitY();
    shoulder.position_min = -2.6;
    shoulder.position_max = 2.6;
    ParametrizedLink upper;
    upper.shape = ShapeGeom::cylinder(0.04, 0.3);
    upper.density = 1.5 / (std::numbers::pi * 0.04 * 0.04 * 0.3);
    upper.frame.translation = Vec3(0.0, 0.0, -0.15);
    const int upper_idx = m.add_link("upper_arm", upper, shoulder);

    JointDescriptor elbow;
    elbow.name = "elbow_pitch";
    elbow.parent_link = upper_idx;
    elbow.origin.translation = Vec3(0.0, 0.0, -0.3);
    elbow.axis = Vec3::UnitY();
    elbow.position_min = -2.6;
    elbow.position_max = 2.6;
    ParametrizedLink forearm;
    forearm.shape = ShapeGeom::cylinder(0.035, 0.35);
    forearm.density = 1.0 / (std::numbers::pi * 0.035 * 0.035 * 0.35);
    forearm.frame.translation = Vec3(0.0, 0.0, -0.175);
    const int fore_idx = m.add_link("forearm", forearm, elbow);
    m.add_frame("hand", fore_idx, {Mat3::Identity(), Vec3(0.0, 0.0, -0.35)});

    m.validate();
    return m;
}

/// Small sagittal biped for the walking IK layer: three pitch joints per
/// leg, feet frames at the soles.
inline MultibodyModel desk_biped(double com_height_hint = 0.45)
{
    const double thigh = 0.55 * com_height_hint;
    const double shank = 0.55 * com_height_hint;
    MultibodyModel m;
    ParametrizedLink pelvis;
    pelvis.shape = ShapeGeom::box(0.16, 0.24, 0.2);
    pelvis.density = 14.0 / (0.16 * 0.24 * 0.2);
    pelvis.frame.translation = Vec3(0.0, 0.0, 0.1);
    m.add_base_link("pelvis", pelvis);
    m.add_frame("torso", 0, {Mat3::Identity(), Vec3(0.0, 0.0, 0.2)});

    for (int side = 0; side < 2; ++side) {
        const double sign = side == 0 ? 1.0 : -1.0;
        const std::string suffix = side == 0 ? "_left" : "_right";

        JointDescriptor hip;
        hip.name = "hip_pitch" + suffix;
        hip.parent_link = 0;
        hip.origin.translation = Vec3(0.0, sign * 0.1, 0.0);
        hip.axis = Vec3::UnitY();
        hip.position_min = -1.8;
        hip.position_max = 0.8;
        ParametrizedLink thigh_link;
        thigh_link.shape = ShapeGeom::cylinder(0.04, thigh);
        thigh_link.density = 2.5 / (std::numbers::pi * 0.04 * 0.04 * thigh);
        thigh_link.frame.translation = Vec3(0.0, 0.0, -0.5 * thigh);
        const int thigh_idx = m.add_link("thigh" + suffix, thigh_link, hip);

        JointDescriptor knee;
        knee.name = "knee_pitch" + suffix;
        knee.parent_link = thigh_idx;
        knee.origin.translation = Vec3(0.0, 0.0, -thigh);
        knee.axis = Vec3::UnitY();
        knee.position_min = 0.0;
        knee.position_max = 2.2;
        ParametrizedLink shank_link;
        shank_link.shape = ShapeGeom::cylinder(0.035, shank);
        shank_link.density = 1.5 / (std::numbers::pi * 0.035 * 0.035 * shank);
        shank_link.frame.translation = Vec3(0.0, 0.0, -0.5 * shank);
        const int shank_idx = m.add_link("shank" + suffix, shank_link, knee);

        JointDescriptor ankle;
        ankle.name = "ankle_pitch" + suffix;
        ankle.parent_link = shank_idx;
        ankle.origin.translation = Vec3(0.0, 0.0, -shank);
        ankle.axis = Vec3::UnitY();
        ankle.position_min = -1.0;
        ankle.position_max = 1.0;
        ParametrizedLink foot;
        foot.shape = ShapeGeom::box(0.14, 0.07, 0.04);
        foot.density = 0.8 / (0.14 * 0.07 * 0.04);
        foot.frame.translation = Vec3(0.02, 0.0, -0.02);
        const int foot_idx = m.add_link("foot" + suffix, foot, ankle);
        m.add_frame("sole" + suffix, foot_idx, {Mat3::Identity(), Vec3(0.02, 0.0, -0.04)});
    }
    m.validate();
    return m;
}

}  // namespace dyad
