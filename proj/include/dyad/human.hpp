#pragma once

// Anthropometry-scaled human skeletal model. Segments are basic shapes whose
// masses follow a fixed fraction table and whose lengths scale with stature;
// multi-axis articulations are chains of single-axis joints with massless
// connectors in between.
//
// Joint naming: j<Location>_rot<axis>, e.g. jL5S1_roty is the sagittal
// lumbosacral flexion. The full model has 34 actuated joints (6 per arm,
// 9 per leg, 4 in the back); the reduced variant keeps 14 for fast runs.
// Conventions: x forward, y left, z up; all joints at zero give an upright
// stance with arms hanging at the sides.

#include "dyad/model.hpp"

#include <string>

namespace dyad {

struct Anthropometry {
    double height{1.73};  ///< [m]
    double mass{65.0};    ///< [kg]

    void validate() const
    {
        if (height < 1.0 || height > 2.3) {
            throw InvalidParameter("height outside [1.0, 2.3] m");
        }
        if (mass < 20.0 || mass > 200.0) {
            throw InvalidParameter("mass outside [20, 200] kg");
        }
    }
};

/// Segment mass fractions (sum to one) and length fractions of stature.
/// Design-time constants in the spirit of the usual anthropometric tables,
/// not subject-identified values.
struct SegmentTable {
    // mass fractions
    double pelvis = 0.142;
    double abdomen = 0.139;
    double chest = 0.216;
    double head = 0.081;
    double thigh = 0.100;
    double shank = 0.0465;
    double foot = 0.0125;
    double toe = 0.002;
    double upper_arm = 0.028;
    double forearm = 0.016;
    double hand = 0.006;

    // length fractions of stature
    double hip_height = 0.530;
    double hip_half_width = 0.0955;
    double lumbar_offset = 0.040;   ///< pelvis origin -> L5S1
    double abdomen_length = 0.120;  ///< L5S1 -> T9T8
    double chest_length = 0.128;    ///< T9T8 -> shoulder line
    double shoulder_half_width = 0.1295;
    double head_radius = 0.065;
    double thigh_length = 0.245;
    double shank_length = 0.246;
    double ankle_height = 0.039;
    double foot_length = 0.152;
    double toe_length = 0.040;
    double upper_arm_length = 0.186;
    double forearm_length = 0.146;
    double hand_length = 0.108;
};

struct HumanModelOptions {
    bool full{true};  ///< 34 joints; false: 14-joint reduced variant
    SegmentTable table{};
};

struct HumanModel {
    MultibodyModel model;
    Anthropometry anthropometry;
};

namespace detail {

struct HumanBuilder {
    MultibodyModel m;
    const Anthropometry& a;
    const SegmentTable& t;
    bool full;

    double len(double fraction) const { return fraction * a.height; }
    double seg_mass(double fraction) const { return fraction * a.mass; }

    static ParametrizedLink sized_box(double w, double d, double h, double mass,
                                      const Vec3& center)
    {
        ParametrizedLink body;
        body.shape = ShapeGeom::box(w, d, h);
        body.density = mass / (w * d * h);
        body.frame.translation = center;
        return body;
    }
    static ParametrizedLink sized_cylinder(double radius, double length, double mass,
                                           const Vec3& center, const Mat3& rot)
    {
        ParametrizedLink body;
        body.shape = ShapeGeom::cylinder(radius, length);
        body.density = mass / (std::numbers::pi * radius * radius * length);
        body.frame.translation = center;
        body.frame.rotation = rot;
        return body;
    }
    static ParametrizedLink sized_sphere(double radius, double mass, const Vec3& center)
    {
        ParametrizedLink body;
        body.shape = ShapeGeom::sphere(radius);
        body.density = mass / (4.0 / 3.0 * std::numbers::pi * std::pow(radius, 3));
        body.frame.translation = center;
        return body;
    }

    /// Chain of revolute joints ending in a body link; intermediate links
    /// are massless connectors placed at the articulation point.
    int articulation(int parent, const std::string& stem, const Vec3& origin,
                     const std::vector<std::pair<char, std::pair<double, double>>>& axes,
                     std::optional<ParametrizedLink> body, const std::string& body_name)
    {
        int link = parent;
        Vec3 offset = origin;
        for (size_t k = 0; k < axes.size(); ++k) {
            JointDescriptor j;
            j.name = "j" + stem + "_rot" + axes[k].first;
            j.parent_link = link;
            j.origin.translation = offset;
            j.axis = axes[k].first == 'x' ? Vec3::UnitX()
                   : axes[k].first == 'y' ? Vec3::UnitY() : Vec3::UnitZ();
            j.position_min = axes[k].second.first;
            j.position_max = axes[k].second.second;
            const bool last = k + 1 == axes.size();
            link = m.add_link(last ? body_name : body_name + "_" + axes[k].first,
                              last ? std::move(body) : std::nullopt, j);
            offset = Vec3::Zero();
        }
        return link;
    }

    void build_leg(const std::string& side, double sign)
    {
        const double thigh_l = len(t.thigh_length);
        const double shank_l = len(t.shank_length);
        const double foot_l = len(t.foot_length);
        const double ankle_h = len(t.ankle_height);

        std::vector<std::pair<char, std::pair<double, double>>> hip_axes;
        if (full) {
            hip_axes = {{'x', {-0.8, 0.8}}, {'z', {-0.8, 0.8}}, {'y', {-2.1, 0.5}}};
        } else {
            hip_axes = {{'y', {-2.1, 0.5}}};
        }
        const int thigh = articulation(
            0, "Hip" + side, Vec3(0.0, sign * len(t.hip_half_width), 0.0), hip_axes,
            sized_cylinder(0.07 * a.height / 1.73, thigh_l, seg_mass(t.thigh),
                           Vec3(0.0, 0.0, -0.5 * thigh_l), Mat3::Identity()),
            "thigh" + side);

        std::vector<std::pair<char, std::pair<double, double>>> knee_axes;
        if (full) {
            knee_axes = {{'z', {-0.5, 0.5}}, {'y', {0.0, 2.4}}};
        } else {
            knee_axes = {{'y', {0.0, 2.4}}};
        }
        const int shank = articulation(
            thigh, "Knee" + side, Vec3(0.0, 0.0, -thigh_l), knee_axes,
            sized_cylinder(0.05 * a.height / 1.73, shank_l, seg_mass(t.shank),
                           Vec3(0.0, 0.0, -0.5 * shank_l), Mat3::Identity()),
            "shank" + side);

        std::vector<std::pair<char, std::pair<double, double>>> ankle_axes;
        if (full) {
            ankle_axes = {{'x', {-0.6, 0.6}}, {'z', {-0.6, 0.6}}, {'y', {-0.9, 0.9}}};
        } else {
            ankle_axes = {{'y', {-0.9, 0.9}}};
        }
        // The reduced model has no toe joint; its mass folds into the foot.
        const double foot_mass = seg_mass(full ? t.foot : t.foot + t.toe);
        const int foot = articulation(
            shank, "Ankle" + side, Vec3(0.0, 0.0, -shank_l), ankle_axes,
            sized_box(0.7 * foot_l, 0.05 * a.height / 1.73, ankle_h, foot_mass,
                      Vec3(0.25 * foot_l, 0.0, -0.5 * ankle_h)),
            "foot" + side);

        if (full) {
            const double toe_l = len(t.toe_length);
            articulation(foot, "Toe" + side, Vec3(0.6 * foot_l, 0.0, -0.5 * ankle_h),
                         {{'y', {-0.5, 0.5}}},
                         sized_box(toe_l, 0.05 * a.height / 1.73, 0.5 * ankle_h,
                                   seg_mass(t.toe), Vec3(0.5 * toe_l, 0.0, 0.0)),
                         "toe" + side);
        }
        m.add_frame("sole" + side, foot,
                    {Mat3::Identity(), Vec3(0.2 * foot_l, 0.0, -ankle_h)});
    }

    void build_arm(int chest, double chest_top, const std::string& side, double sign)
    {
        const double upper_l = len(t.upper_arm_length);
        const double fore_l = len(t.forearm_length);
        const double hand_l = len(t.hand_length);
        const Vec3 shoulder(0.0, sign * len(t.shoulder_half_width), chest_top);

        std::vector<std::pair<char, std::pair<double, double>>> shoulder_axes;
        if (full) {
            shoulder_axes = {{'x', {-0.5, 2.0}}, {'z', {-1.5, 1.5}}, {'y', {-3.0, 0.8}}};
        } else {
            shoulder_axes = {{'x', {-0.5, 2.0}}, {'y', {-3.0, 0.8}}};
        }
        const int upper = articulation(
            chest, "Shoulder" + side, shoulder, shoulder_axes,
            sized_cylinder(0.04 * a.height / 1.73, upper_l, seg_mass(t.upper_arm),
                           Vec3(0.0, 0.0, -0.5 * upper_l), Mat3::Identity()),
            "upperarm" + side);

        std::vector<std::pair<char, std::pair<double, double>>> elbow_axes;
        if (full) {
            elbow_axes = {{'y', {-2.6, 0.0}}, {'z', {-1.5, 1.5}}};
        } else {
            elbow_axes = {{'y', {-2.6, 0.0}}};
        }
        const int fore = articulation(
            upper, "Elbow" + side, Vec3(0.0, 0.0, -upper_l), elbow_axes,
            sized_cylinder(0.03 * a.height / 1.73, fore_l, seg_mass(t.forearm),
                           Vec3(0.0, 0.0, -0.5 * fore_l), Mat3::Identity()),
            "forearm" + side);

        int hand = fore;
        if (full) {
            hand = articulation(fore, "Wrist" + side, Vec3(0.0, 0.0, -fore_l),
                                {{'y', {-0.9, 0.9}}},
                                sized_box(0.25 * hand_l, 0.5 * hand_l, hand_l,
                                          seg_mass(t.hand), Vec3(0.0, 0.0, -0.5 * hand_l)),
                                "hand" + side);
            m.add_frame("hand" + side, hand,
                        {Mat3::Identity(), Vec3(0.0, 0.0, -0.7 * hand_l)});
        } else {
            // Hand mass folded onto the forearm tip in the reduced model.
            JointDescriptor j;
            j.name = "jHandMount" + side;
            j.kind = JointKind::Fixed;
            j.parent_link = fore;
            j.origin.translation = Vec3(0.0, 0.0, -fore_l);
            hand = m.add_link("hand" + side,
                              sized_box(0.25 * hand_l, 0.5 * hand_l, hand_l,
                                        seg_mass(t.hand), Vec3(0.0, 0.0, -0.5 * hand_l)),
                              j);
            m.add_frame("hand" + side, hand,
                        {Mat3::Identity(), Vec3(0.0, 0.0, -0.7 * hand_l)});
        }
    }

    MultibodyModel build()
    {
        const double hip_w = len(t.hip_half_width);
        m.add_base_link("pelvis",
                        sized_box(0.12 * a.height / 1.73, 2.2 * hip_w,
                                  len(t.lumbar_offset) + 0.04, seg_mass(t.pelvis),
                                  Vec3(0.0, 0.0, 0.5 * len(t.lumbar_offset))));

        // Back: lumbosacral then mid-back articulation.
        // Positive pitch flexes the up-pointing trunk segments forward.
        std::vector<std::pair<char, std::pair<double, double>>> lumbar_axes;
        if (full) {
            lumbar_axes = {{'x', {-0.6, 0.6}}, {'y', {-0.4, 1.6}}};
        } else {
            lumbar_axes = {{'y', {-0.4, 1.6}}};
        }
        const double abdomen_l = len(t.abdomen_length);
        const int abdomen = articulation(
            0, "L5S1", Vec3(0.0, 0.0, len(t.lumbar_offset)), lumbar_axes,
            sized_box(0.12 * a.height / 1.73, 1.6 * hip_w, abdomen_l,
                      seg_mass(t.abdomen), Vec3(0.0, 0.0, 0.5 * abdomen_l)),
            "abdomen");

        std::vector<std::pair<char, std::pair<double, double>>> midback_axes;
        if (full) {
            midback_axes = {{'z', {-0.8, 0.8}}, {'y', {-0.3, 0.8}}};
        } else {
            midback_axes = {{'y', {-0.3, 0.8}}};
        }
        const double chest_l = len(t.chest_length);
        const int chest = articulation(
            abdomen, "T9T8", Vec3(0.0, 0.0, abdomen_l), midback_axes,
            sized_box(0.13 * a.height / 1.73, 2.0 * len(t.shoulder_half_width), chest_l,
                      seg_mass(t.chest), Vec3(0.0, 0.0, 0.5 * chest_l)),
            "chest");

        // Head welded on top of the chest.
        JointDescriptor neck;
        neck.name = "jNeckMount";
        neck.kind = JointKind::Fixed;
        neck.parent_link = chest;
        neck.origin.translation = Vec3(0.0, 0.0, chest_l);
        const double head_r = len(t.head_radius);
        m.add_link("head", sized_sphere(head_r, seg_mass(t.head), Vec3(0.0, 0.0, head_r)),
                   neck);

        build_leg("_left", +1.0);
        build_leg("_right", -1.0);
        build_arm(chest, chest_l, "_left", +1.0);
        build_arm(chest, chest_l, "_right", -1.0);

        m.add_frame("head_top", m.link_index("head"),
                    {Mat3::Identity(), Vec3(0.0, 0.0, 2.0 * head_r)});
        m.validate();
        return std::move(m);
    }
};

}  // namespace detail

/// Builds the anthropometry-scaled skeletal model. Deterministic: identical
/// inputs produce identical models.
inline HumanModel build_human_model(const Anthropometry& anthropometry,
                                    const HumanModelOptions& options = {})
{
    anthropometry.validate();
    detail::HumanBuilder builder{MultibodyModel(), anthropometry, options.table,
                                 options.full};
    HumanModel out;
    out.model = builder.build();
    out.anthropometry = anthropometry;
    const int expected = options.full ? 34 : 14;
    if (out.model.n_dof() != expected) {
        throw NumericalError("human model dof mismatch: " +
                             std::to_string(out.model.n_dof()));
    }
    return out;
}

/// Standing pelvis height for a zero joint configuration.
inline double standing_pelvis_height(const Anthropometry& a, const SegmentTable& t = {})
{
    return a.height * (t.thigh_length + t.shank_length + t.ankle_height);
}

/// Zero-configuration standing state with the soles on the ground plane.
inline SystemState standing_state(const HumanModel& human, const SegmentTable& t = {})
{
    SystemState s = SystemState::zero(human.model);
    s.base_position = Vec3(0.0, 0.0, standing_pelvis_height(human.anthropometry, t));
    return s;
}

}  // namespace dyad
