#pragma once

// Whole-body dynamics quantities assembled from per-link Jacobians:
// mass matrix, Coriolis/gravity bias, centroidal quantities and energies.

#include "dyad/kinematics.hpp"

namespace dyad {

struct DynamicsTerms {
    MatX mass_matrix;       ///< (n+6) x (n+6), symmetric positive definite
    VecX bias;              ///< Coriolis + gravity, h(q, nu)
    VecX gravity;           ///< h evaluated at nu = 0
};

namespace detail {

struct LinkWorldInertia {
    double mass;
    Vec3 com_world;
    Mat3 inertia_com_world;
};

inline LinkWorldInertia link_world_inertia(const MultibodyModel& model,
                                           const KinematicsCache& kin, int link,
                                           const DesignParams& params)
{
    const SpatialInertia si = model.link_inertia(link, params);
    const Transform& tf = kin.link_transform(link);
    LinkWorldInertia out;
    out.mass = si.mass;
    out.com_world = tf.apply(si.com);
    out.inertia_com_world = tf.rotation * si.inertia_about_com() * tf.rotation.transpose();
    return out;
}

}  // namespace detail

/// Mass matrix, velocity-dependent bias and gravity bias for the model at
/// the given state and design parameters.
inline DynamicsTerms dynamics_terms(const MultibodyModel& model, const SystemState& state,
                                    const DesignParams& params = {})
{
    KinematicsCache kin(model, state, params);
    const int nv = 6 + model.n_dof();
    DynamicsTerms out;
    out.mass_matrix = MatX::Zero(nv, nv);
    out.bias = VecX::Zero(nv);
    out.gravity = VecX::Zero(nv);
    const Vec3 g = gravity_vector();

    for (int link = 0; link < model.n_links(); ++link) {
        if (!model.link(link).body) continue;
        const auto wi = detail::link_world_inertia(model, kin, link, params);

        const MatX jac = kin.point_jacobian(link, wi.com_world);
        const auto jv = jac.topRows<3>();
        const auto jw = jac.bottomRows<3>();

        out.mass_matrix.noalias() += jv.transpose() * (wi.mass * jv);
        out.mass_matrix.noalias() += jw.transpose() * (wi.inertia_com_world * jw);

        const Vec6 bias_acc = kin.point_bias_acceleration(link, wi.com_world);
        const Vec3& w = kin.link_angular_velocity(link);
        out.bias.noalias() +=
            jv.transpose() * (wi.mass * (bias_acc.head<3>() - g)) +
            jw.transpose() * (wi.inertia_com_world * bias_acc.tail<3>() +
                              w.cross(wi.inertia_com_world * w));
        out.gravity.noalias() += jv.transpose() * (-wi.mass * g);
    }
    // Numerical symmetrization; assembly is symmetric up to rounding.
    out.mass_matrix = 0.5 * (out.mass_matrix + out.mass_matrix.transpose()).eval();
    return out;
}

struct ComQuantities {
    Vec3 position{Vec3::Zero()};
    double total_mass{0.0};
    Vec6 momentum{Vec6::Zero()};  ///< aggregate [linear; angular about the CoM]
};

/// Center of mass, total mass and aggregate momentum about the CoM.
inline ComQuantities com_quantities(const MultibodyModel& model, const SystemState& state,
                                    const DesignParams& params = {})
{
    KinematicsCache kin(model, state, params);
    ComQuantities out;
    Vec3 weighted = Vec3::Zero();
    Vec3 linear = Vec3::Zero();
    struct Entry {
        detail::LinkWorldInertia wi;
        Vec3 com_velocity;
        Vec3 angular_velocity;
    };
    std::vector<Entry> entries;
    for (int link = 0; link < model.n_links(); ++link) {
        if (!model.link(link).body) continue;
        Entry e;
        e.wi = detail::link_world_inertia(model, kin, link, params);
        e.com_velocity = kin.point_velocity(link, e.wi.com_world).head<3>();
        e.angular_velocity = kin.link_angular_velocity(link);
        weighted += e.wi.mass * e.wi.com_world;
        linear += e.wi.mass * e.com_velocity;
        out.total_mass += e.wi.mass;
        entries.push_back(e);
    }
    if (out.total_mass <= 0.0) throw InvalidParameter("model has no mass");
    out.position = weighted / out.total_mass;
    Vec3 angular = Vec3::Zero();
    for (const auto& e : entries) {
        angular += (e.wi.com_world - out.position).cross(e.wi.mass * e.com_velocity);
        angular += e.wi.inertia_com_world * e.angular_velocity;
    }
    out.momentum.head<3>() = linear;
    out.momentum.tail<3>() = angular;
    return out;
}

/// 3 x (n+6) Jacobian of the CoM position (mass-weighted mean of the link
/// CoM point Jacobians).
inline MatX com_jacobian(const MultibodyModel& model, const SystemState& state,
                         const DesignParams& params = {})
{
    KinematicsCache kin(model, state, params);
    MatX jac = MatX::Zero(3, 6 + model.n_dof());
    double total = 0.0;
    for (int link = 0; link < model.n_links(); ++link) {
        if (!model.link(link).body) continue;
        const auto wi = detail::link_world_inertia(model, kin, link, params);
        jac.noalias() += wi.mass * kin.point_jacobian(link, wi.com_world).topRows<3>();
        total += wi.mass;
    }
    if (total <= 0.0) throw InvalidParameter("model has no mass");
    return jac / total;
}

/// Kinetic energy summed per link (independent of the mass-matrix assembly).
inline double kinetic_energy(const MultibodyModel& model, const SystemState& state,
                             const DesignParams& params = {})
{
    KinematicsCache kin(model, state, params);
    double t = 0.0;
    for (int link = 0; link < model.n_links(); ++link) {
        if (!model.link(link).body) continue;
        const auto wi = detail::link_world_inertia(model, kin, link, params);
        const Vec3 vc = kin.point_velocity(link, wi.com_world).head<3>();
        const Vec3& w = kin.link_angular_velocity(link);
        t += 0.5 * wi.mass * vc.squaredNorm() + 0.5 * w.dot(wi.inertia_com_world * w);
    }
    return t;
}

inline double potential_energy(const MultibodyModel& model, const SystemState& state,
                               const DesignParams& params = {})
{
    KinematicsCache kin(model, state, params);
    double v = 0.0;
    for (int link = 0; link < model.n_links(); ++link) {
        if (!model.link(link).body) continue;
        const auto wi = detail::link_world_inertia(model, kin, link, params);
        v += wi.mass * kGravity * wi.com_world.z();
    }
    return v;
}

}  // namespace dyad
