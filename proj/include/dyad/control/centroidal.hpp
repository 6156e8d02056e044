#pragma once

// Centroidal template model: CoM position and aggregate momentum driven by
// contact point forces and external disturbances, plus the contact-position
// dynamics that let inactive contacts relocate.

#include "dyad/math.hpp"

#include <array>
#include <vector>

namespace dyad {

struct Disturbance {
    Vec3 force{Vec3::Zero()};
    Vec3 position{Vec3::Zero()};
};

struct CentroidalState {
    Vec3 com{Vec3::Zero()};
    Vec6 momentum{Vec6::Zero()};  ///< [linear; angular about the CoM]
    std::array<Vec3, 2> contacts{Vec3::Zero(), Vec3::Zero()};
    std::array<bool, 2> active{true, true};
    std::vector<Disturbance> disturbances;
};

/// Momentum rate under gravity, contact forces and disturbances.
inline Vec6 momentum_rate(const CentroidalState& state, double mass,
                          const std::array<Vec3, 2>& forces)
{
    Vec6 rate = Vec6::Zero();
    rate.head<3>() = mass * gravity_vector();
    for (int i = 0; i < 2; ++i) {
        if (!state.active[i]) continue;
        rate.head<3>() += forces[i];
        rate.tail<3>() += (state.contacts[i] - state.com).cross(forces[i]);
    }
    for (const auto& d : state.disturbances) {
        rate.head<3>() += d.force;
        rate.tail<3>() += (d.position - state.com).cross(d.force);
    }
    return rate;
}

/// One RK4 step of the template dynamics. Inactive contacts drift with
/// their commanded velocities; active ones stay pinned.
inline CentroidalState centroidal_step(const CentroidalState& state, double mass,
                                       const std::array<Vec3, 2>& forces,
                                       const std::array<Vec3, 2>& contact_velocities,
                                       double dt)
{
    auto derivative = [&](const CentroidalState& s) {
        struct Rate {
            Vec3 com;
            Vec6 momentum;
            std::array<Vec3, 2> contacts;
        } r;
        r.com = s.momentum.head<3>() / mass;
        r.momentum = momentum_rate(s, mass, forces);
        for (int i = 0; i < 2; ++i) {
            r.contacts[i] = s.active[i] ? Vec3::Zero() : contact_velocities[i];
        }
        return r;
    };
    auto advance = [&](const CentroidalState& s, const auto& r, double h) {
        CentroidalState n = s;
        n.com += h * r.com;
        n.momentum += h * r.momentum;
        for (int i = 0; i < 2; ++i) n.contacts[i] += h * r.contacts[i];
        return n;
    };
    const auto k1 = derivative(state);
    const auto k2 = derivative(advance(state, k1, 0.5 * dt));
    const auto k3 = derivative(advance(state, k2, 0.5 * dt));
    const auto k4 = derivative(advance(state, k3, dt));
    CentroidalState out = state;
    out.com += dt / 6.0 * (k1.com + 2.0 * k2.com + 2.0 * k3.com + k4.com);
    out.momentum +=
        dt / 6.0 * (k1.momentum + 2.0 * k2.momentum + 2.0 * k3.momentum + k4.momentum);
    for (int i = 0; i < 2; ++i) {
        out.contacts[i] += dt / 6.0 * (k1.contacts[i] + 2.0 * k2.contacts[i] +
                                       2.0 * k3.contacts[i] + k4.contacts[i]);
    }
    return out;
}

}  // namespace dyad
