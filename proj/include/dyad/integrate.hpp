#pragma once

// Unconstrained forward dynamics and time stepping. The base orientation is
// integrated on SO(3): RK4 runs in exponential coordinates about the step
// start (Munthe-Kaas), so the rotation never leaves the manifold.

#include "dyad/dynamics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dyad {

/// A 6D wrench [force; torque] in world coordinates applied at the origin of
/// a named model frame.
struct ExternalWrench {
    std::string frame;
    Vec6 wrench{Vec6::Zero()};
};

/// Generalized acceleration solving
///   M(q) nudot + h(q, nu) = B tau + sum_i J_i^T f_i.
inline VecX forward_dynamics(const MultibodyModel& model, const SystemState& state,
                             const VecX& tau, const std::vector<ExternalWrench>& wrenches,
                             const DesignParams& params = {})
{
    if (tau.size() != model.n_dof()) {
        throw InvalidParameter("torque vector size does not match joint dof");
    }
    const DynamicsTerms terms = dynamics_terms(model, state, params);
    VecX rhs = -terms.bias;
    rhs.tail(model.n_dof()) += tau;
    if (!wrenches.empty()) {
        KinematicsCache kin(model, state, params);
        for (const auto& w : wrenches) {
            const auto fk = kin.frame_kinematics(w.frame);
            rhs.noalias() += fk.jacobian.transpose() * w.wrench;
        }
    }
    Eigen::LDLT<MatX> ldlt(terms.mass_matrix);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        const double cond = terms.mass_matrix.norm() *
                            terms.mass_matrix.inverse().norm();
        throw NumericalError("singular mass matrix, condition estimate " +
                             std::to_string(cond));
    }
    return ldlt.solve(rhs);
}

enum class IntegratorKind { RungeKutta4, SemiImplicitEuler };

namespace detail {

// Chart state about a reference orientation R0: R = Exp(theta) * R0.
struct ChartState {
    VecX y;  // [p(3), theta(3), s(n), v(3), w(3), sdot(n)]
    int n;

    static ChartState from(const SystemState& s)
    {
        ChartState c;
        c.n = s.n_dof();
        c.y = VecX::Zero(12 + 2 * c.n);
        c.y.segment<3>(0) = s.base_position;
        c.y.segment(6, c.n) = s.joint_positions;
        c.y.segment<3>(6 + c.n) = s.base_velocity.head<3>();
        c.y.segment<3>(9 + c.n) = s.base_velocity.tail<3>();
        c.y.segment(12 + c.n, c.n) = s.joint_velocities;
        return c;
    }

    SystemState to_state(const Mat3& r0) const
    {
        SystemState s;
        s.base_position = y.segment<3>(0);
        s.base_orientation = exp_so3(y.segment<3>(3)) * r0;
        s.joint_positions = y.segment(6, n);
        s.base_velocity.head<3>() = y.segment<3>(6 + n);
        s.base_velocity.tail<3>() = y.segment<3>(9 + n);
        s.joint_velocities = y.segment(12 + n, n);
        return s;
    }
};

}  // namespace detail

/// One integration step under constant joint torques and external wrenches.
inline SystemState integrate_step(const MultibodyModel& model, const SystemState& state,
                                  const VecX& tau, const std::vector<ExternalWrench>& wrenches,
                                  double dt, const DesignParams& params = {},
                                  IntegratorKind kind = IntegratorKind::RungeKutta4)
{
    if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
    const int n = model.n_dof();
    const Mat3 r0 = state.base_orientation;

    if (kind == IntegratorKind::SemiImplicitEuler) {
        SystemState next = state;
        const VecX nudot = forward_dynamics(model, state, tau, wrenches, params);
        next.base_velocity += dt * nudot.head<6>();
        next.joint_velocities += dt * nudot.tail(n);
        next.base_position += dt * next.base_velocity.head<3>();
        next.base_orientation = exp_so3(dt * next.base_velocity.tail<3>()) * r0;
        next.joint_positions += dt * next.joint_velocities;
        return next;
    }

    auto derivative = [&](const detail::ChartState& c) -> VecX {
        const SystemState s = c.to_state(r0);
        const VecX nudot = forward_dynamics(model, s, tau, wrenches, params);
        VecX dy = VecX::Zero(c.y.size());
        dy.segment<3>(0) = s.base_velocity.head<3>();
        dy.segment<3>(3) = dexpinv_so3(c.y.segment<3>(3), s.base_velocity.tail<3>());
        dy.segment(6, n) = s.joint_velocities;
        dy.segment<3>(6 + n) = nudot.head<3>();
        dy.segment<3>(9 + n) = nudot.segment<3>(3);
        dy.segment(12 + n, n) = nudot.tail(n);
        return dy;
    };

    detail::ChartState c = detail::ChartState::from(state);
    const VecX k1 = derivative(c);
    detail::ChartState c2 = c;
    c2.y += 0.5 * dt * k1;
    const VecX k2 = derivative(c2);
    detail::ChartState c3 = c;
    c3.y += 0.5 * dt * k2;
    const VecX k3 = derivative(c3);
    detail::ChartState c4 = c;
    c4.y += dt * k3;
    const VecX k4 = derivative(c4);
    c.y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return c.to_state(r0);
}

/// Spec-facing convenience: single forward-dynamics step.
inline SystemState forward_dynamics_and_integrate(
    const MultibodyModel& model, const SystemState& state, const VecX& tau,
    const std::vector<ExternalWrench>& wrenches, const DesignParams& params, double dt,
    IntegratorKind kind = IntegratorKind::RungeKutta4)
{
    return integrate_step(model, state, tau, wrenches, dt, params, kind);
}

}  // namespace dyad
