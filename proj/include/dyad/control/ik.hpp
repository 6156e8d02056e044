#pragma once

// Velocity-level inverse kinematics as a stack of tasks: CoM and feet
// tracking enter as hard equality constraints, torso orientation and joint
// regularization as costs, joint velocity limits as bounds.

#include "dyad/dynamics.hpp"
#include "dyad/qp.hpp"

#include <string>
#include <vector>

namespace dyad {

struct IkHardTask {
    std::string frame;
    Vec6 velocity{Vec6::Zero()};
    bool position_only{false};  ///< use the 3 linear rows only
};

struct IkProblem {
    /// CoM linear velocity target (hard) -- disabled if weight below.
    Vec3 com_velocity{Vec3::Zero()};
    bool com_task{true};
    std::vector<IkHardTask> hard_tasks;

    /// Torso orientation cost: angular velocity target for a frame.
    std::string torso_frame;
    Vec3 torso_angular_velocity{Vec3::Zero()};
    double torso_weight{1.0};

    VecX joint_velocity_reference;  ///< regularization target (may be empty)
    double joint_regularization{1e-2};

    VecX joint_velocity_lower;  ///< per-joint bounds (may be empty)
    VecX joint_velocity_upper;
};

struct IkSolution {
    VecX nu;                      ///< generalized velocity [base; joints]
    QpStatus status{QpStatus::MaxIterations};
    std::vector<std::string> saturated_joints;
    double constraint_residual{0.0};
};

inline IkSolution ik_velocity_solve(const MultibodyModel& model, const SystemState& state,
                                    const IkProblem& problem,
                                    const DesignParams& params = {})
{
    const int nv = 6 + model.n_dof();
    KinematicsCache kin(model, state, params);

    int eq_rows = problem.com_task ? 3 : 0;
    for (const auto& t : problem.hard_tasks) eq_rows += t.position_only ? 3 : 6;

    QpProblem qp;
    qp.hessian = 1e-8 * MatX::Identity(nv, nv);
    qp.gradient = VecX::Zero(nv);
    qp.eq_matrix = MatX::Zero(eq_rows, nv);
    qp.eq_vector = VecX::Zero(eq_rows);

    int row = 0;
    if (problem.com_task) {
        qp.eq_matrix.middleRows<3>(row) = com_jacobian(model, state, params);
        qp.eq_vector.segment<3>(row) = problem.com_velocity;
        row += 3;
    }
    for (const auto& t : problem.hard_tasks) {
        const auto fk = kin.frame_kinematics(t.frame);
        if (t.position_only) {
            qp.eq_matrix.middleRows<3>(row) = fk.jacobian.topRows<3>();
            qp.eq_vector.segment<3>(row) = t.velocity.head<3>();
            row += 3;
        } else {
            qp.eq_matrix.middleRows<6>(row) = fk.jacobian;
            qp.eq_vector.segment<6>(row) = t.velocity;
            row += 6;
        }
    }

    if (!problem.torso_frame.empty() && problem.torso_weight > 0.0) {
        const auto fk = kin.frame_kinematics(problem.torso_frame);
        const MatX jw = fk.jacobian.bottomRows<3>();
        qp.hessian.noalias() += problem.torso_weight * jw.transpose() * jw;
        qp.gradient.noalias() -=
            problem.torso_weight * jw.transpose() * problem.torso_angular_velocity;
    }
    if (problem.joint_regularization > 0.0) {
        qp.hessian.bottomRightCorner(model.n_dof(), model.n_dof()).diagonal().array() +=
            problem.joint_regularization;
        if (problem.joint_velocity_reference.size() == model.n_dof()) {
            qp.gradient.tail(model.n_dof()).noalias() -=
                problem.joint_regularization * problem.joint_velocity_reference;
        }
    }

    const double inf = std::numeric_limits<double>::infinity();
    qp.x_lower = VecX::Constant(nv, -inf);
    qp.x_upper = VecX::Constant(nv, inf);
    if (problem.joint_velocity_lower.size() == model.n_dof()) {
        qp.x_lower.tail(model.n_dof()) = problem.joint_velocity_lower;
    }
    if (problem.joint_velocity_upper.size() == model.n_dof()) {
        qp.x_upper.tail(model.n_dof()) = problem.joint_velocity_upper;
    }

    const QpSolution sol = solve_qp(qp);
    IkSolution out;
    out.nu = sol.x;
    out.status = sol.status;
    if (eq_rows > 0) {
        out.constraint_residual =
            (qp.eq_matrix * sol.x - qp.eq_vector).cwiseAbs().maxCoeff();
    }
    for (int j = 0; j < model.n_joints(); ++j) {
        const int dof = model.joint_dof(j);
        if (dof < 0) continue;
        if (sol.bound_multipliers.size() == nv &&
            std::abs(sol.bound_multipliers(6 + dof)) > 1e-9) {
            out.saturated_joints.push_back(model.joint(j).name);
        }
    }
    return out;
}

}  // namespace dyad
