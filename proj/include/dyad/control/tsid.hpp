#pragma once

// Task-space inverse dynamics over the coupled system: a QP in the stacked
// accelerations, agent torques and contact wrenches, constrained by the
// block dynamics, the second derivative of the coupling rows and any hard
// task accelerations.

#include "dyad/coupled.hpp"
#include "dyad/qp.hpp"

#include <string>
#include <vector>

namespace dyad {

struct TsidTask {
    EntityKind entity{EntityKind::Robot};
    std::string frame;
    Vec6 acceleration{Vec6::Zero()};  ///< commanded task acceleration
    double weight{1.0};
    bool hard{false};  ///< equality constraint instead of a cost term
};

struct TsidJointTask {
    EntityKind entity{EntityKind::Robot};
    VecX acceleration;  ///< commanded joint accelerations
    double weight{1.0};
};

struct TsidProblem {
    std::vector<TsidTask> tasks;
    std::vector<TsidJointTask> joint_tasks;
    double torque_regularization{1e-6};
    double force_regularization{1e-12};
    double acceleration_regularization{1e-9};
};

struct TsidSolution {
    VecX torques;            ///< stacked agent torques (layout order)
    VecX accelerations;      ///< stacked generalized accelerations
    VecX contact_forces;     ///< stacked constraint wrenches
    QpStatus status{QpStatus::MaxIterations};
    double constraint_residual{0.0};
    std::vector<std::string> violated;  ///< hard rows that could not be met
    CoupledLayout layout;

    VecX torques_of(const CoupledSystem& system, EntityKind kind) const
    {
        const int i = system.index_of(kind);
        if (i < 0 || layout.torque_offset[i] < 0) {
            throw LookupError("no torques for entity");
        }
        return torques.segment(layout.torque_offset[i], layout.torque_size[i]);
    }
};

inline TsidSolution tsid_solve(const CoupledSystem& system, const CoupledState& state,
                               const TsidProblem& problem)
{
    const CoupledTerms terms = assemble_coupled(system, state);
    const int nv = terms.layout.total_velocity;
    const int nt = terms.layout.total_torque;
    const int nc = static_cast<int>(terms.coupling.rows());
    const int nx = nv + nt + nc;

    // Variable layout: [nudot; tau; f].
    QpProblem qp;
    qp.hessian = MatX::Zero(nx, nx);
    qp.gradient = VecX::Zero(nx);
    qp.hessian.topLeftCorner(nv, nv).diagonal().setConstant(
        problem.acceleration_regularization);
    qp.hessian.block(nv, nv, nt, nt).diagonal().setConstant(problem.torque_regularization);
    qp.hessian.bottomRightCorner(nc, nc).diagonal().setConstant(
        problem.force_regularization);

    // Hard rows: dynamics (nv), coupling second derivative (nc), hard tasks.
    int hard_rows = nv + nc;
    std::vector<const TsidTask*> hard_tasks;
    for (const auto& t : problem.tasks) {
        if (t.hard) {
            hard_tasks.push_back(&t);
            hard_rows += 6;
        }
    }
    qp.eq_matrix = MatX::Zero(hard_rows, nx);
    qp.eq_vector = VecX::Zero(hard_rows);
    qp.eq_matrix.block(0, 0, nv, nv) = terms.mass_matrix;
    qp.eq_matrix.block(0, nv, nv, nt) = -terms.selector;
    qp.eq_matrix.block(0, nv + nt, nv, nc) = -terms.coupling.transpose();
    qp.eq_vector.head(nv) = -terms.bias;
    qp.eq_matrix.block(nv, 0, nc, nv) = terms.coupling;
    qp.eq_vector.segment(nv, nc) = -terms.coupling_bias;

    std::vector<KinematicsCache> caches;
    for (size_t i = 0; i < state.states.size(); ++i) {
        caches.emplace_back(system.entities()[i].model, state.states[i],
                            system.entities()[i].params);
    }
    auto task_rows = [&](const TsidTask& t, MatX& jac_out, Vec6& rhs_out) {
        const int i = system.index_of(t.entity);
        if (i < 0) throw LookupError("task on missing entity");
        const auto fk = caches[i].frame_kinematics(t.frame);
        jac_out = MatX::Zero(6, nv);
        jac_out.middleCols(terms.layout.velocity_offset[i],
                           terms.layout.velocity_size[i]) = fk.jacobian;
        rhs_out = t.acceleration - fk.bias_acceleration;
    };

    int row = nv + nc;
    for (const auto* t : hard_tasks) {
        MatX jac;
        Vec6 rhs;
        task_rows(*t, jac, rhs);
        qp.eq_matrix.block(row, 0, 6, nv) = jac;
        qp.eq_vector.segment<6>(row) = rhs;
        row += 6;
    }
    for (const auto& t : problem.tasks) {
        if (t.hard) continue;
        MatX jac;
        Vec6 rhs;
        task_rows(t, jac, rhs);
        qp.hessian.topLeftCorner(nv, nv).noalias() +=
            t.weight * jac.transpose() * jac;
        qp.gradient.head(nv).noalias() -= t.weight * jac.transpose() * rhs;
    }
    for (const auto& jt : problem.joint_tasks) {
        const int i = system.index_of(jt.entity);
        if (i < 0) throw LookupError("joint task on missing entity");
        const int n = system.entities()[i].model.n_dof();
        if (jt.acceleration.size() != n) {
            throw InvalidParameter("joint task dimension mismatch");
        }
        const int off = terms.layout.velocity_offset[i] + 6;
        qp.hessian.block(off, off, n, n).diagonal().array() += jt.weight;
        qp.gradient.segment(off, n).noalias() -= jt.weight * jt.acceleration;
    }

    const QpSolution sol = solve_qp(qp);
    TsidSolution out;
    out.layout = terms.layout;
    out.accelerations = sol.x.head(nv);
    out.torques = sol.x.segment(nv, nt);
    out.contact_forces = sol.x.tail(nc);
    out.status = sol.status;
    out.constraint_residual = sol.max_violation;
    if (sol.status == QpStatus::Infeasible) {
        const VecX residual = qp.eq_matrix * sol.x - qp.eq_vector;
        if (residual.head(nv).cwiseAbs().maxCoeff() > 1e-6) {
            out.violated.push_back("dynamics");
        }
        if (nc > 0 && residual.segment(nv, nc).cwiseAbs().maxCoeff() > 1e-6) {
            out.violated.push_back("coupling");
        }
        int r = nv + nc;
        for (const auto* t : hard_tasks) {
            if (residual.segment<6>(r).cwiseAbs().maxCoeff() > 1e-6) {
                out.violated.push_back(t->frame);
            }
            r += 6;
        }
    }
    return out;
}

}  // namespace dyad
