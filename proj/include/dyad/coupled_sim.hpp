#pragma once

// Forward simulation of the coupled system: the constraint forces come from
// the saddle-point solve of the block dynamics with the coupling rows, with
// Baumgarte stabilization against drift. Constraint anchors are captured
// from the initial state.

#include "dyad/coupled.hpp"
#include "dyad/integrate.hpp"

namespace dyad {

struct CoupledWrench {
    EntityKind entity{EntityKind::Object};
    std::string frame;
    Vec6 wrench{Vec6::Zero()};  ///< world coordinates at the frame origin
};

struct CoupledAcceleration {
    VecX nudot;
    VecX constraint_forces;  ///< stacked per constraint row block
};

class CoupledSimulator {
public:
    CoupledSimulator(CoupledSystem system, const CoupledState& initial,
                     double baumgarte_omega = 10.0)
        : system_(std::move(system)), omega_(baumgarte_omega)
    {
        capture_anchors(initial);
    }

    const CoupledSystem& system() const { return system_; }

    /// Accelerations and constraint forces at the given state.
    CoupledAcceleration acceleration(const CoupledState& state, const VecX& torques,
                                     const std::vector<CoupledWrench>& wrenches = {}) const
    {
        const CoupledTerms terms = assemble_coupled(system_, state);
        const int nv = terms.layout.total_velocity;
        const int nc = static_cast<int>(terms.coupling.rows());
        if (torques.size() != terms.layout.total_torque) {
            throw InvalidParameter("stacked torque size mismatch");
        }

        VecX rhs_top = terms.selector * torques - terms.bias;
        for (const auto& w : wrenches) {
            const int i = system_.index_of(w.entity);
            if (i < 0) throw LookupError("wrench on missing entity");
            KinematicsCache kin(system_.entities()[i].model, state.states[i],
                                system_.entities()[i].params);
            const auto fk = kin.frame_kinematics(w.frame);
            rhs_top.segment(terms.layout.velocity_offset[i],
                            terms.layout.velocity_size[i])
                .noalias() += fk.jacobian.transpose() * w.wrench;
        }

        CoupledAcceleration out;
        if (nc == 0) {
            out.nudot = terms.mass_matrix.ldlt().solve(rhs_top);
            out.constraint_forces = VecX();
            return out;
        }

        VecX nu(nv);
        for (size_t i = 0; i < state.states.size(); ++i) {
            nu.segment(terms.layout.velocity_offset[i], terms.layout.velocity_size[i]) =
                state.states[i].generalized_velocity();
        }
        const VecX drift = constraint_error(state);
        const VecX rhs_con = -terms.coupling_bias - 2.0 * omega_ * (terms.coupling * nu) -
                             omega_ * omega_ * drift;

        // Schur-complement solve with eigen-truncation: redundant rows of a
        // closed grasp loop get the minimum-norm force, not 1/eps noise.
        const Eigen::LDLT<MatX> mass_ldlt(terms.mass_matrix);
        const MatX minv_qt = mass_ldlt.solve(terms.coupling.transpose());
        const MatX schur = terms.coupling * minv_qt;
        Eigen::SelfAdjointEigenSolver<MatX> eig(schur);
        const VecX& lambda = eig.eigenvalues();
        const double cutoff = 1e-10 * std::max(lambda.maxCoeff(), 0.0);
        VecX inv = VecX::Zero(lambda.size());
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
        }
        const MatX schur_pinv =
            eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
        out.constraint_forces = schur_pinv * (rhs_con - minv_qt.transpose() * rhs_top);
        out.nudot = mass_ldlt.solve(rhs_top + terms.coupling.transpose() *
                                              out.constraint_forces);
        (void)nc;
        return out;
    }

    /// One RK4 step under constant torques and external wrenches.
    CoupledState step(const CoupledState& state, const VecX& torques, double dt,
                      const std::vector<CoupledWrench>& wrenches = {}) const
    {
        if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
        // Chart per entity about the step-start orientation.
        std::vector<Mat3> r0;
        for (const auto& s : state.states) r0.push_back(s.base_orientation);

        auto pack = [&](const CoupledState& cs) {
            VecX y(total_chart_size());
            int off = 0;
            for (size_t i = 0; i < cs.states.size(); ++i) {
                const auto& s = cs.states[i];
                const int n = s.n_dof();
                y.segment<3>(off) = s.base_position;
                y.segment<3>(off + 3) = log_so3(s.base_orientation * r0[i].transpose());
                y.segment(off + 6, n) = s.joint_positions;
                y.segment<3>(off + 6 + n) = s.base_velocity.head<3>();
                y.segment<3>(off + 9 + n) = s.base_velocity.tail<3>();
                y.segment(off + 12 + n, n) = s.joint_velocities;
                off += 12 + 2 * n;
            }
            return y;
        };
        auto unpack = [&](const VecX& y) {
            CoupledState cs = state;
            int off = 0;
            for (size_t i = 0; i < cs.states.size(); ++i) {
                auto& s = cs.states[i];
                const int n = s.n_dof();
                s.base_position = y.segment<3>(off);
                s.base_orientation = exp_so3(y.segment<3>(off + 3)) * r0[i];
                s.joint_positions = y.segment(off + 6, n);
                s.base_velocity.head<3>() = y.segment<3>(off + 6 + n);
                s.base_velocity.tail<3>() = y.segment<3>(off + 9 + n);
                s.joint_velocities = y.segment(off + 12 + n, n);
                off += 12 + 2 * n;
            }
            return cs;
        };
        auto derivative = [&](const VecX& y) {
            const CoupledState cs = unpack(y);
            const CoupledAcceleration acc = acceleration(cs, torques, wrenches);
            VecX dy(y.size());
            int off = 0;
            int voff = 0;
            for (size_t i = 0; i < cs.states.size(); ++i) {
                const auto& s = cs.states[i];
                const int n = s.n_dof();
                dy.segment<3>(off) = s.base_velocity.head<3>();
                dy.segment<3>(off + 3) =
                    dexpinv_so3(y.segment<3>(off + 3), s.base_velocity.tail<3>());
                dy.segment(off + 6, n) = s.joint_velocities;
                dy.segment(off + 6 + n, 6 + n) = acc.nudot.segment(voff, 6 + n);
                off += 12 + 2 * n;
                voff += 6 + n;
            }
            return dy;
        };

        const VecX y0 = pack(state);
        const VecX k1 = derivative(y0);
        const VecX k2 = derivative(y0 + 0.5 * dt * k1);
        const VecX k3 = derivative(y0 + 0.5 * dt * k2);
        const VecX k4 = derivative(y0 + dt * k3);
        return unpack(y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }

    /// Velocity-level constraint violation ||Q nu||_inf.
    double velocity_violation(const CoupledState& state) const
    {
        const CoupledTerms terms = assemble_coupled(system_, state);
        if (terms.coupling.rows() == 0) return 0.0;
        VecX nu(terms.layout.total_velocity);
        for (size_t i = 0; i < state.states.size(); ++i) {
            nu.segment(terms.layout.velocity_offset[i], terms.layout.velocity_size[i]) =
                state.states[i].generalized_velocity();
        }
        return (terms.coupling * nu).cwiseAbs().maxCoeff();
    }

    /// Position-level pose error against the captured anchors.
    VecX constraint_error(const CoupledState& state) const
    {
        const int nc = 6 * static_cast<int>(system_.env_contacts().size() +
                                            system_.grasps().size());
        VecX c = VecX::Zero(nc);
        int row = 0;
        std::vector<KinematicsCache> caches;
        for (size_t i = 0; i < state.states.size(); ++i) {
            caches.emplace_back(system_.entities()[i].model, state.states[i],
                                system_.entities()[i].params);
        }
        for (size_t k = 0; k < system_.env_contacts().size(); ++k) {
            const auto& ec = system_.env_contacts()[k];
            const int i = system_.index_of(ec.agent);
            const Transform pose = caches[i].frame_kinematics(ec.frame).pose;
            c.segment<6>(row) = pose_error(pose, env_anchors_[k]);
            row += 6;
        }
        const int obj = system_.index_of(EntityKind::Object);
        for (size_t k = 0; k < system_.grasps().size(); ++k) {
            const auto& g = system_.grasps()[k];
            const int i = system_.index_of(g.agent);
            const Transform pa = caches[i].frame_kinematics(g.agent_frame).pose;
            const Transform po = caches[obj].frame_kinematics(g.object_frame).pose;
            c.segment<6>(row) = pose_error(pa, po * grasp_anchors_[k]);
            row += 6;
        }
        return c;
    }

private:
    void capture_anchors(const CoupledState& state)
    {
        system_.validate();
        std::vector<KinematicsCache> caches;
        for (size_t i = 0; i < state.states.size(); ++i) {
            caches.emplace_back(system_.entities()[i].model, state.states[i],
                                system_.entities()[i].params);
        }
        for (const auto& ec : system_.env_contacts()) {
            const int i = system_.index_of(ec.agent);
            env_anchors_.push_back(caches[i].frame_kinematics(ec.frame).pose);
        }
        const int obj = system_.index_of(EntityKind::Object);
        for (const auto& g : system_.grasps()) {
            const int i = system_.index_of(g.agent);
            const Transform pa = caches[i].frame_kinematics(g.agent_frame).pose;
            const Transform po = caches[obj].frame_kinematics(g.object_frame).pose;
            grasp_anchors_.push_back(po.inverse() * pa);
        }
    }

    int total_chart_size() const
    {
        int size = 0;
        for (const auto& e : system_.entities()) size += 12 + 2 * e.model.n_dof();
        return size;
    }

    CoupledSystem system_;
    double omega_;
    std::vector<Transform> env_anchors_;
    std::vector<Transform> grasp_anchors_;
};

}  // namespace dyad
