#pragma once

// Receding-horizon control of the centroidal model with footstep
// adjustment. The horizon holds Euler-discretized momentum/CoM/contact
// dynamics; contact forces live in 4-facet friction pyramids and footsteps
// may deviate from the nominal plan within a rotated box. The contact
// torque arm is linearized about the nominal plan and a nominal force
// split, which keeps every solve a convex QP.

#include "dyad/control/centroidal.hpp"
#include "dyad/control/footsteps.hpp"
#include "dyad/qp.hpp"

#include <array>
#include <vector>

namespace dyad {

struct MpcConfig {
    int horizon{20};
    double dt{0.1};
    double w_momentum_lin{100.0};
    double w_momentum_ang{100.0};
    double w_com{100.0};
    double w_force{1e-3};
    double w_footstep{10.0};
    double w_contact_vel{1e-2};
    Vec3 deviation_lower{-0.10, -0.10, -1e-3};
    Vec3 deviation_upper{0.10, 0.10, 1e-3};
    double friction_mu{0.7};
    double f_max{1e4};
    double v_max{2.0};
    bool soft_fallback{true};

    void validate() const
    {
        if (horizon < 1) throw InvalidParameter("mpc horizon must be >= 1");
        if (!(dt > 0.0)) throw InvalidParameter("mpc sampling period must be > 0");
        if (!(w_momentum_lin > 0.0 && w_momentum_ang > 0.0 && w_com > 0.0 &&
              w_force > 0.0 && w_footstep > 0.0)) {
            throw InvalidParameter("mpc weights must be > 0");
        }
        if (((deviation_upper - deviation_lower).array() <= 0.0).any()) {
            throw InvalidParameter("deviation bounds must satisfy lb < ub");
        }
        if (!(friction_mu > 0.0)) throw InvalidParameter("friction coefficient must be > 0");
    }
};

enum class MpcStatus { Optimal, SoftFallback, Infeasible };

struct MpcSolution {
    MpcStatus status{MpcStatus::Infeasible};
    std::vector<std::array<Vec3, 2>> forces;              ///< per stage
    std::vector<std::array<Vec3, 2>> contact_velocities;  ///< per stage
    std::vector<Vec3> predicted_com;                      ///< k = 1..N
    std::vector<Vec6> predicted_momentum;
    std::vector<std::array<Vec3, 2>> predicted_contacts;
    std::array<Vec3, 2> adjusted_footsteps;  ///< horizon-end contact targets
    double friction_margin{0.0};             ///< min over active stages
    double max_deviation{0.0};               ///< max |R'(p - p_n)| component
    double bound_violation{0.0};             ///< >0 only in the soft fallback
};

namespace detail {

struct MpcIndex {
    int n;
    int f(int k, int i) const { return 27 * k + 3 * i; }
    int v(int k, int i) const { return 27 * k + 6 + 3 * i; }
    int gh(int k) const { return 27 * k + 12; }   ///< state k+1
    int com(int k) const { return 27 * k + 18; }  ///< state k+1
    int p(int k, int i) const { return 27 * k + 21 + 3 * i; }  ///< state k+1
    int size() const { return 27 * n; }
};

}  // namespace detail

/// Solves the receding-horizon problem from `state` at plan time `t_now`.
inline MpcSolution centroidal_mpc_solve(const CentroidalState& state, double t_now,
                                        const ContactPlan& plan, double mass,
                                        const MpcConfig& config,
                                        bool allow_fallback_recursion = true)
{
    config.validate();
    const int n = config.horizon;
    const detail::MpcIndex idx{n};
    const double dt = config.dt;
    const double inf = std::numeric_limits<double>::infinity();

    // Stage data from the plan.
    std::vector<std::array<bool, 2>> active(n);
    std::vector<std::array<Vec3, 2>> nominal_feet(n);
    std::vector<std::array<double, 2>> nominal_yaw(n);
    std::vector<Vec3> com_ref(n);
    std::vector<Vec3> com_vel_ref(n);
    std::vector<std::array<Vec3, 2>> nominal_force(n);
    for (int k = 0; k < n; ++k) {
        const double t = t_now + k * dt;
        active[k] = plan.active_at(t);
        int n_active = (active[k][0] ? 1 : 0) + (active[k][1] ? 1 : 0);
        if (n_active == 0) n_active = 1;
        for (int i = 0; i < 2; ++i) {
            nominal_feet[k][i] = plan.nominal_foot(i, t);
            nominal_yaw[k][i] = plan.nominal_yaw(i, t);
            nominal_force[k][i] = active[k][i]
                ? Vec3(0.0, 0.0, mass * kGravity / n_active)
                : Vec3::Zero();
        }
        com_ref[k] = plan.com_position_ref(t + dt);
        com_vel_ref[k] = plan.com_velocity_ref(t + dt);
    }

    QpProblem qp;
    const int nx = idx.size();
    qp.hessian = MatX::Zero(nx, nx);
    qp.gradient = VecX::Zero(nx);
    qp.x_lower = VecX::Constant(nx, -inf);
    qp.x_upper = VecX::Constant(nx, inf);

    // Equality rows: momentum (6), CoM (3) and contact positions (6) per
    // stage, plus forces pinned to zero on swing stages.
    int eq_rows = 15 * n;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) {
            if (!active[k][i]) eq_rows += 3;
        }
    }

    MatX eq = MatX::Zero(eq_rows, nx);
    VecX eq_rhs = VecX::Zero(eq_rows);
    int row = 0;

    const Vec3 g3 = gravity_vector();
    for (int k = 0; k < n; ++k) {
        // Known disturbance forces over the horizon (held constant).
        Vec3 dist_force = Vec3::Zero();
        Vec3 dist_torque_const = Vec3::Zero();
        Mat3 dist_com_coeff = Mat3::Zero();
        for (const auto& d : state.disturbances) {
            dist_force += d.force;
            dist_torque_const += d.position.cross(d.force);
            // (p_d - com) x d = p_d x d + S(d) com.
            dist_com_coeff += skew(d.force);
        }

        // Momentum rows.
        // gh[k+1] - gh[k] - dt * sum_i(force rows) = dt * (m g + dist).
        eq.block<6, 6>(row, idx.gh(k)).setIdentity();
        if (k > 0) {
            eq.block<6, 6>(row, idx.gh(k - 1)) = -Mat6::Identity();
        }
        const Vec6 gh_prev = k > 0 ? Vec6::Zero() : state.momentum;
        // Linear part.
        for (int i = 0; i < 2; ++i) {
            if (!active[k][i]) continue;
            eq.block<3, 3>(row, idx.f(k, i)) = -dt * Mat3::Identity();
            // Angular: (p_bar_i - com_bar) x f + (p_i - p_bar_i) x f_bar
            //          - (com - com_bar) x f_bar.
            const Vec3 arm = nominal_feet[k][i] - com_ref[k];
            eq.block<3, 3>(row + 3, idx.f(k, i)) = -dt * skew(arm);
            const Vec3& fbar = nominal_force[k][i];
            if (k > 0) {
                eq.block<3, 3>(row + 3, idx.p(k - 1, i)) += dt * skew(fbar);
                eq.block<3, 3>(row + 3, idx.com(k - 1)) -= dt * skew(fbar);
                eq_rhs.segment<3>(row + 3) -= dt * arm.cross(fbar);
            } else {
                // Stage zero uses the measured contact and CoM positions.
                eq_rhs.segment<3>(row + 3) +=
                    dt * ((state.contacts[i] - nominal_feet[k][i]).cross(fbar) -
                          (state.com - com_ref[k]).cross(fbar));
            }
        }
        // Disturbance torque about the (variable) CoM, exact in com.
        if (k > 0) {
            eq.block<3, 3>(row + 3, idx.com(k - 1)) -= dt * dist_com_coeff;
        } else {
            eq_rhs.segment<3>(row + 3) += dt * dist_com_coeff * state.com;
        }
        eq_rhs.segment<3>(row) += dt * (mass * g3 + dist_force) + gh_prev.head<3>();
        eq_rhs.segment<3>(row + 3) += dt * dist_torque_const + gh_prev.tail<3>();
        row += 6;

        // CoM rows: com[k+1] - com[k] - dt/m * gh_lin[k] = 0.
        eq.block<3, 3>(row, idx.com(k)).setIdentity();
        if (k > 0) {
            eq.block<3, 3>(row, idx.com(k - 1)) = -Mat3::Identity();
            eq.block<3, 3>(row, idx.gh(k - 1)) = -(dt / mass) * Mat3::Identity();
            eq_rhs.segment<3>(row).setZero();
        } else {
            eq_rhs.segment<3>(row) = state.com + (dt / mass) * state.momentum.head<3>();
        }
        row += 3;

        // Contact position rows: p[k+1] - p[k] - dt (1 - gamma) v[k] = 0.
        for (int i = 0; i < 2; ++i) {
            eq.block<3, 3>(row, idx.p(k, i)).setIdentity();
            if (!active[k][i]) {
                eq.block<3, 3>(row, idx.v(k, i)) = -dt * Mat3::Identity();
            }
            if (k > 0) {
                eq.block<3, 3>(row, idx.p(k - 1, i)) = -Mat3::Identity();
            } else {
                eq_rhs.segment<3>(row) = state.contacts[i];
            }
            row += 3;
        }
    }
    // Swing-phase forces pinned to zero.
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) {
            if (active[k][i]) continue;
            eq.block<3, 3>(row, idx.f(k, i)).setIdentity();
            row += 3;
        }
    }
    qp.eq_matrix = std::move(eq);
    qp.eq_vector = std::move(eq_rhs);

    // Friction pyramid (4 facets) and vertical bounds on active forces;
    // footstep deviation boxes on the contact states.
    // The deviation box binds where the foot bears load; while swinging the
    // contact point is en route to its nominal and only v_max limits it.
    int ineq_rows = 0;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) {
            if (active[k][i]) ineq_rows += 4 + 3;
        }
    }
    MatX ineq = MatX::Zero(ineq_rows, nx);
    VecX lo = VecX::Constant(ineq_rows, -inf);
    VecX hi = VecX::Constant(ineq_rows, inf);
    int irow = 0;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) {
            if (active[k][i]) {
                const double mu = config.friction_mu;
                // |f_x| <= mu f_z and |f_y| <= mu f_z.
                ineq(irow, idx.f(k, i) + 0) = 1.0;
                ineq(irow, idx.f(k, i) + 2) = -mu;
                hi(irow++) = 0.0;
                ineq(irow, idx.f(k, i) + 0) = 1.0;
                ineq(irow, idx.f(k, i) + 2) = mu;
                lo(irow++) = 0.0;
                ineq(irow, idx.f(k, i) + 1) = 1.0;
                ineq(irow, idx.f(k, i) + 2) = -mu;
                hi(irow++) = 0.0;
                ineq(irow, idx.f(k, i) + 1) = 1.0;
                ineq(irow, idx.f(k, i) + 2) = mu;
                lo(irow++) = 0.0;
                qp.x_lower(idx.f(k, i) + 2) = 0.0;
                qp.x_upper(idx.f(k, i) + 2) = config.f_max;
                // Rotated deviation box on the loaded contact position.
                const Mat3 r_yaw = rotation_about(Vec3::UnitZ(), nominal_yaw[k][i]);
                ineq.block<3, 3>(irow, idx.p(k, i)) = r_yaw.transpose();
                const Vec3 center = r_yaw.transpose() * nominal_feet[k][i];
                lo.segment<3>(irow) = config.deviation_lower + center;
                hi.segment<3>(irow) = config.deviation_upper + center;
                irow += 3;
            }
            // Swing velocity bounds.
            for (int a = 0; a < 3; ++a) {
                qp.x_lower(idx.v(k, i) + a) = -config.v_max;
                qp.x_upper(idx.v(k, i) + a) = config.v_max;
            }
        }
    }
    qp.ineq_matrix = std::move(ineq);
    qp.ineq_lower = std::move(lo);
    qp.ineq_upper = std::move(hi);

    // Costs.
    for (int k = 0; k < n; ++k) {
        const Vec3 gh_lin_ref = mass * com_vel_ref[k];
        for (int a = 0; a < 3; ++a) {
            qp.hessian(idx.gh(k) + a, idx.gh(k) + a) += config.w_momentum_lin;
            qp.gradient(idx.gh(k) + a) -= config.w_momentum_lin * gh_lin_ref(a);
            qp.hessian(idx.gh(k) + 3 + a, idx.gh(k) + 3 + a) += config.w_momentum_ang;
            qp.hessian(idx.com(k) + a, idx.com(k) + a) += config.w_com;
            qp.gradient(idx.com(k) + a) -= config.w_com * com_ref[k](a);
        }
        for (int i = 0; i < 2; ++i) {
            for (int a = 0; a < 3; ++a) {
                qp.hessian(idx.f(k, i) + a, idx.f(k, i) + a) += config.w_force;
                qp.gradient(idx.f(k, i) + a) -= config.w_force * nominal_force[k][i](a);
                qp.hessian(idx.v(k, i) + a, idx.v(k, i) + a) += config.w_contact_vel;
                qp.hessian(idx.p(k, i) + a, idx.p(k, i) + a) += config.w_footstep;
                qp.gradient(idx.p(k, i) + a) -= config.w_footstep * nominal_feet[k][i](a);
            }
        }
        // Impact-wrench symmetry: penalize left/right force imbalance when
        // both feet carry load.
        if (active[k][0] && active[k][1]) {
            for (int a = 0; a < 3; ++a) {
                qp.hessian(idx.f(k, 0) + a, idx.f(k, 0) + a) += config.w_force;
                qp.hessian(idx.f(k, 1) + a, idx.f(k, 1) + a) += config.w_force;
                qp.hessian(idx.f(k, 0) + a, idx.f(k, 1) + a) -= config.w_force;
                qp.hessian(idx.f(k, 1) + a, idx.f(k, 0) + a) -= config.w_force;
            }
        }
    }

    QpOptions opts;
    opts.regularization = 1e-9;
    const QpSolution sol = solve_qp(qp, opts);

    MpcSolution out;
    if (sol.status == QpStatus::Optimal) {
        out.status = MpcStatus::Optimal;
    } else if (config.soft_fallback && allow_fallback_recursion) {
        // Relax the deviation boxes into the (already present) footstep
        // cost and report the violation.
        MpcConfig relaxed = config;
        relaxed.deviation_lower = Vec3::Constant(-1e3);
        relaxed.deviation_upper = Vec3::Constant(1e3);
        relaxed.soft_fallback = false;
        MpcSolution fallback =
            centroidal_mpc_solve(state, t_now, plan, mass, relaxed, false);
        if (fallback.status == MpcStatus::Optimal) {
            fallback.status = MpcStatus::SoftFallback;
            fallback.bound_violation = std::max(
                0.0, fallback.max_deviation -
                         config.deviation_upper.cwiseAbs().maxCoeff());
        }
        return fallback;
    } else {
        out.status = MpcStatus::Infeasible;
        return out;
    }

    out.forces.resize(n);
    out.contact_velocities.resize(n);
    out.predicted_com.resize(n);
    out.predicted_momentum.resize(n);
    out.predicted_contacts.resize(n);
    double margin = inf;
    double max_dev = 0.0;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < 2; ++i) {
            out.forces[k][i] = sol.x.segment<3>(idx.f(k, i));
            out.contact_velocities[k][i] = sol.x.segment<3>(idx.v(k, i));
            out.predicted_contacts[k][i] = sol.x.segment<3>(idx.p(k, i));
            if (active[k][i]) {
                const Vec3& f = out.forces[k][i];
                margin = std::min({margin, f.z(),
                                   config.friction_mu * f.z() - std::abs(f.x()),
                                   config.friction_mu * f.z() - std::abs(f.y())});
                const Mat3 r_yaw = rotation_about(Vec3::UnitZ(), nominal_yaw[k][i]);
                const Vec3 dev = r_yaw.transpose() *
                                 (out.predicted_contacts[k][i] - nominal_feet[k][i]);
                max_dev = std::max(max_dev, dev.cwiseAbs().maxCoeff());
            }
        }
        out.predicted_com[k] = sol.x.segment<3>(idx.com(k));
        out.predicted_momentum[k] = sol.x.segment<6>(idx.gh(k));
    }
    // Adjusted footstep: the contact position at the first swing-to-stance
    // transition inside the horizon (horizon end if the foot never lands).
    for (int i = 0; i < 2; ++i) {
        out.adjusted_footsteps[i] = out.predicted_contacts[n - 1][i];
        for (int k = 1; k < n; ++k) {
            if (!active[k - 1][i] && active[k][i]) {
                out.adjusted_footsteps[i] = out.predicted_contacts[k][i];
                break;
            }
        }
    }
    out.friction_margin = margin == inf ? 0.0 : margin;
    out.max_deviation = max_dev;
    return out;
}

}  // namespace dyad
