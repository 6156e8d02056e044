#pragma once

// Gaussian maximum-a-posteriori estimation of whole-body dynamic variables
// from simulated wearable measurements. The stacked unknown d collects the
// generalized accelerations, per-link spatial accelerations, internal joint
// wrenches, joint torques and external contact wrenches; the dynamics enter
// as a soft constraint block [Y; D] d + [b_Y; b_D] = [gamma; 0].

#include "dyad/dynamics.hpp"
#include "dyad/kinematics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dyad {

struct SensorBundle {
    struct Imu {
        std::string id;
        std::string frame;     ///< model frame the unit is strapped to
        Vec3 value{Vec3::Zero()};  ///< proper linear acceleration, sensor frame
        Mat3 covariance{1e-4 * Mat3::Identity()};
    };
    struct Ft {
        std::string id;
        std::string contact_frame;  ///< must be one of the declared contacts
        Vec6 value{Vec6::Zero()};   ///< external wrench, world coordinates
        Mat6 covariance{1e-4 * Mat6::Identity()};
    };
    struct JointAcc {
        VecX values;     ///< all generalized accelerations [base; joints]
        VecX variances;  ///< same size
    };

    std::vector<Imu> imus;
    std::vector<Ft> fts;
    std::optional<JointAcc> joint_acc;

    void validate() const
    {
        auto check_cov = [](const MatX& c, const std::string& id) {
            if ((c - c.transpose()).norm() > 1e-12 * std::max(1.0, c.norm())) {
                throw InvalidParameter("sensor covariance not symmetric: " + id);
            }
            Eigen::SelfAdjointEigenSolver<MatX> eig(c);
            if (eig.eigenvalues().minCoeff() <= 0.0) {
                throw InvalidParameter("sensor covariance not positive definite: " + id);
            }
        };
        for (const auto& s : imus) check_cov(s.covariance, s.id);
        for (const auto& s : fts) check_cov(s.covariance, s.id);
        if (joint_acc && (joint_acc->variances.array() <= 0.0).any()) {
            throw InvalidParameter("joint acceleration variances must be positive");
        }
    }
};

struct MapPriors {
    double dynamics_variance{1e-6};   ///< soft-constraint covariance scale
    double prior_variance{1e6};       ///< weak zero-mean prior on d
};

/// Index bookkeeping for the stacked variable d.
struct MapLayout {
    int nv{0};             ///< generalized accelerations
    int n_links{0};
    int n_joints{0};
    int n_dof{0};
    int n_contacts{0};

    int nudot_offset() const { return 0; }
    int link_acc_offset(int link) const { return nv + 6 * link; }
    int wrench_offset(int joint) const { return nv + 6 * n_links + 6 * joint; }
    int torque_offset() const { return nv + 6 * n_links + 6 * n_joints; }
    int contact_offset(int k) const { return torque_offset() + n_dof + 6 * k; }
    int size() const { return torque_offset() + n_dof + 6 * n_contacts; }
};

struct MapEstimate {
    MapLayout layout;
    VecX mean;
    MatX covariance;
    std::vector<int> torque_dofs;  ///< model dof index per torque entry

    VecX joint_torques() const
    {
        return mean.segment(layout.torque_offset(), layout.n_dof);
    }
    MatX torque_covariance() const
    {
        return covariance.block(layout.torque_offset(), layout.torque_offset(),
                                layout.n_dof, layout.n_dof);
    }
    VecX generalized_accelerations() const { return mean.head(layout.nv); }
    Vec6 contact_wrench(int k) const
    {
        return mean.segment<6>(layout.contact_offset(k));
    }
};

/// MAP estimate of the dynamic variables given the kinematic state and the
/// sensor bundle. `contact_frames` declares where external wrenches act.
inline MapEstimate map_estimate(const MultibodyModel& model, const SystemState& state,
                                const std::vector<std::string>& contact_frames,
                                const SensorBundle& sensors, const MapPriors& priors = {})
{
    sensors.validate();
    state.validate(model);

    KinematicsCache kin(model, state, {});
    MapLayout layout;
    layout.nv = 6 + model.n_dof();
    layout.n_links = model.n_links();
    layout.n_joints = model.n_joints();
    layout.n_dof = model.n_dof();
    layout.n_contacts = static_cast<int>(contact_frames.size());
    const int nd = layout.size();

    // Contact attachment points.
    struct ContactInfo {
        int link;
        Vec3 point;
    };
    std::vector<ContactInfo> contacts;
    for (const auto& name : contact_frames) {
        const auto& att = model.frame(name);
        contacts.push_back({att.link_index,
                            kin.point_world(att.link_index, att.offset.translation)});
    }

    const int n_d_rows = 12 * layout.n_links + layout.n_dof;
    MatX d_mat = MatX::Zero(n_d_rows, nd);
    VecX d_bias = VecX::Zero(n_d_rows);
    const Vec3 g = gravity_vector();

    int row = 0;
    // Kinematic consistency: a_l = J nudot + Jdot nu at each link origin.
    for (int link = 0; link < layout.n_links; ++link) {
        const Vec3 origin = kin.link_transform(link).translation;
        d_mat.block(row, layout.link_acc_offset(link), 6, 6) = Mat6::Identity();
        d_mat.block(row, 0, 6, layout.nv) = -kin.point_jacobian(link, origin);
        d_bias.segment<6>(row) = -kin.point_bias_acceleration(link, origin);
        row += 6;
    }
    // Newton-Euler balance per link, about the link CoM.
    for (int link = 0; link < layout.n_links; ++link) {
        const SpatialInertia si = model.link_inertia(link, {});
        const Transform& tf = kin.link_transform(link);
        const Vec3 com = tf.apply(si.com);
        const Vec3 r_c = com - tf.translation;
        const Mat3 inertia_c =
            tf.rotation * si.inertia_about_com() * tf.rotation.transpose();
        const Vec3& w = kin.link_angular_velocity(link);

        const int acc = layout.link_acc_offset(link);
        // Linear: m a_c = m g + sum of forces.
        d_mat.block<3, 3>(row, acc) = si.mass * Mat3::Identity();
        d_mat.block<3, 3>(row, acc + 3) = -si.mass * skew(r_c);
        d_bias.segment<3>(row) = si.mass * w.cross(w.cross(r_c)) - si.mass * g;
        // Angular about the CoM.
        d_mat.block<3, 3>(row + 3, acc + 3) = inertia_c;
        d_bias.segment<3>(row + 3) = w.cross(inertia_c * w);

        const int parent_joint = model.parent_joint_of_link(link);
        if (parent_joint >= 0) {
            const int woff = layout.wrench_offset(parent_joint);
            const Vec3 o = tf.translation;
            d_mat.block<3, 3>(row, woff) -= Mat3::Identity();
            d_mat.block<3, 3>(row + 3, woff) -= skew(o - com);
            d_mat.block<3, 3>(row + 3, woff + 3) -= Mat3::Identity();
        }
        for (int j = 0; j < layout.n_joints; ++j) {
            if (model.joint(j).parent_link != link) continue;
            const int woff = layout.wrench_offset(j);
            const Vec3 oc = kin.link_transform(model.joint(j).child_link).translation;
            d_mat.block<3, 3>(row, woff) += Mat3::Identity();
            d_mat.block<3, 3>(row + 3, woff) += skew(oc - com);
            d_mat.block<3, 3>(row + 3, woff + 3) += Mat3::Identity();
        }
        for (int k = 0; k < layout.n_contacts; ++k) {
            if (contacts[k].link != link) continue;
            const int coff = layout.contact_offset(k);
            d_mat.block<3, 3>(row, coff) -= Mat3::Identity();
            d_mat.block<3, 3>(row + 3, coff) -= skew(contacts[k].point - com);
            d_mat.block<3, 3>(row + 3, coff + 3) -= Mat3::Identity();
        }
        row += 6;
    }
    // Torque extraction: tau_j = axis . joint moment.
    MapEstimate out;
    for (int j = 0; j < layout.n_joints; ++j) {
        const int dof = model.joint_dof(j);
        if (dof < 0) continue;
        const auto fkj = kin.link_transform(model.joint(j).child_link);
        // World axis: child frame orientation maps the joint axis (rotation
        // about the axis leaves it fixed).
        const Vec3 axis = fkj.rotation * model.joint(j).axis;
        d_mat(row, layout.torque_offset() + dof) = 1.0;
        d_mat.block<1, 3>(row, layout.wrench_offset(j) + 3) = -axis.transpose();
        out.torque_dofs.push_back(dof);
        row += 1;
    }

    // Sensor rows.
    int n_y_rows = 3 * static_cast<int>(sensors.imus.size()) +
                   6 * static_cast<int>(sensors.fts.size());
    if (sensors.joint_acc) n_y_rows += layout.nv;
    MatX y_mat = MatX::Zero(n_y_rows, nd);
    VecX y_bias = VecX::Zero(n_y_rows);
    VecX y_val = VecX::Zero(n_y_rows);
    MatX y_cov_inv = MatX::Zero(n_y_rows, n_y_rows);

    int yrow = 0;
    for (const auto& imu : sensors.imus) {
        const auto& att = model.frame(imu.frame);
        const Transform& tf = kin.link_transform(att.link_index);
        const Mat3 r_ws = tf.rotation * att.offset.rotation;
        const Vec3 p = tf.apply(att.offset.translation);
        const Vec3 r_s = p - tf.translation;
        const Vec3& w = kin.link_angular_velocity(att.link_index);
        const int acc = layout.link_acc_offset(att.link_index);
        y_mat.block<3, 3>(yrow, acc) = r_ws.transpose();
        y_mat.block<3, 3>(yrow, acc + 3) = -r_ws.transpose() * skew(r_s);
        y_bias.segment<3>(yrow) = r_ws.transpose() * (w.cross(w.cross(r_s)) - g);
        y_val.segment<3>(yrow) = imu.value;
        y_cov_inv.block<3, 3>(yrow, yrow) = imu.covariance.inverse();
        yrow += 3;
    }
    for (const auto& ft : sensors.fts) {
        int index = -1;
        for (int k = 0; k < layout.n_contacts; ++k) {
            if (contact_frames[k] == ft.contact_frame) index = k;
        }
        if (index < 0) {
            throw LookupError("ft sensor contact frame not declared: " + ft.contact_frame);
        }
        y_mat.block<6, 6>(yrow, layout.contact_offset(index)) = Mat6::Identity();
        y_val.segment<6>(yrow) = ft.value;
        y_cov_inv.block<6, 6>(yrow, yrow) = ft.covariance.inverse();
        yrow += 6;
    }
    if (sensors.joint_acc) {
        if (sensors.joint_acc->values.size() != layout.nv) {
            throw InvalidParameter("joint acceleration sensor size mismatch");
        }
        y_mat.block(yrow, 0, layout.nv, layout.nv) =
            MatX::Identity(layout.nv, layout.nv);
        y_val.segment(yrow, layout.nv) = sensors.joint_acc->values;
        y_cov_inv.block(yrow, yrow, layout.nv, layout.nv) =
            sensors.joint_acc->variances.cwiseInverse().asDiagonal();
        yrow += layout.nv;
    }

    // Information-form solve.
    MatX info = MatX::Identity(nd, nd) / priors.prior_variance;
    info.noalias() += d_mat.transpose() * d_mat / priors.dynamics_variance;
    info.noalias() += y_mat.transpose() * y_cov_inv * y_mat;
    VecX rhs = VecX::Zero(nd);
    rhs.noalias() += d_mat.transpose() * (-d_bias) / priors.dynamics_variance;
    rhs.noalias() += y_mat.transpose() * (y_cov_inv * (y_val - y_bias));

    Eigen::LDLT<MatX> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("MAP information matrix factorization failed");
    }
    const double min_pivot = ldlt.vectorD().minCoeff();
    const double max_pivot = ldlt.vectorD().maxCoeff();
    if (min_pivot <= 0.0 || max_pivot / min_pivot > 1e18) {
        throw NumericalError(
            "MAP system indeterminate: information condition estimate " +
            std::to_string(max_pivot / std::max(min_pivot, 1e-300)));
    }

    out.layout = layout;
    out.mean = ldlt.solve(rhs);
    out.covariance = ldlt.solve(MatX::Identity(nd, nd));
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

/// Torques of the lumbosacral articulation (all dofs whose joint name starts
/// with "jL5S1"), as (values, squared-magnitude) of the estimate mean.
inline VecX l5s1_torque(const MultibodyModel& model, const MapEstimate& estimate)
{
    std::vector<double> values;
    for (int j = 0; j < model.n_joints(); ++j) {
        const int dof = model.joint_dof(j);
        if (dof < 0) continue;
        if (model.joint(j).name.rfind("jL5S1", 0) == 0) {
            values.push_back(estimate.joint_torques()(dof));
        }
    }
    if (values.empty()) throw LookupError("model has no jL5S1 joints");
    return Eigen::Map<VecX>(values.data(), values.size());
}

/// Same extraction from a plain stacked torque vector.
inline VecX l5s1_torque_from_joint_torques(const MultibodyModel& model, const VecX& tau)
{
    std::vector<double> values;
    for (int j = 0; j < model.n_joints(); ++j) {
        const int dof = model.joint_dof(j);
        if (dof < 0) continue;
        if (model.joint(j).name.rfind("jL5S1", 0) == 0) {
            values.push_back(tau(dof));
        }
    }
    if (values.empty()) throw LookupError("model has no jL5S1 joints");
    return Eigen::Map<VecX>(values.data(), values.size());
}

inline double l5s1_magnitude(const MultibodyModel& model, const VecX& tau)
{
    return l5s1_torque_from_joint_torques(model, tau).norm();
}

}  // namespace dyad
