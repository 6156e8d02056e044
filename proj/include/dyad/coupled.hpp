#pragma once

// Coupled constrained dynamics of robot + human + payload: the stacked
// block terms, the grasp/environment coupling matrix, the constraint
// nullspace projector and the minimum-norm static torque map.

#include "dyad/dynamics.hpp"
#include "dyad/kinematics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dyad {

enum class EntityKind { Robot, Human, Object };

inline const char* entity_name(EntityKind k)
{
    switch (k) {
    case EntityKind::Robot: return "robot";
    case EntityKind::Human: return "human";
    default: return "object";
    }
}

struct EnvContact {
    EntityKind agent{EntityKind::Robot};
    std::string frame;
};

struct GraspContact {
    EntityKind agent{EntityKind::Robot};
    std::string agent_frame;
    std::string object_frame;
};

/// Two agents and one rigid payload connected by bilateral 6D contacts.
/// Either agent may be absent (a lone human holding the payload is the
/// degenerate case used by the ergonomics sweep).
class CoupledSystem {
public:
    struct Entity {
        EntityKind kind;
        MultibodyModel model;
        DesignParams params;
    };

    void set_robot(MultibodyModel model, DesignParams params = {})
    {
        set_entity(EntityKind::Robot, std::move(model), std::move(params));
    }
    void set_human(MultibodyModel model)
    {
        set_entity(EntityKind::Human, std::move(model), {});
    }
    void set_object(MultibodyModel model)
    {
        if (model.n_dof() != 0) {
            throw InvalidParameter("object must be a single rigid body");
        }
        set_entity(EntityKind::Object, std::move(model), {});
    }

    void set_robot_params(DesignParams params)
    {
        entity(EntityKind::Robot).params = std::move(params);
    }

    void add_env_contact(EntityKind agent, const std::string& frame)
    {
        env_contacts_.push_back({agent, frame});
    }
    void add_grasp(EntityKind agent, const std::string& agent_frame,
                   const std::string& object_frame)
    {
        grasps_.push_back({agent, agent_frame, object_frame});
    }

    bool has(EntityKind kind) const { return index_of(kind) >= 0; }

    const Entity& entity(EntityKind kind) const
    {
        const int i = index_of(kind);
        if (i < 0) throw LookupError(std::string("missing entity: ") + entity_name(kind));
        return entities_[i];
    }
    Entity& entity(EntityKind kind)
    {
        const int i = index_of(kind);
        if (i < 0) throw LookupError(std::string("missing entity: ") + entity_name(kind));
        return entities_[i];
    }

    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<EnvContact>& env_contacts() const { return env_contacts_; }
    const std::vector<GraspContact>& grasps() const { return grasps_; }

    int entity_count() const { return static_cast<int>(entities_.size()); }

    int index_of(EntityKind kind) const
    {
        for (size_t i = 0; i < entities_.size(); ++i) {
            if (entities_[i].kind == kind) return static_cast<int>(i);
        }
        return -1;
    }

    void validate() const
    {
        if (entities_.empty()) throw InvalidParameter("coupled system has no entities");
        for (const auto& e : entities_) e.model.validate();
        for (const auto& c : env_contacts_) {
            if (c.agent == EntityKind::Object) {
                throw InvalidParameter("environment contacts attach to agents, not the payload");
            }
            if (!entity(c.agent).model.has_frame(c.frame)) {
                throw LookupError("environment contact frame not found: " + c.frame);
            }
        }
        for (const auto& g : grasps_) {
            if (g.agent == EntityKind::Object) {
                throw InvalidParameter("grasp agent must be robot or human");
            }
            if (!has(EntityKind::Object)) {
                throw InvalidParameter("grasp declared without a payload");
            }
            if (!entity(g.agent).model.has_frame(g.agent_frame)) {
                throw LookupError("grasp frame not found: " + g.agent_frame);
            }
            if (!entity(EntityKind::Object).model.has_frame(g.object_frame)) {
                throw LookupError("object grasp frame not found: " + g.object_frame);
            }
        }
    }

    /// Standing scenarios additionally demand ground support per agent;
    /// without it the statics report their residual instead of failing here.
    void validate_standing() const
    {
        validate();
        for (const auto& e : entities_) {
            if (e.kind == EntityKind::Object) continue;
            bool supported = false;
            for (const auto& c : env_contacts_) supported |= c.agent == e.kind;
            if (!supported) {
                throw InvalidParameter(std::string(entity_name(e.kind)) +
                                       " has no environment contact");
            }
        }
    }

private:
    void set_entity(EntityKind kind, MultibodyModel model, DesignParams params)
    {
        model.validate();
        if (index_of(kind) >= 0) {
            throw InvalidParameter(std::string("duplicate entity: ") + entity_name(kind));
        }
        entities_.push_back({kind, std::move(model), std::move(params)});
    }

    std::vector<Entity> entities_;
    std::vector<EnvContact> env_contacts_;
    std::vector<GraspContact> grasps_;
};

/// Per-entity states in the system's block order.
struct CoupledState {
    std::vector<SystemState> states;

    static CoupledState zero(const CoupledSystem& system)
    {
        CoupledState s;
        for (const auto& e : system.entities()) {
            s.states.push_back(SystemState::zero(e.model));
        }
        return s;
    }

    SystemState& of(const CoupledSystem& system, EntityKind kind)
    {
        return states.at(system.index_of(kind));
    }
    const SystemState& of(const CoupledSystem& system, EntityKind kind) const
    {
        return states.at(system.index_of(kind));
    }
};

/// Stacked-block layout bookkeeping.
struct CoupledLayout {
    std::vector<int> velocity_offset;  ///< per entity
    std::vector<int> velocity_size;
    std::vector<int> torque_offset;    ///< per entity (agents only, -1 for object)
    std::vector<int> torque_size;
    int total_velocity{0};
    int total_torque{0};

    static CoupledLayout of(const CoupledSystem& system)
    {
        CoupledLayout l;
        for (const auto& e : system.entities()) {
            const int nv = 6 + e.model.n_dof();
            l.velocity_offset.push_back(l.total_velocity);
            l.velocity_size.push_back(nv);
            l.total_velocity += nv;
            if (e.kind == EntityKind::Object) {
                l.torque_offset.push_back(-1);
                l.torque_size.push_back(0);
            } else {
                l.torque_offset.push_back(l.total_torque);
                l.torque_size.push_back(e.model.n_dof());
                l.total_torque += e.model.n_dof();
            }
        }
        return l;
    }
};

/// Descriptor of one 6-row block of the coupling matrix.
struct ConstraintRow {
    enum class Kind { Environment, Grasp } kind;
    int row_offset;
    EntityKind agent;
    std::string agent_frame;
    std::string object_frame;  ///< empty for environment rows
};

struct CoupledTerms {
    CoupledLayout layout;
    MatX mass_matrix;      ///< block diagonal
    VecX bias;             ///< stacked h
    VecX gravity;          ///< stacked g
    MatX selector;         ///< B, maps stacked agent torques into velocities
    MatX coupling;         ///< Q
    VecX coupling_bias;    ///< Qdot * nu
    std::vector<ConstraintRow> rows;
};

/// Assembles the block dynamics and the contact coupling matrix at the
/// given per-entity states.
inline CoupledTerms assemble_coupled(const CoupledSystem& system, const CoupledState& state)
{
    system.validate();
    if (state.states.size() != static_cast<size_t>(system.entity_count())) {
        throw InvalidParameter("coupled state entity count mismatch");
    }

    CoupledTerms out;
    out.layout = CoupledLayout::of(system);
    const int nv = out.layout.total_velocity;
    out.mass_matrix = MatX::Zero(nv, nv);
    out.bias = VecX::Zero(nv);
    out.gravity = VecX::Zero(nv);
    out.selector = MatX::Zero(nv, out.layout.total_torque);

    std::vector<KinematicsCache> caches;
    caches.reserve(system.entity_count());
    for (int i = 0; i < system.entity_count(); ++i) {
        const auto& e = system.entities()[i];
        const auto terms = dynamics_terms(e.model, state.states[i], e.params);
        const int off = out.layout.velocity_offset[i];
        const int size = out.layout.velocity_size[i];
        out.mass_matrix.block(off, off, size, size) = terms.mass_matrix;
        out.bias.segment(off, size) = terms.bias;
        out.gravity.segment(off, size) = terms.gravity;
        if (out.layout.torque_offset[i] >= 0 && e.model.n_dof() > 0) {
            out.selector.block(off + 6, out.layout.torque_offset[i], e.model.n_dof(),
                               e.model.n_dof()) = MatX::Identity(e.model.n_dof(),
                                                                 e.model.n_dof());
        }
        caches.emplace_back(e.model, state.states[i], e.params);
    }

    const int n_rows = 6 * static_cast<int>(system.env_contacts().size() +
                                            system.grasps().size());
    out.coupling = MatX::Zero(n_rows, nv);
    out.coupling_bias = VecX::Zero(n_rows);

    int row = 0;
    for (const auto& c : system.env_contacts()) {
        const int i = system.index_of(c.agent);
        const auto fk = caches[i].frame_kinematics(c.frame);
        out.coupling.block(row, out.layout.velocity_offset[i], 6,
                           out.layout.velocity_size[i]) = fk.jacobian;
        out.coupling_bias.segment<6>(row) = fk.bias_acceleration;
        out.rows.push_back({ConstraintRow::Kind::Environment, row, c.agent, c.frame, ""});
        row += 6;
    }
    const int obj = system.index_of(EntityKind::Object);
    for (const auto& g : system.grasps()) {
        const int i = system.index_of(g.agent);
        const auto fa = caches[i].frame_kinematics(g.agent_frame);
        const auto fo = caches[obj].frame_kinematics(g.object_frame);
        out.coupling.block(row, out.layout.velocity_offset[i], 6,
                           out.layout.velocity_size[i]) = fa.jacobian;
        out.coupling.block(row, out.layout.velocity_offset[obj], 6,
                           out.layout.velocity_size[obj]) = -fo.jacobian;
        out.coupling_bias.segment<6>(row) = fa.bias_acceleration - fo.bias_acceleration;
        out.rows.push_back({ConstraintRow::Kind::Grasp, row, g.agent, g.agent_frame,
                            g.object_frame});
        row += 6;
    }
    return out;
}

struct ProjectorInfo {
    bool regularized{false};
    double schur_min_pivot{0.0};
};

/// Constraint nullspace projector
///   N = I - Q' (Q M^-1 Q')^-1 Q M^-1.
/// The Schur complement is inverted through a truncated eigendecomposition:
/// redundant constraint combinations (self-stress directions of closed
/// grasp loops) are cut instead of amplified, which keeps N Q' = 0 tight
/// even for rank-deficient Q.
inline MatX nullspace_projector(const MatX& mass_matrix, const MatX& coupling,
                                ProjectorInfo* info = nullptr,
                                double relative_cutoff = 1e-10)
{
    const int nv = static_cast<int>(mass_matrix.rows());
    if (coupling.rows() == 0) return MatX::Identity(nv, nv);

    const Eigen::LDLT<MatX> mass_ldlt(mass_matrix);
    const MatX minv_qt = mass_ldlt.solve(coupling.transpose());
    const MatX schur = coupling * minv_qt;
    Eigen::SelfAdjointEigenSolver<MatX> eig(schur);
    const VecX& lambda = eig.eigenvalues();
    const double cutoff = relative_cutoff * std::max(lambda.maxCoeff(), 0.0);
    VecX inv = VecX::Zero(lambda.size());
    bool truncated = false;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > cutoff) {
            inv(i) = 1.0 / lambda(i);
        } else {
            truncated = true;
        }
    }
    if (info) {
        info->regularized = truncated;
        info->schur_min_pivot = lambda.minCoeff();
    }
    const MatX schur_pinv =
        eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    return MatX::Identity(nv, nv) - coupling.transpose() * schur_pinv * minv_qt.transpose();
}

struct StaticTorques {
    VecX torques;            ///< stacked agent torques in layout order
    double residual{0.0};    ///< || N (B tau - g) ||
    CoupledLayout layout;
    std::vector<EntityKind> entity_order;

    VecX of(const CoupledSystem& system, EntityKind kind) const
    {
        const int i = system.index_of(kind);
        if (i < 0 || layout.torque_offset[i] < 0) {
            throw LookupError(std::string("no torques for ") + entity_name(kind));
        }
        return torques.segment(layout.torque_offset[i], layout.torque_size[i]);
    }
};

/// Minimum-norm joint torques balancing gravity under the contact
/// constraints, tau = (N B)^+ N g, evaluated with nu = nudot = 0.
inline StaticTorques static_torques(const CoupledSystem& system, CoupledState state,
                                    double svd_cutoff = 1e-8)
{
    for (auto& s : state.states) {
        s.base_velocity.setZero();
        s.joint_velocities.setZero();
    }
    const CoupledTerms terms = assemble_coupled(system, state);
    const MatX proj = nullspace_projector(terms.mass_matrix, terms.coupling);
    const MatX nb = proj * terms.selector;
    const VecX ng = proj * terms.gravity;

    StaticTorques out;
    out.layout = terms.layout;
    out.torques = pseudo_inverse(nb, svd_cutoff) * ng;
    out.residual = (nb * out.torques - ng).norm();
    for (const auto& e : system.entities()) out.entity_order.push_back(e.kind);
    return out;
}

/// Convenience: box-shaped payload of a given mass.
inline MultibodyModel make_box_object(double mass, const Vec3& dims,
                                      const std::string& name = "payload")
{
    if (!(mass > 0.0)) throw InvalidParameter("object mass must be > 0");
    ParametrizedLink body;
    body.shape = ShapeGeom::box(dims.x(), dims.y(), dims.z());
    body.density = mass / dims.prod();
    MultibodyModel m;
    m.add_base_link(name, body);
    m.add_frame("center", 0, Transform::identity());
    // Handles on the +-y faces, oriented like the body frame.
    m.add_frame("handle_left", 0, {Mat3::Identity(), Vec3(0.0, 0.5 * dims.y(), 0.0)});
    m.add_frame("handle_right", 0, {Mat3::Identity(), Vec3(0.0, -0.5 * dims.y(), 0.0)});
    return m;
}

}  // namespace dyad
