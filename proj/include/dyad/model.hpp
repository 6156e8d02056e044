#pragma once

// Floating-base kinematic tree: links with optional parametrized geometry,
// revolute or fixed joints, and per-link length multipliers as the hardware
// design parameters.

#include "dyad/math.hpp"
#include "dyad/shapes.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dyad {

enum class JointKind { Revolute, Fixed };

struct JointDescriptor {
    std::string name;
    JointKind kind{JointKind::Revolute};
    int parent_link{-1};
    int child_link{-1};
    Transform origin{};            ///< joint frame in the parent link frame
    Vec3 axis{Vec3::UnitZ()};      ///< rotation axis in the joint frame
    double position_min{-1e9};     ///< [rad]
    double position_max{1e9};
};

/// A node of the kinematic tree. Links without a body act as massless
/// connectors between the single-axis joints of a multi-DoF articulation.
struct Link {
    std::string name;
    std::optional<ParametrizedLink> body;
};

/// Per-link length multipliers; identity when empty.
struct DesignParams {
    VecX length_multipliers;

    static DesignParams identity(int n_links)
    {
        DesignParams p;
        p.length_multipliers = VecX::Ones(n_links);
        return p;
    }

    bool empty() const { return length_multipliers.size() == 0; }

    double multiplier(int link_index) const
    {
        if (empty()) return 1.0;
        return length_multipliers(link_index);
    }
};

class MultibodyModel {
public:
    MultibodyModel() = default;

    /// Adds the root (floating-base) link; must be called first.
    int add_base_link(const std::string& name, std::optional<ParametrizedLink> body)
    {
        if (!links_.empty()) throw InvalidParameter("base link must be added first");
        links_.push_back({name, std::move(body)});
        name_to_link_[name] = 0;
        parent_joint_.push_back(-1);
        return 0;
    }

    int add_link(const std::string& name, std::optional<ParametrizedLink> body,
                 JointDescriptor joint)
    {
        if (links_.empty()) throw InvalidParameter("add the base link first");
        if (name_to_link_.count(name)) throw InvalidParameter("duplicate link name: " + name);
        if (joint.parent_link < 0 || joint.parent_link >= static_cast<int>(links_.size())) {
            throw InvalidParameter("joint '" + joint.name + "' has an unknown parent link");
        }
        if (joint.kind == JointKind::Revolute &&
            std::abs(joint.axis.norm() - 1.0) > 1e-9) {
            throw InvalidParameter("joint '" + joint.name + "' axis must have unit norm");
        }
        const int link_index = static_cast<int>(links_.size());
        links_.push_back({name, std::move(body)});
        name_to_link_[name] = link_index;
        joint.child_link = link_index;
        if (joint.kind == JointKind::Revolute) {
            joint_dof_index_.push_back(n_dof_++);
        } else {
            joint_dof_index_.push_back(-1);
        }
        joints_.push_back(std::move(joint));
        parent_joint_.push_back(static_cast<int>(joints_.size()) - 1);
        return link_index;
    }

    /// Registers a named frame rigidly attached to a link.
    void add_frame(const std::string& name, int link_index, const Transform& offset)
    {
        if (frames_.count(name)) throw InvalidParameter("duplicate frame name: " + name);
        if (link_index < 0 || link_index >= static_cast<int>(links_.size())) {
            throw InvalidParameter("frame '" + name + "' attached to unknown link");
        }
        frames_[name] = {link_index, offset};
    }

    int n_links() const { return static_cast<int>(links_.size()); }
    int n_joints() const { return static_cast<int>(joints_.size()); }
    int n_dof() const { return n_dof_; }

    const Link& link(int i) const { return links_.at(i); }
    const JointDescriptor& joint(int i) const { return joints_.at(i); }
    const std::vector<JointDescriptor>& joints() const { return joints_; }

    /// Index of the joint whose child is link i (-1 for the base).
    int parent_joint_of_link(int i) const { return parent_joint_.at(i); }

    /// Generalized-coordinate index of joint j (-1 for fixed joints).
    int joint_dof(int j) const { return joint_dof_index_.at(j); }

    int link_index(const std::string& name) const
    {
        auto it = name_to_link_.find(name);
        if (it == name_to_link_.end()) throw LookupError("unknown link: " + name);
        return it->second;
    }

    bool has_link(const std::string& name) const { return name_to_link_.count(name) > 0; }

    int joint_index(const std::string& name) const
    {
        for (int j = 0; j < n_joints(); ++j) {
            if (joints_[j].name == name) return j;
        }
        throw LookupError("unknown joint: " + name);
    }

    bool has_joint(const std::string& name) const
    {
        for (const auto& j : joints_) {
            if (j.name == name) return true;
        }
        return false;
    }

    struct FrameAttachment {
        int link_index;
        Transform offset;
    };

    const FrameAttachment& frame(const std::string& name) const
    {
        auto it = frames_.find(name);
        if (it == frames_.end()) throw LookupError("unknown frame: " + name);
        return it->second;
    }

    bool has_frame(const std::string& name) const { return frames_.count(name) > 0; }

    const std::unordered_map<std::string, FrameAttachment>& frames() const { return frames_; }

    /// Stretch direction of link i in the link frame (principal axis mapped
    /// through the shape placement); zero for links without a body.
    Vec3 stretch_axis(int link_index) const
    {
        const auto& body = links_.at(link_index).body;
        if (!body) return Vec3::Zero();
        return body->frame.rotation * body->shape.principal_axis;
    }

    /// Position map applied to points fixed in link `link_index` when the
    /// link is stretched by `lm`: components along the stretch axis scale
    /// proportionally, so child joints ride outward with the geometry.
    Vec3 stretch_point(int link_index, const Vec3& point, double lm) const
    {
        const Vec3 axis = stretch_axis(link_index);
        if (axis.squaredNorm() < 0.5) return point;
        return point + (lm - 1.0) * axis.dot(point) * axis;
    }

    /// Mass properties of link i in the link frame under design params.
    SpatialInertia link_inertia(int link_index, const DesignParams& params) const
    {
        const auto& body = links_.at(link_index).body;
        if (!body) return {};
        double lm = body->length_multiplier * params.multiplier(link_index);
        return SpatialInertia::from_mass_properties(
            inertia_from_shape(body->shape, body->density, lm, body->frame));
    }

    double total_mass(const DesignParams& params) const
    {
        double m = 0.0;
        for (int i = 0; i < n_links(); ++i) m += link_inertia(i, params).mass;
        return m;
    }

    /// Structural validation: tree rooted at the base, unit axes, positive
    /// dimensions. Throws on the first violation.
    void validate() const
    {
        if (links_.empty()) throw InvalidParameter("model has no links");
        if (n_joints() != n_links() - 1) {
            throw InvalidParameter("joint graph is not a tree (n_joints != n_links - 1)");
        }
        std::vector<bool> reached(links_.size(), false);
        reached[0] = true;
        // Joints are appended with already-existing parents, so one pass
        // reaches every link iff the graph is a tree rooted at the base.
        for (const auto& j : joints_) {
            if (!reached[j.parent_link]) {
                throw InvalidParameter("joint '" + j.name + "' is not reachable from the base");
            }
            reached[j.child_link] = true;
        }
        for (int i = 0; i < n_links(); ++i) {
            if (links_[i].body) {
                validate_shape(links_[i].body->shape);
                if (!(links_[i].body->density > 0.0)) {
                    throw InvalidParameter("link '" + links_[i].name + "' has non-positive density");
                }
                if (!(links_[i].body->length_multiplier > 0.0)) {
                    throw InvalidParameter("link '" + links_[i].name +
                                           "' has non-positive length multiplier");
                }
            }
        }
        for (const auto& j : joints_) {
            if (j.position_min > j.position_max) {
                throw InvalidParameter("joint '" + j.name + "' has inverted position limits");
            }
        }
    }

private:
    std::vector<Link> links_;
    std::vector<JointDescriptor> joints_;
    std::vector<int> parent_joint_;        // per link
    std::vector<int> joint_dof_index_;     // per joint
    std::unordered_map<std::string, int> name_to_link_;
    std::unordered_map<std::string, FrameAttachment> frames_;
    int n_dof_{0};
};

}  // namespace dyad
