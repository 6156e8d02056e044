#pragma once

// Model description files: JSON documents listing links (shape, density,
// placement), joints (parent, child, axis, limits) and named frames, SI
// units throughout. The loader validates the tree structure and reports
// offending entities by name.

#include "dyad/model.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace dyad {

using Json = nlohmann::ordered_json;

namespace detail {

inline Vec3 vec3_from(const Json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) {
        throw InvalidParameter(what + " must be an array of 3 numbers");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Transform transform_from(const Json& j)
{
    Transform t;
    if (j.contains("translation")) t.translation = vec3_from(j["translation"], "translation");
    if (j.contains("rpy")) {
        const Vec3 rpy = vec3_from(j["rpy"], "rpy");
        t.rotation = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                      Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                      Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                         .toRotationMatrix();
    }
    return t;
}

inline Json transform_to(const Transform& t)
{
    Json j;
    j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
    const Vec3 rpy = t.rotation.eulerAngles(2, 1, 0).reverse();
    j["rpy"] = {rpy.x(), rpy.y(), rpy.z()};
    return j;
}

inline ShapeGeom shape_from(const Json& j, const std::string& link_name)
{
    const std::string kind = j.at("kind").get<std::string>();
    ShapeGeom shape;
    if (kind == "sphere") {
        shape.kind = ShapeKind::Sphere;
        shape.dims = Vec3(j.at("radius").get<double>(), 0.0, 0.0);
    } else if (kind == "cylinder") {
        shape.kind = ShapeKind::Cylinder;
        shape.dims = Vec3(j.at("radius").get<double>(), j.at("length").get<double>(), 0.0);
    } else if (kind == "box") {
        shape.kind = ShapeKind::Box;
        shape.dims = vec3_from(j.at("dims"), "box dims");
    } else {
        throw InvalidParameter("link '" + link_name + "' has unknown shape kind: " + kind);
    }
    if (j.contains("principal_axis")) {
        shape.principal_axis = vec3_from(j["principal_axis"], "principal_axis");
    }
    return shape;
}

}  // namespace detail

/// Parses a model document. Throws InvalidParameter/LookupError with the
/// offending link or joint named in the message.
inline MultibodyModel model_from_json(const Json& doc)
{
    if (!doc.contains("links") || !doc["links"].is_array() || doc["links"].empty()) {
        throw InvalidParameter("model needs a non-empty 'links' array");
    }

    struct PendingLink {
        std::string name;
        std::optional<ParametrizedLink> body;
    };
    std::vector<PendingLink> links;
    for (const auto& jl : doc["links"]) {
        PendingLink link;
        link.name = jl.at("name").get<std::string>();
        if (jl.contains("shape")) {
            ParametrizedLink body;
            body.shape = detail::shape_from(jl["shape"], link.name);
            body.density = jl.at("density").get<double>();
            if (!(body.density > 0.0)) {
                throw InvalidParameter("link '" + link.name + "' has non-positive density");
            }
            if (jl.contains("length_multiplier")) {
                body.length_multiplier = jl["length_multiplier"].get<double>();
            }
            if (jl.contains("frame")) body.frame = detail::transform_from(jl["frame"]);
            link.body = body;
        }
        links.push_back(std::move(link));
    }

    struct PendingJoint {
        JointDescriptor desc;
        std::string parent;
        std::string child;
        bool added{false};
    };
    std::vector<PendingJoint> joints;
    if (doc.contains("joints")) {
        for (const auto& jj : doc["joints"]) {
            PendingJoint joint;
            joint.desc.name = jj.at("name").get<std::string>();
            const std::string kind = jj.value("kind", std::string("revolute"));
            joint.desc.kind = kind == "fixed" ? JointKind::Fixed : JointKind::Revolute;
            joint.parent = jj.at("parent").get<std::string>();
            joint.child = jj.at("child").get<std::string>();
            if (jj.contains("origin")) joint.desc.origin = detail::transform_from(jj["origin"]);
            if (jj.contains("axis")) joint.desc.axis = detail::vec3_from(jj["axis"], "axis");
            if (jj.contains("limits")) {
                joint.desc.position_min = jj["limits"][0].get<double>();
                joint.desc.position_max = jj["limits"][1].get<double>();
            }
            joints.push_back(std::move(joint));
        }
    }

    // The first listed link roots the tree; joints attach in dependency
    // order. A pass that adds nothing while joints remain means the joint
    // graph is not a tree.
    MultibodyModel model;
    model.add_base_link(links[0].name, links[0].body);
    std::unordered_map<std::string, bool> attached;
    attached[links[0].name] = true;
    auto body_of = [&](const std::string& name) -> std::optional<ParametrizedLink> {
        for (const auto& l : links) {
            if (l.name == name) return l.body;
        }
        throw LookupError("joint references unknown link: " + name);
    };
    size_t remaining = joints.size();
    while (remaining > 0) {
        size_t added = 0;
        for (auto& j : joints) {
            if (j.added || !attached.count(j.parent) || attached.count(j.child)) continue;
            JointDescriptor desc = j.desc;
            desc.parent_link = model.link_index(j.parent);
            model.add_link(j.child, body_of(j.child), desc);
            attached[j.child] = true;
            j.added = true;
            ++added;
            --remaining;
        }
        if (added == 0) {
            throw InvalidParameter("joint graph is not a tree");
        }
    }
    if (model.n_links() != static_cast<int>(links.size())) {
        throw InvalidParameter("joint graph is not a tree (disconnected links)");
    }

    if (doc.contains("frames")) {
        for (const auto& jf : doc["frames"]) {
            model.add_frame(jf.at("name").get<std::string>(),
                            model.link_index(jf.at("link").get<std::string>()),
                            detail::transform_from(jf));
        }
    }
    model.validate();
    return model;
}

inline MultibodyModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open model file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidParameter("model parse error in " + path + ": " + e.what());
    }
    return model_from_json(doc);
}

inline Json model_to_json(const MultibodyModel& model)
{
    Json doc;
    doc["links"] = Json::array();
    for (int i = 0; i < model.n_links(); ++i) {
        Json jl;
        jl["name"] = model.link(i).name;
        const auto& body = model.link(i).body;
        if (body) {
            Json shape;
            switch (body->shape.kind) {
            case ShapeKind::Sphere:
                shape["kind"] = "sphere";
                shape["radius"] = body->shape.dims(0);
                break;
            case ShapeKind::Cylinder:
                shape["kind"] = "cylinder";
                shape["radius"] = body->shape.dims(0);
                shape["length"] = body->shape.dims(1);
                break;
            case ShapeKind::Box:
                shape["kind"] = "box";
                shape["dims"] = {body->shape.dims(0), body->shape.dims(1),
                                 body->shape.dims(2)};
                break;
            }
            shape["principal_axis"] = {body->shape.principal_axis.x(),
                                       body->shape.principal_axis.y(),
                                       body->shape.principal_axis.z()};
            jl["shape"] = shape;
            jl["density"] = body->density;
            jl["length_multiplier"] = body->length_multiplier;
            jl["frame"] = detail::transform_to(body->frame);
        }
        doc["links"].push_back(jl);
    }
    doc["joints"] = Json::array();
    for (int j = 0; j < model.n_joints(); ++j) {
        const auto& jd = model.joint(j);
        Json jj;
        jj["name"] = jd.name;
        jj["kind"] = jd.kind == JointKind::Fixed ? "fixed" : "revolute";
        jj["parent"] = model.link(jd.parent_link).name;
        jj["child"] = model.link(jd.child_link).name;
        jj["origin"] = detail::transform_to(jd.origin);
        jj["axis"] = {jd.axis.x(), jd.axis.y(), jd.axis.z()};
        jj["limits"] = {jd.position_min, jd.position_max};
        doc["joints"].push_back(jj);
    }
    doc["frames"] = Json::array();
    for (const auto& [name, att] : model.frames()) {
        Json jf = detail::transform_to(att.offset);
        jf["name"] = name;
        jf["link"] = model.link(att.link_index).name;
        doc["frames"].push_back(jf);
    }
    return doc;
}

}  // namespace dyad
