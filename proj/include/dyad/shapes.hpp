#pragma once

// Closed-form mass, center of mass and inertia for the basic link geometries
// (sphere, cylinder, box), parametrized by a uniform density and a length
// multiplier that stretches the shape along its principal axis.

#include "dyad/math.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dyad {

enum class ShapeKind { Sphere, Cylinder, Box };

/// Basic link geometry.
///
/// Dimension conventions (shape-local frame, origin at the centroid):
///  - sphere:   dims = {radius}
///  - cylinder: dims = {radius, length}, length along local z
///  - box:      dims = {width, depth, height} along local x, y, z
///
/// `principal_axis` selects the direction the length multiplier elongates.
/// It is expressed in the shape-local frame; boxes and cylinders require an
/// axis-aligned choice (the cylinder only elongates along its length axis),
/// while a sphere stretches into a spheroid along any unit direction.
struct ShapeGeom {
    ShapeKind kind{ShapeKind::Box};
    Vec3 dims{Vec3::Ones()};
    Vec3 principal_axis{Vec3::UnitZ()};

    static ShapeGeom sphere(double radius, const Vec3& axis = Vec3::UnitZ())
    {
        return {ShapeKind::Sphere, Vec3(radius, 0.0, 0.0), axis.normalized()};
    }
    static ShapeGeom cylinder(double radius, double length)
    {
        return {ShapeKind::Cylinder, Vec3(radius, length, 0.0), Vec3::UnitZ()};
    }
    static ShapeGeom box(double width, double depth, double height,
                         const Vec3& axis = Vec3::UnitZ())
    {
        return {ShapeKind::Box, Vec3(width, depth, height), axis};
    }
};

namespace detail {

inline bool is_axis_aligned(const Vec3& axis, int& index)
{
    for (int i = 0; i < 3; ++i) {
        if (std::abs(std::abs(axis(i)) - 1.0) < 1e-9) {
            index = i;
            return true;
        }
    }
    return false;
}

}  // namespace detail

inline void validate_shape(const ShapeGeom& shape)
{
    const int n_dims = shape.kind == ShapeKind::Sphere ? 1
                     : shape.kind == ShapeKind::Cylinder ? 2 : 3;
    for (int i = 0; i < n_dims; ++i) {
        if (!(shape.dims(i) > 0.0)) {
            throw InvalidParameter("shape dimension " + std::to_string(i) +
                                   " must be > 0");
        }
    }
    if (std::abs(shape.principal_axis.norm() - 1.0) > 1e-9) {
        throw InvalidParameter("principal_axis must have unit norm");
    }
    int axis_index = 0;
    if (shape.kind == ShapeKind::Box &&
        !detail::is_axis_aligned(shape.principal_axis, axis_index)) {
        throw InvalidParameter("box principal_axis must be axis-aligned");
    }
    if (shape.kind == ShapeKind::Cylinder &&
        (!detail::is_axis_aligned(shape.principal_axis, axis_index) || axis_index != 2)) {
        throw InvalidParameter("cylinder principal_axis must be +/-z (length axis)");
    }
}

/// Mass properties of a shape in its own local frame, origin at the centroid.
struct MassProperties {
    double mass{0.0};
    Vec3 com{Vec3::Zero()};    ///< centroid in the reference frame [m]
    Mat3 inertia{Mat3::Zero()};  ///< about the reference-frame origin [kg m^2]
};

/// Closed-form mass properties of the elongated shape in the shape-local
/// frame. Elongation scales the dimension selected by `principal_axis` by
/// `length_multiplier`; the volume (hence the mass, under uniform density)
/// is linear in the multiplier for every shape.
inline MassProperties shape_mass_properties(const ShapeGeom& shape, double density,
                                            double length_multiplier)
{
    validate_shape(shape);
    if (!(density > 0.0)) throw InvalidParameter("density must be > 0");
    if (!(length_multiplier > 0.0)) throw InvalidParameter("length multiplier must be > 0");

    MassProperties out;
    Mat3 inertia_local = Mat3::Zero();
    Mat3 axis_frame = Mat3::Identity();  // maps shape-local z of the formulas below

    switch (shape.kind) {
    case ShapeKind::Sphere: {
        // Spheroid with semi-axes (r, r, lm * r); the polar axis is aligned
        // with principal_axis. Reduces to the solid sphere at lm = 1.
        const double r = shape.dims(0);
        const double c = length_multiplier * r;
        const double volume = 4.0 / 3.0 * std::numbers::pi * r * r * c;
        out.mass = density * volume;
        inertia_local.diagonal() << 0.2 * out.mass * (r * r + c * c),
                                    0.2 * out.mass * (r * r + c * c),
                                    0.4 * out.mass * (r * r);
        // Rotate local z onto the requested axis.
        const Vec3 z = Vec3::UnitZ();
        const Vec3 a = shape.principal_axis;
        if ((a - z).norm() > 1e-12) {
            const Vec3 v = z.cross(a);
            if (v.norm() < 1e-12) {
                axis_frame = rotation_about(Vec3::UnitX(), std::numbers::pi);
            } else {
                axis_frame = rotation_about(v.normalized(), std::acos(std::clamp(z.dot(a), -1.0, 1.0)));
            }
        }
        break;
    }
    case ShapeKind::Cylinder: {
        const double r = shape.dims(0);
        const double len = length_multiplier * shape.dims(1);
        const double volume = std::numbers::pi * r * r * len;
        out.mass = density * volume;
        const double transverse = out.mass * (3.0 * r * r + len * len) / 12.0;
        inertia_local.diagonal() << transverse, transverse, 0.5 * out.mass * r * r;
        if (shape.principal_axis.z() < 0.0) {
            axis_frame = rotation_about(Vec3::UnitX(), std::numbers::pi);
        }
        break;
    }
    case ShapeKind::Box: {
        int stretched = 0;
        detail::is_axis_aligned(shape.principal_axis, stretched);
        Vec3 d = shape.dims;
        d(stretched) *= length_multiplier;
        const double volume = d.x() * d.y() * d.z();
        out.mass = density * volume;
        inertia_local.diagonal() << out.mass * (d.y() * d.y() + d.z() * d.z()) / 12.0,
                                    out.mass * (d.x() * d.x() + d.z() * d.z()) / 12.0,
                                    out.mass * (d.x() * d.x() + d.y() * d.y()) / 12.0;
        break;
    }
    }

    out.com = Vec3::Zero();
    out.inertia = axis_frame * inertia_local * axis_frame.transpose();
    return out;
}

/// A link body: basic shape, uniform density, length multiplier and the pose
/// of the shape centroid relative to the link frame.
struct ParametrizedLink {
    ShapeGeom shape;
    double density{1000.0};          ///< [kg/m^3]
    double length_multiplier{1.0};   ///< dimensionless, > 0
    Transform frame{};               ///< shape pose in the link frame
};

/// Mass, CoM and inertia of a parametrized link, expressed in the link frame
/// about the link origin (parallel-axis shift applied from the shape CoM).
///
/// Stretching acts about the link origin: the shape grows along its
/// principal axis and the shape placement offset scales along the same
/// direction, so geometry anchored down-axis moves outward with the link.
inline MassProperties inertia_from_shape(const ShapeGeom& shape, double density,
                                         double length_multiplier,
                                         const Transform& frame = Transform::identity())
{
    MassProperties local = shape_mass_properties(shape, density, length_multiplier);

    // Stretch direction in the link frame.
    const Vec3 axis_link = frame.rotation * shape.principal_axis;
    const Vec3 stretched_offset =
        frame.translation +
        (length_multiplier - 1.0) * axis_link.dot(frame.translation) * axis_link;

    MassProperties out;
    out.mass = local.mass;
    out.com = stretched_offset;  // shapes are centered in their local frame
    const Mat3 inertia_at_com = frame.rotation * local.inertia * frame.rotation.transpose();
    const Vec3& c = out.com;
    out.inertia = inertia_at_com +
                  out.mass * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
    return out;
}

inline MassProperties inertia_from_link(const ParametrizedLink& link)
{
    return inertia_from_shape(link.shape, link.density, link.length_multiplier, link.frame);
}

/// 6x6 body-frame spatial inertia
///   [ m I3     -m S(c) ]
///   [ m S(c)    I      ]
/// with I about the frame origin.
struct SpatialInertia {
    double mass{0.0};
    Vec3 com{Vec3::Zero()};
    Mat3 inertia{Mat3::Zero()};

    static SpatialInertia from_mass_properties(const MassProperties& mp)
    {
        return {mp.mass, mp.com, mp.inertia};
    }

    Mat6 matrix() const
    {
        Mat6 m = Mat6::Zero();
        m.topLeftCorner<3, 3>() = mass * Mat3::Identity();
        m.topRightCorner<3, 3>() = -mass * skew(com);
        m.bottomLeftCorner<3, 3>() = mass * skew(com);
        m.bottomRightCorner<3, 3>() = inertia;
        return m;
    }

    /// Rotational inertia about the CoM (parallel-axis shift removed).
    Mat3 inertia_about_com() const
    {
        return inertia - mass * (com.squaredNorm() * Mat3::Identity() - com * com.transpose());
    }
};

}  // namespace dyad
