#pragma once

// Small-matrix helpers shared across the library: SO(3) maps, skew operators,
// rigid transforms and regularized pseudo-inverses.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace dyad {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;

/// Standard gravity along -z [m/s^2].
inline constexpr double kGravity = 9.81;

inline Vec3 gravity_vector() { return Vec3(0.0, 0.0, -kGravity); }

/// Skew-symmetric matrix S(x) such that S(x) y = x cross y.
inline Mat3 skew(const Vec3& x)
{
    Mat3 s;
    s <<    0.0, -x.z(),  x.y(),
          x.z(),    0.0, -x.x(),
         -x.y(),  x.x(),    0.0;
    return s;
}

/// Rotation about a unit axis by angle (Rodrigues).
inline Mat3 rotation_about(const Vec3& axis, double angle)
{
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// Exponential map so(3) -> SO(3).
inline Mat3 exp_so3(const Vec3& w)
{
    const double th = w.norm();
    if (th < 1e-12) {
        const Mat3 s = skew(w);
        return Mat3::Identity() + s + 0.5 * s * s;
    }
    return Eigen::AngleAxisd(th, w / th).toRotationMatrix();
}

/// Logarithm map SO(3) -> so(3), returning the rotation vector.
inline Vec3 log_so3(const Mat3& r)
{
    Eigen::AngleAxisd aa(r);
    return aa.angle() * aa.axis();
}

/// Inverse of the left Jacobian of SO(3): maps a spatial angular velocity w
/// to the rate of the exponential coordinate th with R = Exp(th) R0.
inline Vec3 dexpinv_so3(const Vec3& th, const Vec3& w)
{
    const double t = th.norm();
    if (t < 1e-8) {
        return w - 0.5 * th.cross(w) + th.cross(th.cross(w)) / 12.0;
    }
    const double c = 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
    return w - 0.5 * th.cross(w) + c * th.cross(th.cross(w));
}

/// Projects a nearly orthogonal matrix back onto SO(3).
inline Mat3 project_so3(const Mat3& r)
{
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    d(2, 2) = (u * v.transpose()).determinant() > 0.0 ? 1.0 : -1.0;
    return u * d * v.transpose();
}

/// Rigid transform: x_world = rotation * x_local + translation.
struct Transform {
    Mat3 rotation{Mat3::Identity()};
    Vec3 translation{Vec3::Zero()};

    static Transform identity() { return {}; }

    Transform operator*(const Transform& other) const
    {
        return {rotation * other.rotation, rotation * other.translation + translation};
    }

    Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

    Transform inverse() const
    {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }
};

/// 6D pose error [position error; orientation log error] between two frames.
inline Vec6 pose_error(const Transform& actual, const Transform& reference)
{
    Vec6 e;
    e.head<3>() = actual.translation - reference.translation;
    e.tail<3>() = log_so3(actual.rotation * reference.rotation.transpose());
    return e;
}

/// Moore-Penrose pseudo-inverse via SVD with relative singular-value cutoff.
inline MatX pseudo_inverse(const MatX& a, double relative_cutoff = 1e-8)
{
    if (a.size() == 0) return MatX(a.cols(), a.rows());
    Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VecX& sv = svd.singularValues();
    const double cutoff = relative_cutoff * (sv.size() > 0 ? sv(0) : 0.0);
    VecX inv = VecX::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Scalar pseudo-inverse with absolute cutoff, used for 1D projections.
inline double pseudo_inverse_scalar(double x, double cutoff = 1e-8)
{
    return std::abs(x) > cutoff ? 1.0 / x : 0.0;
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument / precondition violation.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Unknown frame, joint, or link name.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Numerical failure (singular system, failed factorization).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace dyad
