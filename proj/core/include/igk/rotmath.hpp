#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace igk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Continuous 6D rotation: the first two columns of a rotation matrix, stored
// unnormalized. Serialized as (a1.x, a1.y, a1.z, a2.x, a2.y, a2.z).
struct Rotation6D {
  Vec3 a1 = Vec3::UnitX();
  Vec3 a2 = Vec3::UnitY();

  static Rotation6D identity() { return {}; }
};

struct AxisAngle {
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;  // radians, [0, pi]
};

// Gram-Schmidt decoding: c1 = a1/|a1|, c2 = normalized a2 minus its c1
// component, c3 = c1 x c2. Throws DegenerateInput when a1 is ~0 or a2 is
// parallel to a1.
Mat3 decode_6d(const Rotation6D& r);

Rotation6D encode_6d(const Mat3& m);

// Angle in [0, pi]; near pi the axis comes from the symmetric part of R, with
// its sign taken from the antisymmetric part. Angle 0 yields the axis (1, 0, 0).
AxisAngle to_axis_angle(const Mat3& m);

// Rodrigues' formula. The axis is normalized before use.
Mat3 from_axis_angle(const AxisAngle& aa);
Mat3 from_axis_angle(const Vec3& axis, double angle);

// Angle between two vectors in degrees, [0, 180], computed as
// atan2(|u x v|, u . v). Throws DegenerateVector when either norm is below 1e-9.
double angle_between(const Vec3& u, const Vec3& v);

// Minimal rotation taking direction u onto direction v. For antiparallel
// inputs the rotation is pi about an arbitrary axis perpendicular to u.
Mat3 rotation_between(const Vec3& u, const Vec3& v);

// Any unit vector perpendicular to v (v need not be normalized).
Vec3 any_perpendicular(const Vec3& v);

bool is_rotation(const Mat3& m, double tol = 1e-6);

}  // namespace igk
