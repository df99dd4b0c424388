#include "igk/rotmath.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "igk/error.hpp"

namespace igk {

namespace {
constexpr double kDegenerateNorm = 1e-9;
}

Mat3 decode_6d(const Rotation6D& r) {
  const double n1 = r.a1.norm();
  if (!(n1 > kDegenerateNorm)) {
    throw Error(ErrorCode::DegenerateInput, "6D rotation has a zero first column");
  }
  const Vec3 c1 = r.a1 / n1;
  const Vec3 residual = r.a2 - r.a2.dot(c1) * c1;
  const double n2 = residual.norm();
  // Relative test so that a large-magnitude a2 nearly parallel to a1 is caught too.
  if (!(n2 > kDegenerateNorm * std::max(1.0, r.a2.norm()))) {
    throw Error(ErrorCode::DegenerateInput, "6D rotation columns are parallel");
  }
  const Vec3 c2 = residual / n2;
  Mat3 m;
  m.col(0) = c1;
  m.col(1) = c2;
  m.col(2) = c1.cross(c2);
  return m;
}

Rotation6D encode_6d(const Mat3& m) { return Rotation6D{m.col(0), m.col(1)}; }

AxisAngle to_axis_angle(const Mat3& m) {
  const double cos_angle = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  if (angle < 1e-12) {
    return AxisAngle{Vec3::UnitX(), 0.0};
  }

  const Vec3 skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  // sin(angle) is small near pi; the antisymmetric part loses all precision there.
  if (angle < kPi - 1e-3) {
    return AxisAngle{skew.normalized(), angle};
  }

  // sym(R) = cos(angle) I + (1 - cos(angle)) k k^T.
  const Mat3 kkt = (0.5 * (m + m.transpose()) - cos_angle * Mat3::Identity()) / (1.0 - cos_angle);
  int i = 0;
  kkt.diagonal().maxCoeff(&i);
  Vec3 axis = kkt.col(i) / std::sqrt(std::max(kkt(i, i), 1e-300));
  axis.normalize();
  // Resolve the sign with the antisymmetric part when it carries information.
  if (axis.dot(skew) < 0.0) {
    axis = -axis;
  }
  return AxisAngle{axis, angle};
}

Mat3 from_axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 from_axis_angle(const AxisAngle& aa) { return from_axis_angle(aa.axis, aa.angle); }

double angle_between(const Vec3& u, const Vec3& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > kDegenerateNorm) || !(nv > kDegenerateNorm)) {
    throw Error(ErrorCode::DegenerateVector, "angle requested against a zero-length vector");
  }
  // Same angle as acos of the clamped normalized dot product, but accurate near
  // 0 and 180 degrees where acos amplifies rounding of the cosine.
  const Vec3 a = u / nu;
  const Vec3 b = v / nv;
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  return rad_to_deg(std::atan2(a.cross(b).norm(), c));
}

Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 n = v.normalized();
  // Cross with the basis vector least aligned with v.
  int i = 0;
  n.cwiseAbs().minCoeff(&i);
  return n.cross(Vec3::Unit(i)).normalized();
}

Mat3 rotation_between(const Vec3& u, const Vec3& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > kDegenerateNorm) || !(nv > kDegenerateNorm)) {
    throw Error(ErrorCode::DegenerateVector, "rotation requested between zero-length vectors");
  }
  const Vec3 a = u / nu;
  const Vec3 b = v / nv;
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c > 0.0) {
      return Mat3::Identity();
    }
    return from_axis_angle(any_perpendicular(a), kPi);
  }
  return from_axis_angle(axis / s, std::atan2(s, c));
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) {
    return false;
  }
  const Mat3 gram = m.transpose() * m;
  if (((gram - Mat3::Identity()).cwiseAbs().array() > tol).any()) {
    return false;
  }
  return std::abs(m.determinant() - 1.0) <= tol;
}

}  // namespace igk
