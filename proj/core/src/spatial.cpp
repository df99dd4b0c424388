#include "igk/spatial.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "igk/error.hpp"

namespace igk {

namespace {

constexpr std::array<std::string_view, 3> kGlobalNames = {"x", "y", "z"};
constexpr std::array<std::string_view, 5> kUnitNames = {"x_u", "z_u", "r", "log_r1", "y"};
constexpr std::array<std::string_view, 4> kPolarNames = {"theta", "r", "log_r1", "y"};
constexpr std::array<std::string_view, 4> kSphericalNames = {"azimuth", "elevation", "d",
                                                             "log_d1"};

constexpr double kRedundancyTol = 1e-12;

}  // namespace

std::string_view to_string(TargetScheme scheme) {
  switch (scheme) {
    case TargetScheme::Global: return "global";
    case TargetScheme::XzUnitY: return "xz_unit_y";
    case TargetScheme::XzPolarY: return "xz_polar_y";
    case TargetScheme::Spherical: return "spherical";
  }
  return "global";
}

TargetScheme parse_scheme(std::string_view name) {
  for (auto s : {TargetScheme::Global, TargetScheme::XzUnitY, TargetScheme::XzPolarY,
                 TargetScheme::Spherical}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::UnknownScheme, fmt::format("unknown target scheme '{}'", name));
}

std::span<const std::string_view> component_names(TargetScheme scheme) {
  switch (scheme) {
    case TargetScheme::Global: return kGlobalNames;
    case TargetScheme::XzUnitY: return kUnitNames;
    case TargetScheme::XzPolarY: return kPolarNames;
    case TargetScheme::Spherical: return kSphericalNames;
  }
  return kGlobalNames;
}

std::size_t component_count(TargetScheme scheme) { return component_names(scheme).size(); }

TargetEncoding encode_target(const Vec3& p, TargetScheme scheme) {
  if (!p.allFinite()) {
    throw Error(ErrorCode::NonFinite, "target position is not finite");
  }
  const double x = p.x();
  const double y = p.y();
  const double z = p.z();
  const double r = std::hypot(x, z);

  TargetEncoding e;
  e.scheme = scheme;
  switch (scheme) {
    case TargetScheme::Global:
      e.values = {x, y, z};
      break;
    case TargetScheme::XzUnitY:
      e.degenerate = r == 0.0;
      e.values = {e.degenerate ? 0.0 : x / r, e.degenerate ? 0.0 : z / r, r, std::log1p(r), y};
      break;
    case TargetScheme::XzPolarY:
      e.degenerate = r == 0.0;
      e.values = {e.degenerate ? 0.0 : std::atan2(z, x), r, std::log1p(r), y};
      break;
    case TargetScheme::Spherical: {
      const double d = p.norm();
      e.degenerate = d == 0.0;
      // atan2(y, r) equals asin(y / d) and stays accurate near the poles.
      const double azimuth = r == 0.0 ? 0.0 : std::atan2(z, x);
      const double elevation = e.degenerate ? 0.0 : std::atan2(y, r);
      e.values = {azimuth, elevation, d, std::log1p(d)};
      break;
    }
  }
  return e;
}

void validate(const TargetEncoding& e) {
  if (e.values.size() != component_count(e.scheme)) {
    throw Error(ErrorCode::InvariantViolation,
                fmt::format("{} encoding needs {} components, got {}", to_string(e.scheme),
                            component_count(e.scheme), e.values.size()));
  }
  for (double v : e.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvariantViolation, "non-finite component");
  }
  const auto& v = e.values;
  auto check_log = [](double dist, double logged) {
    if (dist < 0.0) throw Error(ErrorCode::InvariantViolation, "negative distance component");
    if (std::abs(std::log1p(dist) - logged) > kRedundancyTol) {
      throw Error(ErrorCode::InvariantViolation, "log(r+1) disagrees with r");
    }
  };
  switch (e.scheme) {
    case TargetScheme::Global:
      break;
    case TargetScheme::XzUnitY: {
      check_log(v[2], v[3]);
      const double n = std::hypot(v[0], v[1]);
      const bool ok = e.degenerate ? n == 0.0 : std::abs(n - 1.0) <= 1e-9;
      if (!ok) throw Error(ErrorCode::InvariantViolation, "(x_u, z_u) is not a unit vector");
      break;
    }
    case TargetScheme::XzPolarY:
      check_log(v[1], v[2]);
      if (!(v[0] > -kPi - 1e-12 && v[0] <= kPi + 1e-12)) {
        throw Error(ErrorCode::InvariantViolation, "theta outside (-pi, pi]");
      }
      break;
    case TargetScheme::Spherical:
      check_log(v[2], v[3]);
      if (std::abs(v[1]) > kPi / 2 + 1e-12) {
        throw Error(ErrorCode::InvariantViolation, "elevation outside [-pi/2, pi/2]");
      }
      if (!(v[0] > -kPi - 1e-12 && v[0] <= kPi + 1e-12)) {
        throw Error(ErrorCode::InvariantViolation, "azimuth outside (-pi, pi]");
      }
      break;
  }
}

Vec3 decode_target(const TargetEncoding& e) {
  validate(e);
  if (e.degenerate) {
    throw Error(ErrorCode::DegenerateEncoding,
                fmt::format("{} encoding has no direction at the origin", to_string(e.scheme)));
  }
  const auto& v = e.values;
  switch (e.scheme) {
    case TargetScheme::Global:
      return {v[0], v[1], v[2]};
    case TargetScheme::XzUnitY:
      return {v[0] * v[2], v[4], v[1] * v[2]};
    case TargetScheme::XzPolarY:
      return {v[1] * std::cos(v[0]), v[3], v[1] * std::sin(v[0])};
    case TargetScheme::Spherical: {
      const double horizontal = v[2] * std::cos(v[1]);
      return {horizontal * std::cos(v[0]), v[2] * std::sin(v[1]), horizontal * std::sin(v[0])};
    }
  }
  return Vec3::Zero();
}

}  // namespace igk
