#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "igk/rotmath.hpp"

namespace igk {

// Speaker-relative encodings of an intent target. Azimuth is atan2(z, x) in
// every scheme; lengths are raw meters.
enum class TargetScheme {
  Global,    // (x, y, z)
  XzUnitY,   // (x_u, z_u, r, log(r+1), y), r = |(x, z)|
  XzPolarY,  // (theta, r, log(r+1), y)
  Spherical, // (azimuth, elevation, d, log(d+1)), d = |p|
};

std::string_view to_string(TargetScheme scheme);
TargetScheme parse_scheme(std::string_view name);  // throws UnknownScheme
std::size_t component_count(TargetScheme scheme);
std::span<const std::string_view> component_names(TargetScheme scheme);

struct TargetEncoding {
  TargetScheme scheme = TargetScheme::Global;
  std::vector<double> values;
  // Set when the horizontal radius (or, for spherical, the distance) is zero:
  // direction components are then zeros, not a direction.
  bool degenerate = false;
};

TargetEncoding encode_target(const Vec3& p, TargetScheme scheme);  // throws NonFinite
Vec3 decode_target(const TargetEncoding& e);  // throws DegenerateEncoding

// Checks component count, ranges and the log(r+1) redundancy (1e-12).
// Throws InvariantViolation.
void validate(const TargetEncoding& e);

}  // namespace igk
