#ifndef BRICKIR_GEOMETRY_HPP
#define BRICKIR_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "brickir/error.hpp"

namespace brickir {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Orthonormality tolerance maintained by every composition.
inline constexpr double kOrthoTolerance = 1e-9;

/// max |R^T R - I| over all entries.
inline double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

/// Nearest proper rotation (polar decomposition via SVD).
inline Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

/// A proper rigid motion in LDU: x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  /// Restores the orthonormality invariant if it has drifted.
  void normalize() {
    if (orthonormality_error(rotation) > kOrthoTolerance) rotation = nearest_rotation(rotation);
  }

  bool operator==(const RigidTransform& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

/// a ∘ b: apply b, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  out.normalize();
  return out;
}

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

/// a⁻¹ ∘ b, so that compose(a, relative(a, b)) == b.
inline RigidTransform relative(const RigidTransform& a, const RigidTransform& b) {
  return compose(a.inverse(), b);
}

/// Largest absolute entry difference across rotation and translation.
inline double max_abs_difference(const RigidTransform& a, const RigidTransform& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

/// Rotation angle in degrees of a.rotation⁻¹ * b.rotation.
inline double rotation_angle_deg(const Mat3& a, const Mat3& b) {
  const Mat3 r = a.transpose() * b;
  const double c = (r.trace() - 1.0) / 2.0;
  const double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Angles

inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

/// cos/sin of an angle in degrees; exact for multiples of 90.
inline std::pair<double, double> cos_sin_deg(double deg) {
  if (deg == std::floor(deg) && std::fmod(deg, 90.0) == 0.0) {
    const auto quarter = ((static_cast<std::int64_t>(deg) / 90) % 4 + 4) % 4;
    constexpr std::array<std::pair<double, double>, 4> table{
        std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{-1.0, 0.0}, std::pair{0.0, -1.0}};
    return table[static_cast<std::size_t>(quarter)];
  }
  const double r = deg_to_rad(deg);
  return {std::cos(r), std::sin(r)};
}

/// Right-handed rotation of `deg` degrees about the unit vector `axis`.
inline Mat3 rotation_about(const Vec3& axis, double deg) {
  const auto [c, s] = cos_sin_deg(deg);
  const Vec3 k = axis.normalized();
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return c * Mat3::Identity() + s * kx + (1.0 - c) * (k * k.transpose());
}

/// Rounds to the nearest whole degree (half-up) and wraps into [0, 360).
inline int quantize_angle(double theta) {
  if (!std::isfinite(theta)) throw Error("non-finite-angle", "non-finite angle");
  double q = std::fmod(std::floor(theta + 0.5), 360.0);
  if (q < 0.0) q += 360.0;
  return static_cast<int>(q) % 360;
}

/// Rounds to the nearest whole LDU (half-up).
inline int quantize_slide(double s) {
  if (!std::isfinite(s)) throw Error("non-finite-slide", "non-finite slide");
  return static_cast<int>(std::floor(s + 0.5));
}

/// Intrinsic Z-Y-X rotation: Rz(e[0]) * Ry(e[1]) * Rx(e[2]), degrees.
inline Mat3 euler_zyx(const std::array<double, 3>& e) {
  return rotation_about(Vec3::UnitZ(), e[0]) * rotation_about(Vec3::UnitY(), e[1]) *
         rotation_about(Vec3::UnitX(), e[2]);
}

/// Inverse of euler_zyx. Middle angle in [-90, 90]; at gimbal lock the last
/// angle is pinned to zero.
inline std::array<double, 3> decompose_zyx(const Mat3& r) {
  const double cb = std::hypot(r(0, 0), r(1, 0));
  const double b = std::atan2(-r(2, 0), cb);
  if (cb < 1e-9) {
    return {rad_to_deg(std::atan2(-r(0, 1), r(1, 1))), rad_to_deg(b), 0.0};
  }
  return {rad_to_deg(std::atan2(r(1, 0), r(0, 0))), rad_to_deg(b),
          rad_to_deg(std::atan2(r(2, 1), r(2, 2)))};
}

// ---------------------------------------------------------------------------
// Connector frames and quantized connection parameters

/// A connector-local datum: origin, the rotation/slide axis, and a zero-yaw
/// reference axis perpendicular to it.
struct ConnectorFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 principal_axis = Vec3::UnitY();
  Vec3 reference_axis = Vec3::UnitX();

  /// Frame basis as a rigid transform: columns (reference, principal,
  /// reference x principal) placed at origin.
  RigidTransform to_transform() const {
    RigidTransform t;
    t.rotation.col(0) = reference_axis;
    t.rotation.col(1) = principal_axis;
    t.rotation.col(2) = reference_axis.cross(principal_axis);
    t.translation = origin;
    return t;
  }

  static ConnectorFrame from_transform(const RigidTransform& t) {
    return {t.translation, t.rotation.col(1), t.rotation.col(0)};
  }

  ConnectorFrame transformed(const RigidTransform& t) const {
    return {t.apply(origin), t.apply_vector(principal_axis), t.apply_vector(reference_axis)};
  }

  bool is_valid(double tol = 1e-9) const {
    return std::abs(principal_axis.norm() - 1.0) <= tol &&
           std::abs(reference_axis.norm() - 1.0) <= tol &&
           std::abs(principal_axis.dot(reference_axis)) <= tol;
  }
};

/// Builds a valid frame from possibly sloppy axes: normalizes the principal
/// axis and Gram-Schmidts the reference against it.
inline ConnectorFrame make_frame(const Vec3& origin, const Vec3& principal, const Vec3& reference) {
  const Vec3 p = principal.normalized();
  Vec3 r = reference - reference.dot(p) * p;
  if (r.norm() < 1e-9) throw Error("bad-frame", "reference axis is parallel to principal axis");
  return {origin, p, r.normalized()};
}

/// Family-specific connection parameters on the integer serialization grid.
/// Fields outside a family's degrees of freedom stay zero.
struct QuantizedParams {
  int yaw_deg = 0;
  bool flip = false;
  int slide_ldu = 0;
  std::array<int, 3> euler_deg{0, 0, 0};

  bool operator==(const QuantizedParams&) const = default;
};

}  // namespace brickir

#endif  // BRICKIR_GEOMETRY_HPP
