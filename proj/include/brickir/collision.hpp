#ifndef BRICKIR_COLLISION_HPP
#define BRICKIR_COLLISION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "brickir/error.hpp"
#include "brickir/geometry.hpp"
#include "brickir/mesh.hpp"

namespace brickir {

/// Inset applied to part meshes before collision checks, in LDU.
inline constexpr double kDefaultInset = 0.25;

/// Projections overlapping by no more than this count as touching.
inline constexpr double kContactEpsilon = 1e-6;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  bool overlaps(const Aabb& o) const { return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all(); }
  bool contains(const Aabb& o, double margin) const {
    return (lo.array() + margin < o.lo.array()).all() && (o.hi.array() + margin < hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }

  /// Bounds of this box after a rigid motion.
  Aabb transformed(const RigidTransform& t) const {
    const Vec3 c = t.apply(center());
    const Vec3 half = t.rotation.cwiseAbs() * (0.5 * (hi - lo));
    return {c - half, c + half};
  }
  Aabb padded(double pad) const { return {(lo.array() - pad).matrix(), (hi.array() + pad).matrix()}; }
};

/// Triangle-triangle overlap by separating axes (both normals, the nine edge
/// crosses and the six in-plane edge normals). Shapes whose projections
/// overlap by at most `eps` along some axis count as separated, so surface
/// contact and coplanar face contact are not intersections.
inline bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b,
                                double eps = kContactEpsilon) {
  const std::array<Vec3, 3> ea{a[1] - a[0], a[2] - a[1], a[0] - a[2]};
  const std::array<Vec3, 3> eb{b[1] - b[0], b[2] - b[1], b[0] - b[2]};
  const Vec3 na = ea[0].cross(ea[1]);
  const Vec3 nb = eb[0].cross(eb[1]);

  auto separated = [&](Vec3 axis) {
    const double len = axis.norm();
    if (len < 1e-12) return false;
    axis /= len;
    double amin = a[0].dot(axis), amax = amin, bmin = b[0].dot(axis), bmax = bmin;
    for (int i = 1; i < 3; ++i) {
      const double pa = a[static_cast<std::size_t>(i)].dot(axis);
      const double pb = b[static_cast<std::size_t>(i)].dot(axis);
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    return amax <= bmin + eps || bmax <= amin + eps;
  };

  if (separated(na) || separated(nb)) return false;
  for (const auto& e : ea) {
    for (const auto& f : eb) {
      if (separated(e.cross(f))) return false;
    }
  }
  for (const auto& e : ea) {
    if (separated(na.cross(e))) return false;
  }
  for (const auto& f : eb) {
    if (separated(nb.cross(f))) return false;
  }
  return true;
}

/// Möller-Trumbore; true for a hit at parameter t > eps.
inline bool ray_hits_triangle(const Vec3& origin, const Vec3& dir, const std::array<Vec3, 3>& t, double eps = 1e-9) {
  const Vec3 e1 = t[1] - t[0], e2 = t[2] - t[0];
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 s = origin - t[0];
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  return e2.dot(q) * inv > eps;
}

/// Immutable collision geometry with an AABB tree over its triangles.
class CollisionMesh {
public:
  struct Node {
    Aabb box;
    std::uint32_t left = 0, right = 0;  // children, interior nodes
    std::uint32_t first = 0, count = 0;  // into order_, leaves (count > 0)
    bool leaf() const { return count > 0; }
  };

  CollisionMesh() = default;

  /// Takes the mesh as-is (already inset by `source_inset`).
  CollisionMesh(TriMesh mesh, double source_inset, bool closed)
      : mesh_(std::move(mesh)), source_inset_(source_inset), closed_(closed) {
    if (mesh_.empty()) throw Error("empty-mesh", "empty mesh");
    for (const auto& t : mesh_.triangles) {
      for (auto i : t) {
        if (i >= mesh_.vertices.size()) throw Error("bad-mesh", "triangle index out of range");
      }
    }
    build();
    interior_ = pick_interior();
  }

  const std::vector<Vec3>& vertices() const { return mesh_.vertices; }
  const std::vector<Triangle>& triangles() const { return mesh_.triangles; }
  const TriMesh& mesh() const { return mesh_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& order() const { return order_; }
  const Aabb& bounds() const { return nodes_.front().box; }
  double source_inset() const { return source_inset_; }
  bool closed() const { return closed_; }

  std::array<Vec3, 3> triangle(std::size_t i) const {
    const auto& t = mesh_.triangles[i];
    return {mesh_.vertices[t[0]], mesh_.vertices[t[1]], mesh_.vertices[t[2]]};
  }

  /// A point just inside the surface: the centroid of the largest triangle
  /// pushed 1e-4 against its normal.
  const Vec3& interior_point() const { return interior_; }

  /// Ray-parity point containment; meaningful only for closed meshes.
  bool contains_point(const Vec3& p) const {
    const Vec3 dir = Vec3(0.5773502691896258, 0.5773502691896257, 0.5773502691896259).normalized();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < mesh_.triangles.size(); ++i) {
      if (ray_hits_triangle(p, dir, triangle(i))) ++hits;
    }
    return hits % 2 == 1;
  }

private:
  static constexpr std::uint32_t kLeafSize = 4;

  Vec3 pick_interior() const {
    double best = -1.0;
    Vec3 point = mesh_.vertices.front();
    for (std::size_t i = 0; i < mesh_.triangles.size(); ++i) {
      const auto t = triangle(i);
      const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]);
      if (n.norm() > best && n.norm() > 0.0) {
        best = n.norm();
        point = (t[0] + t[1] + t[2]) / 3.0 - 1e-4 * n.normalized();
      }
    }
    return point;
  }

  void build() {
    const std::size_t n = mesh_.triangles.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::vector<Aabb> tri_box(n);
    std::vector<Vec3> centroid(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& v : triangle(i)) tri_box[i].grow(v);
      centroid[i] = tri_box[i].center();
    }
    nodes_.reserve(2 * n);
    nodes_.emplace_back();
    build_node(0, 0, static_cast<std::uint32_t>(n), tri_box, centroid);
  }

  void build_node(std::size_t node, std::uint32_t first, std::uint32_t count, const std::vector<Aabb>& tri_box,
                  const std::vector<Vec3>& centroid) {
    Aabb box, cbox;
    for (std::uint32_t i = first; i < first + count; ++i) {
      box.grow(tri_box[order_[i]]);
      cbox.grow(centroid[order_[i]]);
    }
    nodes_[node].box = box;
    const Vec3 extent = cbox.hi - cbox.lo;
    int axis = 0;
    extent.maxCoeff(&axis);
    if (count <= kLeafSize || extent[axis] <= 0.0) {
      nodes_[node].first = first;
      nodes_[node].count = count;
      return;
    }
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t x, std::uint32_t y) { return centroid[x][axis] < centroid[y][axis]; });
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[node].left = left;
    nodes_[node].right = left + 1;
    build_node(left, first, mid - first, tri_box, centroid);
    build_node(left + 1, mid, first + count - mid, tri_box, centroid);
  }

  TriMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  Vec3 interior_ = Vec3::Zero();
  double source_inset_ = 0.0;
  bool closed_ = false;
};

/// Moves every face of `raw` inward by `offset` LDU. Each vertex is displaced
/// by the least-squares solution of n_f . d = offset over its incident face
/// normals (angle weighted), which reduces to the vertex pseudo-normal on
/// smooth regions and keeps box faces planar at corners. Degenerate
/// triangles are dropped.
inline CollisionMesh inset_mesh(const TriMesh& raw, double offset = kDefaultInset) {
  if (raw.empty()) throw Error("empty-mesh", "empty mesh");
  TriMesh m = weld(raw);
  std::erase_if(m.triangles, [&](const Triangle& t) {
    const Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    return 0.5 * n.norm() < 1e-9;
  });
  if (m.empty()) throw Error("empty-mesh", "mesh has no non-degenerate triangles");
  const bool closed = is_closed(m);
  if (closed && signed_volume(m) < 0.0) {
    for (auto& t : m.triangles) std::swap(t[1], t[2]);
  }
  if (offset != 0.0) {
    std::vector<Mat3> normal_matrix(m.vertices.size(), Mat3::Zero());
    std::vector<Vec3> rhs(m.vertices.size(), Vec3::Zero());
    for (const auto& t : m.triangles) {
      const Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).normalized();
      for (int k = 0; k < 3; ++k) {
        const auto i = t[static_cast<std::size_t>(k)];
        const Vec3 u = (m.vertices[t[static_cast<std::size_t>((k + 1) % 3)]] - m.vertices[i]).normalized();
        const Vec3 v = (m.vertices[t[static_cast<std::size_t>((k + 2) % 3)]] - m.vertices[i]).normalized();
        const double angle = std::acos(std::clamp(u.dot(v), -1.0, 1.0));
        normal_matrix[i] += angle * n * n.transpose();
        rhs[i] += angle * offset * n;
      }
    }
    std::vector<Vec3> moved = m.vertices;
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
      Eigen::SelfAdjointEigenSolver<Mat3> eig(normal_matrix[i]);
      const double top = eig.eigenvalues().maxCoeff();
      if (top <= 0.0) continue;
      Vec3 d = Vec3::Zero();
      for (int k = 0; k < 3; ++k) {
        const double lambda = eig.eigenvalues()[k];
        if (lambda <= 1e-2 * top) continue;
        const Vec3 axis = eig.eigenvectors().col(k);
        d += axis.dot(rhs[i]) / lambda * axis;
      }
      const double cap = 4.0 * std::abs(offset);
      if (d.norm() > cap) d *= cap / d.norm();
      moved[i] = m.vertices[i] - d;
    }
    m.vertices = std::move(moved);
  }
  return CollisionMesh(std::move(m), offset, closed);
}

namespace detail {

/// Expresses b's geometry in a's frame; shared by the BVH path and oracles
/// so both see bit-identical coordinates.
inline std::array<Vec3, 3> triangle_in(const CollisionMesh& m, std::size_t i, const RigidTransform& to_frame) {
  auto t = m.triangle(i);
  for (auto& v : t) v = to_frame.apply(v);
  return t;
}

/// With no surface crossing, two closed solids share volume exactly when an
/// interior point of b lies inside a (b nested in a, or coincident surfaces).
inline bool contained(const CollisionMesh& a, const CollisionMesh& b, const RigidTransform& b_in_a) {
  if (!a.closed() || !b.closed()) return false;
  const Vec3 p = b_in_a.apply(b.interior_point());
  const Aabb& box = a.bounds();
  if ((p.array() < box.lo.array()).any() || (p.array() > box.hi.array()).any()) return false;
  return a.contains_point(p);
}

}  // namespace detail

/// True when the two posed meshes properly intersect (or, for closed meshes,
/// one lies entirely inside the other).
inline bool intersects(const CollisionMesh& a, const RigidTransform& pose_a, const CollisionMesh& b,
                       const RigidTransform& pose_b) {
  const RigidTransform b_in_a = relative(pose_a, pose_b);
  const auto& na = a.nodes();
  const auto& nb = b.nodes();
  if (!na.front().box.overlaps(nb.front().box.transformed(b_in_a).padded(1e-9))) return false;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, 0}};
  std::vector<std::optional<std::array<Vec3, 3>>> b_cache(b.triangles().size());
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    const auto& x = na[ia];
    const auto& y = nb[ib];
    if (!x.box.overlaps(y.box.transformed(b_in_a).padded(1e-9))) continue;
    if (x.leaf() && y.leaf()) {
      for (std::uint32_t i = x.first; i < x.first + x.count; ++i) {
        const auto ta = a.triangle(a.order()[i]);
        for (std::uint32_t j = y.first; j < y.first + y.count; ++j) {
          const auto tb_index = b.order()[j];
          auto& tb = b_cache[tb_index];
          if (!tb) tb = detail::triangle_in(b, tb_index, b_in_a);
          if (triangles_intersect(ta, *tb)) return true;
        }
      }
      continue;
    }
    const bool split_a = !x.leaf() && (y.leaf() || (x.box.hi - x.box.lo).squaredNorm() >= (y.box.hi - y.box.lo).squaredNorm());
    if (split_a) {
      stack.emplace_back(x.left, ib);
      stack.emplace_back(x.right, ib);
    } else {
      stack.emplace_back(ia, y.left);
      stack.emplace_back(ia, y.right);
    }
  }
  return detail::contained(a, b, b_in_a) || detail::contained(b, a, b_in_a.inverse());
}

// ---------------------------------------------------------------------------
// Assemblies

struct PlacedMesh {
  std::string node_id;
  const CollisionMesh* mesh = nullptr;
  RigidTransform pose;
};

struct CollisionReport {
  std::vector<std::pair<std::string, std::string>> colliding_pairs;  ///< unordered, deduplicated
  std::optional<std::size_t> first_offender;                         ///< 0-based step index

  bool empty() const { return colliding_pairs.empty(); }
};

namespace detail {

inline std::pair<std::string, std::string> unordered(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

}  // namespace detail

/// All colliding pairs: sweep-and-prune on world bounds along x, then the
/// narrow phase. `first_offender` is the smallest index that collides with
/// an instance listed before it.
inline CollisionReport check_assembly(const std::vector<PlacedMesh>& instances) {
  CollisionReport report;
  std::vector<Aabb> boxes;
  boxes.reserve(instances.size());
  for (const auto& p : instances) boxes.push_back(p.mesh->bounds().transformed(p.pose).padded(1e-9));
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return boxes[x].lo.x() < boxes[y].lo.x(); });

  std::vector<std::pair<std::size_t, std::size_t>> hits;
  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto i = order[s];
    for (std::size_t t = s + 1; t < order.size(); ++t) {
      const auto j = order[t];
      if (boxes[j].lo.x() > boxes[i].hi.x()) break;
      if (!boxes[i].overlaps(boxes[j])) continue;
      const auto lo = std::min(i, j), hi = std::max(i, j);
      if (intersects(*instances[lo].mesh, instances[lo].pose, *instances[hi].mesh, instances[hi].pose)) {
        hits.emplace_back(lo, hi);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  for (const auto& [i, j] : hits) {
    report.colliding_pairs.push_back(detail::unordered(instances[i].node_id, instances[j].node_id));
    report.first_offender = std::min(report.first_offender.value_or(j), j);
  }
  std::sort(report.colliding_pairs.begin(), report.colliding_pairs.end());
  report.colliding_pairs.erase(std::unique(report.colliding_pairs.begin(), report.colliding_pairs.end()),
                               report.colliding_pairs.end());
  return report;
}

/// Accumulates placed meshes one at a time, checking each newcomer against
/// everything already accepted.
class IncrementalChecker {
public:
  /// Returns the indices of previously added instances the new one collides
  /// with. The instance is kept either way.
  std::vector<std::size_t> add(const PlacedMesh& p) {
    const Aabb box = p.mesh->bounds().transformed(p.pose).padded(1e-9);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < placed_.size(); ++i) {
      if (!boxes_[i].overlaps(box)) continue;
      if (intersects(*placed_[i].mesh, placed_[i].pose, *p.mesh, p.pose)) hits.push_back(i);
    }
    const std::size_t step = placed_.size();
    for (auto i : hits) report_.colliding_pairs.push_back(detail::unordered(placed_[i].node_id, p.node_id));
    if (!hits.empty() && !report_.first_offender) report_.first_offender = step;
    placed_.push_back(p);
    boxes_.push_back(box);
    return hits;
  }

  /// Checks without keeping the instance.
  bool collides(const PlacedMesh& p) const {
    const Aabb box = p.mesh->bounds().transformed(p.pose).padded(1e-9);
    for (std::size_t i = 0; i < placed_.size(); ++i) {
      if (boxes_[i].overlaps(box) && intersects(*placed_[i].mesh, placed_[i].pose, *p.mesh, p.pose)) return true;
    }
    return false;
  }

  const CollisionReport& report() const { return report_; }
  std::size_t size() const { return placed_.size(); }

private:
  std::vector<PlacedMesh> placed_;
  std::vector<Aabb> boxes_;
  CollisionReport report_;
};

inline nlohmann::json to_json(const CollisionReport& r) {
  nlohmann::json j{{"colliding_pairs", nlohmann::json::array()}};
  for (const auto& [a, b] : r.colliding_pairs) j["colliding_pairs"].push_back({a, b});
  j["first_offender"] = r.first_offender ? nlohmann::json(*r.first_offender) : nlohmann::json(nullptr);
  return j;
}

}  // namespace brickir

#endif  // BRICKIR_COLLISION_HPP
