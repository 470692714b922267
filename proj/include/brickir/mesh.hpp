#ifndef BRICKIR_MESH_HPP
#define BRICKIR_MESH_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "brickir/geometry.hpp"

namespace brickir {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle soup in LDU.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }

  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.push_back(a);
    vertices.push_back(b);
    vertices.push_back(c);
    triangles.push_back({base, base + 1, base + 2});
  }

  void append(const TriMesh& other, const RigidTransform& pose = RigidTransform::identity()) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (const auto& v : other.vertices) vertices.push_back(pose.apply(v));
    for (const auto& t : other.triangles) triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
};

/// Merges vertices that fall in the same `grid`-sized cell and drops
/// triangles that collapse as a result.
inline TriMesh weld(const TriMesh& in, double grid = 1e-4) {
  TriMesh out;
  std::map<std::tuple<long long, long long, long long>, std::uint32_t> index;
  std::vector<std::uint32_t> remap(in.vertices.size());
  for (std::size_t i = 0; i < in.vertices.size(); ++i) {
    const Vec3& v = in.vertices[i];
    const auto key = std::make_tuple(std::llround(v.x() / grid), std::llround(v.y() / grid),
                                     std::llround(v.z() / grid));
    auto [it, inserted] = index.emplace(key, static_cast<std::uint32_t>(out.vertices.size()));
    if (inserted) out.vertices.push_back(v);
    remap[i] = it->second;
  }
  for (const auto& t : in.triangles) {
    const Triangle r{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    out.triangles.push_back(r);
  }
  return out;
}

/// Signed volume; positive for a closed mesh with outward winding.
inline double signed_volume(const TriMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) {
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]]));
  }
  return v / 6.0;
}

/// True when every undirected edge is shared by exactly two triangles.
inline bool is_closed(const TriMesh& m) {
  if (m.triangles.empty()) return false;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      auto a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  for (const auto& [e, n] : edges) {
    if (n != 2) return false;
  }
  return true;
}

/// Axis-aligned box mesh with outward winding (12 triangles).
inline TriMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  }
  // Quads listed counter-clockwise when viewed from outside.
  constexpr std::array<std::array<std::uint32_t, 4>, 6> quads{{
      {0, 4, 6, 2}, {1, 3, 7, 5},  // -x, +x
      {0, 1, 5, 4}, {2, 6, 7, 3},  // -y, +y
      {0, 2, 3, 1}, {4, 5, 7, 6},  // -z, +z
  }};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

/// Closed cylinder along +y from y0 to y1, `segments` around.
inline TriMesh make_cylinder(double radius, double y0, double y1, int segments = 16) {
  TriMesh m;
  const auto n = static_cast<std::uint32_t>(segments);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto [c, s] = cos_sin_deg(360.0 * i / n);
    m.vertices.emplace_back(radius * c, y0, radius * s);
    m.vertices.emplace_back(radius * c, y1, radius * s);
  }
  const std::uint32_t bottom = 2 * n, top = 2 * n + 1;
  m.vertices.emplace_back(0.0, y0, 0.0);
  m.vertices.emplace_back(0.0, y1, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    const std::uint32_t b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.triangles.push_back({b0, t0, t1});
    m.triangles.push_back({b0, t1, b1});
    m.triangles.push_back({bottom, b0, b1});
    m.triangles.push_back({top, t1, t0});
  }
  return m;
}

/// Closed hollow cylinder about the y axis between radii r_in < r_out.
inline TriMesh make_tube(double r_in, double r_out, double y0, double y1, int segments = 16) {
  TriMesh m;
  const auto n = static_cast<std::uint32_t>(segments);
  // per segment: outer bottom, outer top, inner bottom, inner top
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto [c, s] = cos_sin_deg(360.0 * i / n);
    m.vertices.emplace_back(r_out * c, y0, r_out * s);
    m.vertices.emplace_back(r_out * c, y1, r_out * s);
    m.vertices.emplace_back(r_in * c, y0, r_in * s);
    m.vertices.emplace_back(r_in * c, y1, r_in * s);
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    const std::uint32_t ob0 = 4 * i, ot0 = 4 * i + 1, ib0 = 4 * i + 2, it0 = 4 * i + 3;
    const std::uint32_t ob1 = 4 * j, ot1 = 4 * j + 1, ib1 = 4 * j + 2, it1 = 4 * j + 3;
    m.triangles.push_back({ob0, ot0, ot1});
    m.triangles.push_back({ob0, ot1, ob1});
    m.triangles.push_back({ib0, it1, it0});
    m.triangles.push_back({ib0, ib1, it1});
    m.triangles.push_back({ib0, ob0, ob1});
    m.triangles.push_back({ib0, ob1, ib1});
    m.triangles.push_back({it0, ot1, ot0});
    m.triangles.push_back({it0, it1, ot1});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Indexed-triangle text format:
//
//   # comment
//   v <x> <y> <z>
//   f <i> <j> <k>      (0-based vertex indices)
//
// Blank lines and lines starting with '#' are ignored.

inline TriMesh read_tri(std::istream& in) {
  TriMesh m;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::size_t> face_lines;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw ParseError("tri", "malformed vertex", lineno);
      m.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      long long a, b, c;
      if (!(ss >> a >> b >> c)) throw ParseError("tri", "malformed face", lineno);
      for (long long i : {a, b, c}) {
        if (i < 0) throw ParseError("tri", "negative face index", lineno);
      }
      face_lines.push_back(lineno);
      m.triangles.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                             static_cast<std::uint32_t>(c)});
    } else {
      throw ParseError("tri", "unknown record '" + tag + "'", lineno);
    }
  }
  for (std::size_t f = 0; f < m.triangles.size(); ++f) {
    for (auto i : m.triangles[f]) {
      if (i >= m.vertices.size()) throw ParseError("tri", "face index out of range", face_lines[f]);
    }
  }
  return m;
}

inline void write_tri(std::ostream& out, const TriMesh& m) {
  out.precision(17);
  for (const auto& v : m.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : m.triangles) out << "f " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace brickir

#endif  // BRICKIR_MESH_HPP
