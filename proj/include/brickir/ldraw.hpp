#ifndef BRICKIR_LDRAW_HPP
#define BRICKIR_LDRAW_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brickir/error.hpp"
#include "brickir/geometry.hpp"
#include "brickir/mesh.hpp"

namespace brickir::ldraw {

/// LDraw file references are case-insensitive and may use either slash.
inline std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == '\\') c = '/';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  const auto first = out.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(" \t");
  return out.substr(first, last - first + 1);
}

/// Splits on runs of whitespace.
inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// A type-1 (subfile reference) line, matrix kept as read.
struct SubfileRef {
  int color = 16;
  Mat3 matrix = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  std::string name;  ///< normalized
  std::size_t line = 0;
};

/// One line of an LDraw file after tokenizing. Types 2-5 keep their raw
/// coordinates in `points`.
struct Line {
  int type = 0;
  std::size_t number = 0;
  SubfileRef ref;             // type 1
  std::vector<Vec3> points;   // types 2..5
  std::string_view comment;   // type 0 payload
};

/// Parses one line. Returns nullopt for blank lines. Throws ParseError for a
/// malformed type-1..5 line; unknown types come back with type = -1.
inline std::optional<Line> parse_line(std::string_view raw, std::size_t number) {
  if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
  const auto tokens = split_ws(raw);
  if (tokens.empty()) return std::nullopt;
  Line line;
  line.number = number;
  const auto type = parse_int(tokens[0]);
  if (!type || *type < 0 || *type > 5) {
    line.type = -1;
    return line;
  }
  line.type = static_cast<int>(*type);
  if (line.type == 0) {
    const auto pos = raw.find(tokens[0]) + tokens[0].size();
    line.comment = raw.substr(pos);
    const auto first = line.comment.find_first_not_of(" \t");
    line.comment = first == std::string_view::npos ? std::string_view{} : line.comment.substr(first);
    return line;
  }
  if (line.type == 1) {
    if (tokens.size() < 15) {
      throw ParseError("parse", "type-1 line needs 14 fields after the line type, found " +
                                    std::to_string(tokens.size() - 1), number);
    }
    const auto color = parse_int(tokens[1]);
    if (!color) throw ParseError("parse", "bad color code", number);
    line.ref.color = static_cast<int>(*color);
    std::array<double, 12> v{};
    for (std::size_t i = 0; i < 12; ++i) {
      const auto d = parse_double(tokens[i + 2]);
      if (!d) throw ParseError("parse", "bad number '" + std::string(tokens[i + 2]) + "'", number);
      v[i] = *d;
    }
    line.ref.translation = Vec3(v[0], v[1], v[2]);
    line.ref.matrix << v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11];
    // File names may contain spaces: everything after the 14th field.
    const auto name_start = static_cast<std::size_t>(tokens[14].data() - raw.data());
    line.ref.name = normalize_name(raw.substr(name_start));
    line.ref.line = number;
    return line;
  }
  const std::size_t npoints = line.type == 5 ? 4 : static_cast<std::size_t>(line.type);
  if (tokens.size() < 2 + 3 * npoints) throw ParseError("parse", "too few coordinates", number);
  for (std::size_t p = 0; p < npoints; ++p) {
    Vec3 pt;
    for (int k = 0; k < 3; ++k) {
      const auto d = parse_double(tokens[2 + 3 * p + static_cast<std::size_t>(k)]);
      if (!d) throw ParseError("parse", "bad coordinate", number);
      pt[k] = *d;
    }
    line.points.push_back(pt);
  }
  return line;
}

// ---------------------------------------------------------------------------
// Structures (.ldr / .mpd)

/// A placed part. `pose.rotation` is orthonormal unless `nonrigid` is set,
/// in which case it holds the matrix as read.
struct PartInstance {
  std::string node_id;
  std::string part_id;
  int color = 16;
  RigidTransform pose;
  bool nonrigid = false;
  std::size_t line = 0;  ///< line of the type-1 reference in the main file

  bool operator==(const PartInstance&) const = default;
};

struct StructureParse {
  std::vector<PartInstance> instances;
  std::vector<std::string> warnings;

  std::vector<PartInstance> rigid_instances() const {
    std::vector<PartInstance> out;
    std::copy_if(instances.begin(), instances.end(), std::back_inserter(out),
                 [](const PartInstance& p) { return !p.nonrigid; });
    return out;
  }
};

struct ParseOptions {
  /// Strict mode throws on malformed lines and unresolvable references;
  /// otherwise they are skipped and reported in `warnings`.
  bool strict = true;
};

/// Returns true for names that resolve to a catalog part. An empty function
/// treats every non-submodel reference as a part.
using PartPredicate = std::function<bool(std::string_view)>;

namespace detail {

struct MpdFile {
  std::string name;
  std::vector<std::pair<std::size_t, std::string_view>> lines;
};

inline std::vector<MpdFile> split_mpd(std::string_view text) {
  std::vector<MpdFile> files;
  MpdFile preamble;
  bool in_file = false;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    pos = end + 1;
    const auto tokens = split_ws(raw);
    if (tokens.size() >= 2 && tokens[0] == "0" && tokens[1] == "FILE") {
      const auto name_start = static_cast<std::size_t>(tokens[1].data() - raw.data()) + 4;
      files.push_back({normalize_name(raw.substr(name_start)), {}});
      in_file = true;
      continue;
    }
    if (tokens.size() >= 2 && tokens[0] == "0" && tokens[1] == "NOFILE") {
      in_file = false;
      continue;
    }
    if (in_file) {
      files.back().lines.emplace_back(number, raw);
    } else if (files.empty()) {
      preamble.lines.emplace_back(number, raw);
    }
    if (end == text.size()) break;
  }
  if (files.empty()) return {std::move(preamble)};
  return files;
}

struct Affine {
  Mat3 m = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Affine then(const SubfileRef& r) const { return {m * r.matrix, m * r.translation + t}; }
};

}  // namespace detail

/// Classifies a read matrix: rigid when it is a proper rotation up to 1e-3.
inline bool is_rigid_matrix(const Mat3& m) {
  return std::abs(m.determinant() - 1.0) <= 1e-3 && orthonormality_error(m) <= 1e-3;
}

/// Parses a structure file into posed part instances, flattening MPD
/// submodels. Color 16 inherits the color of the referencing line.
inline StructureParse parse_structure(std::string_view text, const PartPredicate& is_part = {},
                                      ParseOptions options = {}) {
  StructureParse out;
  const auto files = detail::split_mpd(text);
  std::map<std::string, const detail::MpdFile*> by_name;
  for (const auto& f : files) {
    if (!f.name.empty()) by_name.emplace(f.name, &f);
  }

  auto fail = [&](const ParseError& e) {
    if (options.strict) throw e;
    out.warnings.emplace_back(e.what());
  };

  std::vector<std::string> stack;
  std::function<void(const detail::MpdFile&, const detail::Affine&, int, std::size_t)> walk =
      [&](const detail::MpdFile& file, const detail::Affine& xf, int parent_color, std::size_t top_line) {
        if (stack.size() > 64) throw ParseError("parse", "submodel nesting deeper than 64");
        for (const auto& [number, raw] : file.lines) {
          std::optional<Line> line;
          try {
            line = parse_line(raw, number);
          } catch (const ParseError& e) {
            fail(e);
            continue;
          }
          if (!line) continue;
          if (line->type == -1) {
            out.warnings.push_back("line " + std::to_string(number) + ": unknown line type skipped");
            continue;
          }
          if (line->type != 1) continue;
          const SubfileRef& ref = line->ref;
          const int color = ref.color == 16 ? parent_color : ref.color;
          const detail::Affine placed = xf.then(ref);
          const std::size_t at = top_line ? top_line : number;
          if (auto sub = by_name.find(ref.name); sub != by_name.end()) {
            if (std::find(stack.begin(), stack.end(), ref.name) != stack.end()) {
              throw ParseError("parse", "recursive submodel reference '" + ref.name + "'", number);
            }
            stack.push_back(ref.name);
            walk(*sub->second, placed, color, at);
            stack.pop_back();
            continue;
          }
          if (is_part && !is_part(ref.name)) {
            fail(ParseError("unresolved", "unresolvable subfile '" + ref.name + "'", number));
            continue;
          }
          PartInstance inst;
          inst.node_id = std::to_string(out.instances.size());
          inst.part_id = ref.name;
          inst.color = color;
          inst.pose.translation = placed.t;
          inst.pose.rotation = placed.m;
          inst.nonrigid = !is_rigid_matrix(placed.m);
          if (!inst.nonrigid) inst.pose.normalize();
          inst.line = at;
          out.instances.push_back(std::move(inst));
        }
      };

  if (!files.empty()) {
    if (!files.front().name.empty()) stack.push_back(files.front().name);
    walk(files.front(), {}, 16, 0);
  }
  return out;
}

/// Type-1 line for a placed instance, lossless for `parse_structure`.
inline std::string format_instance(const PartInstance& inst) {
  std::string s = "1 " + std::to_string(inst.color);
  for (int k = 0; k < 3; ++k) s += ' ' + format_double(inst.pose.translation[k]);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s += ' ' + format_double(inst.pose.rotation(r, c));
  }
  return s + ' ' + inst.part_id;
}

inline std::string format_structure(const std::vector<PartInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) out += format_instance(inst) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Part definitions (.dat)

/// Loads the text of a referenced part or primitive by normalized name.
using SourceLoader = std::function<std::optional<std::string>(std::string_view)>;

/// A connector primitive found in a part's reference hierarchy.
struct PrimitiveRef {
  std::string primitive_name;
  RigidTransform accumulated_transform;
  Vec3 accumulated_scale = Vec3::Ones();  ///< singular values of the composed matrix
};

/// Singular values of the composed matrix must all be 1 within this.
inline constexpr double kScaleTolerance = 1e-3;

namespace detail {

/// Depth-first walk over the type-1 hierarchy of a part source.
/// `on_ref` returns true to stop descent at that reference.
template <class OnRef, class OnGeom>
void walk_part(std::string_view source, const SourceLoader& load, const Affine& xf,
               std::vector<std::string>& stack, OnRef&& on_ref, OnGeom&& on_geom) {
  if (stack.size() > 64) throw ParseError("depth", "part reference chain deeper than 64");
  std::size_t number = 0, pos = 0;
  while (pos < source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    const auto raw = source.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    const auto line = parse_line(raw, number);
    if (!line) continue;
    if (line->type == 3 || line->type == 4) {
      on_geom(*line, xf);
      continue;
    }
    if (line->type != 1) continue;
    const Affine placed = xf.then(line->ref);
    if (on_ref(line->ref.name, placed)) continue;
    if (std::find(stack.begin(), stack.end(), line->ref.name) != stack.end()) {
      throw ParseError("recursive", "recursive part definition '" + line->ref.name + "'", number);
    }
    if (!load) continue;
    const auto text = load(line->ref.name);
    if (!text) continue;
    stack.push_back(line->ref.name);
    walk_part(*text, load, placed, stack, on_ref, on_geom);
    stack.pop_back();
  }
}

}  // namespace detail

/// Collects connector primitives reachable from a part source. References
/// whose composed matrix is scaled or mirrored go to `rejected` instead.
inline std::vector<PrimitiveRef> scan_primitives(std::string_view part_source, const SourceLoader& load,
                                                 const std::function<bool(std::string_view)>& is_connector,
                                                 std::vector<PrimitiveRef>* rejected = nullptr,
                                                 std::string_view part_name = {}) {
  std::vector<PrimitiveRef> found;
  std::vector<std::string> stack;
  if (!part_name.empty()) stack.push_back(normalize_name(part_name));
  detail::walk_part(
      part_source, load, {}, stack,
      [&](const std::string& name, const detail::Affine& xf) {
        if (!is_connector(name)) return false;
        Eigen::JacobiSVD<Mat3> svd(xf.m);
        PrimitiveRef ref;
        ref.primitive_name = name;
        ref.accumulated_scale = svd.singularValues();
        ref.accumulated_transform.translation = xf.t;
        const bool unit = (ref.accumulated_scale.array() - 1.0).abs().maxCoeff() <= kScaleTolerance &&
                          xf.m.determinant() > 0.0;
        ref.accumulated_transform.rotation = unit ? nearest_rotation(xf.m) : xf.m;
        if (unit) {
          found.push_back(std::move(ref));
        } else if (rejected) {
          rejected->push_back(std::move(ref));
        }
        return true;
      },
      [](const Line&, const detail::Affine&) {});
  return found;
}

/// Triangles (type 3) and quads (type 4, split in two) of the full part
/// hierarchy, in part coordinates. Mirrored references flip winding.
inline TriMesh extract_mesh(std::string_view part_source, const SourceLoader& load,
                            std::string_view part_name = {}) {
  TriMesh mesh;
  std::vector<std::string> stack;
  if (!part_name.empty()) stack.push_back(normalize_name(part_name));
  detail::walk_part(
      part_source, load, {}, stack, [](const std::string&, const detail::Affine&) { return false; },
      [&](const Line& line, const detail::Affine& xf) {
        std::vector<Vec3> p;
        for (const auto& v : line.points) p.push_back(xf.m * v + xf.t);
        if (xf.m.determinant() < 0.0) std::reverse(p.begin(), p.end());
        mesh.add_triangle(p[0], p[1], p[2]);
        if (p.size() == 4) mesh.add_triangle(p[0], p[2], p[3]);
      });
  return weld(mesh);
}

/// The `0 <description>` header line of a part file, if any.
inline std::string part_description(std::string_view source) {
  std::size_t pos = 0;
  while (pos < source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    auto raw = source.substr(pos, end - pos);
    pos = end + 1;
    const auto line = parse_line(raw, 0);
    if (!line) continue;
    if (line->type == 0) return std::string(line->comment);
    return {};
  }
  return {};
}

}  // namespace brickir::ldraw

#endif  // BRICKIR_LDRAW_HPP
