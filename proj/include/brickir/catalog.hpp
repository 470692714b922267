#ifndef BRICKIR_CATALOG_HPP
#define BRICKIR_CATALOG_HPP

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brickir/collision.hpp"
#include "brickir/connectors.hpp"
#include "brickir/error.hpp"
#include "brickir/ldraw.hpp"

namespace brickir {

/// Lowercase, single-spaced, with the reserved '|' removed.
inline std::string normalize_part_name(std::string_view description) {
  std::string out;
  bool space = false;
  for (char c : description) {
    if (c == '|') continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  // "1 x 2" -> "1x2"
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 1; i + 3 < out.size();) {
    if (out.compare(i, 3, " x ") == 0 && digit(out[i - 1]) && digit(out[i + 3])) {
      out.replace(i, 3, "x");
    } else {
      ++i;
    }
  }
  return out;
}

/// LDraw color code <-> lowercase display name.
class ColorTable {
public:
  void add(int code, const std::string& name) {
    const auto n = normalize_part_name(name);
    by_code_[code] = n;
    by_name_[n] = code;
  }

  std::optional<std::string> name(int code) const {
    if (auto it = by_code_.find(code); it != by_code_.end()) return it->second;
    return std::nullopt;
  }

  std::optional<int> code(std::string_view name) const {
    if (auto it = by_name_.find(normalize_part_name(name)); it != by_name_.end()) return it->second;
    return std::nullopt;
  }

  const std::map<int, std::string>& entries() const { return by_code_; }

  static ColorTable defaults() {
    static const std::pair<int, const char*> table[] = {
        {0, "black"}, {1, "blue"}, {2, "green"}, {3, "dark turquoise"}, {4, "red"}, {5, "dark pink"},
        {6, "brown"}, {7, "light grey"}, {8, "dark grey"}, {9, "light blue"}, {10, "bright green"},
        {11, "light turquoise"}, {12, "salmon"}, {13, "pink"}, {14, "yellow"}, {15, "white"},
        {16, "main colour"}, {17, "light green"}, {18, "light yellow"}, {19, "tan"}, {20, "light violet"},
        {22, "purple"}, {23, "dark blue violet"}, {25, "orange"}, {26, "magenta"}, {27, "lime"},
        {28, "dark tan"}, {29, "bright pink"}, {33, "trans dark blue"}, {34, "trans green"},
        {36, "trans red"}, {40, "trans black"}, {41, "trans light blue"}, {43, "trans medium blue"},
        {46, "trans yellow"}, {47, "trans clear"}, {57, "trans orange"}, {70, "reddish brown"},
        {71, "light bluish grey"}, {72, "dark bluish grey"}, {73, "medium blue"}, {74, "medium green"},
        {84, "medium dark flesh"}, {85, "dark purple"}, {86, "dark flesh"}, {92, "flesh"},
        {191, "bright light orange"}, {272, "dark blue"}, {288, "dark green"}, {308, "dark brown"},
        {320, "dark red"}, {378, "sand green"}, {379, "sand blue"}, {484, "dark orange"},
    };
    ColorTable t;
    for (const auto& [code, name] : table) t.add(code, name);
    return t;
  }

private:
  std::map<int, std::string> by_code_;
  std::map<std::string, int> by_name_;
};

/// A catalog entry: identity, display name, connectors in part coordinates
/// and (optionally) collision geometry.
struct PartDef {
  std::string id;    ///< normalized LDraw file name, e.g. "3001.dat"
  std::string name;  ///< normalized description, e.g. "brick 2x4"
  std::vector<AnnotatedConnector> connectors;
  std::shared_ptr<const CollisionMesh> collision;

  const AnnotatedConnector* connector(std::string_view index) const {
    for (const auto& c : connectors) {
      if (c.index == index) return &c;
    }
    return nullptr;
  }
};

/// Parts, colors and pairing rules. Built once, then read-only.
class Catalog {
public:
  static constexpr int kVersion = 1;

  Catalog() = default;

  void add_part(PartDef part) {
    part.id = ldraw::normalize_name(part.id);
    part.name = normalize_part_name(part.name);
    if (part.name.empty()) throw CatalogError("catalog", "part '" + part.id + "' has no name");
    if (auto it = by_name_.find(part.name); it != by_name_.end() && it->second != part.id) {
      throw CatalogError("duplicate-name", "part name '" + part.name + "' used by both '" + it->second + "' and '" +
                                               part.id + "'");
    }
    if (auto old = parts_.find(part.id); old != parts_.end()) by_name_.erase(old->second.name);
    by_name_[part.name] = part.id;
    parts_[part.id] = std::move(part);
  }

  const PartDef* find(std::string_view id) const {
    if (auto it = parts_.find(ldraw::normalize_name(id)); it != parts_.end()) return &it->second;
    return nullptr;
  }

  const PartDef& at(std::string_view id) const {
    if (const auto* p = find(id)) return *p;
    throw CatalogError("missing-annotation", "no annotation for part '" + std::string(id) + "'");
  }

  const PartDef* find_by_name(std::string_view name) const {
    if (auto it = by_name_.find(normalize_part_name(name)); it != by_name_.end()) return find(it->second);
    return nullptr;
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const std::map<std::string, PartDef>& parts() const { return parts_; }

  ColorTable& colors() { return colors_; }
  const ColorTable& colors() const { return colors_; }
  CompatibilityTable& compatibility() { return compat_; }
  const CompatibilityTable& compatibility() const { return compat_; }

  bool multi_accept(const AnnotatedConnector& c) const { return compat_.multi_accept(c.subtype_ref()); }

  ldraw::PartPredicate part_predicate() const {
    return [this](std::string_view name) { return contains(name); };
  }

  // -------------------------------------------------------------------------
  // JSON

  /// Reads a catalog document. Relative `mesh_file` paths resolve against
  /// `base_dir`.
  static Catalog from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    if (j.value("version", 0) != kVersion) throw CatalogError("catalog", "unsupported catalog version");
    Catalog cat;
    const double inset = j.value("collision_inset", kDefaultInset);
    if (j.contains("compatibility")) cat.compat_ = CompatibilityTable::from_json(j.at("compatibility"));
    if (j.contains("colors")) {
      ColorTable colors;
      for (const auto& [code, name] : j.at("colors").items()) colors.add(std::stoi(code), name.get<std::string>());
      cat.colors_ = std::move(colors);
    }
    for (const auto& p : j.at("parts")) {
      PartDef part;
      part.id = p.at("id").get<std::string>();
      part.name = p.at("name").get<std::string>();
      for (const auto& c : p.value("connectors", nlohmann::json::array())) {
        part.connectors.push_back(connector_from_json(c));
      }
      if (std::any_of(part.connectors.begin(), part.connectors.end(), [](const auto& c) { return c.index.empty(); })) {
        canonicalize(part.connectors);
      }
      for (const auto& c : part.connectors) {
        if (!cat.compat_.known(c.subtype_ref())) {
          throw CatalogError("catalog", "part '" + part.id + "' uses unknown subtype '" + c.subtype + "'");
        }
      }
      part.collision = mesh_from_json(p, base_dir, inset);
      cat.add_part(std::move(part));
    }
    return cat;
  }

  static Catalog load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open catalog '" + path.string() + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CatalogError("catalog", "invalid catalog JSON: " + std::string(e.what()));
    }
    try {
      return from_json(j, path.parent_path());
    } catch (const nlohmann::json::exception& e) {
      throw CatalogError("catalog", "malformed catalog: " + std::string(e.what()));
    }
  }

  /// Meshes are written pre-inset so a reload reproduces them exactly.
  nlohmann::json to_json() const {
    nlohmann::json j{{"version", kVersion}, {"collision_inset", kDefaultInset}, {"compatibility", compat_.to_json()}};
    nlohmann::json colors = nlohmann::json::object();
    for (const auto& [code, name] : colors_.entries()) colors[std::to_string(code)] = name;
    j["colors"] = colors;
    j["parts"] = nlohmann::json::array();
    for (const auto& [id, part] : parts_) {
      nlohmann::json p{{"id", id}, {"name", part.name}, {"connectors", nlohmann::json::array()}};
      for (const auto& c : part.connectors) p["connectors"].push_back(brickir::to_json(c));
      if (part.collision) {
        nlohmann::json mesh{{"pre_inset", true}, {"inset", part.collision->source_inset()},
                            {"closed", part.collision->closed()}};
        for (const auto& v : part.collision->vertices()) mesh["vertices"].push_back({v.x(), v.y(), v.z()});
        for (const auto& t : part.collision->triangles()) mesh["triangles"].push_back({t[0], t[1], t[2]});
        p["mesh"] = mesh;
      }
      j["parts"].push_back(p);
    }
    return j;
  }

private:
  static std::shared_ptr<const CollisionMesh> mesh_from_json(const nlohmann::json& p,
                                                             const std::filesystem::path& base_dir, double inset) {
    if (p.contains("box")) {
      const auto& b = p.at("box");
      const Vec3 lo(b.at(0).at(0).get<double>(), b.at(0).at(1).get<double>(), b.at(0).at(2).get<double>());
      const Vec3 hi(b.at(1).at(0).get<double>(), b.at(1).at(1).get<double>(), b.at(1).at(2).get<double>());
      return std::make_shared<const CollisionMesh>(inset_mesh(make_box(lo, hi), inset));
    }
    TriMesh raw;
    bool pre_inset = false;
    double pre_amount = 0.0;
    std::optional<bool> closed;
    if (p.contains("mesh_file")) {
      const auto path = base_dir / p.at("mesh_file").get<std::string>();
      std::ifstream in(path);
      if (!in) throw Error("io", "cannot open mesh file '" + path.string() + "'");
      raw = read_tri(in);
      pre_inset = p.value("pre_inset", false);
      pre_amount = p.value("inset", pre_inset ? inset : 0.0);
    } else if (p.contains("mesh")) {
      const auto& m = p.at("mesh");
      for (const auto& v : m.at("vertices")) raw.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
      for (const auto& t : m.at("triangles")) {
        raw.triangles.push_back({t.at(0).get<std::uint32_t>(), t.at(1).get<std::uint32_t>(), t.at(2).get<std::uint32_t>()});
      }
      pre_inset = m.value("pre_inset", false);
      pre_amount = m.value("inset", pre_inset ? inset : 0.0);
      if (m.contains("closed")) closed = m.at("closed").get<bool>();
    } else {
      return nullptr;
    }
    if (raw.empty()) return nullptr;
    if (pre_inset) {
      const bool c = closed.value_or(is_closed(raw));
      return std::make_shared<const CollisionMesh>(std::move(raw), pre_amount, c);
    }
    return std::make_shared<const CollisionMesh>(inset_mesh(raw, inset));
  }

  std::map<std::string, PartDef> parts_;
  std::map<std::string, std::string> by_name_;
  ColorTable colors_ = ColorTable::defaults();
  CompatibilityTable compat_ = CompatibilityTable::defaults();
};

// ---------------------------------------------------------------------------
// Building a catalog from an LDraw part library

/// File lookup over the usual LDraw library layout.
inline ldraw::SourceLoader library_loader(const std::filesystem::path& root) {
  return [root](std::string_view name) -> std::optional<std::string> {
    const std::string n(name);
    for (const auto& dir : {root / "parts", root / "p", root, root / "parts" / "s", root / "p" / "48"}) {
      const auto path = dir / n;
      if (std::filesystem::is_regular_file(path)) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
      }
    }
    return std::nullopt;
  };
}

struct CatalogBuildOptions {
  PrimitiveTable primitives = default_primitive_table();
  std::map<std::string, std::vector<AnnotationOverride>> overrides;  ///< keyed by part id
  double inset = kDefaultInset;
  bool with_meshes = true;
};

/// Per-part notes for human review: primitives rejected by the unit-scale
/// check and overrides that were applied.
struct BuildReview {
  std::string part_id;
  std::vector<ldraw::PrimitiveRef> rejected;
  std::size_t overrides = 0;
};

/// Annotates the given parts of an LDraw library. Duplicate descriptions are
/// disambiguated by appending the part id.
inline Catalog build_catalog(const std::filesystem::path& library, const std::vector<std::string>& part_ids,
                             const CatalogBuildOptions& options = {}, std::vector<BuildReview>* review = nullptr) {
  Catalog cat;
  const auto load = library_loader(library);
  auto is_connector = [&](std::string_view n) { return options.primitives.count(std::string(n)) > 0; };
  for (const auto& raw_id : part_ids) {
    const auto id = ldraw::normalize_name(raw_id);
    const auto source = load(id);
    if (!source) throw CatalogError("missing-part", "part file '" + id + "' not found in library");
    BuildReview notes{id, {}, 0};
    const auto scan = ldraw::scan_primitives(*source, load, is_connector, &notes.rejected, id);
    std::vector<AnnotationOverride> ov;
    if (auto it = options.overrides.find(id); it != options.overrides.end()) ov = it->second;
    notes.overrides = ov.size();
    PartDef part;
    part.id = id;
    part.name = normalize_part_name(ldraw::part_description(*source));
    if (part.name.empty()) part.name = id;
    if (cat.find_by_name(part.name)) part.name += " (" + id + ")";
    part.connectors = annotate_part(scan, ov, options.primitives);
    if (options.with_meshes) {
      const auto mesh = ldraw::extract_mesh(*source, load, id);
      if (!mesh.empty()) part.collision = std::make_shared<const CollisionMesh>(inset_mesh(mesh, options.inset));
    }
    cat.add_part(std::move(part));
    if (review) review->push_back(std::move(notes));
  }
  return cat;
}

/// {"<part id>": [override, ...], ...}
inline std::map<std::string, std::vector<AnnotationOverride>> overrides_by_part(const nlohmann::json& j) {
  std::map<std::string, std::vector<AnnotationOverride>> out;
  for (const auto& [id, arr] : j.items()) out[ldraw::normalize_name(id)] = overrides_from_json(arr);
  return out;
}

}  // namespace brickir

#endif  // BRICKIR_CATALOG_HPP
