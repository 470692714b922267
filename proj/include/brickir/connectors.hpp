#ifndef BRICKIR_CONNECTORS_HPP
#define BRICKIR_CONNECTORS_HPP

#include <algorithm>
#include <array>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "brickir/error.hpp"
#include "brickir/geometry.hpp"
#include "brickir/ldraw.hpp"

namespace brickir {

enum class Family { Stud, Hinge, Axle, Ball, Fixed };

inline constexpr std::array<Family, 5> kAllFamilies{Family::Stud, Family::Hinge, Family::Axle,
                                                    Family::Ball, Family::Fixed};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Stud: return "stud";
    case Family::Hinge: return "hinge";
    case Family::Axle: return "axle";
    case Family::Ball: return "ball";
    case Family::Fixed: return "fixed";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == s) return f;
  }
  return std::nullopt;
}

inline Family family_from_string(std::string_view s) {
  if (auto f = parse_family(s)) return *f;
  throw CatalogError("unknown-family", "unknown connector family '" + std::string(s) + "'");
}

/// Degrees of freedom a connection of a given family carries.
struct DofSpec {
  int rotational_dof = 0;
  bool has_flip = false;
  bool has_slide = false;

  bool operator==(const DofSpec&) const = default;
};

constexpr DofSpec dof_spec(Family f) {
  switch (f) {
    case Family::Stud: return {1, false, false};
    case Family::Hinge: return {1, true, false};
    case Family::Axle: return {1, true, true};
    case Family::Ball: return {3, false, false};
    case Family::Fixed: return {0, false, false};
  }
  return {};
}

/// A connector subtype name within its family ("stud"/"hole", "pin", ...).
struct Subtype {
  Family family = Family::Stud;
  std::string name;

  auto operator<=>(const Subtype&) const = default;
};

/// Which subtypes pair with which, which subtypes accept several partners,
/// and the axis polarity that counts as unflipped for each family.
class CompatibilityTable {
public:
  static constexpr int kVersion = 1;

  void add_pair(Family f, const std::string& a, const std::string& b) {
    subtypes_.insert({f, a});
    subtypes_.insert({f, b});
    pairs_.insert(ordered({f, a}, {f, b}));
  }

  void add_multi_accept(Family f, const std::string& name) {
    subtypes_.insert({f, name});
    multi_.insert({f, name});
  }

  void set_antiparallel(Family f, bool anti) { antiparallel_[static_cast<std::size_t>(f)] = anti; }

  bool compatible(const Subtype& a, const Subtype& b) const {
    if (a.family != b.family) return false;
    return pairs_.count(ordered(a, b)) > 0;
  }

  bool compatible(Family f, std::string_view a, std::string_view b) const {
    return compatible(Subtype{f, std::string(a)}, Subtype{f, std::string(b)});
  }

  bool known(const Subtype& s) const { return subtypes_.count(s) > 0; }
  bool multi_accept(const Subtype& s) const { return multi_.count(s) > 0; }

  /// True when flip=false means the two principal axes point opposite ways.
  bool canonical_antiparallel(Family f) const { return antiparallel_[static_cast<std::size_t>(f)]; }

  const std::set<Subtype>& subtypes() const { return subtypes_; }
  const std::set<std::pair<Subtype, Subtype>>& pairs() const { return pairs_; }
  const std::set<Subtype>& multi_accept_subtypes() const { return multi_; }

  /// The shipped starter table. Hinge pairs are corpus-calibrated data.
  static CompatibilityTable defaults() {
    CompatibilityTable t;
    for (const char* stud : {"stud", "open_stud"}) {
      t.add_pair(Family::Stud, stud, "hole");
      t.add_pair(Family::Stud, stud, "tube");
    }
    t.add_pair(Family::Stud, "open_stud", "post");
    t.add_pair(Family::Hinge, "in", "on");
    t.add_pair(Family::Hinge, "click_in", "click_on");
    t.add_pair(Family::Hinge, "finger_in", "finger_on");
    t.add_pair(Family::Axle, "pin", "pin_socket");
    t.add_pair(Family::Axle, "axle", "pin_socket");
    t.add_pair(Family::Axle, "axle", "axle_socket");
    t.add_pair(Family::Axle, "clip", "bar");
    t.add_pair(Family::Ball, "towball", "towball_socket");
    t.add_pair(Family::Ball, "technic_ball", "technic_socket");
    t.add_pair(Family::Fixed, "in", "on");
    t.add_multi_accept(Family::Axle, "bar");
    t.add_multi_accept(Family::Axle, "axle");
    return t;
  }

  /// {"version":1, "pairs":[[family,a,b],...], "multi_accept":[[family,name],...],
  ///  "antiparallel":[family,...]}
  static CompatibilityTable from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != kVersion) {
      throw CatalogError("compat-version", "unsupported compatibility table version");
    }
    CompatibilityTable t;
    for (const auto& p : j.at("pairs")) {
      t.add_pair(family_from_string(p.at(0).get<std::string>()), p.at(1).get<std::string>(),
                 p.at(2).get<std::string>());
    }
    if (j.contains("multi_accept")) {
      for (const auto& m : j.at("multi_accept")) {
        t.add_multi_accept(family_from_string(m.at(0).get<std::string>()), m.at(1).get<std::string>());
      }
    }
    if (j.contains("antiparallel")) {
      for (const auto& f : j.at("antiparallel")) t.set_antiparallel(family_from_string(f.get<std::string>()), true);
    }
    return t;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"version", kVersion}, {"pairs", nlohmann::json::array()},
                     {"multi_accept", nlohmann::json::array()}, {"antiparallel", nlohmann::json::array()}};
    for (const auto& [a, b] : pairs_) j["pairs"].push_back({family_name(a.family), a.name, b.name});
    for (const auto& m : multi_) j["multi_accept"].push_back({family_name(m.family), m.name});
    for (Family f : kAllFamilies) {
      if (canonical_antiparallel(f)) j["antiparallel"].push_back(family_name(f));
    }
    return j;
  }

private:
  static std::pair<Subtype, Subtype> ordered(Subtype a, Subtype b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
  }

  std::set<Subtype> subtypes_;
  std::set<std::pair<Subtype, Subtype>> pairs_;
  std::set<Subtype> multi_;
  std::array<bool, 5> antiparallel_{};
};

/// Compatibility under the default table.
inline bool compatible(const Subtype& a, const Subtype& b) {
  static const CompatibilityTable table = CompatibilityTable::defaults();
  return table.compatible(a, b);
}

// ---------------------------------------------------------------------------
// Connector indices: a..z, aa..az, ba.. (bijective base 26)

inline std::string index_name(std::size_t i) {
  std::string s;
  ++i;
  while (i > 0) {
    --i;
    s.insert(s.begin(), static_cast<char>('a' + i % 26));
    i /= 26;
  }
  return s;
}

inline std::optional<std::size_t> index_value(std::string_view s) {
  if (s.empty() || s.size() > 6) return std::nullopt;
  std::size_t v = 0;
  for (char c : s) {
    if (c < 'a' || c > 'z') return std::nullopt;
    v = v * 26 + static_cast<std::size_t>(c - 'a' + 1);
  }
  return v - 1;
}

/// One attachment site of a part, in part coordinates.
struct AnnotatedConnector {
  std::string index;
  Family family = Family::Stud;
  std::string subtype;
  ConnectorFrame frame;
  double axle_length = 0.0;  ///< axial extent, Axle family only

  Subtype subtype_ref() const { return {family, subtype}; }
};

namespace detail {

inline long long snap(double v) { return std::llround(v * 1e6); }

inline auto canonical_key(const AnnotatedConnector& c) {
  const auto& f = c.frame;
  return std::make_tuple(snap(f.origin.x()), snap(f.origin.y()), snap(f.origin.z()), c.family, c.subtype,
                         snap(f.principal_axis.x()), snap(f.principal_axis.y()), snap(f.principal_axis.z()),
                         snap(f.reference_axis.x()), snap(f.reference_axis.y()), snap(f.reference_axis.z()));
}

inline bool same_site(const ConnectorFrame& a, const ConnectorFrame& b, double tol = 1e-6) {
  return (a.origin - b.origin).norm() <= tol && (a.principal_axis - b.principal_axis).norm() <= tol &&
         (a.reference_axis - b.reference_axis).norm() <= tol;
}

}  // namespace detail

/// Sorts by local coordinates (x, then y, then z) and assigns a, b, c, ...
/// Throws on two connectors occupying the same frame.
inline void canonicalize(std::vector<AnnotatedConnector>& connectors) {
  std::stable_sort(connectors.begin(), connectors.end(), [](const auto& a, const auto& b) {
    return detail::canonical_key(a) < detail::canonical_key(b);
  });
  for (std::size_t i = 0; i + 1 < connectors.size(); ++i) {
    for (std::size_t j = i + 1; j < connectors.size(); ++j) {
      if (detail::snap(connectors[j].frame.origin.x()) - detail::snap(connectors[i].frame.origin.x()) > 1) break;
      if (detail::same_site(connectors[i].frame, connectors[j].frame)) {
        throw CatalogError("duplicate-connector", "duplicate connector site");
      }
    }
  }
  for (std::size_t i = 0; i < connectors.size(); ++i) connectors[i].index = index_name(i);
}

// ---------------------------------------------------------------------------
// Procedural annotation

/// How a connector primitive maps onto a typed connector. The frame is in
/// the primitive's own coordinates.
struct ConnectorPrimitive {
  Family family = Family::Stud;
  std::string subtype;
  ConnectorFrame frame;
  double axle_length = 0.0;
};

using PrimitiveTable = std::map<std::string, ConnectorPrimitive>;

/// LDraw primitives recognized out of the box. Studs point along -y (up).
inline PrimitiveTable default_primitive_table() {
  const ConnectorFrame up{Vec3::Zero(), -Vec3::UnitY(), Vec3::UnitX()};
  PrimitiveTable t;
  t["stud.dat"] = {Family::Stud, "stud", up, 0.0};
  t["stud2.dat"] = {Family::Stud, "open_stud", up, 0.0};
  t["stud3.dat"] = {Family::Stud, "post", up, 0.0};
  t["stud4.dat"] = {Family::Stud, "tube", up, 0.0};
  t["connect.dat"] = {Family::Axle, "pin", up, 0.0};
  t["peghole.dat"] = {Family::Axle, "pin_socket", up, 0.0};
  t["axlehole.dat"] = {Family::Axle, "axle_socket", up, 0.0};
  return t;
}

inline PrimitiveTable primitive_table_from_json(const nlohmann::json& j) {
  PrimitiveTable t;
  for (const auto& [name, e] : j.items()) {
    ConnectorPrimitive p;
    p.family = family_from_string(e.at("family").get<std::string>());
    p.subtype = e.at("subtype").get<std::string>();
    auto vec = [&](const char* key, Vec3 fallback) {
      if (!e.contains(key)) return fallback;
      const auto& a = e.at(key);
      return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
    };
    p.frame = make_frame(vec("origin", Vec3::Zero()), vec("principal_axis", -Vec3::UnitY()),
                         vec("reference_axis", Vec3::UnitX()));
    p.axle_length = e.value("axle_length", 0.0);
    t[ldraw::normalize_name(name)] = p;
  }
  return t;
}

enum class OverrideAction { Add, Remove, Retype };

/// One manual correction to the procedural annotation of a part. Remove and
/// retype target a site by its procedural `index` or, failing that, by
/// `frame` (origin + principal axis).
struct AnnotationOverride {
  OverrideAction action = OverrideAction::Add;
  std::optional<std::string> index;
  Family family = Family::Stud;
  std::string subtype;
  std::optional<ConnectorFrame> frame;
  std::optional<double> axle_length;
};

/// Parses the per-part override array.
inline std::vector<AnnotationOverride> overrides_from_json(const nlohmann::json& arr) {
  std::vector<AnnotationOverride> out;
  for (const auto& e : arr) {
    AnnotationOverride o;
    const auto action = e.at("action").get<std::string>();
    if (action == "add") {
      o.action = OverrideAction::Add;
    } else if (action == "remove") {
      o.action = OverrideAction::Remove;
    } else if (action == "retype") {
      o.action = OverrideAction::Retype;
    } else {
      throw CatalogError("override", "unknown override action '" + action + "'");
    }
    if (e.contains("index")) o.index = e.at("index").get<std::string>();
    if (e.contains("family")) o.family = family_from_string(e.at("family").get<std::string>());
    o.subtype = e.value("subtype", std::string{});
    if (e.contains("origin")) {
      auto vec = [&](const char* key, Vec3 fallback) {
        if (!e.contains(key)) return fallback;
        const auto& a = e.at(key);
        return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
      };
      o.frame = make_frame(vec("origin", Vec3::Zero()), vec("principal_axis", -Vec3::UnitY()),
                           vec("reference_axis", Vec3::UnitX()));
    }
    if (e.contains("axle_length")) o.axle_length = e.at("axle_length").get<double>();
    if (o.action != OverrideAction::Remove && o.subtype.empty()) {
      throw CatalogError("override", "override '" + action + "' needs a subtype");
    }
    if (o.action == OverrideAction::Add && !o.frame) throw CatalogError("override", "add override needs an origin");
    out.push_back(std::move(o));
  }
  return out;
}

/// Builds the connector list of one part from its primitive scan plus manual
/// overrides. Indices are assigned canonically after merging.
inline std::vector<AnnotatedConnector> annotate_part(const std::vector<ldraw::PrimitiveRef>& scan,
                                                     const std::vector<AnnotationOverride>& overrides = {},
                                                     const PrimitiveTable& primitives = default_primitive_table()) {
  std::vector<AnnotatedConnector> sites;
  for (const auto& ref : scan) {
    const auto it = primitives.find(ref.primitive_name);
    if (it == primitives.end()) continue;
    const ConnectorPrimitive& p = it->second;
    AnnotatedConnector c;
    c.family = p.family;
    c.subtype = p.subtype;
    c.frame = p.frame.transformed(ref.accumulated_transform);
    c.axle_length = p.axle_length;
    sites.push_back(std::move(c));
  }
  canonicalize(sites);

  std::vector<bool> removed(sites.size(), false);
  auto locate = [&](const AnnotationOverride& o) -> std::size_t {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (removed[i]) continue;
      if (o.index ? sites[i].index == *o.index
                  : o.frame && (sites[i].frame.origin - o.frame->origin).norm() <= 1e-6 &&
                        (sites[i].frame.principal_axis - o.frame->principal_axis).norm() <= 1e-6) {
        return i;
      }
    }
    throw CatalogError("override", "override references a nonexistent connector site" +
                                       (o.index ? " '" + *o.index + "'" : std::string{}));
  };

  std::vector<AnnotatedConnector> added;
  for (const auto& o : overrides) {
    switch (o.action) {
      case OverrideAction::Remove: removed[locate(o)] = true; break;
      case OverrideAction::Retype: {
        auto& site = sites[locate(o)];
        site.family = o.family;
        site.subtype = o.subtype;
        if (o.axle_length) site.axle_length = *o.axle_length;
        break;
      }
      case OverrideAction::Add: {
        AnnotatedConnector c;
        c.family = o.family;
        c.subtype = o.subtype;
        c.frame = *o.frame;
        c.axle_length = o.axle_length.value_or(0.0);
        added.push_back(std::move(c));
        break;
      }
    }
  }

  std::vector<AnnotatedConnector> merged;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!removed[i]) merged.push_back(std::move(sites[i]));
  }
  for (auto& c : added) merged.push_back(std::move(c));
  canonicalize(merged);
  return merged;
}

inline nlohmann::json to_json(const ConnectorFrame& f) {
  auto v = [](const Vec3& x) { return nlohmann::json::array({x.x(), x.y(), x.z()}); };
  return {{"origin", v(f.origin)}, {"principal_axis", v(f.principal_axis)}, {"reference_axis", v(f.reference_axis)}};
}

inline nlohmann::json to_json(const AnnotatedConnector& c) {
  nlohmann::json j = to_json(c.frame);
  j["index"] = c.index;
  j["family"] = family_name(c.family);
  j["subtype"] = c.subtype;
  if (c.family == Family::Axle) j["axle_length"] = c.axle_length;
  return j;
}

inline AnnotatedConnector connector_from_json(const nlohmann::json& j) {
  auto vec = [&](const char* key) {
    const auto& a = j.at(key);
    return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
  };
  AnnotatedConnector c;
  c.index = j.value("index", std::string{});
  c.family = family_from_string(j.at("family").get<std::string>());
  c.subtype = j.at("subtype").get<std::string>();
  c.frame = make_frame(vec("origin"), vec("principal_axis"), vec("reference_axis"));
  c.axle_length = j.value("axle_length", 0.0);
  return c;
}

}  // namespace brickir

#endif  // BRICKIR_CONNECTORS_HPP
