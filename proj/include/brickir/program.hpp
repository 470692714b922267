#ifndef BRICKIR_PROGRAM_HPP
#define BRICKIR_PROGRAM_HPP

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "brickir/catalog.hpp"
#include "brickir/collision.hpp"
#include "brickir/connectors.hpp"
#include "brickir/error.hpp"
#include "brickir/graph.hpp"

namespace brickir {

// Build-sequence text, one step per line:
//
//   intro  := node_id SP part_name SP "|" SP color_name
//   attach := node_id SP family SP subtype_target SP conn_index_target
//             SP subtype_new SP conn_index_new {SP param}
//
// Params by family: stud `yaw`; hinge `[flip] yaw`; axle `[flip] yaw slide`;
// ball `e1 e2 e3`; fixed none. The new endpoint of an attach is the most
// recently introduced node. Node ids run a..z, aa, ab, ...

struct PartIntro {
  std::string node_id;
  std::string part_name;
  std::string color_name;

  bool operator==(const PartIntro&) const = default;
};

struct Attach {
  std::string target_node;
  Family family = Family::Stud;
  std::string target_subtype;
  std::string target_index;
  std::string new_subtype;
  std::string new_index;
  QuantizedParams params;

  bool operator==(const Attach&) const = default;
};

struct BuildStep {
  std::variant<PartIntro, Attach> value;
  std::size_t line = 0;

  bool is_intro() const { return std::holds_alternative<PartIntro>(value); }
  const PartIntro& intro() const { return std::get<PartIntro>(value); }
  const Attach& attach() const { return std::get<Attach>(value); }

  /// Field-wise equality; source line numbers are ignored.
  bool operator==(const BuildStep& o) const { return value == o.value; }
};

struct BuildProgram {
  std::vector<BuildStep> steps;

  /// Completed placement actions: the root intro plus each intro+attach pair.
  std::size_t placements() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (!steps[i].is_intro()) ++n;
      else if (i == 0) ++n;
    }
    return n;
  }

  bool operator==(const BuildProgram&) const = default;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string code;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// A program-level failure. Codes: syntax, unknown-part, unknown-color,
/// unknown-family, unknown-connector, incompatible-subtypes,
/// subtype-mismatch, bad-params, target-not-introduced, duplicate-node,
/// unexpected-attach, dangling-part, connector-occupied.
class ProgramError : public ParseError {
public:
  ProgramError(std::string code, const std::string& message, std::size_t line)
      : ParseError(std::move(code), message, line), detail_(message) {}

  Diagnostic diagnostic() const { return {line(), code(), detail_}; }

private:
  std::string detail_;
};

// ---------------------------------------------------------------------------
// Formatting

inline std::string format_params(const QuantizedParams& p, Family f) {
  std::string out;
  auto add = [&](const std::string& tok) {
    out += ' ';
    out += tok;
  };
  switch (f) {
    case Family::Stud:
      add(std::to_string(p.yaw_deg));
      break;
    case Family::Hinge:
      if (p.flip) add("flip");
      add(std::to_string(p.yaw_deg));
      break;
    case Family::Axle:
      if (p.flip) add("flip");
      add(std::to_string(p.yaw_deg));
      add(std::to_string(p.slide_ldu));
      break;
    case Family::Ball:
      for (int e : p.euler_deg) add(std::to_string(e));
      break;
    case Family::Fixed:
      break;
  }
  return out;
}

inline std::string format_step(const BuildStep& s) {
  if (s.is_intro()) {
    const auto& i = s.intro();
    return i.node_id + " " + i.part_name + " | " + i.color_name;
  }
  const auto& a = s.attach();
  return a.target_node + " " + std::string(family_name(a.family)) + " " + a.target_subtype + " " + a.target_index +
         " " + a.new_subtype + " " + a.new_index + format_params(a.params, a.family);
}

inline std::string format_program(const BuildProgram& p) {
  std::string out;
  for (const auto& s : p.steps) {
    out += format_step(s);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization from a graph path

/// Converts a build path into program steps. Node ids are assigned a, b, ...
/// in introduction order. Edges traversed against their stored direction get
/// parameters re-extracted from the node poses.
inline BuildProgram to_program(const ConnectivityGraph& g, const BuildPath& path, const Catalog& catalog) {
  if (!is_valid_path(g, path)) throw Error("bad-path", "build path is not a valid spanning-tree prefix of the graph");
  BuildProgram prog;
  std::map<std::string, std::string> ids;
  auto intro = [&](const std::string& node) {
    const auto& inst = g.node(node);
    const PartDef& part = catalog.at(inst.part_id);
    const auto color = catalog.colors().name(inst.color);
    if (!color) throw CatalogError("unknown-color", "no name for color " + std::to_string(inst.color));
    const std::string id = index_name(ids.size());
    ids[node] = id;
    prog.steps.push_back({PartIntro{id, part.name, *color}, 0});
  };
  intro(path.root);
  for (const auto& step : path.steps) {
    const ConnEdge& e = g.edges[step.edge];
    const bool forward = e.b.node == step.node;
    const ConnEndpoint& target = forward ? e.a : e.b;
    const ConnEndpoint& added = forward ? e.b : e.a;
    const PartDef& tp = catalog.at(g.node(target.node).part_id);
    const PartDef& np = catalog.at(g.node(added.node).part_id);
    const AnnotatedConnector* tc = tp.connector(target.connector);
    const AnnotatedConnector* nc = np.connector(added.connector);
    if (!tc || !nc) throw CatalogError("unknown-connector", "edge references a connector missing from the catalog");
    Attach a;
    a.family = e.family;
    a.target_subtype = tc->subtype;
    a.target_index = tc->index;
    a.new_subtype = nc->subtype;
    a.new_index = nc->index;
    if (forward) {
      a.params = e.params;
    } else {
      a.params = detail::extract_unchecked(world_frame(g.node(target.node), *tc), world_frame(g.node(added.node), *nc),
                                           e.family, catalog.compatibility().canonical_antiparallel(e.family));
    }
    intro(step.node);
    a.target_node = ids.at(target.node);
    prog.steps.push_back({a, 0});
  }
  for (std::size_t i = 0; i < prog.steps.size(); ++i) prog.steps[i].line = i + 1;
  return prog;
}

inline std::string serialize(const ConnectivityGraph& g, const BuildPath& path, const Catalog& catalog) {
  return format_program(to_program(g, path, catalog));
}

// ---------------------------------------------------------------------------
// Parsing

struct ProgramParse {
  BuildProgram program;             ///< longest valid prefix
  std::optional<Diagnostic> error;  ///< first invalid line, if any

  bool ok() const { return !error.has_value(); }
};

namespace detail {

inline bool is_node_id(std::string_view s) { return index_value(s).has_value(); }

inline std::string join_words(const std::vector<std::string_view>& words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

inline std::optional<int> parse_angle(std::string_view s) {
  const auto v = ldraw::parse_int(s);
  if (!v || *v < 0 || *v >= 360) return std::nullopt;
  return static_cast<int>(*v);
}

/// Parses the family-specific parameter tokens; nullopt on arity or range
/// failure.
inline std::optional<QuantizedParams> parse_params(Family f, std::vector<std::string_view> toks) {
  QuantizedParams p;
  const DofSpec dof = dof_spec(f);
  if (dof.has_flip && !toks.empty() && toks.front() == "flip") {
    p.flip = true;
    toks.erase(toks.begin());
  }
  switch (f) {
    case Family::Stud:
    case Family::Hinge: {
      if (toks.size() != 1) return std::nullopt;
      const auto y = parse_angle(toks[0]);
      if (!y) return std::nullopt;
      p.yaw_deg = *y;
      break;
    }
    case Family::Axle: {
      if (toks.size() != 2) return std::nullopt;
      const auto y = parse_angle(toks[0]);
      const auto s = ldraw::parse_int(toks[1]);
      if (!y || !s || *s < -1000000 || *s > 1000000) return std::nullopt;
      p.yaw_deg = *y;
      p.slide_ldu = static_cast<int>(*s);
      break;
    }
    case Family::Ball: {
      if (toks.size() != 3) return std::nullopt;
      for (std::size_t i = 0; i < 3; ++i) {
        const auto e = parse_angle(toks[i]);
        if (!e) return std::nullopt;
        p.euler_deg[i] = *e;
      }
      break;
    }
    case Family::Fixed:
      if (!toks.empty()) return std::nullopt;
      break;
  }
  return p;
}

/// Incremental parser state shared by strict and prefix modes.
class ProgramParser {
public:
  explicit ProgramParser(const Catalog& catalog) : catalog_(catalog) {}

  /// Parses one non-blank line; throws ProgramError.
  BuildStep parse_line(std::string_view raw, std::size_t line) {
    const auto bar = raw.find('|');
    BuildStep step = bar == std::string_view::npos ? BuildStep{parse_attach(raw, line), line}
                                                   : BuildStep{parse_intro(raw, bar, line), line};
    commit(step);
    return step;
  }

  /// Raises dangling-part if the last intro never received its attach.
  void finish(std::size_t eof_line) const {
    if (pending_) throw ProgramError("dangling-part", "node '" + *pending_ + "' is never attached", eof_line);
  }

private:
  PartIntro parse_intro(std::string_view raw, std::size_t bar, std::size_t line) {
    if (raw.find('|', bar + 1) != std::string_view::npos) throw ProgramError("syntax", "more than one '|'", line);
    const auto left = ldraw::split_ws(raw.substr(0, bar));
    const auto right = ldraw::split_ws(raw.substr(bar + 1));
    if (left.size() < 2 || right.empty()) throw ProgramError("syntax", "expected '<id> <part name> | <color>'", line);
    if (!is_node_id(left[0])) throw ProgramError("syntax", "bad node id '" + std::string(left[0]) + "'", line);
    if (pending_) throw ProgramError("dangling-part", "node '" + *pending_ + "' is never attached", line);
    PartIntro intro{std::string(left[0]), join_words(left, 1, left.size()), join_words(right, 0, right.size())};
    if (nodes_.count(intro.node_id)) throw ProgramError("duplicate-node", "node '" + intro.node_id + "' already introduced", line);
    const PartDef* part = catalog_.find_by_name(intro.part_name);
    if (!part) throw ProgramError("unknown-part", "unknown part '" + intro.part_name + "'", line);
    if (!catalog_.colors().code(intro.color_name)) {
      throw ProgramError("unknown-color", "unknown color '" + intro.color_name + "'", line);
    }
    return intro;
  }

  Attach parse_attach(std::string_view raw, std::size_t line) {
    const auto toks = ldraw::split_ws(raw);
    if (toks.size() < 6 || !is_node_id(toks[0]) || !is_node_id(toks[3]) || !is_node_id(toks[5])) {
      throw ProgramError("syntax", "expected '<target> <family> <subtype> <index> <subtype> <index> [params]'", line);
    }
    if (nodes_.empty()) throw ProgramError("unexpected-attach", "attach before any part", line);
    if (!pending_) throw ProgramError("unexpected-attach", "no newly introduced part to attach", line);
    Attach a;
    a.target_node = std::string(toks[0]);
    if (a.target_node == *pending_ || !nodes_.count(a.target_node)) {
      throw ProgramError("target-not-introduced", "node '" + a.target_node + "' has not been placed", line);
    }
    const auto family = parse_family(toks[1]);
    if (!family) throw ProgramError("unknown-family", "unknown family '" + std::string(toks[1]) + "'", line);
    a.family = *family;
    a.target_subtype = std::string(toks[2]);
    a.target_index = std::string(toks[3]);
    a.new_subtype = std::string(toks[4]);
    a.new_index = std::string(toks[5]);

    const AnnotatedConnector* tc = nodes_.at(a.target_node)->connector(a.target_index);
    if (!tc) throw ProgramError("unknown-connector", "node '" + a.target_node + "' has no connector '" + a.target_index + "'", line);
    const AnnotatedConnector* nc = nodes_.at(*pending_)->connector(a.new_index);
    if (!nc) throw ProgramError("unknown-connector", "node '" + *pending_ + "' has no connector '" + a.new_index + "'", line);
    if (!catalog_.compatibility().compatible(a.family, a.target_subtype, a.new_subtype)) {
      throw ProgramError("incompatible-subtypes",
                         "'" + a.target_subtype + "' and '" + a.new_subtype + "' do not connect as " +
                             std::string(family_name(a.family)),
                         line);
    }
    if (tc->family != a.family || tc->subtype != a.target_subtype || nc->family != a.family ||
        nc->subtype != a.new_subtype) {
      throw ProgramError("subtype-mismatch", "stated subtypes do not match the connectors", line);
    }
    const auto params = parse_params(a.family, {toks.begin() + 6, toks.end()});
    if (!params) throw ProgramError("bad-params", "malformed parameters for " + std::string(family_name(a.family)), line);
    if (std::abs(params->slide_ldu) > slide_limit(*tc, *nc)) {
      throw ProgramError("bad-params", "slide " + std::to_string(params->slide_ldu) + " exceeds the axle overlap", line);
    }
    a.params = *params;
    return a;
  }

  void commit(const BuildStep& s) {
    if (s.is_intro()) {
      const auto& i = s.intro();
      nodes_[i.node_id] = catalog_.find_by_name(i.part_name);
      if (nodes_.size() > 1) pending_ = i.node_id;
    } else {
      pending_.reset();
    }
  }

  const Catalog& catalog_;
  std::map<std::string, const PartDef*> nodes_;
  std::optional<std::string> pending_;
};

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    start = end + 1;
  }
  return lines;
}

}  // namespace detail

/// Parses build-sequence text. Prefix mode (default) keeps the longest valid
/// prefix and reports the first invalid line; strict mode throws
/// ProgramError instead. Blank lines are skipped.
inline ProgramParse parse_program(std::string_view text, const Catalog& catalog, bool strict = false) {
  ProgramParse out;
  detail::ProgramParser parser(catalog);
  const auto lines = detail::split_lines(text);
  try {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (ldraw::split_ws(lines[i]).empty()) continue;
      out.program.steps.push_back(parser.parse_line(lines[i], i + 1));
    }
    parser.finish(lines.size() + 1);
  } catch (const ProgramError& e) {
    if (strict) throw;
    out.error = e.diagnostic();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

/// Places parts step by step. Assumes steps came from parse_program; checks
/// connector occupancy.
class Executor {
public:
  explicit Executor(const Catalog& catalog) : catalog_(catalog) {}

  /// Applies one step. Returns the placed instance when a placement action
  /// completes (root intro, or an attach).
  std::optional<PartInstance> apply(const BuildStep& step) {
    if (step.is_intro()) {
      const auto& i = step.intro();
      const PartDef* part = catalog_.find_by_name(i.part_name);
      const auto color = catalog_.colors().code(i.color_name);
      if (!part || !color) throw ProgramError("unknown-part", "unresolvable intro", step.line);
      PartInstance inst;
      inst.node_id = i.node_id;
      inst.part_id = part->id;
      inst.color = *color;
      inst.line = step.line;
      if (placed_.empty() && !pending_) {
        placed_.push_back(inst);
        index_[inst.node_id] = 0;
        return inst;
      }
      pending_ = inst;
      return std::nullopt;
    }
    const Attach& a = step.attach();
    if (!pending_) throw ProgramError("unexpected-attach", "no newly introduced part to attach", step.line);
    const auto t = index_.find(a.target_node);
    if (t == index_.end()) throw ProgramError("target-not-introduced", "node '" + a.target_node + "' has not been placed", step.line);
    const PartInstance& target = placed_[t->second];
    const AnnotatedConnector* tc = catalog_.at(target.part_id).connector(a.target_index);
    const AnnotatedConnector* nc = catalog_.at(pending_->part_id).connector(a.new_index);
    if (!tc || !nc) throw ProgramError("unknown-connector", "unknown connector", step.line);
    if (!catalog_.multi_accept(*tc) && consumed_.count({target.node_id, tc->index})) {
      throw ProgramError("connector-occupied",
                         "connector '" + tc->index + "' of node '" + target.node_id + "' is already in use", step.line);
    }
    const ConnectorFrame world =
        realize_params(world_frame(target, *tc), a.params, a.family, catalog_.compatibility().canonical_antiparallel(a.family));
    PartInstance inst = std::move(*pending_);
    pending_.reset();
    inst.pose = compose(world.to_transform(), nc->frame.to_transform().inverse());
    if (!catalog_.multi_accept(*tc)) consumed_.insert({target.node_id, tc->index});
    if (!catalog_.multi_accept(*nc)) consumed_.insert({inst.node_id, nc->index});
    index_[inst.node_id] = placed_.size();
    placed_.push_back(inst);
    return inst;
  }

  const std::vector<PartInstance>& placed() const { return placed_; }

private:
  const Catalog& catalog_;
  std::vector<PartInstance> placed_;
  std::map<std::string, std::size_t> index_;
  std::optional<PartInstance> pending_;
  std::set<std::pair<std::string, std::string>> consumed_;
};

/// Runs a whole program; returns the placed parts in introduction order,
/// root at identity.
inline std::vector<PartInstance> execute(const BuildProgram& program, const Catalog& catalog) {
  Executor ex(catalog);
  for (const auto& s : program.steps) ex.apply(s);
  return ex.placed();
}

// ---------------------------------------------------------------------------
// Validity

struct ValidityReport {
  std::size_t connectivity_steps = 0;  ///< placements in the longest executable prefix
  std::size_t collision_steps = 0;     ///< ... that are also collision-free
  std::optional<Diagnostic> first_error;
  std::optional<std::pair<std::string, std::string>> first_collision;

  bool operator==(const ValidityReport&) const = default;
};

/// Step validity of a parsed program. Collisions are checked incrementally
/// over the connectivity-valid prefix; parts without collision geometry
/// never collide.
inline ValidityReport validate_prefix(const ProgramParse& parsed, const Catalog& catalog, bool check_collisions = true) {
  ValidityReport r;
  r.first_error = parsed.error;
  Executor ex(catalog);
  IncrementalChecker checker;
  std::vector<std::string> checked_ids;
  bool collided = false;
  for (const auto& s : parsed.program.steps) {
    std::optional<PartInstance> placed;
    try {
      placed = ex.apply(s);
    } catch (const ProgramError& e) {
      r.first_error = e.diagnostic();
      break;
    }
    if (!placed) continue;
    ++r.connectivity_steps;
    if (collided) continue;
    const PartDef& part = catalog.at(placed->part_id);
    if (check_collisions && part.collision) {
      const auto hits = checker.add({placed->node_id, part.collision.get(), placed->pose});
      checked_ids.push_back(placed->node_id);
      if (!hits.empty()) {
        collided = true;
        r.first_collision = detail::unordered(checked_ids[hits.front()], placed->node_id);
        continue;
      }
    }
    ++r.collision_steps;
  }
  return r;
}

inline ValidityReport validate_prefix(std::string_view text, const Catalog& catalog, bool check_collisions = true) {
  return validate_prefix(parse_program(text, catalog), catalog, check_collisions);
}

inline nlohmann::json to_json(const Diagnostic& d) {
  return {{"line", d.line}, {"code", d.code}, {"message", d.message}};
}

inline nlohmann::json to_json(const ValidityReport& r) {
  nlohmann::json j{{"connectivity_steps", r.connectivity_steps}, {"collision_steps", r.collision_steps}};
  if (r.first_error) j["first_error"] = to_json(*r.first_error);
  if (r.first_collision) j["first_collision"] = {r.first_collision->first, r.first_collision->second};
  return j;
}

inline ValidityReport validity_report_from_json(const nlohmann::json& j) {
  ValidityReport r;
  r.connectivity_steps = j.at("connectivity_steps").get<std::size_t>();
  r.collision_steps = j.at("collision_steps").get<std::size_t>();
  if (j.contains("first_error")) {
    const auto& e = j.at("first_error");
    r.first_error = Diagnostic{e.at("line").get<std::size_t>(), e.at("code").get<std::string>(),
                               e.value("message", std::string())};
  }
  if (j.contains("first_collision")) {
    const auto& c = j.at("first_collision");
    r.first_collision = {c.at(0).get<std::string>(), c.at(1).get<std::string>()};
  }
  return r;
}

}  // namespace brickir

#endif  // BRICKIR_PROGRAM_HPP
