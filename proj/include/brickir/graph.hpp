#ifndef BRICKIR_GRAPH_HPP
#define BRICKIR_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "brickir/catalog.hpp"
#include "brickir/collision.hpp"
#include "brickir/connectors.hpp"
#include "brickir/geometry.hpp"
#include "brickir/ldraw.hpp"

namespace brickir {

using ldraw::PartInstance;

struct MatchTolerances {
  double position = 1.0;  ///< LDU
  double axis_deg = 2.0;
};

// ---------------------------------------------------------------------------
// Connection parameters

namespace detail {

/// Rotation by 180 degrees about the frame's reference (x) axis.
inline const Mat3& flip_matrix() {
  static const Mat3 m = rotation_about(Vec3::UnitX(), 180.0);
  return m;
}

/// Pose of frame b expressed in frame a.
inline RigidTransform frame_relative(const ConnectorFrame& a, const ConnectorFrame& b) {
  return relative(a.to_transform(), b.to_transform());
}

}  // namespace detail

/// Quality of a candidate pairing, or nullopt if the two world frames do not
/// satisfy the matching predicate for `family`. The score is the positional
/// residual in LDU (perpendicular to the axis for slide families).
inline std::optional<double> pairing_residual(const ConnectorFrame& a, const ConnectorFrame& b, Family family,
                                              const MatchTolerances& tol = {}, bool antiparallel = false) {
  const RigidTransform rel = detail::frame_relative(a, b);
  const Vec3& d = rel.translation;
  const double dot = rel.rotation(1, 1);
  const double cos_tol = std::cos(deg_to_rad(tol.axis_deg));
  const double aligned = antiparallel ? -dot : dot;
  double residual = d.norm();
  switch (family) {
    case Family::Stud:
      if (aligned < cos_tol) return std::nullopt;
      break;
    case Family::Hinge:
      if (std::abs(dot) < cos_tol) return std::nullopt;
      break;
    case Family::Axle:
      if (std::abs(dot) < cos_tol) return std::nullopt;
      residual = std::hypot(d.x(), d.z());
      break;
    case Family::Ball:
      break;
    case Family::Fixed:
      if (aligned < cos_tol || rel.rotation(0, 0) < cos_tol) return std::nullopt;
      break;
  }
  if (residual > tol.position) return std::nullopt;
  return residual;
}

namespace detail {

inline QuantizedParams extract_unchecked(const ConnectorFrame& a, const ConnectorFrame& b, Family family,
                                         bool antiparallel) {
  QuantizedParams p;
  const RigidTransform rel = frame_relative(a, b);
  const DofSpec dof = dof_spec(family);
  if (family == Family::Ball) {
    const auto e = decompose_zyx(rel.rotation);
    p.euler_deg = {quantize_angle(e[0]), quantize_angle(e[1]), quantize_angle(e[2])};
    return p;
  }
  if (dof.rotational_dof == 1) {
    // b's reference axis seen from a; a flip about x leaves it unchanged.
    p.yaw_deg = quantize_angle(rad_to_deg(std::atan2(-rel.rotation(2, 0), rel.rotation(0, 0))));
  }
  if (dof.has_flip) p.flip = (rel.rotation(1, 1) < 0.0) != antiparallel;
  if (dof.has_slide) p.slide_ldu = quantize_slide(rel.translation.y());
  return p;
}

}  // namespace detail

/// Quantized parameters that carry world frame `a` onto world frame `b` for
/// a connection of `family`. Throws "not-a-valid-pairing" when the frames do
/// not satisfy the matching predicate.
inline QuantizedParams extract_params(const ConnectorFrame& a, const ConnectorFrame& b, Family family,
                                      const MatchTolerances& tol = {}, bool antiparallel = false) {
  if (!pairing_residual(a, b, family, tol, antiparallel)) {
    throw Error("not-a-valid-pairing", "not a valid pairing");
  }
  return detail::extract_unchecked(a, b, family, antiparallel);
}

/// True when `p` only sets fields the family's degrees of freedom allow and
/// all angles lie in [0, 360).
inline bool params_fit_family(const QuantizedParams& p, Family family) {
  const DofSpec dof = dof_spec(family);
  auto angle_ok = [](int a) { return a >= 0 && a < 360; };
  if (!angle_ok(p.yaw_deg) || !std::all_of(p.euler_deg.begin(), p.euler_deg.end(), angle_ok)) return false;
  if (dof.rotational_dof != 1 && p.yaw_deg != 0) return false;
  if (dof.rotational_dof != 3 && p.euler_deg != std::array<int, 3>{0, 0, 0}) return false;
  if (!dof.has_flip && p.flip) return false;
  if (!dof.has_slide && p.slide_ldu != 0) return false;
  return true;
}

/// The new connector's world frame given the existing one and the
/// connection parameters; inverse of extract_params on the quantized grid.
inline ConnectorFrame realize_params(const ConnectorFrame& existing, const QuantizedParams& p, Family family,
                                     bool antiparallel = false) {
  if (!params_fit_family(p, family)) {
    throw Error("params-outside-dof", "parameters outside the degrees of freedom of family '" +
                                          std::string(family_name(family)) + "'");
  }
  RigidTransform local;
  if (family == Family::Ball) {
    local.rotation = euler_zyx({double(p.euler_deg[0]), double(p.euler_deg[1]), double(p.euler_deg[2])});
  } else {
    local.rotation = rotation_about(Vec3::UnitY(), p.yaw_deg);
    if (p.flip != antiparallel) local.rotation = local.rotation * detail::flip_matrix();
    local.translation = Vec3(0.0, p.slide_ldu, 0.0);
  }
  return ConnectorFrame::from_transform(compose(existing.to_transform(), local));
}

/// Canonical form of a ball triple (what extract returns for it).
inline std::array<int, 3> canonical_euler(const std::array<int, 3>& e) {
  QuantizedParams p;
  p.euler_deg = e;
  const ConnectorFrame f;
  return detail::extract_unchecked(f, realize_params(f, p, Family::Ball), Family::Ball, false).euler_deg;
}

/// Largest |slide| two axle-family connectors admit: half their summed
/// axial extents, rounded down.
inline int slide_limit(const AnnotatedConnector& a, const AnnotatedConnector& b) {
  return static_cast<int>(std::floor((a.axle_length + b.axle_length) / 2.0 + 1e-9));
}

// ---------------------------------------------------------------------------
// Graph

struct ConnEndpoint {
  std::string node;
  std::string connector;

  auto operator<=>(const ConnEndpoint&) const = default;
};

struct ConnEdge {
  ConnEndpoint a;
  ConnEndpoint b;
  Family family = Family::Stud;
  QuantizedParams params;  ///< carries a's connector frame onto b's

  bool operator==(const ConnEdge&) const = default;
};

/// Placed parts plus realized connector pairings. Nodes keep input order.
struct ConnectivityGraph {
  std::vector<PartInstance> nodes;
  std::vector<ConnEdge> edges;

  std::optional<std::size_t> node_index(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].node_id == id) return i;
    }
    return std::nullopt;
  }

  const PartInstance& node(std::string_view id) const {
    if (auto i = node_index(id)) return nodes[*i];
    throw Error("unknown-node", "no node '" + std::string(id) + "'");
  }
};

/// World frame of one connector of a placed part.
inline ConnectorFrame world_frame(const PartInstance& inst, const AnnotatedConnector& c) {
  return c.frame.transformed(inst.pose);
}

namespace detail {

struct WorldConnector {
  std::size_t node;
  const AnnotatedConnector* conn;
  ConnectorFrame frame;
};

inline std::vector<WorldConnector> world_connectors(const std::vector<PartInstance>& nodes, const Catalog& catalog) {
  std::vector<WorldConnector> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const PartDef& part = catalog.at(nodes[i].part_id);
    for (const auto& c : part.connectors) out.push_back({i, &c, world_frame(nodes[i], c)});
  }
  return out;
}

/// Candidate pairing of two world connectors (x < y by global order).
struct Candidate {
  long long residual_key;
  std::size_t x, y;
};

/// Full predicate for two world connectors, or nullopt.
inline std::optional<Candidate> evaluate_pair(const std::vector<WorldConnector>& wc, std::size_t x, std::size_t y,
                                              const Catalog& catalog, const MatchTolerances& tol) {
  const auto& cx = wc[x];
  const auto& cy = wc[y];
  if (cx.node == cy.node) return std::nullopt;
  if (!catalog.compatibility().compatible(cx.conn->subtype_ref(), cy.conn->subtype_ref())) return std::nullopt;
  const Family f = cx.conn->family;
  const bool anti = catalog.compatibility().canonical_antiparallel(f);
  const auto residual = pairing_residual(cx.frame, cy.frame, f, tol, anti);
  if (!residual) return std::nullopt;
  if (dof_spec(f).has_slide) {
    const auto p = extract_unchecked(cx.frame, cy.frame, f, anti);
    if (std::abs(p.slide_ldu) > slide_limit(*cx.conn, *cy.conn)) return std::nullopt;
  }
  return Candidate{std::llround(*residual * 1e6), x, y};
}

/// Greedy resolution: best residual first, ties by connector order; a
/// single-accept connector joins at most one edge.
inline ConnectivityGraph resolve(std::vector<PartInstance> nodes, const std::vector<WorldConnector>& wc,
                                 std::vector<Candidate> candidates, const Catalog& catalog) {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& p, const Candidate& q) {
    return std::tie(p.residual_key, p.x, p.y) < std::tie(q.residual_key, q.x, q.y);
  });
  std::vector<bool> used(wc.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> accepted;
  for (const auto& c : candidates) {
    const bool multi_x = catalog.multi_accept(*wc[c.x].conn);
    const bool multi_y = catalog.multi_accept(*wc[c.y].conn);
    if ((used[c.x] && !multi_x) || (used[c.y] && !multi_y)) continue;
    used[c.x] = used[c.y] = true;
    accepted.emplace_back(c.x, c.y);
  }
  std::sort(accepted.begin(), accepted.end());
  ConnectivityGraph g;
  g.nodes = std::move(nodes);
  for (const auto& [x, y] : accepted) {
    const auto& cx = wc[x];
    const auto& cy = wc[y];
    const Family f = cx.conn->family;
    ConnEdge e;
    e.a = {g.nodes[cx.node].node_id, cx.conn->index};
    e.b = {g.nodes[cy.node].node_id, cy.conn->index};
    e.family = f;
    e.params = extract_unchecked(cx.frame, cy.frame, f, catalog.compatibility().canonical_antiparallel(f));
    g.edges.push_back(std::move(e));
  }
  return g;
}

}  // namespace detail

/// Builds the connectivity graph of a set of placed parts. Nonrigid
/// instances are dropped. Candidate pairs come from a spatial hash over
/// connector origins.
inline ConnectivityGraph match_connectors(const std::vector<PartInstance>& instances, const Catalog& catalog,
                                          const MatchTolerances& tol = {}) {
  std::vector<PartInstance> nodes;
  for (const auto& inst : instances) {
    if (!inst.nonrigid) nodes.push_back(inst);
  }
  const auto wc = detail::world_connectors(nodes, catalog);

  double max_axle = 0.0;
  for (const auto& c : wc) max_axle = std::max(max_axle, c.conn->axle_length);
  const double cell = std::max(2.0 * tol.position, 4.0);
  using Key = std::tuple<long long, long long, long long>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(std::get<0>(k) * 73856093LL ^ std::get<1>(k) * 19349663LL ^
                                      std::get<2>(k) * 83492791LL);
    }
  };
  auto key_of = [&](const Vec3& p) {
    return Key{static_cast<long long>(std::floor(p.x() / cell)), static_cast<long long>(std::floor(p.y() / cell)),
               static_cast<long long>(std::floor(p.z() / cell))};
  };
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid;
  for (std::size_t i = 0; i < wc.size(); ++i) grid[key_of(wc[i].frame.origin)].push_back(i);

  std::vector<detail::Candidate> candidates;
  for (std::size_t x = 0; x < wc.size(); ++x) {
    const double reach =
        tol.position + 1e-6 + (dof_spec(wc[x].conn->family).has_slide ? (wc[x].conn->axle_length + max_axle) / 2.0 + 1.0 : 0.0);
    const Key lo = key_of(wc[x].frame.origin - Vec3::Constant(reach));
    const Key hi = key_of(wc[x].frame.origin + Vec3::Constant(reach));
    for (auto i = std::get<0>(lo); i <= std::get<0>(hi); ++i) {
      for (auto j = std::get<1>(lo); j <= std::get<1>(hi); ++j) {
        for (auto k = std::get<2>(lo); k <= std::get<2>(hi); ++k) {
          const auto it = grid.find(Key{i, j, k});
          if (it == grid.end()) continue;
          for (std::size_t y : it->second) {
            if (y <= x) continue;
            if (auto c = detail::evaluate_pair(wc, x, y, catalog, tol)) candidates.push_back(*c);
          }
        }
      }
    }
  }
  return detail::resolve(std::move(nodes), wc, std::move(candidates), catalog);
}

// ---------------------------------------------------------------------------
// Build paths

struct PathStep {
  std::string node;   ///< newly introduced node
  std::size_t edge;   ///< index into graph.edges; the other endpoint is already placed
};

struct BuildPath {
  std::string root;
  std::vector<PathStep> steps;

  std::size_t size() const { return root.empty() ? 0 : steps.size() + 1; }
};

/// Checks the spanning-tree-prefix invariants of a path.
inline bool is_valid_path(const ConnectivityGraph& g, const BuildPath& path) {
  if (!g.node_index(path.root)) return false;
  std::vector<std::string> placed{path.root};
  auto is_placed = [&](const std::string& n) { return std::find(placed.begin(), placed.end(), n) != placed.end(); };
  for (const auto& s : path.steps) {
    if (s.edge >= g.edges.size() || is_placed(s.node) || !g.node_index(s.node)) return false;
    const auto& e = g.edges[s.edge];
    const bool forward = e.b.node == s.node && is_placed(e.a.node);
    const bool backward = e.a.node == s.node && is_placed(e.b.node);
    if (!forward && !backward) return false;
    placed.push_back(s.node);
  }
  return true;
}

namespace detail {

struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges;  // (edge index, neighbor)

  explicit Adjacency(const ConnectivityGraph& g) : edges(g.nodes.size()) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].node_id] = i;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto a = index.at(g.edges[e].a.node), b = index.at(g.edges[e].b.node);
      if (a == b) continue;
      edges[a].emplace_back(e, b);
      edges[b].emplace_back(e, a);
    }
  }
};

template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace detail

/// Samples a build path: a uniformly random spanning tree of the root's
/// component (Wilson's loop-erased random walks; parallel edges count as
/// distinct trees), introduced in randomized frontier order and cut off at
/// `max_parts` nodes. Deterministic for a given seed.
inline BuildPath sample_path(const ConnectivityGraph& g, std::optional<std::string> root, std::size_t max_parts,
                             std::uint64_t seed) {
  if (g.nodes.empty()) throw Error("empty-graph", "graph has no nodes");
  std::mt19937_64 rng(seed);
  std::size_t r = 0;
  if (root) {
    const auto i = g.node_index(*root);
    if (!i) throw Error("unknown-root", "root '" + *root + "' is not in the graph");
    r = *i;
  } else {
    r = detail::uniform_index(rng, g.nodes.size());
  }
  BuildPath path;
  path.root = g.nodes[r].node_id;
  if (max_parts <= 1) return path;

  const detail::Adjacency adj(g);
  const std::size_t n = g.nodes.size();

  // Component of the root, in node order.
  std::vector<bool> in_component(n, false);
  std::vector<std::size_t> todo{r};
  in_component[r] = true;
  while (!todo.empty()) {
    const auto u = todo.back();
    todo.pop_back();
    for (const auto& [e, v] : adj.edges[u]) {
      if (!in_component[v]) {
        in_component[v] = true;
        todo.push_back(v);
      }
    }
  }

  // Wilson: tree_edge[u] is the edge from u towards the root.
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<bool> in_tree(n, false);
  std::vector<std::size_t> next_edge(n, kNone), next_node(n, kNone);
  in_tree[r] = true;
  for (std::size_t start = 0; start < n; ++start) {
    if (!in_component[start] || in_tree[start]) continue;
    for (std::size_t u = start; !in_tree[u];) {
      const auto& [e, v] = adj.edges[u][detail::uniform_index(rng, adj.edges[u].size())];
      next_edge[u] = e;
      next_node[u] = v;
      u = v;
    }
    for (std::size_t u = start; !in_tree[u]; u = next_node[u]) in_tree[u] = true;
  }

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> children(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (in_component[u] && u != r) children[next_node[u]].emplace_back(next_edge[u], u);
  }
  std::vector<std::pair<std::size_t, std::size_t>> frontier = children[r];
  while (!frontier.empty() && path.size() < max_parts) {
    const auto pick = detail::uniform_index(rng, frontier.size());
    const auto [e, v] = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    path.steps.push_back({g.nodes[v].node_id, e});
    frontier.insert(frontier.end(), children[v].begin(), children[v].end());
  }
  return path;
}

struct CorpusPath {
  std::size_t graph;  ///< index into the corpus
  BuildPath path;
};

/// Collision geometry used to truncate sampled paths; parts without a mesh
/// are never considered colliding.
inline std::size_t collision_free_prefix(const ConnectivityGraph& g, const BuildPath& path, const Catalog& catalog) {
  IncrementalChecker checker;
  std::size_t count = 0;
  auto place = [&](const std::string& id) {
    const auto& inst = g.node(id);
    const auto* part = catalog.find(inst.part_id);
    if (!part || !part->collision) return true;
    return checker.add({id, part->collision.get(), inst.pose}).empty();
  };
  if (!place(path.root)) return 0;
  ++count;
  for (const auto& s : path.steps) {
    if (!place(s.node)) break;
    ++count;
  }
  return count;
}

/// Draws `count` paths: a graph with probability proportional to the square
/// root of its part count, then sample_path from a random root. With a
/// catalog, each path is cut before its first colliding placement.
inline std::vector<CorpusPath> sample_corpus_paths(const std::vector<ConnectivityGraph>& corpus, std::size_t count,
                                                   std::uint64_t seed, std::size_t max_parts = 100,
                                                   const Catalog* collision_catalog = nullptr) {
  if (corpus.empty()) throw Error("empty-corpus", "empty corpus");
  std::vector<double> weights;
  for (const auto& g : corpus) weights.push_back(std::sqrt(static_cast<double>(g.nodes.size())));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);
  std::vector<CorpusPath> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t gi = pick(rng);
    const std::uint64_t path_seed = rng();
    CorpusPath cp{gi, sample_path(corpus[gi], std::nullopt, max_parts, path_seed)};
    if (collision_catalog) {
      const std::size_t keep = collision_free_prefix(corpus[gi], cp.path, *collision_catalog);
      cp.path.steps.resize(keep > 0 ? keep - 1 : 0);
    }
    out.push_back(std::move(cp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON interchange

inline nlohmann::json pose_to_json(const RigidTransform& t) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  }
  return {{"rot", rot}, {"t", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

inline RigidTransform pose_from_json(const nlohmann::json& j) {
  RigidTransform t;
  const auto& rot = j.at("rot");
  if (rot.size() != 9) throw Error("bad-pose", "pose rotation needs 9 entries");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot.at(static_cast<std::size_t>(3 * r + c)).get<double>();
  }
  const auto& tr = j.at("t");
  t.translation = Vec3(tr.at(0).get<double>(), tr.at(1).get<double>(), tr.at(2).get<double>());
  return t;
}

inline nlohmann::json params_to_json(const QuantizedParams& p, Family f) {
  nlohmann::json j = nlohmann::json::object();
  const DofSpec dof = dof_spec(f);
  if (dof.rotational_dof == 1) j["yaw"] = p.yaw_deg;
  if (dof.has_flip) j["flip"] = p.flip;
  if (dof.has_slide) j["slide"] = p.slide_ldu;
  if (dof.rotational_dof == 3) j["euler"] = p.euler_deg;
  return j;
}

inline QuantizedParams params_from_json(const nlohmann::json& j) {
  QuantizedParams p;
  p.yaw_deg = j.value("yaw", 0);
  p.flip = j.value("flip", false);
  p.slide_ldu = j.value("slide", 0);
  if (j.contains("euler")) p.euler_deg = j.at("euler").get<std::array<int, 3>>();
  return p;
}

inline nlohmann::json instance_to_json(const PartInstance& n) {
  nlohmann::json j{{"id", n.node_id}, {"part", n.part_id}, {"color", n.color}, {"pose", pose_to_json(n.pose)}};
  if (n.nonrigid) j["nonrigid"] = true;
  return j;
}

inline PartInstance instance_from_json(const nlohmann::json& j) {
  PartInstance n;
  n.node_id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  n.part_id = j.at("part").get<std::string>();
  n.color = j.at("color").get<int>();
  n.pose = pose_from_json(j.at("pose"));
  n.nonrigid = j.value("nonrigid", false);
  return n;
}

inline nlohmann::json to_json(const ConnectivityGraph& g) {
  nlohmann::json j{{"nodes", nlohmann::json::array()}, {"edges", nlohmann::json::array()}};
  for (const auto& n : g.nodes) j["nodes"].push_back(instance_to_json(n));
  for (const auto& e : g.edges) {
    j["edges"].push_back({{"a", {e.a.node, e.a.connector}},
                          {"b", {e.b.node, e.b.connector}},
                          {"family", family_name(e.family)},
                          {"params", params_to_json(e.params, e.family)}});
  }
  return j;
}

inline ConnectivityGraph graph_from_json(const nlohmann::json& j) {
  ConnectivityGraph g;
  for (const auto& n : j.at("nodes")) g.nodes.push_back(instance_from_json(n));
  for (const auto& e : j.at("edges")) {
    ConnEdge edge;
    edge.a = {e.at("a").at(0).get<std::string>(), e.at("a").at(1).get<std::string>()};
    edge.b = {e.at("b").at(0).get<std::string>(), e.at("b").at(1).get<std::string>()};
    edge.family = family_from_string(e.at("family").get<std::string>());
    edge.params = params_from_json(e.value("params", nlohmann::json::object()));
    if (!g.node_index(edge.a.node) || !g.node_index(edge.b.node)) {
      throw Error("bad-graph", "edge references a missing node");
    }
    g.edges.push_back(std::move(edge));
  }
  return g;
}

inline nlohmann::json to_json(const BuildPath& p) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : p.steps) steps.push_back({{"node", s.node}, {"edge", s.edge}});
  return {{"root", p.root}, {"steps", steps}};
}

inline BuildPath path_from_json(const nlohmann::json& j) {
  BuildPath p;
  p.root = j.at("root").get<std::string>();
  for (const auto& s : j.at("steps")) p.steps.push_back({s.at("node").get<std::string>(), s.at("edge").get<std::size_t>()});
  return p;
}

}  // namespace brickir

#endif  // BRICKIR_GRAPH_HPP
