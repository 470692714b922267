#ifndef BRICKIR_TESTS_SUPPORT_HPP
#define BRICKIR_TESTS_SUPPORT_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "brickir/brickir.hpp"
#include "oracles.hpp"

namespace testing_support {

using namespace brickir;

inline const std::filesystem::path kDataDir = BRICKIR_DATA_DIR;
inline const std::filesystem::path kSamplesDir = BRICKIR_SAMPLES_DIR;

/// The shipped sample catalog, loaded once.
inline const Catalog& catalog() {
  static const Catalog cat = Catalog::load(kDataDir / "catalog.json");
  return cat;
}

struct Generated {
  ConnectivityGraph graph;  ///< exactly the generated tree edges
  BuildPath path;           ///< generation order
};

struct GenOptions {
  std::size_t parts = 10;
  std::set<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  bool quarter_turns = false;  ///< restrict angles to multiples of 90
  std::vector<int> colors{4, 1, 14, 15, 0, 7, 22};
};

inline int random_angle(std::mt19937_64& rng, bool quarter) {
  if (quarter) return 90 * std::uniform_int_distribution<int>(0, 3)(rng);
  return std::uniform_int_distribution<int>(0, 359)(rng);
}

/// Random connection parameters on the quantized grid, canonical for ball.
inline QuantizedParams random_params(std::mt19937_64& rng, Family f, int slide_max, bool quarter) {
  QuantizedParams p;
  const DofSpec dof = dof_spec(f);
  if (f == Family::Ball) {
    p.euler_deg = {random_angle(rng, quarter), random_angle(rng, quarter), random_angle(rng, quarter)};
    p.euler_deg = canonical_euler(p.euler_deg);
    return p;
  }
  if (dof.rotational_dof == 1) p.yaw_deg = random_angle(rng, quarter);
  if (dof.has_flip) p.flip = std::bernoulli_distribution(0.5)(rng);
  if (dof.has_slide) p.slide_ldu = std::uniform_int_distribution<int>(-slide_max, slide_max)(rng);
  return p;
}

/// Grows a random tree structure by attaching random parts at random free
/// connectors with random exact parameters. Poses come from the oracle's
/// angle-axis algebra, not the library's realize_params.
inline Generated generate(std::mt19937_64& rng, const GenOptions& opt, const Catalog& cat = catalog()) {
  struct Option {
    const PartDef* part;
    const AnnotatedConnector* conn;
  };
  std::vector<const PartDef*> parts;
  for (const auto& [id, p] : cat.parts()) parts.push_back(&p);

  Generated g;
  std::set<std::pair<std::string, std::string>> used;
  auto pick_color = [&] { return opt.colors[std::uniform_int_distribution<std::size_t>(0, opt.colors.size() - 1)(rng)]; };

  PartInstance root;
  root.node_id = "0";
  root.part_id = parts[std::uniform_int_distribution<std::size_t>(0, parts.size() - 1)(rng)]->id;
  root.color = pick_color();
  g.graph.nodes.push_back(root);
  g.path.root = "0";

  for (std::size_t attempt = 0; g.graph.nodes.size() < opt.parts && attempt < opt.parts * 50; ++attempt) {
    const auto ti = std::uniform_int_distribution<std::size_t>(0, g.graph.nodes.size() - 1)(rng);
    const PartInstance& target = g.graph.nodes[ti];
    const PartDef& tp = cat.at(target.part_id);
    if (tp.connectors.empty()) continue;
    const auto& tc = tp.connectors[std::uniform_int_distribution<std::size_t>(0, tp.connectors.size() - 1)(rng)];
    if (!opt.families.count(tc.family)) continue;
    if (!cat.multi_accept(tc) && used.count({target.node_id, tc.index})) continue;
    std::vector<Option> options;
    for (const auto* p : parts) {
      for (const auto& c : p->connectors) {
        if (cat.compatibility().compatible(tc.subtype_ref(), c.subtype_ref())) options.push_back({p, &c});
      }
    }
    if (options.empty()) continue;
    const Option o = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    const bool anti = cat.compatibility().canonical_antiparallel(tc.family);
    const QuantizedParams params = random_params(rng, tc.family, slide_limit(tc, *o.conn), opt.quarter_turns);

    PartInstance inst;
    inst.node_id = std::to_string(g.graph.nodes.size());
    inst.part_id = o.part->id;
    inst.color = pick_color();
    inst.pose = oracle::attach_pose(tc.frame.transformed(target.pose), params, tc.family, o.conn->frame, anti);

    ConnEdge e;
    e.a = {target.node_id, tc.index};
    e.b = {inst.node_id, o.conn->index};
    e.family = tc.family;
    e.params = params;
    if (!cat.multi_accept(tc)) used.insert({target.node_id, tc.index});
    if (!cat.multi_accept(*o.conn)) used.insert({inst.node_id, o.conn->index});
    g.path.steps.push_back({inst.node_id, g.graph.edges.size()});
    g.graph.edges.push_back(e);
    g.graph.nodes.push_back(inst);
  }
  return g;
}

/// Uniformly random rotation (via a random unit quaternion) and translation.
inline RigidTransform random_rigid(std::mt19937_64& rng, double extent = 500.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  std::uniform_real_distribution<double> u(-extent, extent);
  return {q.toRotationMatrix(), Vec3(u(rng), u(rng), u(rng))};
}

/// A mesh pair with poses, for collision equivalence checks.
struct MeshCase {
  std::shared_ptr<const CollisionMesh> a, b;
  RigidTransform pose_a, pose_b;
  std::optional<bool> expected;  ///< known ground truth, when constructed
};

inline std::shared_ptr<const CollisionMesh> random_solid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> size(2.0, 20.0);
  const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
  TriMesh m;
  if (kind == 0) {
    const Vec3 h(size(rng), size(rng), size(rng));
    m = make_box(-h, h);
  } else if (kind == 1) {
    const double r = size(rng);
    m = make_cylinder(r, -size(rng), size(rng), std::uniform_int_distribution<int>(6, 20)(rng));
  } else {
    const double r = size(rng);
    m = make_tube(r, r + std::uniform_real_distribution<double>(1.0, 6.0)(rng), -size(rng), size(rng));
  }
  return std::make_shared<const CollisionMesh>(inset_mesh(m, 0.0));
}

/// Two random solids at random poses close enough to overlap about half
/// the time.
inline MeshCase random_mesh_case(std::mt19937_64& rng) {
  MeshCase c;
  c.a = random_solid(rng);
  c.b = random_solid(rng);
  c.pose_a = random_rigid(rng, 100.0);
  RigidTransform offset = random_rigid(rng, 25.0);
  c.pose_b = compose(c.pose_a, offset);
  return c;
}

/// Two boxes with parallel facing faces at signed clearance `gap` (negative
/// means overlap) under a random rigid placement. The second box is spun
/// about the gap axis, which keeps the faces parallel.
inline MeshCase near_touching_case(std::mt19937_64& rng, double gap) {
  std::uniform_real_distribution<double> size(3.0, 12.0);
  MeshCase c;
  const Vec3 ha(size(rng), size(rng), size(rng));
  const double hb = size(rng);
  const double r = std::uniform_real_distribution<double>(1.0, 2.5)(rng);
  c.a = std::make_shared<const CollisionMesh>(inset_mesh(make_box(-ha, ha), 0.0));
  c.b = std::make_shared<const CollisionMesh>(
      inset_mesh(make_box(Vec3(-hb, -r, -r), Vec3(hb, r, r)), 0.0));
  const RigidTransform local{rotation_about(Vec3::UnitX(), std::uniform_real_distribution<double>(0, 360)(rng)),
                             Vec3(ha.x() + hb + gap, 0.0, 0.0)};
  c.pose_a = random_rigid(rng, 100.0);
  c.pose_b = compose(c.pose_a, local);
  c.expected = gap < 0.0;
  return c;
}

/// Max translation and rotation differences of two pose lists after
/// expressing both relative to their first (root) pose.
struct PoseError {
  double translation = 0.0;
  double rotation_deg = 0.0;
};

inline PoseError pose_error(const std::vector<RigidTransform>& a, const std::vector<RigidTransform>& b) {
  PoseError e;
  if (a.size() != b.size() || a.empty()) return {1e300, 1e300};
  const RigidTransform ra = a.front().inverse(), rb = b.front().inverse();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const RigidTransform x = compose(ra, a[i]), y = compose(rb, b[i]);
    e.translation = std::max(e.translation, (x.translation - y.translation).cwiseAbs().maxCoeff());
    e.rotation_deg = std::max(e.rotation_deg, rotation_angle_deg(x.rotation, y.rotation));
  }
  return e;
}

}  // namespace testing_support

#endif  // BRICKIR_TESTS_SUPPORT_HPP
