#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace brickir;
using testing_support::MeshCase;

namespace {

CollisionMesh box(double h, double offset = 0.0) { return inset_mesh(make_box(Vec3::Constant(-h), Vec3::Constant(h)), offset); }

RigidTransform at(double x, double y, double z) { return {Mat3::Identity(), Vec3(x, y, z)}; }

// UV sphere, outward-facing triangles.
TriMesh uv_sphere(double r, int stacks, int slices) {
  TriMesh m;
  const double pi = std::numbers::pi;
  m.vertices.push_back(Vec3(0, r, 0));
  for (int i = 1; i < stacks; ++i) {
    const double phi = pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double th = 2 * pi * j / slices;
      m.vertices.push_back(Vec3(r * std::sin(phi) * std::cos(th), r * std::cos(phi), r * std::sin(phi) * std::sin(th)));
    }
  }
  m.vertices.push_back(Vec3(0, -r, 0));
  const auto bottom = static_cast<std::uint32_t>(m.vertices.size() - 1);
  auto ring = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * slices + (j % slices)); };
  for (int j = 0; j < slices; ++j) m.triangles.push_back({0, ring(1, j + 1), ring(1, j)});
  for (int i = 1; i < stacks - 1; ++i) {
    for (int j = 0; j < slices; ++j) {
      m.triangles.push_back({ring(i, j), ring(i, j + 1), ring(i + 1, j)});
      m.triangles.push_back({ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j)});
    }
  }
  for (int j = 0; j < slices; ++j) m.triangles.push_back({bottom, ring(stacks - 1, j), ring(stacks - 1, j + 1)});
  return m;
}

}  // namespace

TEST(Inset, CubeShrinksByOffset) {
  const auto m = inset_mesh(make_box(Vec3::Constant(-10), Vec3::Constant(10)));
  EXPECT_TRUE(m.closed());
  for (const auto& v : m.vertices()) EXPECT_NEAR(v.cwiseAbs().maxCoeff(), 9.75, 1e-9);
  EXPECT_NEAR(m.bounds().hi.x() - m.bounds().lo.x(), 19.5, 1e-9);
  EXPECT_NEAR(signed_volume(m.mesh()), 19.5 * 19.5 * 19.5, 1e-6);
}

TEST(Inset, ZeroOffsetKeepsVertices) {
  const auto raw = make_box(Vec3(-1, -2, -3), Vec3(4, 5, 6));
  const auto m = inset_mesh(raw, 0.0);
  EXPECT_EQ(m.vertices().size(), raw.vertices.size());
  EXPECT_NEAR(signed_volume(m.mesh()), signed_volume(raw), 1e-9);
}

TEST(Inset, CylinderFacesMoveInward) {
  const auto raw = make_cylinder(6.0, 0.0, 10.0, 16);
  const auto m = inset_mesh(raw);
  // oracle: every face plane of the inset mesh sits 0.25 inside the matching raw face plane
  const auto welded = weld(raw);
  for (std::size_t i = 0; i < m.triangles().size(); ++i) {
    const auto t = m.triangle(i);
    const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    double best = 1e9;
    for (std::size_t j = 0; j < welded.triangles.size(); ++j) {
      const auto& r = welded.triangles[j];
      const Vec3 a = welded.vertices[r[0]], b = welded.vertices[r[1]], c = welded.vertices[r[2]];
      const Vec3 rn = (b - a).cross(c - a).normalized();
      if (rn.dot(n) < 1.0 - 1e-6) continue;
      best = std::min(best, std::abs((a - t[0]).dot(n)));
    }
    EXPECT_NEAR(best, 0.25, 1e-6);
  }
}

TEST(Inset, SphereRadiusShrinks) {
  const auto raw = uv_sphere(10.0, 12, 24);
  ASSERT_TRUE(is_closed(raw));
  ASSERT_GT(signed_volume(raw), 0.0);
  const auto m = inset_mesh(raw);
  double max_r = 0.0;
  for (const auto& v : m.vertices()) max_r = std::max(max_r, v.norm());
  EXPECT_LE(max_r, 10.0 - 0.25 + 1e-6);
  EXPECT_GT(max_r, 10.0 - 0.5);
}

TEST(Inset, Monotone) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 150; ++i) {
    const MeshCase c = testing_support::random_mesh_case(rng);
    bool clear = false;
    for (double d : {0.0, 0.05, 0.1, 0.25}) {
      const bool hit = intersects(inset_mesh(c.a->mesh(), d), c.pose_a, inset_mesh(c.b->mesh(), d), c.pose_b);
      if (clear) EXPECT_FALSE(hit) << i << " at " << d;
      clear = clear || !hit;
    }
  }
}

TEST(Inset, OrientsInsideOutMeshes) {
  auto raw = make_box(Vec3::Constant(-1), Vec3::Constant(1));
  for (auto& t : raw.triangles) std::swap(t[1], t[2]);
  const auto m = inset_mesh(raw, 0.1);
  EXPECT_GT(signed_volume(m.mesh()), 0.0);
  EXPECT_NEAR(m.bounds().hi.x(), 0.9, 1e-9);
}

TEST(Inset, OpenMeshAcceptedAsIs) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const auto c = inset_mesh(m, 0.25);
  EXPECT_FALSE(c.closed());
  EXPECT_EQ(c.triangles().size(), 1u);
}

TEST(Inset, EmptyMeshRejected) {
  try {
    inset_mesh(TriMesh{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty-mesh");
  }
}

TEST(Intersects, IdenticalBoxCollidesWithItself) {
  const auto m = box(5);
  EXPECT_TRUE(intersects(m, at(0, 0, 0), m, at(0, 0, 0)));
}

TEST(Intersects, SeparatedBoxesDoNot) {
  const auto m = box(5);
  EXPECT_FALSE(intersects(m, at(0, 0, 0), m, at(10.5, 0, 0)));
  EXPECT_TRUE(intersects(m, at(0, 0, 0), m, at(9.5, 0, 0)));
}

TEST(Intersects, FaceContactIsNotCollision) {
  const auto m = box(5);
  EXPECT_FALSE(intersects(m, at(0, 0, 0), m, at(10, 0, 0)));
  EXPECT_FALSE(intersects(m, at(0, 0, 0), m, at(10, 3, -2)));
  EXPECT_FALSE(intersects(m, at(0, 0, 0), m, at(10, 10, 10)));
}

TEST(Intersects, NestedClosedSolidsCollide) {
  const auto big = box(10), small = box(1);
  EXPECT_TRUE(intersects(big, at(0, 0, 0), small, at(2, 3, 1)));
  EXPECT_TRUE(intersects(small, at(2, 3, 1), big, at(0, 0, 0)));
}

TEST(Intersects, OpenMeshesSkipContainment) {
  TriMesh tri;
  tri.vertices = {Vec3(-1, 0, -1), Vec3(1, 0, -1), Vec3(0, 0, 1)};
  tri.triangles = {{0, 1, 2}};
  const auto open = inset_mesh(tri, 0.0);
  const auto big = box(10);
  EXPECT_FALSE(intersects(big, at(0, 0, 0), open, at(0, 0, 0)));
}

TEST(Intersects, SymmetricAndMatchesOracle) {
  std::mt19937_64 rng(11);
  int hits = 0;
  for (int i = 0; i < 200; ++i) {
    const MeshCase c = testing_support::random_mesh_case(rng);
    const bool got = intersects(*c.a, c.pose_a, *c.b, c.pose_b);
    EXPECT_EQ(got, intersects(*c.b, c.pose_b, *c.a, c.pose_a)) << i;
    EXPECT_EQ(got, oracle::intersects(*c.a, c.pose_a, *c.b, c.pose_b)) << i;
    hits += got;
  }
  EXPECT_GT(hits, 20);
  EXPECT_LT(hits, 180);
}

TEST(Intersects, NearTouchingMatchesGroundTruth) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> mag(1e-3, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double gap = (i % 2 ? 1.0 : -1.0) * mag(rng);
    const MeshCase c = testing_support::near_touching_case(rng, gap);
    const bool got = intersects(*c.a, c.pose_a, *c.b, c.pose_b);
    EXPECT_EQ(got, *c.expected) << "gap " << gap;
    EXPECT_EQ(got, oracle::intersects(*c.a, c.pose_a, *c.b, c.pose_b)) << "gap " << gap;
  }
}

TEST(Intersects, TightFitStudInTube) {
  const auto stud_raw = make_cylinder(6.0, -4.0, 0.0);
  // 0.5 LDU diametral clearance
  const auto tube_raw = make_tube(6.25, 8.0, -8.0, 0.0);
  EXPECT_FALSE(intersects(inset_mesh(stud_raw), {}, inset_mesh(tube_raw), {}));
  // a slight interference fit only passes thanks to the inset
  const auto snug = make_tube(5.9, 8.0, -8.0, 0.0);
  EXPECT_TRUE(intersects(inset_mesh(stud_raw, 0.0), {}, inset_mesh(snug, 0.0), {}));
  EXPECT_FALSE(intersects(inset_mesh(stud_raw), {}, inset_mesh(snug), {}));
}

TEST(Assembly, EmptyAndSingle) {
  EXPECT_TRUE(check_assembly({}).colliding_pairs.empty());
  EXPECT_FALSE(check_assembly({}).first_offender);
  const auto m = box(4);
  const auto r = check_assembly({{"only", &m, at(0, 0, 0)}});
  EXPECT_TRUE(r.colliding_pairs.empty());
  EXPECT_FALSE(r.first_offender);
}

TEST(Assembly, FindsPlantedPairs) {
  const auto m = std::make_shared<const CollisionMesh>(box(4));
  std::vector<PlacedMesh> placed;
  for (int i = 0; i < 10; ++i) placed.push_back({"n" + std::to_string(i), m.get(), at(10.0 * i, 0, 0)});
  placed[3].pose = at(25, 1, 0);  // overlaps n2
  placed[7].pose = at(82, 0, 2);  // overlaps n8
  const auto r = check_assembly(placed);
  ASSERT_EQ(r.colliding_pairs.size(), 2u);
  EXPECT_EQ(r.colliding_pairs[0], std::make_pair(std::string("n2"), std::string("n3")));
  EXPECT_EQ(r.colliding_pairs[1], std::make_pair(std::string("n7"), std::string("n8")));
  EXPECT_EQ(r.first_offender, 3u);
  const auto j = to_json(r);
  EXPECT_EQ(j["first_offender"], 3);
}

TEST(Assembly, MatchesBruteForce) {
  std::mt19937_64 rng(13);
  std::vector<std::shared_ptr<const CollisionMesh>> meshes;
  std::vector<PlacedMesh> placed;
  for (int i = 0; i < 25; ++i) {
    meshes.push_back(testing_support::random_solid(rng));
    placed.push_back({"p" + std::to_string(i), meshes.back().get(), testing_support::random_rigid(rng, 60.0)});
  }
  std::vector<std::pair<std::string, std::string>> expected;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      if (oracle::intersects(*placed[i].mesh, placed[i].pose, *placed[j].mesh, placed[j].pose)) {
        expected.push_back(std::minmax(placed[i].node_id, placed[j].node_id));
      }
    }
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(check_assembly(placed).colliding_pairs, expected);
}

TEST(Assembly, IncrementalAgreesWithBatch) {
  const auto m = std::make_shared<const CollisionMesh>(box(4));
  IncrementalChecker inc;
  EXPECT_TRUE(inc.add({"a", m.get(), at(0, 0, 0)}).empty());
  EXPECT_TRUE(inc.add({"b", m.get(), at(8, 0, 0)}).empty());
  EXPECT_FALSE(inc.collides({"x", m.get(), at(16, 0, 0)}));
  EXPECT_TRUE(inc.collides({"x", m.get(), at(4, 0, 0)}));
  EXPECT_EQ(inc.size(), 2u);
  EXPECT_EQ(inc.add({"c", m.get(), at(4, 1, 0)}), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(inc.report().first_offender, 2u);
  EXPECT_EQ(inc.report().colliding_pairs.size(), 2u);
}
