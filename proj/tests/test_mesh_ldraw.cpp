#include <map>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace brickir;
using namespace brickir::ldraw;

namespace {

SourceLoader loader(const std::map<std::string, std::string>& files) {
  return [files](std::string_view name) -> std::optional<std::string> {
    if (auto it = files.find(std::string(name)); it != files.end()) return it->second;
    return std::nullopt;
  };
}

bool is_stud(std::string_view n) { return n == "stud.dat"; }

// Unit cube from six quads, outward winding.
const char* kCubeQuads =
    "0 cube\n"
    "4 16 0 0 0 0 1 0 1 1 0 1 0 0\n"
    "4 16 0 0 1 1 0 1 1 1 1 0 1 1\n"
    "4 16 0 0 0 1 0 0 1 0 1 0 0 1\n"
    "4 16 0 1 0 0 1 1 1 1 1 1 1 0\n"
    "4 16 0 0 0 0 0 1 0 1 1 0 1 0\n"
    "4 16 1 0 0 1 1 0 1 1 1 1 0 1\n";

}  // namespace

// ---------------------------------------------------------------------------
// Meshes

TEST(Mesh, BoxIsClosedWithPositiveVolume) {
  const auto m = make_box(Vec3(0, 0, 0), Vec3(20, 24, 40));
  EXPECT_TRUE(is_closed(m));
  EXPECT_NEAR(signed_volume(m), 20.0 * 24 * 40, 1e-9);
}

TEST(Mesh, CylinderAndTubeAreOutwardClosed) {
  const auto c = make_cylinder(6.0, 0.0, 4.0, 16);
  EXPECT_TRUE(is_closed(c));
  const double polygon = 0.5 * 16 * 36.0 * std::sin(2 * std::numbers::pi / 16);
  EXPECT_NEAR(signed_volume(c), polygon * 4.0, 1e-9);
  const auto t = make_tube(4.0, 6.0, 0.0, 10.0, 16);
  EXPECT_TRUE(is_closed(t));
  const double ring = 0.5 * 16 * (36.0 - 16.0) * std::sin(2 * std::numbers::pi / 16);
  EXPECT_NEAR(signed_volume(t), ring * 10.0, 1e-9);
}

TEST(Mesh, WeldMergesCoincidentVertices) {
  TriMesh m;
  m.add_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  m.add_triangle(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0));
  EXPECT_EQ(m.vertices.size(), 6u);
  EXPECT_EQ(weld(m).vertices.size(), 4u);
}

TEST(Mesh, TriFormatRoundTrip) {
  const auto m = make_box(Vec3(-1.5, 0, 0), Vec3(1, 2.25, 3));
  std::stringstream ss;
  write_tri(ss, m);
  const auto back = read_tri(ss);
  ASSERT_EQ(back.vertices.size(), m.vertices.size());
  ASSERT_EQ(back.triangles, m.triangles);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_EQ(back.vertices[i], m.vertices[i]);
}

TEST(Mesh, TriFormatRejectsBadIndex) {
  std::stringstream ss("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 7\n");
  try {
    read_tri(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), "tri");
    EXPECT_EQ(e.line(), 4u);
  }
}

// ---------------------------------------------------------------------------
// Structure parsing

TEST(ParseStructure, SingleLine) {
  const auto r = parse_structure("1 4 0 -24 0 1 0 0 0 1 0 0 0 1 3001.dat\n");
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& i = r.instances[0];
  EXPECT_EQ(i.color, 4);
  EXPECT_EQ(i.part_id, "3001.dat");
  EXPECT_EQ(i.pose.translation, Vec3(0, -24, 0));
  EXPECT_EQ(i.pose.rotation, Mat3::Identity());
  EXPECT_FALSE(i.nonrigid);
  EXPECT_EQ(i.line, 1u);
}

TEST(ParseStructure, EmptyFile) {
  EXPECT_TRUE(parse_structure("").instances.empty());
  EXPECT_TRUE(parse_structure("0 just a comment\n\n").instances.empty());
}

TEST(ParseStructure, MpdFlattensWithManualComposition) {
  const std::string doc =
      "0 FILE main.ldr\n"
      "1 16 10 -8 30 0 0 1 0 1 0 -1 0 0 sub.ldr\n"
      "0 NOFILE\n"
      "0 FILE sub.ldr\n"
      "1 4 20 0 -10 1 0 0 0 1 0 0 0 1 3023.dat\n"
      "0 NOFILE\n";
  const auto r = parse_structure(doc);
  ASSERT_EQ(r.instances.size(), 1u);
  Mat3 r2;
  r2 << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  const Vec3 t2(10, -8, 30), t1(20, 0, -10);
  EXPECT_LE((r.instances[0].pose.translation - (r2 * t1 + t2)).norm(), 1e-12);
  EXPECT_LE((r.instances[0].pose.rotation - r2).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(r.instances[0].color, 4);
  EXPECT_EQ(r.instances[0].line, 2u);
}

TEST(ParseStructure, ColorSixteenInherits) {
  const std::string doc =
      "0 FILE main.ldr\n"
      "1 14 0 0 0 1 0 0 0 1 0 0 0 1 sub.ldr\n"
      "0 FILE sub.ldr\n"
      "1 16 0 0 0 1 0 0 0 1 0 0 0 1 3024.dat\n";
  const auto r = parse_structure(doc);
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.instances[0].color, 14);
}

TEST(ParseStructure, ShortTypeOneLineIsParseError) {
  const std::string doc = "1 4 0 0 0 1 0 0 0 1 0 0 0 1 3001.dat\n1 4 0 0 0 1 0 0 3001.dat\n";
  try {
    parse_structure(doc);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.code(), "parse");
  }
  const auto lenient = parse_structure(doc, {}, ParseOptions{false});
  EXPECT_EQ(lenient.instances.size(), 1u);
  EXPECT_EQ(lenient.warnings.size(), 1u);
}

TEST(ParseStructure, UnresolvableSubfileNamesIt) {
  const auto known = [](std::string_view n) { return n == "3001.dat"; };
  try {
    parse_structure("1 4 0 0 0 1 0 0 0 1 0 0 0 1 9999.dat\n", known);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), "unresolved");
    EXPECT_NE(std::string(e.what()).find("9999.dat"), std::string::npos);
  }
}

TEST(ParseStructure, ScaledAndMirroredMatricesAreNonrigid) {
  const auto r = parse_structure(
      "1 4 0 0 0 2 0 0 0 1 0 0 0 1 3001.dat\n"
      "1 4 0 0 0 -1 0 0 0 1 0 0 0 1 3001.dat\n"
      "1 4 0 0 0 1 0 0 0 1 0 0 0 1 3001.dat\n");
  ASSERT_EQ(r.instances.size(), 3u);
  EXPECT_TRUE(r.instances[0].nonrigid);
  EXPECT_TRUE(r.instances[1].nonrigid);
  EXPECT_FALSE(r.instances[2].nonrigid);
  EXPECT_EQ(r.rigid_instances().size(), 1u);
}

TEST(ParseStructure, UnknownLineTypeWarns) {
  const auto r = parse_structure("7 what is this\n1 4 0 0 0 1 0 0 0 1 0 0 0 1 3001.dat\n");
  EXPECT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(ParseStructure, RecursiveSubmodelThrows) {
  const std::string doc =
      "0 FILE a.ldr\n1 16 0 0 0 1 0 0 0 1 0 0 0 1 b.ldr\n"
      "0 FILE b.ldr\n1 16 0 0 0 1 0 0 0 1 0 0 0 1 a.ldr\n";
  EXPECT_THROW(parse_structure(doc), ParseError);
}

TEST(ParseStructure, LosslessRoundTrip) {
  std::mt19937_64 rng(11);
  std::vector<PartInstance> in;
  for (int i = 0; i < 50; ++i) {
    PartInstance p;
    p.node_id = std::to_string(i);
    p.part_id = i % 2 ? "3001.dat" : "3023.dat";
    p.color = i % 7;
    p.pose = testing_support::random_rigid(rng);
    p.line = static_cast<std::size_t>(i + 1);
    in.push_back(p);
  }
  const auto out = parse_structure(format_structure(in));
  ASSERT_EQ(out.instances.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out.instances[i].part_id, in[i].part_id);
    EXPECT_EQ(out.instances[i].color, in[i].color);
    EXPECT_LE(max_abs_difference(out.instances[i].pose, in[i].pose), 1e-12);
  }
}

TEST(ParseStructure, FlatteningIsIdempotent) {
  const std::string doc =
      "0 FILE main.ldr\n"
      "1 16 0 -8 0 0 0 1 0 1 0 -1 0 0 sub.ldr\n"
      "1 2 40 0 0 1 0 0 0 1 0 0 0 1 sub.ldr\n"
      "0 FILE sub.ldr\n"
      "1 4 20 0 -10 1 0 0 0 1 0 0 0 1 3023.dat\n"
      "1 16 0 -24 0 1 0 0 0 1 0 0 0 1 3001.dat\n";
  const auto once = parse_structure(doc);
  const auto twice = parse_structure(format_structure(once.instances));
  ASSERT_EQ(once.instances.size(), 4u);
  ASSERT_EQ(twice.instances.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(twice.instances[i].part_id, once.instances[i].part_id);
    EXPECT_EQ(twice.instances[i].color, once.instances[i].color);
    EXPECT_LE(max_abs_difference(twice.instances[i].pose, once.instances[i].pose), 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Part scanning

TEST(ScanPrimitives, DirectStud) {
  const auto refs = scan_primitives("0 part\n1 16 0 -4 0 1 0 0 0 1 0 0 0 1 stud.dat\n", loader({}), is_stud);
  ASSERT_EQ(refs.size(), 1u);
  EXPECT_EQ(refs[0].primitive_name, "stud.dat");
  EXPECT_EQ(refs[0].accumulated_transform.translation, Vec3(0, -4, 0));
}

TEST(ScanPrimitives, NoConnectors) {
  EXPECT_TRUE(scan_primitives(kCubeQuads, loader({}), is_stud).empty());
}

TEST(ScanPrimitives, NestedSubpartPlacedTwice) {
  const auto load = loader({{"s/pair.dat", "1 16 -10 0 0 1 0 0 0 1 0 0 0 1 stud.dat\n1 16 10 0 0 1 0 0 0 1 0 0 0 1 stud.dat\n"}});
  const auto refs = scan_primitives(
      "1 16 0 0 -10 1 0 0 0 1 0 0 0 1 s\\pair.dat\n1 16 0 0 10 0 0 1 0 1 0 -1 0 0 s/pair.dat\n", load, is_stud);
  ASSERT_EQ(refs.size(), 4u);
  EXPECT_LE((refs[0].accumulated_transform.translation - Vec3(-10, 0, -10)).norm(), 1e-12);
  EXPECT_LE((refs[2].accumulated_transform.translation - Vec3(0, 0, 20)).norm(), 1e-12);
}

TEST(ScanPrimitives, ScaledReferenceIsRejected) {
  std::vector<PrimitiveRef> rejected;
  const auto refs = scan_primitives("1 16 0 0 0 2 0 0 0 1 0 0 0 1 stud.dat\n1 16 0 0 0 -1 0 0 0 1 0 0 0 1 stud.dat\n",
                                    loader({}), is_stud, &rejected);
  EXPECT_TRUE(refs.empty());
  EXPECT_EQ(rejected.size(), 2u);
}

TEST(ScanPrimitives, RecursiveDefinitionThrows) {
  const auto load = loader({{"a.dat", "1 16 0 0 0 1 0 0 0 1 0 0 0 1 b.dat\n"},
                            {"b.dat", "1 16 0 0 0 1 0 0 0 1 0 0 0 1 a.dat\n"}});
  try {
    scan_primitives(*load("a.dat"), load, is_stud, nullptr, "a.dat");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), "recursive");
    EXPECT_NE(std::string(e.what()).find("recursive part definition"), std::string::npos);
  }
}

TEST(ScanPrimitives, DepthLimit) {
  std::map<std::string, std::string> files;
  for (int i = 0; i < 70; ++i) {
    files["p" + std::to_string(i) + ".dat"] = "1 16 0 0 0 1 0 0 0 1 0 0 0 1 p" + std::to_string(i + 1) + ".dat\n";
  }
  const auto load = loader(files);
  try {
    scan_primitives(files["p0.dat"], load, is_stud);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), "depth");
  }
}

TEST(ExtractMesh, QuadsBecomeClosedTriangleMesh) {
  const auto m = extract_mesh(kCubeQuads, loader({}));
  EXPECT_EQ(m.triangles.size(), 12u);
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_TRUE(is_closed(m));
  EXPECT_NEAR(signed_volume(m), 1.0, 1e-12);
}

TEST(ExtractMesh, MirroredReferenceKeepsOutwardWinding) {
  const auto load = loader({{"cube.dat", kCubeQuads}});
  const auto m = extract_mesh("1 16 0 0 0 -20 0 0 0 20 0 0 0 20 cube.dat\n", load);
  EXPECT_NEAR(signed_volume(m), 8000.0, 1e-9);
}

TEST(PartDescription, FirstCommentLine) {
  EXPECT_EQ(part_description("0 Brick  2 x 4\n0 Name: 3001.dat\n"), "Brick  2 x 4");
  EXPECT_EQ(part_description("1 16 0 0 0 1 0 0 0 1 0 0 0 1 stud.dat\n"), "");
}
