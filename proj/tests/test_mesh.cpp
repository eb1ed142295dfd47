#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "vanp/error.hpp"
#include "vanp/mesh.hpp"

using namespace vanp;

namespace {

double area_sum(const TriangulationMesh& mesh) {
  double a = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) a += mesh.cell_area(c);
  return a;
}

std::filesystem::path temp_stem(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("vanp_mesh_") + name);
}

void write_files(const std::filesystem::path& stem, const std::string& node, const std::string& ele) {
  std::ofstream(stem.string() + ".node") << node;
  std::ofstream(stem.string() + ".ele") << ele;
}

}  // namespace

TEST(SquareMesh, SmallestSplit) {
  const auto mesh = generate_square_mesh(1, MeshPattern::Structured);
  EXPECT_EQ(mesh.num_standard(), 4);
  EXPECT_EQ(mesh.num_cells(), 2);
  EXPECT_EQ(mesh.boundary_nodes().size(), 4u);
}

TEST(SquareMesh, CountsAndDiameter) {
  const auto mesh = generate_square_mesh(2, MeshPattern::Structured);
  EXPECT_EQ(mesh.num_standard(), 9);
  EXPECT_EQ(mesh.num_cells(), 8);
  EXPECT_NEAR(mesh.h(), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(SquareMesh, PerturbedKeepsArea) {
  const auto mesh = generate_square_mesh(4, MeshPattern::PerturbedUnstructured, 7);
  EXPECT_EQ(mesh.num_standard(), 25);
  EXPECT_EQ(mesh.num_cells(), 32);
  EXPECT_NEAR(area_sum(mesh), 1.0, 1e-12);
  for (int c = 0; c < mesh.num_cells(); ++c) EXPECT_GT(mesh.cell_area(c), 0.0);
}

TEST(SquareMesh, PerturbedIsSeeded) {
  const auto a = generate_square_mesh(6, MeshPattern::PerturbedUnstructured, 11);
  const auto b = generate_square_mesh(6, MeshPattern::PerturbedUnstructured, 11);
  const auto c = generate_square_mesh(6, MeshPattern::PerturbedUnstructured, 12);
  bool differs = false;
  for (int i = 0; i < a.num_standard(); ++i) {
    EXPECT_EQ(a.node(i).x, b.node(i).x);
    differs = differs || a.node(i).x != c.node(i).x;
  }
  EXPECT_TRUE(differs);
}

TEST(SquareMesh, RejectsZeroCells) {
  EXPECT_THROW((void)generate_square_mesh(0, MeshPattern::Structured), Error);
}

TEST(DiskMesh, HexagonFan) {
  const auto mesh = generate_disk_mesh(0);
  EXPECT_EQ(mesh.num_standard(), 7);
  EXPECT_EQ(mesh.num_cells(), 6);
}

TEST(DiskMesh, OneRefinement) {
  const auto mesh = generate_disk_mesh(1);
  EXPECT_EQ(mesh.num_standard(), 19);
  EXPECT_EQ(mesh.num_cells(), 24);
}

TEST(DiskMesh, AreaApproachesPi) {
  double previous_deficit = std::numbers::pi;
  for (int level = 0; level <= 3; ++level) {
    const double deficit = std::numbers::pi - area_sum(generate_disk_mesh(level));
    EXPECT_GT(deficit, 0.0);
    EXPECT_LT(deficit, previous_deficit);
    previous_deficit = deficit;
  }
  EXPECT_NEAR(area_sum(generate_disk_mesh(3)), std::numbers::pi, 0.01);
}

TEST(DiskMesh, BoundaryNodesOnCircle) {
  const auto mesh = generate_disk_mesh(2);
  for (int b : mesh.boundary_nodes()) EXPECT_NEAR(mesh.node(b).x.norm(), 1.0, 1e-12);
  for (int i = 0; i < mesh.num_standard(); ++i) {
    if (!mesh.is_boundary(i)) {
      EXPECT_LT(mesh.node(i).x.norm(), 1.0 - 1e-12);
    }
  }
}

TEST(ParallelogramMesh, NearRectangle) {
  EXPECT_NEAR(area_sum(generate_parallelogram_mesh(1.0, 1.0, 89.999, 3)), 1.0, 1e-9);
}

TEST(ParallelogramMesh, SkewedArea) {
  const auto mesh = generate_parallelogram_mesh(200.0, 100.0, 45.0, 2);
  EXPECT_NEAR(area_sum(mesh) / (200.0 * 100.0 * std::sin(std::numbers::pi / 4.0)), 1.0, 1e-6);
  const auto coarse = generate_parallelogram_mesh(200.0, 100.0, 45.0, 1);
  EXPECT_EQ(coarse.num_standard(), 4);
  EXPECT_EQ(coarse.num_cells(), 2);
}

TEST(ParallelogramMesh, RejectsBadAngle) {
  EXPECT_THROW((void)generate_parallelogram_mesh(1.0, 1.0, 90.0, 2), Error);
  EXPECT_THROW((void)generate_parallelogram_mesh(1.0, 1.0, 0.0, 2), Error);
}

TEST(MeshIo, RoundTripMatchesGenerator) {
  const auto stem = temp_stem("unit");
  write_files(stem, "4 2 0 0\n0 0 0\n1 1 0\n2 1 1\n3 0 1\n", "2 3 0\n0 0 1 2\n1 0 2 3\n");
  const auto mesh = read_mesh(stem.string() + ".node");
  const auto reference = generate_square_mesh(1, MeshPattern::Structured);
  ASSERT_EQ(mesh.num_standard(), reference.num_standard());
  ASSERT_EQ(mesh.num_cells(), reference.num_cells());
  EXPECT_NEAR(area_sum(mesh), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(mesh.h(), reference.h());

  const auto copy = temp_stem("copy");
  write_mesh(reference, copy);
  const auto back = read_mesh(copy);
  for (int i = 0; i < reference.num_standard(); ++i) EXPECT_EQ(back.node(i).x, reference.node(i).x);
  for (int c = 0; c < reference.num_cells(); ++c) EXPECT_EQ(back.cell(c).vertices, reference.cell(c).vertices);
}

TEST(MeshIo, ClockwiseCellIsReoriented) {
  const auto stem = temp_stem("cw");
  write_files(stem, "3 2 0 0\n0 0 0\n1 1 0\n2 0 1\n", "1 3 0\n0 0 2 1\n");
  const auto mesh = read_mesh(stem);
  EXPECT_GT(signed_area(mesh.node(mesh.cell(0).vertices[0]).x, mesh.node(mesh.cell(0).vertices[1]).x,
                        mesh.node(mesh.cell(0).vertices[2]).x),
            0.0);
}

TEST(MeshIo, EdgeInThreeCellsIsRejected) {
  const auto stem = temp_stem("fin");
  write_files(stem, "5 2 0 0\n0 0 0\n1 1 0\n2 0 1\n3 1 1\n4 0.5 -1\n",
              "3 3 0\n0 0 1 2\n1 0 1 3\n2 0 1 4\n");
  try {
    (void)read_mesh(stem);
    FAIL() << "expected topology error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TopologyError);
  }
}

TEST(MeshIo, MissingFileIsFormatError) {
  try {
    (void)read_mesh(temp_stem("does_not_exist"));
    FAIL() << "expected format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  }
}

TEST(Enhance, AddsOneBarycenterPerCell) {
  EXPECT_EQ(enhance_with_barycenters(generate_square_mesh(1, MeshPattern::Structured)).num_nodes(), 6);
  EXPECT_EQ(enhance_with_barycenters(generate_disk_mesh(0)).num_nodes(), 13);
}

TEST(Enhance, BarycenterIsVertexMean) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(3, MeshPattern::PerturbedUnstructured, 3));
  for (const auto& cell : mesh.cells()) {
    const auto pts = mesh.cell_points(cell.id);
    const Point mean = (pts[0] + pts[1] + pts[2]) / 3.0;
    EXPECT_EQ(cell.barycenter, mesh.num_standard() + cell.id);
    EXPECT_LT((mesh.node(cell.barycenter).x - mean).norm(), 1e-14);
    EXPECT_EQ(mesh.node(cell.barycenter).kind, NodeKind::Barycenter);
  }
  EXPECT_THROW((void)enhance_with_barycenters(mesh), Error);
}

TEST(NodalVolume, SquareCorners) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(1, MeshPattern::Structured));
  int on_diagonal = -1, off_diagonal = -1;
  for (int i = 0; i < 4; ++i) {
    const Point& x = mesh.node(i).x;
    if (std::abs(x.x() - x.y()) < 1e-12) on_diagonal = i;
    else off_diagonal = i;
  }
  const auto a = nodal_volume(mesh, on_diagonal);
  EXPECT_EQ(a.cells.size(), 2u);
  EXPECT_NEAR(a.measure, 1.0, 1e-15);
  const auto b = nodal_volume(mesh, off_diagonal);
  EXPECT_EQ(b.cells.size(), 1u);
  EXPECT_NEAR(b.measure, 0.5, 1e-15);
  for (int id = mesh.num_standard(); id < mesh.num_nodes(); ++id) EXPECT_EQ(nodal_volume(mesh, id).cells.size(), 1u);
}

TEST(Delaunay, FlipRestoresEmptyCircumcircles) {
  // Two cells sharing the long diagonal of a thin rhombus: the flip must
  // switch to the short diagonal.
  const std::vector<Point> pts{Point(0, 0), Point(1, -0.2), Point(2, 0), Point(1, 0.2)};
  const auto cells = flip_to_delaunay(pts, {{0, 1, 2}, {0, 2, 3}});
  ASSERT_EQ(cells.size(), 2u);
  for (const auto& c : cells) {
    const bool has_short = std::count(c.begin(), c.end(), 0) + std::count(c.begin(), c.end(), 2) == 1;
    EXPECT_TRUE(has_short);
    EXPECT_GT(signed_area(pts[c[0]], pts[c[1]], pts[c[2]]), 0.0);
  }
}
