#include "vanp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "vanp/error.hpp"

namespace vanp {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct EdgeUse {
  int cell;
  int local;
};

std::map<EdgeKey, std::vector<EdgeUse>> build_edge_map(std::span<const std::array<int, 3>> cells) {
  std::map<EdgeKey, std::vector<EdgeUse>> edges;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    for (int k = 0; k < 3; ++k) {
      const auto& v = cells[static_cast<std::size_t>(c)];
      edges[edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)])].push_back({c, k});
    }
  }
  return edges;
}

// > 0 when d lies strictly inside the circumcircle of the CCW triangle abc.
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

// splitmix64-based uniform in [0,1): bit-identical on every platform.
class Jitter {
 public:
  explicit Jitter(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

// Reads the next non-empty, comment-stripped line as a token vector.
bool next_record(std::istream& in, int& line_no, std::vector<std::string>& tokens) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(strip_comment(line));
    tokens.clear();
    for (std::string tok; ss >> tok;) tokens.push_back(tok);
    if (!tokens.empty()) return true;
  }
  return false;
}

[[noreturn]] void format_error(const std::filesystem::path& file, int line_no, const std::string& what) {
  throw Error(ErrorKind::FormatError, file.string() + ":" + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(const std::string& tok, const std::filesystem::path& file, int line_no) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, double>) {
      value = std::stod(tok, &used);
    } else {
      value = static_cast<T>(std::stol(tok, &used));
    }
    if (used != tok.size()) format_error(file, line_no, "malformed number '" + tok + "'");
    return value;
  } catch (const std::logic_error&) {
    format_error(file, line_no, "malformed number '" + tok + "'");
  }
}

}  // namespace

double signed_area(const Point& a, const Point& b, const Point& c) noexcept {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

TriangulationMesh::TriangulationMesh(std::vector<Point> points, std::vector<std::array<int, 3>> cells) {
  const int n = static_cast<int>(points.size());
  if (n < 3 || cells.empty()) throw Error(ErrorKind::InvalidMesh, "mesh needs at least 3 nodes and 1 cell");

  nodes_.reserve(points.size());
  for (int i = 0; i < n; ++i) nodes_.push_back({i, points[static_cast<std::size_t>(i)], NodeKind::Standard});
  num_standard_ = n;

  for (auto& v : cells) {
    for (int id : v) {
      if (id < 0 || id >= n) throw Error(ErrorKind::InvalidMesh, "cell references unknown node " + std::to_string(id));
    }
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) throw Error(ErrorKind::InvalidMesh, "cell repeats a vertex");
    const double area = signed_area(points[static_cast<std::size_t>(v[0])], points[static_cast<std::size_t>(v[1])],
                                    points[static_cast<std::size_t>(v[2])]);
    if (area == 0.0) throw Error(ErrorKind::InvalidMesh, "zero-area cell");
    if (area < 0.0) std::swap(v[1], v[2]);
  }

  const auto edges = build_edge_map(cells);
  boundary_flag_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) {
      throw Error(ErrorKind::TopologyError, "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                                                ") is shared by " + std::to_string(uses.size()) + " cells");
    }
    if (uses.size() == 1) {
      boundary_flag_[static_cast<std::size_t>(key.first)] = 1;
      boundary_flag_[static_cast<std::size_t>(key.second)] = 1;
      boundary_edges_.push_back({uses.front().cell, uses.front().local});
    }
  }
  std::sort(boundary_edges_.begin(), boundary_edges_.end());
  for (int i = 0; i < n; ++i) {
    if (boundary_flag_[static_cast<std::size_t>(i)] != 0) boundary_nodes_.push_back(i);
  }

  cells_.reserve(cells.size());
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) cells_.push_back({c, cells[static_cast<std::size_t>(c)], -1});

  // vertex -> cell incidence (CSR)
  incidence_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& cell : cells_) {
    for (int v : cell.vertices) ++incidence_offsets_[static_cast<std::size_t>(v) + 1];
  }
  for (int i = 0; i < n; ++i) {
    incidence_offsets_[static_cast<std::size_t>(i) + 1] += incidence_offsets_[static_cast<std::size_t>(i)];
  }
  incidence_.resize(static_cast<std::size_t>(incidence_offsets_.back()));
  std::vector<int> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (const auto& cell : cells_) {
    for (int v : cell.vertices) incidence_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = cell.id;
  }
  for (int i = 0; i < n; ++i) {
    if (incidence_offsets_[static_cast<std::size_t>(i)] == incidence_offsets_[static_cast<std::size_t>(i) + 1]) {
      throw Error(ErrorKind::InvalidMesh, "node " + std::to_string(i) + " belongs to no cell");
    }
  }

  for (const auto& cell : cells_) {
    const auto p = cell_points(cell.id);
    for (int k = 0; k < 3; ++k) h_ = std::max(h_, (p[static_cast<std::size_t>(k)] - p[static_cast<std::size_t>((k + 1) % 3)]).norm());
  }
}

bool TriangulationMesh::is_boundary(int node_id) const {
  if (node_id < 0 || node_id >= num_standard_) return false;
  return boundary_flag_[static_cast<std::size_t>(node_id)] != 0;
}

std::array<Point, 3> TriangulationMesh::cell_points(int cell_id) const {
  const auto& v = cell(cell_id).vertices;
  return {node(v[0]).x, node(v[1]).x, node(v[2]).x};
}

double TriangulationMesh::cell_area(int cell_id) const {
  const auto p = cell_points(cell_id);
  return signed_area(p[0], p[1], p[2]);
}

Point TriangulationMesh::centroid(int cell_id) const {
  const auto p = cell_points(cell_id);
  return (p[0] + p[1] + p[2]) / 3.0;
}

double TriangulationMesh::domain_area() const {
  double total = 0.0;
  for (const auto& cell : cells_) total += cell_area(cell.id);
  return total;
}

std::span<const int> TriangulationMesh::incident_cells(int standard_node) const {
  if (standard_node < 0 || standard_node >= num_standard_) {
    throw Error(ErrorKind::InvalidArgument, "not a standard node: " + std::to_string(standard_node));
  }
  const auto begin = static_cast<std::size_t>(incidence_offsets_[static_cast<std::size_t>(standard_node)]);
  const auto end = static_cast<std::size_t>(incidence_offsets_[static_cast<std::size_t>(standard_node) + 1]);
  return std::span<const int>(incidence_).subspan(begin, end - begin);
}

std::vector<Point> TriangulationMesh::standard_points() const {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(num_standard_));
  for (int i = 0; i < num_standard_; ++i) pts.push_back(nodes_[static_cast<std::size_t>(i)].x);
  return pts;
}

std::vector<std::array<int, 3>> flip_to_delaunay(std::span<const Point> points, std::vector<std::array<int, 3>> cells) {
  const auto pt = [&](int i) -> const Point& { return points[static_cast<std::size_t>(i)]; };
  for (auto& v : cells) {
    if (signed_area(pt(v[0]), pt(v[1]), pt(v[2])) < 0.0) std::swap(v[1], v[2]);
  }
  // Each sweep flips every violating edge found; the count of sweeps is
  // small for the mildly perturbed meshes produced here.
  for (int sweep = 0; sweep < 1000; ++sweep) {
    bool flipped = false;
    const auto edges = build_edge_map(cells);
    std::vector<char> touched(cells.size(), 0);
    for (const auto& [key, uses] : edges) {
      if (uses.size() != 2) continue;
      const auto [c1, k1] = uses[0];
      const auto [c2, k2] = uses[1];
      if (touched[static_cast<std::size_t>(c1)] || touched[static_cast<std::size_t>(c2)]) continue;
      const auto& t1 = cells[static_cast<std::size_t>(c1)];
      const auto& t2 = cells[static_cast<std::size_t>(c2)];
      const int p = t1[static_cast<std::size_t>(k1)];
      const int q = t1[static_cast<std::size_t>((k1 + 1) % 3)];
      const int r1 = t1[static_cast<std::size_t>((k1 + 2) % 3)];
      const int r2 = t2[static_cast<std::size_t>((k2 + 2) % 3)];
      const double scale = std::pow((pt(p) - pt(q)).norm(), 4);
      if (incircle(pt(p), pt(q), pt(r1), pt(r2)) <= 1e-12 * scale) continue;
      const std::array<int, 3> n1{p, r2, r1};
      const std::array<int, 3> n2{r2, q, r1};
      if (signed_area(pt(n1[0]), pt(n1[1]), pt(n1[2])) <= 0.0 || signed_area(pt(n2[0]), pt(n2[1]), pt(n2[2])) <= 0.0) {
        continue;
      }
      cells[static_cast<std::size_t>(c1)] = n1;
      cells[static_cast<std::size_t>(c2)] = n2;
      touched[static_cast<std::size_t>(c1)] = touched[static_cast<std::size_t>(c2)] = 1;
      flipped = true;
    }
    if (!flipped) return cells;
  }
  throw Error(ErrorKind::InvalidMesh, "Delaunay flipping did not terminate");
}

TriangulationMesh generate_square_mesh(int n, MeshPattern pattern, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "square mesh needs n >= 1");
  const int side = n + 1;
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(side * side));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) points.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * side + i, v10 = v00 + 1, v01 = v00 + side, v11 = v01 + 1;
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  if (pattern == MeshPattern::PerturbedUnstructured) {
    Jitter rng(seed);
    const double max_shift = 0.25 / n;
    for (int j = 1; j < n; ++j) {
      for (int i = 1; i < n; ++i) {
        const double radius = max_shift * rng.uniform();
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        points[static_cast<std::size_t>(j * side + i)] += radius * Point(std::cos(angle), std::sin(angle));
      }
    }
    cells = flip_to_delaunay(points, std::move(cells));
  }
  return TriangulationMesh(std::move(points), std::move(cells));
}

TriangulationMesh generate_disk_mesh(int levels) {
  if (levels < 0) throw Error(ErrorKind::InvalidArgument, "disk mesh needs levels >= 0");
  std::vector<Point> points{Point::Zero()};
  std::vector<char> on_circle{0};
  for (int k = 0; k < 6; ++k) {
    const double angle = k * std::numbers::pi / 3.0;
    points.emplace_back(std::cos(angle), std::sin(angle));
    on_circle.push_back(1);
  }
  std::vector<std::array<int, 3>> cells;
  for (int k = 0; k < 6; ++k) cells.push_back({0, 1 + k, 1 + (k + 1) % 6});

  for (int level = 0; level < levels; ++level) {
    const auto edges = build_edge_map(cells);
    std::map<EdgeKey, int> midpoint;
    for (const auto& [key, uses] : edges) {
      Point m = 0.5 * (points[static_cast<std::size_t>(key.first)] + points[static_cast<std::size_t>(key.second)]);
      const bool boundary = uses.size() == 1;
      if (boundary) m /= m.norm();
      midpoint[key] = static_cast<int>(points.size());
      points.push_back(m);
      on_circle.push_back(boundary ? 1 : 0);
    }
    std::vector<std::array<int, 3>> refined;
    refined.reserve(cells.size() * 4);
    for (const auto& v : cells) {
      const int m01 = midpoint.at(edge_key(v[0], v[1]));
      const int m12 = midpoint.at(edge_key(v[1], v[2]));
      const int m20 = midpoint.at(edge_key(v[2], v[0]));
      refined.push_back({v[0], m01, m20});
      refined.push_back({m01, v[1], m12});
      refined.push_back({m20, m12, v[2]});
      refined.push_back({m01, m12, m20});
    }
    cells = std::move(refined);
  }
  return TriangulationMesh(std::move(points), std::move(cells));
}

TriangulationMesh generate_parallelogram_mesh(double a, double b, double skew_deg, int n) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "parallelogram sides must be positive");
  if (!(skew_deg > 0.0) || !(skew_deg < 90.0)) {
    throw Error(ErrorKind::InvalidArgument, "skew angle must lie in (0, 90) degrees");
  }
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "parallelogram mesh needs n >= 1");
  const double theta = skew_deg * std::numbers::pi / 180.0;
  const Point ex(a, 0.0);
  const Point ey(b * std::cos(theta), b * std::sin(theta));
  const int side = n + 1;
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(side * side));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) points.push_back((static_cast<double>(i) / n) * ex + (static_cast<double>(j) / n) * ey);
  }
  // The short diagonal joins (i+1, j) and (i, j+1) whenever the skew angle is
  // acute, which is always the case here.
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * side + i, v10 = v00 + 1, v01 = v00 + side, v11 = v01 + 1;
      cells.push_back({v00, v10, v01});
      cells.push_back({v10, v11, v01});
    }
  }
  return TriangulationMesh(std::move(points), std::move(cells));
}

TriangulationMesh read_mesh(const std::filesystem::path& path) {
  auto stem = path;
  if (stem.extension() == ".node" || stem.extension() == ".ele") stem.replace_extension();
  auto node_path = stem;
  node_path += ".node";
  auto ele_path = stem;
  ele_path += ".ele";

  std::ifstream node_in(node_path);
  if (!node_in) throw Error(ErrorKind::FormatError, "cannot open " + node_path.string());
  int line_no = 0;
  std::vector<std::string> tok;
  if (!next_record(node_in, line_no, tok) || tok.size() < 2) format_error(node_path, line_no, "missing header");
  const long node_count = parse_number<long>(tok[0], node_path, line_no);
  if (parse_number<long>(tok[1], node_path, line_no) != 2) format_error(node_path, line_no, "dimension must be 2");
  const long attributes = tok.size() > 2 ? parse_number<long>(tok[2], node_path, line_no) : 0;
  const long markers = tok.size() > 3 ? parse_number<long>(tok[3], node_path, line_no) : 0;
  if (node_count < 3) format_error(node_path, line_no, "need at least 3 nodes");
  std::vector<Point> points(static_cast<std::size_t>(node_count));
  std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
  for (long i = 0; i < node_count; ++i) {
    if (!next_record(node_in, line_no, tok)) format_error(node_path, line_no, "unexpected end of file");
    if (static_cast<long>(tok.size()) != 3 + attributes + (markers > 0 ? 1 : 0)) {
      format_error(node_path, line_no, "expected '<id> <x> <y>'");
    }
    const long id = parse_number<long>(tok[0], node_path, line_no);
    if (id < 0 || id >= node_count || seen[static_cast<std::size_t>(id)]) format_error(node_path, line_no, "bad node id");
    seen[static_cast<std::size_t>(id)] = 1;
    points[static_cast<std::size_t>(id)] =
        Point(parse_number<double>(tok[1], node_path, line_no), parse_number<double>(tok[2], node_path, line_no));
  }

  std::ifstream ele_in(ele_path);
  if (!ele_in) throw Error(ErrorKind::FormatError, "cannot open " + ele_path.string());
  line_no = 0;
  if (!next_record(ele_in, line_no, tok) || tok.size() < 2) format_error(ele_path, line_no, "missing header");
  const long cell_count = parse_number<long>(tok[0], ele_path, line_no);
  if (parse_number<long>(tok[1], ele_path, line_no) != 3) format_error(ele_path, line_no, "only 3-node cells supported");
  const long cell_attributes = tok.size() > 2 ? parse_number<long>(tok[2], ele_path, line_no) : 0;
  if (cell_count < 1) format_error(ele_path, line_no, "need at least 1 cell");
  std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(cell_count));
  std::vector<char> cell_seen(static_cast<std::size_t>(cell_count), 0);
  for (long i = 0; i < cell_count; ++i) {
    if (!next_record(ele_in, line_no, tok)) format_error(ele_path, line_no, "unexpected end of file");
    if (static_cast<long>(tok.size()) != 4 + cell_attributes) format_error(ele_path, line_no, "expected '<id> <v1> <v2> <v3>'");
    const long id = parse_number<long>(tok[0], ele_path, line_no);
    if (id < 0 || id >= cell_count || cell_seen[static_cast<std::size_t>(id)]) format_error(ele_path, line_no, "bad cell id");
    cell_seen[static_cast<std::size_t>(id)] = 1;
    for (int k = 0; k < 3; ++k) {
      const long v = parse_number<long>(tok[static_cast<std::size_t>(k) + 1], ele_path, line_no);
      if (v < 0 || v >= node_count) format_error(ele_path, line_no, "vertex id out of range");
      cells[static_cast<std::size_t>(id)][static_cast<std::size_t>(k)] = static_cast<int>(v);
    }
  }
  return TriangulationMesh(std::move(points), std::move(cells));
}

void write_mesh(const TriangulationMesh& mesh, const std::filesystem::path& stem) {
  auto node_path = stem;
  node_path += ".node";
  auto ele_path = stem;
  ele_path += ".ele";
  std::ofstream node_out(node_path);
  std::ofstream ele_out(ele_path);
  if (!node_out || !ele_out) throw Error(ErrorKind::FormatError, "cannot write mesh " + stem.string());
  node_out.precision(17);
  node_out << mesh.num_standard() << " 2 0 0\n";
  for (int i = 0; i < mesh.num_standard(); ++i) {
    node_out << i << ' ' << mesh.node(i).x.x() << ' ' << mesh.node(i).x.y() << '\n';
  }
  ele_out << mesh.num_cells() << " 3 0\n";
  for (const auto& cell : mesh.cells()) {
    ele_out << cell.id << ' ' << cell.vertices[0] << ' ' << cell.vertices[1] << ' ' << cell.vertices[2] << '\n';
  }
}

TriangulationMesh enhance_with_barycenters(const TriangulationMesh& mesh) {
  if (mesh.is_enhanced()) throw Error(ErrorKind::InvalidState, "mesh already carries barycenter nodes");
  TriangulationMesh out = mesh;
  out.nodes_.reserve(out.nodes_.size() + out.cells_.size());
  for (auto& cell : out.cells_) {
    const int id = static_cast<int>(out.nodes_.size());
    out.nodes_.push_back({id, mesh.centroid(cell.id), NodeKind::Barycenter});
    cell.barycenter = id;
  }
  return out;
}

NodalVolume nodal_volume(const TriangulationMesh& mesh, int node_id) {
  if (node_id < 0 || node_id >= mesh.num_nodes()) {
    throw Error(ErrorKind::InvalidArgument, "unknown node id " + std::to_string(node_id));
  }
  NodalVolume volume;
  volume.node_id = node_id;
  if (mesh.node(node_id).kind == NodeKind::Standard) {
    const auto cells = mesh.incident_cells(node_id);
    volume.cells.assign(cells.begin(), cells.end());
  } else {
    volume.cells.push_back(node_id - mesh.num_standard());
  }
  for (int c : volume.cells) volume.measure += mesh.cell_area(c);
  return volume;
}

}  // namespace vanp
