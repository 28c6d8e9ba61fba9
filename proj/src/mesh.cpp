#include "thermistor/mesh.hpp"

#include "thermistor/fe.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace thermistor {

char tag_letter(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Dirichlet:
      return 'D';
    case BoundaryTag::Neumann:
      return 'N';
    case BoundaryTag::Contact:
      return 'C';
  }
  return '?';
}

namespace {

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

Mesh Mesh::create(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                  const std::vector<EdgeSpec>& edges) {
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw MeshError("mesh has no nodes");
  if (triangles.empty()) throw MeshError("mesh has no triangles");

  // undirected edge -> (owning triangle, use count)
  std::map<std::pair<int, int>, std::pair<int, int>> owners;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (int v : tri)
      if (v < 0 || v >= n)
        throw MeshError("triangle " + std::to_string(t) + ": node index out of range");
    const Vec2 d1 = nodes[tri[1]] - nodes[tri[0]];
    const Vec2 d2 = nodes[tri[2]] - nodes[tri[0]];
    if (d1.x() * d2.y() - d1.y() * d2.x() <= 0.0)
      throw MeshError("inconsistent orientation: triangle " + std::to_string(t) +
                      " has non-positive signed area");
    for (int i = 0; i < 3; ++i) {
      auto& slot = owners[edge_key(tri[i], tri[(i + 1) % 3])];
      if (slot.second == 0) slot.first = static_cast<int>(t);
      ++slot.second;
    }
  }

  Mesh mesh;
  std::map<std::pair<int, int>, std::size_t> tagged;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& spec = edges[k];
    const std::string where = "edge " + std::to_string(k);
    if (spec.a < 0 || spec.a >= n || spec.b < 0 || spec.b >= n)
      throw MeshError(where + ": node index out of range");
    const auto key = edge_key(spec.a, spec.b);
    const auto it = owners.find(key);
    if (it == owners.end() || it->second.second != 1)
      throw MeshError(where + ": not a boundary edge of the triangulation");
    if (!tagged.emplace(key, k).second)
      throw MeshError(where + ": boundary edge tagged more than once");

    BoundaryEdge edge;
    edge.a = spec.a;
    edge.b = spec.b;
    edge.tag = spec.tag;
    edge.triangle = it->second.first;
    const Vec2 d = nodes[spec.b] - nodes[spec.a];
    Vec2 normal(d.y(), -d.x());
    normal.normalize();
    // point away from the opposite vertex of the owning triangle
    const auto& tri = triangles[static_cast<std::size_t>(edge.triangle)];
    int opposite = tri[0];
    for (int v : tri)
      if (v != spec.a && v != spec.b) opposite = v;
    if (normal.dot(nodes[opposite] - nodes[spec.a]) > 0.0) normal = -normal;
    edge.normal = normal;
    mesh.edges_.push_back(edge);
  }

  for (const auto& [key, owner] : owners)
    if (owner.second == 1 && !tagged.count(key))
      throw MeshError("boundary edge (" + std::to_string(key.first) + ", " +
                      std::to_string(key.second) + ") has no tag");

  const bool has_dirichlet = std::any_of(mesh.edges_.begin(), mesh.edges_.end(), [](const auto& e) {
    return e.tag == BoundaryTag::Dirichlet;
  });
  if (!has_dirichlet) throw MeshError("empty Dirichlet part");

  mesh.nodes_ = std::move(nodes);
  mesh.triangles_ = std::move(triangles);
  return mesh;
}

std::size_t Mesh::count_edges(BoundaryTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [tag](const auto& e) { return e.tag == tag; }));
}

double Mesh::area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Vec2 d1 = nodes_[tri[1]] - nodes_[tri[0]];
  const Vec2 d2 = nodes_[tri[2]] - nodes_[tri[0]];
  return 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += area(t);
  return sum;
}

double Mesh::perimeter() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.length(nodes_);
  return sum;
}

Mesh build_unit_square_mesh(int n, const SideTags& tags) {
  if (n < 1) throw MeshError("unit square mesh needs n >= 1");
  const int stride = n + 1;
  auto id = [stride](int i, int j) { return j * stride + i; };

  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(stride * stride));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) nodes.emplace_back(double(i) / n, double(j) / n);

  std::vector<Mesh::Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }

  std::vector<Mesh::EdgeSpec> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back({id(i, 0), id(i + 1, 0), tags.bottom});
    edges.push_back({id(n, i), id(n, i + 1), tags.right});
    edges.push_back({id(i + 1, n), id(i, n), tags.top});
    edges.push_back({id(0, i + 1), id(0, i), tags.left});
  }
  return Mesh::create(std::move(nodes), std::move(triangles), edges);
}

namespace {

// Token stream over a '#'-commented text file that remembers line numbers.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next_line(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

BoundaryTag parse_tag(const std::string& s, int line) {
  if (s == "D") return BoundaryTag::Dirichlet;
  if (s == "N") return BoundaryTag::Neumann;
  if (s == "C") return BoundaryTag::Contact;
  throw MeshError("line " + std::to_string(line) + ": unknown boundary tag '" + s + "'");
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  TokenReader reader(in);
  std::istringstream line;
  if (!reader.next_line(line)) throw MeshError("empty mesh file");

  std::string kn, kt, ke;
  long nn = -1, nt = -1, ne = -1;
  line >> kn >> nn >> kt >> nt >> ke >> ne;
  if (!line || kn != "nodes" || kt != "triangles" || ke != "edges" || nn < 0 || nt < 0 || ne < 0)
    throw MeshError("line " + std::to_string(reader.line()) +
                    ": expected header 'nodes <N> triangles <T> edges <E>'");

  auto need_line = [&](const std::string& what) {
    if (!reader.next_line(line))
      throw MeshError("unexpected end of file while reading " + what);
  };

  std::vector<Vec2> nodes;
  for (long i = 0; i < nn; ++i) {
    need_line("node " + std::to_string(i));
    double x, y;
    if (!(line >> x >> y))
      throw MeshError("line " + std::to_string(reader.line()) + ": bad coordinates for node " +
                      std::to_string(i));
    nodes.emplace_back(x, y);
  }

  std::vector<Mesh::Triangle> triangles;
  for (long t = 0; t < nt; ++t) {
    need_line("triangle " + std::to_string(t));
    Mesh::Triangle tri;
    if (!(line >> tri[0] >> tri[1] >> tri[2]))
      throw MeshError("line " + std::to_string(reader.line()) + ": bad triangle " +
                      std::to_string(t));
    for (int v : tri)
      if (v < 0 || v >= nn)
        throw MeshError("line " + std::to_string(reader.line()) + ": triangle " +
                        std::to_string(t) + " node index out of range");
    triangles.push_back(tri);
  }

  std::vector<Mesh::EdgeSpec> edges;
  for (long k = 0; k < ne; ++k) {
    need_line("edge " + std::to_string(k));
    int a, b;
    std::string tag;
    if (!(line >> a >> b >> tag))
      throw MeshError("line " + std::to_string(reader.line()) + ": bad edge " + std::to_string(k));
    if (a < 0 || a >= nn || b < 0 || b >= nn)
      throw MeshError("line " + std::to_string(reader.line()) + ": edge " + std::to_string(k) +
                      " node index out of range");
    edges.push_back({a, b, parse_tag(tag, reader.line())});
  }

  return Mesh::create(std::move(nodes), std::move(triangles), edges);
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return parse_mesh(in);
}

Vector DofMap::expand_scalar(const ScalarField& field) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(scalar_index.size()));
  for (std::size_t i = 0; i < scalar_free_nodes.size(); ++i)
    out[scalar_free_nodes[i]] = field[static_cast<Eigen::Index>(i)];
  return out;
}

std::vector<Vec2> DofMap::expand_vector(const VectorField& field) const {
  std::vector<Vec2> out(scalar_index.size(), Vec2::Zero());
  for (std::size_t i = 0; i < scalar_free_nodes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[static_cast<std::size_t>(scalar_free_nodes[i])] = Vec2(field[2 * k], field[2 * k + 1]);
  }
  return out;
}

DofMap build_dof_maps(const Mesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  DofMap dofs;
  dofs.dirichlet.assign(n, false);
  for (const auto& e : mesh.boundary_edges())
    if (e.tag == BoundaryTag::Dirichlet) dofs.dirichlet[e.a] = dofs.dirichlet[e.b] = true;

  dofs.scalar_index.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v)
    if (!dofs.dirichlet[v]) {
      dofs.scalar_index[v] = static_cast<int>(dofs.scalar_free_nodes.size());
      dofs.scalar_free_nodes.push_back(static_cast<int>(v));
    }

  std::vector<Vec2> normal_sum(n, Vec2::Zero());
  std::vector<double> weight(n, 0.0);
  std::vector<bool> on_contact(n, false);
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != BoundaryTag::Contact) continue;
    const double half = 0.5 * e.length(mesh.nodes());
    for (int v : {e.a, e.b}) {
      on_contact[v] = true;
      normal_sum[v] += e.normal;
      weight[v] += half;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!on_contact[v] || dofs.dirichlet[v]) continue;
    const Vec2 nu = normal_sum[v].normalized();
    dofs.contact_nodes.push_back(static_cast<int>(v));
    dofs.contact_normal.push_back(nu);
    dofs.contact_tangent.emplace_back(-nu.y(), nu.x());
    dofs.contact_weight.push_back(weight[v]);
  }
  return dofs;
}

namespace {

SparseMatrix vector_stiffness(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double kab = e.area * e.grad[a].dot(e.grad[b]);
        for (int c = 0; c < 2; ++c) {
          const int r = dofs.vector_index(e.nodes[a], c);
          const int s = dofs.vector_index(e.nodes[b], c);
          if (r >= 0 && s >= 0) trip.emplace_back(r, s, kab);
        }
      }
  }
  const auto n = static_cast<Eigen::Index>(dofs.num_vector());
  SparseMatrix k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SparseMatrix scalar_stiffness(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int r = dofs.scalar_index[e.nodes[a]];
        const int s = dofs.scalar_index[e.nodes[b]];
        if (r >= 0 && s >= 0) trip.emplace_back(r, s, e.area * e.grad[a].dot(e.grad[b]));
      }
  }
  const auto n = static_cast<Eigen::Index>(dofs.num_scalar());
  SparseMatrix k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

}  // namespace

double largest_generalized_eigenvalue(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                      int max_iter, double tol) {
  using ColMatrix = Eigen::SparseMatrix<double>;
  const ColMatrix k = stiffness;
  Eigen::SimplicialLDLT<ColMatrix> chol(k);
  if (chol.info() != Eigen::Success) throw SolverError("stiffness factorization failed");

  Vector x = Vector::Ones(stiffness.rows());
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector mx = mass * x;
    if (mx.norm() == 0.0) throw SolverError("power iteration: start vector in the null space");
    x = chol.solve(mx);
    const Vector kx = stiffness * x;
    const double knorm2 = x.dot(kx);
    x /= std::sqrt(knorm2);
    const Vector kxn = kx / std::sqrt(knorm2);
    lambda = x.dot(mass * x);
    const double residual = (mass * x - lambda * kxn).norm();
    if (residual <= tol * lambda * kxn.norm()) return lambda;
  }
  throw SolverError("power iteration did not converge after " + std::to_string(max_iter) +
                    " iterations (last eigenvalue " + std::to_string(lambda) + ")");
}

double estimate_trace_norm(const Mesh& mesh, const DofMap& dofs, int max_iter, double tol) {
  if (mesh.count_edges(BoundaryTag::Contact) == 0)
    throw MeshError("trace norm needs a nonempty contact boundary");

  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != BoundaryTag::Contact) continue;
    const double len = e.length(mesh.nodes());
    const Vec2 tau(-e.normal.y(), e.normal.x());
    const Mat2 proj = tau * tau.transpose();
    const std::array<int, 2> v{e.a, e.b};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double m = len * (a == b ? 1.0 / 3.0 : 1.0 / 6.0);
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const int r = dofs.vector_index(v[a], c);
            const int s = dofs.vector_index(v[b], d);
            if (r >= 0 && s >= 0) trip.emplace_back(r, s, m * proj(c, d));
          }
      }
  }
  const auto n = static_cast<Eigen::Index>(dofs.num_vector());
  SparseMatrix mass(n, n);
  mass.setFromTriplets(trip.begin(), trip.end());
  return std::sqrt(
      largest_generalized_eigenvalue(mass, vector_stiffness(mesh, dofs), max_iter, tol));
}

double estimate_scalar_trace_norm(const Mesh& mesh, const DofMap& dofs, int max_iter,
                                  double tol) {
  if (mesh.count_edges(BoundaryTag::Neumann) + mesh.count_edges(BoundaryTag::Contact) == 0) return 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag == BoundaryTag::Dirichlet) continue;
    const double len = e.length(mesh.nodes());
    const std::array<int, 2> v{e.a, e.b};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const int r = dofs.scalar_index[v[a]];
        const int s = dofs.scalar_index[v[b]];
        if (r >= 0 && s >= 0) trip.emplace_back(r, s, len * (a == b ? 1.0 / 3.0 : 1.0 / 6.0));
      }
  }
  if (trip.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(dofs.num_scalar());
  SparseMatrix mass(n, n);
  mass.setFromTriplets(trip.begin(), trip.end());
  return std::sqrt(
      largest_generalized_eigenvalue(mass, scalar_stiffness(mesh, dofs), max_iter, tol));
}

}  // namespace thermistor
