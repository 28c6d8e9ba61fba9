#pragma once

#include "thermistor/types.hpp"

#include <array>
#include <filesystem>
#include <istream>
#include <vector>

namespace thermistor {

enum class BoundaryTag { Dirichlet, Neumann, Contact };

char tag_letter(BoundaryTag tag);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Neumann;
  int triangle = -1;  // owning triangle
  Vec2 normal = Vec2::Zero();  // outward unit normal

  double length(const std::vector<Vec2>& nodes) const {
    return (nodes[b] - nodes[a]).norm();
  }
};

/// Conforming 2D triangulation with a tagged boundary. Construct through
/// Mesh::create (or the loaders below), which checks every invariant.
class Mesh {
 public:
  using Triangle = std::array<int, 3>;

  struct EdgeSpec {
    int a;
    int b;
    BoundaryTag tag;
  };

  static Mesh create(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                     const std::vector<EdgeSpec>& edges);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t count_edges(BoundaryTag tag) const;

  double area(std::size_t t) const;
  double total_area() const;
  double perimeter() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> edges_;
};

struct SideTags {
  BoundaryTag left = BoundaryTag::Neumann;
  BoundaryTag right = BoundaryTag::Dirichlet;
  BoundaryTag bottom = BoundaryTag::Contact;
  BoundaryTag top = BoundaryTag::Neumann;
};

Mesh build_unit_square_mesh(int n, const SideTags& tags = {});

Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::istream& in);

/// Degree-of-freedom bookkeeping for V_h (scalar) and E_h (vector) with
/// Dirichlet nodes eliminated.
struct DofMap {
  std::vector<int> scalar_free_nodes;
  std::vector<int> scalar_index;  // node -> free index, -1 on Gamma_D
  std::vector<bool> dirichlet;

  // Contact nodes (on a Contact edge, not on Gamma_D), with edge-averaged
  // frame and lumped boundary weight (half the adjacent contact length).
  std::vector<int> contact_nodes;
  std::vector<Vec2> contact_normal;
  std::vector<Vec2> contact_tangent;
  std::vector<double> contact_weight;

  std::size_t num_scalar() const { return scalar_free_nodes.size(); }
  std::size_t num_vector() const { return 2 * scalar_free_nodes.size(); }

  int vector_index(int node, int component) const {
    const int s = scalar_index[node];
    return s < 0 ? -1 : 2 * s + component;
  }

  /// Full nodal array (zeros on Gamma_D) from free coefficients.
  Vector expand_scalar(const ScalarField& field) const;
  /// Nodal vectors (zeros on Gamma_D) from interleaved free coefficients.
  std::vector<Vec2> expand_vector(const VectorField& field) const;
  /// Free coefficients of a nodal function; Dirichlet values are dropped.
  template <class Fn>
  ScalarField interpolate_scalar(const Mesh& mesh, Fn&& fn) const {
    ScalarField out(num_scalar());
    for (std::size_t i = 0; i < scalar_free_nodes.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = fn(mesh.nodes()[scalar_free_nodes[i]]);
    return out;
  }
  template <class Fn>
  VectorField interpolate_vector(const Mesh& mesh, Fn&& fn) const {
    VectorField out(num_vector());
    for (std::size_t i = 0; i < scalar_free_nodes.size(); ++i) {
      const Vec2 value = fn(mesh.nodes()[scalar_free_nodes[i]]);
      out[2 * static_cast<Eigen::Index>(i)] = value.x();
      out[2 * static_cast<Eigen::Index>(i) + 1] = value.y();
    }
    return out;
  }
};

DofMap build_dof_maps(const Mesh& mesh);

/// Operator norm of v -> v_tau|Gamma_C from (E_h, gradient norm) to
/// L2(Gamma_C; R^2), by power iteration on the stiffness-inverse pencil.
double estimate_trace_norm(const Mesh& mesh, const DofMap& dofs,
                           int max_iter = 200000, double tol = 1e-8);

/// Operator norm of the scalar trace w -> w|(Gamma_N u Gamma_C) from
/// (V_h, gradient norm) to L2. Used by the potential bound.
double estimate_scalar_trace_norm(const Mesh& mesh, const DofMap& dofs,
                                  int max_iter = 200000, double tol = 1e-8);

/// Largest eigenvalue of mass x = lambda stiffness x (stiffness SPD, mass
/// symmetric positive semidefinite). Throws SolverError on non-convergence.
double largest_generalized_eigenvalue(const SparseMatrix& mass,
                                      const SparseMatrix& stiffness,
                                      int max_iter, double tol);

}  // namespace thermistor
