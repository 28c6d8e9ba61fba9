#include "thermistor/assembly.hpp"

#include "thermistor/fe.hpp"

#include <iomanip>
#include <vector>

namespace thermistor {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::Index ns(const Discretization& d) { return static_cast<Eigen::Index>(d.dofs.num_scalar()); }
Eigen::Index nv(const Discretization& d) { return static_cast<Eigen::Index>(d.dofs.num_vector()); }

// Scalar element matrix scattered onto free DOFs.
template <class Local>
void scatter_scalar(const DofMap& dofs, const fe::Element& e, Local&& local, Triplets& trip) {
  for (int a = 0; a < 3; ++a) {
    const int r = dofs.scalar_index[e.nodes[a]];
    if (r < 0) continue;
    for (int b = 0; b < 3; ++b) {
      const int s = dofs.scalar_index[e.nodes[b]];
      if (s >= 0) trip.emplace_back(r, s, local(a, b));
    }
  }
}

// Visits every boundary edge with the given tag at each Gauss point:
// fn(edge, point x, basis values {phi_a, phi_b}, weight * length).
template <class Fn>
void for_each_edge_point(const Mesh& mesh, BoundaryTag tag, Fn&& fn) {
  for (const auto& edge : mesh.boundary_edges()) {
    if (edge.tag != tag) continue;
    const Vec2& pa = mesh.nodes()[edge.a];
    const Vec2& pb = mesh.nodes()[edge.b];
    const double len = (pb - pa).norm();
    for (const auto& q : fe::kEdgeGauss2) {
      const Vec2 x = (1.0 - q.s) * pa + q.s * pb;
      fn(edge, x, std::array<double, 2>{1.0 - q.s, q.s}, q.weight * len);
    }
  }
}

// Boundary mass over edges of one tag, weight = coeff(x).
template <class Coeff>
void edge_mass(const Discretization& disc, BoundaryTag tag, Coeff&& coeff, Triplets& trip) {
  for_each_edge_point(disc.mesh, tag, [&](const BoundaryEdge& edge, const Vec2& x,
                                          const std::array<double, 2>& phi, double w) {
    const double c = coeff(x) * w;
    const std::array<int, 2> v{edge.a, edge.b};
    for (int a = 0; a < 2; ++a) {
      const int r = disc.dofs.scalar_index[v[a]];
      if (r < 0) continue;
      for (int b = 0; b < 2; ++b) {
        const int s = disc.dofs.scalar_index[v[b]];
        if (s >= 0) trip.emplace_back(r, s, c * phi[a] * phi[b]);
      }
    }
  });
}

// Edge load: adds integrand(x, nodal values at x) * basis to the free entries.
template <class Integrand>
void edge_load(const Discretization& disc, BoundaryTag tag, Integrand&& integrand, Vector& out) {
  for_each_edge_point(disc.mesh, tag, [&](const BoundaryEdge& edge, const Vec2& x,
                                          const std::array<double, 2>& phi, double w) {
    const double value = integrand(edge, x, phi) * w;
    const std::array<int, 2> v{edge.a, edge.b};
    for (int a = 0; a < 2; ++a) {
      const int r = disc.dofs.scalar_index[v[a]];
      if (r >= 0) out[r] += value * phi[a];
    }
  });
}

// Vector element matrix for int c_ijkl du_k/dx_l deta_i/dx_j.
SparseMatrix assemble_tensor_operator(const Discretization& disc, const Tensor4& c) {
  Triplets trip;
  const auto& dofs = disc.dofs;
  for (std::size_t t = 0; t < disc.mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(disc.mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) {
        const int r = dofs.vector_index(e.nodes[a], i);
        if (r < 0) continue;
        for (int b = 0; b < 3; ++b)
          for (int k = 0; k < 2; ++k) {
            const int s = dofs.vector_index(e.nodes[b], k);
            if (s < 0) continue;
            double v = 0.0;
            for (int j = 0; j < 2; ++j)
              for (int l = 0; l < 2; ++l) v += c(i, j, k, l) * e.grad[b][l] * e.grad[a][j];
            trip.emplace_back(r, s, e.area * v);
          }
      }
  }
  return from_triplets(nv(disc), nv(disc), trip);
}

}  // namespace

SparseMatrix assemble_unit_stiffness(const Discretization& disc) {
  Triplets trip;
  for (std::size_t t = 0; t < disc.mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(disc.mesh, t);
    scatter_scalar(disc.dofs, e, [&](int a, int b) { return e.area * e.grad[a].dot(e.grad[b]); },
                   trip);
  }
  return from_triplets(ns(disc), ns(disc), trip);
}

SparseMatrix assemble_scalar_mass(const Discretization& disc) {
  Triplets trip;
  for (std::size_t t = 0; t < disc.mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(disc.mesh, t);
    scatter_scalar(disc.dofs, e, [&](int a, int b) { return e.area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0); },
                   trip);
  }
  return from_triplets(ns(disc), ns(disc), trip);
}

SparseMatrix assemble_vector_stiffness(const Discretization& disc) {
  return assemble_tensor_operator(disc, [] {
    Tensor4 id;
    // c_ijkl = delta_ik delta_jl gives int grad u : grad eta
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) id(i, j, i, j) = 1.0;
    return id;
  }());
}

SparseMatrix assemble_vector_mass(const Discretization& disc) {
  Triplets trip;
  const auto& dofs = disc.dofs;
  for (std::size_t t = 0; t < disc.mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(disc.mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 2; ++c) {
          const int r = dofs.vector_index(e.nodes[a], c);
          const int s = dofs.vector_index(e.nodes[b], c);
          if (r >= 0 && s >= 0) trip.emplace_back(r, s, e.area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0));
        }
  }
  return from_triplets(nv(disc), nv(disc), trip);
}

SparseMatrix assemble_thermal_stiffness(const Discretization& disc, const MaterialModel& mat,
                                        const ScalarField& theta_eval) {
  const Vector theta = disc.dofs.expand_scalar(theta_eval);
  Triplets trip;
  for (std::size_t t = 0; t < disc.mesh.num_triangles(); ++t) {
    const auto e = fe::make_element(disc.mesh, t);
    Mat2 k_avg = Mat2::Zero();
    for (const auto& q : fe::kTriangleOrder2) k_avg += q.weight * mat.k(fe::interpolate(e, theta, q.bary));
    // k_ij dz/dx_i dw/dx_j with z = basis b, w = basis a
    scatter_scalar(disc.dofs, e,
                   [&](int a, int b) { return e.area * e.grad[b].dot(k_avg * e.grad[a]); }, trip);
  }
  return from_triplets(ns(disc), ns(disc), trip);
}

SparseMatrix assemble_thermal_robin(const Discretization& disc, const BoundaryData& bd,
                                    const FrictionModel& fric, double t) {
  Triplets trip;
  edge_mass(disc, BoundaryTag::Neumann, [&](const Vec2&) { return bd.h_N; }, trip);
  edge_mass(disc, BoundaryTag::Contact, [&](const Vec2& x) { return bd.h_C(fric.F(x, t)); }, trip);
  return from_triplets(ns(disc), ns(disc), trip);
}

AssembledOperator assemble_electric_system(const Discretization& disc, const Models& models,
                                           const ScalarField& theta_field, double t) {
  const auto& mat = models.material;
  const auto& bd = models.boundary;
  const auto& fric = models.friction;
  const Vector theta = disc.dofs.expand_scalar(theta_field);

  Triplets trip;
  Vector load = Vector::Zero(ns(disc));
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    double sigma_avg = 0.0;
    for (const auto& q : fe::kTriangleOrder2) {
      const double sigma = mat.sigma_el(fe::interpolate(e, theta, q.bary));
      sigma_avg += q.weight * sigma;
      const Vec2 gb = bd.grad_phi_b(e.point(q.bary));
      for (int a = 0; a < 3; ++a) {
        const int r = disc.dofs.scalar_index[e.nodes[a]];
        if (r >= 0) load[r] -= e.area * q.weight * sigma * gb.dot(e.grad[a]);
      }
    }
    scatter_scalar(disc.dofs, e,
                   [&](int a, int b) { return e.area * sigma_avg * e.grad[a].dot(e.grad[b]); }, trip);
  }

  edge_mass(disc, BoundaryTag::Neumann, [&](const Vec2&) { return bd.H_N; }, trip);
  edge_mass(disc, BoundaryTag::Contact, [&](const Vec2& x) { return bd.H_C(fric.F(x, t)); }, trip);
  edge_load(disc, BoundaryTag::Neumann,
            [&](const BoundaryEdge&, const Vec2& x, const auto&) { return -bd.H_N * bd.phi_b(x); }, load);
  edge_load(disc, BoundaryTag::Contact,
            [&](const BoundaryEdge&, const Vec2& x, const auto&) {
              return -bd.H_C(fric.F(x, t)) * bd.phi_b(x);
            },
            load);

  return {from_triplets(ns(disc), ns(disc), trip), std::move(load)};
}

Vector assemble_joule_load_direct(const Discretization& disc, const Models& models,
                                  const ScalarField& theta_field, const ScalarField& phi_field) {
  const auto& mat = models.material;
  const auto& bd = models.boundary;
  const Vector theta = disc.dofs.expand_scalar(theta_field);
  const Vector phi = disc.dofs.expand_scalar(phi_field);

  Vector out = Vector::Zero(ns(disc));
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    const Vec2 gphi = fe::gradient(e, phi);
    for (const auto& q : fe::kTriangleOrder2) {
      const double sigma = mat.sigma_el(fe::interpolate(e, theta, q.bary));
      const Vec2 g = gphi + bd.grad_phi_b(e.point(q.bary));
      const double value = e.area * q.weight * sigma * g.squaredNorm();
      for (int a = 0; a < 3; ++a) {
        const int r = disc.dofs.scalar_index[e.nodes[a]];
        if (r >= 0) out[r] += value * q.bary[a];
      }
    }
  }
  return out;
}

Vector assemble_joule_load_reformulated(const Discretization& disc, const Models& models,
                                        const ScalarField& theta_field, const ScalarField& phi_field,
                                        double t) {
  const auto& mat = models.material;
  const auto& bd = models.boundary;
  const auto& fric = models.friction;
  const Vector theta = disc.dofs.expand_scalar(theta_field);
  const Vector phi = disc.dofs.expand_scalar(phi_field);

  Vector out = Vector::Zero(ns(disc));
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    const Vec2 gphi = fe::gradient(e, phi);
    for (const auto& q : fe::kTriangleOrder2) {
      const double sigma = mat.sigma_el(fe::interpolate(e, theta, q.bary));
      const double phi_q = fe::interpolate(e, phi, q.bary);
      const Vec2 gb = bd.grad_phi_b(e.point(q.bary));
      const double wq = e.area * q.weight * sigma;
      // terms tested with w
      const double value = gphi.dot(gb) + gb.squaredNorm();
      // terms tested with grad w
      const Vec2 flux = phi_q * (gphi + gb);
      for (int a = 0; a < 3; ++a) {
        const int r = disc.dofs.scalar_index[e.nodes[a]];
        if (r >= 0) out[r] += wq * (value * q.bary[a] - flux.dot(e.grad[a]));
      }
    }
  }

  auto boundary = [&](const BoundaryEdge& edge, const Vec2& x, const std::array<double, 2>& basis,
                      double coeff) {
    const double phi_x = basis[0] * phi[edge.a] + basis[1] * phi[edge.b];
    return -coeff * phi_x * (phi_x + bd.phi_b(x));
  };
  edge_load(disc, BoundaryTag::Neumann,
            [&](const BoundaryEdge& edge, const Vec2& x, const auto& basis) {
              return boundary(edge, x, basis, bd.H_N);
            },
            out);
  edge_load(disc, BoundaryTag::Contact,
            [&](const BoundaryEdge& edge, const Vec2& x, const auto& basis) {
              return boundary(edge, x, basis, bd.H_C(fric.F(x, t)));
            },
            out);
  return out;
}

ElasticOperators assemble_elastic_operators(const Discretization& disc, const MaterialModel& mat) {
  return {assemble_tensor_operator(disc, mat.a), assemble_tensor_operator(disc, mat.b)};
}

SparseMatrix assemble_coupling_matrix(const Discretization& disc, const MaterialModel& mat) {
  Triplets trip;
  const auto& dofs = disc.dofs;
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    // int w over the element is area / 3 for every P1 basis function
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) {
        const int r = dofs.vector_index(e.nodes[a], i);
        if (r < 0) continue;
        double m_grad = 0.0;
        for (int j = 0; j < 2; ++j) m_grad += mat.m(i, j) * e.grad[a][j];
        for (int b = 0; b < 3; ++b) {
          const int s = dofs.scalar_index[e.nodes[b]];
          if (s >= 0) trip.emplace_back(r, s, -m_grad * e.area / 3.0);
        }
      }
  }
  return from_triplets(nv(disc), ns(disc), trip);
}

Vector assemble_thermal_coupling(const Discretization& disc, const MaterialModel& mat,
                                 const ScalarField& theta) {
  return assemble_coupling_matrix(disc, mat) * theta;
}

Vector assemble_velocity_heat(const Discretization& disc, const MaterialModel& mat,
                              const VectorField& velocity) {
  return mat.theta_ref * (assemble_coupling_matrix(disc, mat).transpose() * velocity);
}

Vector assemble_frictional_heat(const Discretization& disc, const FrictionModel& fric,
                                const VectorField& velocity, double t) {
  const auto v = disc.dofs.expand_vector(velocity);
  Vector out = Vector::Zero(ns(disc));
  edge_load(disc, BoundaryTag::Contact,
            [&](const BoundaryEdge& edge, const Vec2& x, const std::array<double, 2>& basis) {
              const Vec2 tau(-edge.normal.y(), edge.normal.x());
              const Vec2 vx = basis[0] * v[edge.a] + basis[1] * v[edge.b];
              const double speed = std::abs(vx.dot(tau));
              return fric.mu(speed) * fric.F(x, t) * speed;
            },
            out);
  return out;
}

PLaplacian assemble_p_laplacian(const Discretization& disc, const ScalarField& theta_field) {
  const Vector theta = disc.dofs.expand_scalar(theta_field);
  Vector residual = Vector::Zero(ns(disc));
  Triplets trip;
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    const Vec2 g = fe::gradient(e, theta);
    const double g2 = g.squaredNorm();
    const Mat2 tangent = g2 * Mat2::Identity() + 2.0 * g * g.transpose();
    for (int a = 0; a < 3; ++a) {
      const int r = disc.dofs.scalar_index[e.nodes[a]];
      if (r >= 0) residual[r] += e.area * g2 * g.dot(e.grad[a]);
    }
    scatter_scalar(disc.dofs, e,
                   [&](int a, int b) { return e.area * e.grad[a].dot(tangent * e.grad[b]); }, trip);
  }
  return {std::move(residual), from_triplets(ns(disc), ns(disc), trip)};
}

Vector assemble_mech_load(const Discretization& disc, const BoundaryData& bd,
                          const FrictionModel& fric, double t) {
  const auto& dofs = disc.dofs;
  Vector out = Vector::Zero(nv(disc));
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    for (const auto& q : fe::kTriangleOrder2) {
      const Vec2 f = bd.f0(e.point(q.bary), t) * (e.area * q.weight);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 2; ++c) {
          const int r = dofs.vector_index(e.nodes[a], c);
          if (r >= 0) out[r] += f[c] * q.bary[a];
        }
    }
  }

  auto edge_vector_load = [&](BoundaryTag tag, auto&& traction) {
    for_each_edge_point(disc.mesh, tag, [&](const BoundaryEdge& edge, const Vec2& x,
                                            const std::array<double, 2>& phi, double w) {
      const Vec2 f = traction(edge, x) * w;
      const std::array<int, 2> v{edge.a, edge.b};
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          const int r = dofs.vector_index(v[a], c);
          if (r >= 0) out[r] += f[c] * phi[a];
        }
    });
  };
  edge_vector_load(BoundaryTag::Neumann, [&](const BoundaryEdge&, const Vec2& x) { return bd.f2(x, t); });
  // -int F eta_nu
  edge_vector_load(BoundaryTag::Contact,
                   [&](const BoundaryEdge& edge, const Vec2& x) -> Vec2 { return -fric.F(x, t) * edge.normal; });
  return out;
}

void write_coordinate_format(std::ostream& out, const SparseMatrix& matrix) {
  out << "% rows cols nnz\n" << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace thermistor
