#pragma once

#include "thermistor/materials.hpp"
#include "thermistor/mesh.hpp"

#include <ostream>

namespace thermistor {

/// Mesh together with its DOF maps; immutable once built.
struct Discretization {
  Mesh mesh;
  DofMap dofs;

  explicit Discretization(Mesh m) : mesh(std::move(m)), dofs(build_dof_maps(mesh)) {}
};

/// Sparse operator plus the affine part it carries (may be empty).
struct AssembledOperator {
  SparseMatrix matrix;
  Vector load;
};

// Constant-coefficient building blocks on the free DOFs.
SparseMatrix assemble_unit_stiffness(const Discretization& disc);
SparseMatrix assemble_scalar_mass(const Discretization& disc);
SparseMatrix assemble_vector_stiffness(const Discretization& disc);
SparseMatrix assemble_vector_mass(const Discretization& disc);

/// int k_ij(theta_eval) dz/dx_i dw/dx_j, conductivity frozen at theta_eval.
SparseMatrix assemble_thermal_stiffness(const Discretization& disc, const MaterialModel& mat,
                                        const ScalarField& theta_eval);

/// Robin heat exchange on Gamma_N (h_N) and Gamma_C (h_C(F)).
SparseMatrix assemble_thermal_robin(const Discretization& disc, const BoundaryData& bd,
                                    const FrictionModel& fric, double t);

/// Matrix of L(theta, .) + M(.) acting on the shifted potential and the load
/// that moves the phi_b terms to the right-hand side.
AssembledOperator assemble_electric_system(const Discretization& disc, const Models& models,
                                           const ScalarField& theta, double t);

/// Joule heating sigma_el(theta)|grad(phi + phi_b)|^2 tested with each free basis function.
Vector assemble_joule_load_direct(const Discretization& disc, const Models& models,
                                  const ScalarField& theta, const ScalarField& phi);

/// Joule heating after substituting the electric equation tested with phi*w.
Vector assemble_joule_load_reformulated(const Discretization& disc, const Models& models,
                                        const ScalarField& theta, const ScalarField& phi,
                                        double t);

struct ElasticOperators {
  SparseMatrix viscosity;   // A_d
  SparseMatrix elasticity;  // B_d
};

ElasticOperators assemble_elastic_operators(const Discretization& disc, const MaterialModel& mat);

/// Coupling C with C[eta, w] = -int m_ij w d(eta_i)/dx_j, so that
/// L_d z = C z and G(eta) = theta_ref C^T eta.
SparseMatrix assemble_coupling_matrix(const Discretization& disc, const MaterialModel& mat);

Vector assemble_thermal_coupling(const Discretization& disc, const MaterialModel& mat,
                                 const ScalarField& theta);
Vector assemble_velocity_heat(const Discretization& disc, const MaterialModel& mat,
                              const VectorField& velocity);

/// Frictional heat int_{Gamma_C} mu(|v_tau|) F |v_tau| w.
Vector assemble_frictional_heat(const Discretization& disc, const FrictionModel& fric,
                                const VectorField& velocity, double t);

struct PLaplacian {
  Vector residual;
  SparseMatrix jacobian;
};

/// 4-Laplacian int |grad theta|^2 grad theta . grad w and its exact Jacobian.
PLaplacian assemble_p_laplacian(const Discretization& disc, const ScalarField& theta);

/// Body force, Neumann traction and prescribed normal contact traction.
Vector assemble_mech_load(const Discretization& disc, const BoundaryData& bd,
                          const FrictionModel& fric, double t);

void write_coordinate_format(std::ostream& out, const SparseMatrix& matrix);

}  // namespace thermistor
