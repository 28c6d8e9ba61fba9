#pragma once

#include "thermistor/assembly.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace thermistor {

/// int_0^r mu(s) ds, closed form when the model provides one, adaptive
/// Gauss-Kronrod otherwise.
double mu_integral(const FrictionModel& fric, double r);

/// Friction functional J(v) = int_{Gamma_C} F int_0^{|v_tau|} mu(s) ds.
double j_value(const Discretization& disc, const FrictionModel& fric, const VectorField& velocity,
               double t);

/// Smoothed Coulomb traction mu(r) F v_tau / r with r = sqrt(|v_tau|^2 + eps^2).
/// It is the gradient of F int_0^r mu, so |xi| <= mu_bar F for every input.
Vec2 xi_regularized(const FrictionModel& fric, const Vec2& v_tau, double F_val, double eps);
Mat2 xi_regularized_jacobian(const FrictionModel& fric, const Vec2& v_tau, double F_val, double eps);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 20;
};

/// Operators of the momentum equation that do not change between steps.
struct MomentumOperators {
  SparseMatrix mass;      // vector mass on E_h
  ElasticOperators elastic;
  SparseMatrix coupling;  // L_d = coupling * theta

  static MomentumOperators assemble(const Discretization& disc, const MaterialModel& mat);
};

/// Implicit Euler momentum residual in the new velocity:
///   (m/dt) M (v - v_prev) + A_d v + B_d (u_prev + dt v) + L_d theta_del + gamma* xi(v_tau) - F
class MomentumProblem {
 public:
  MomentumProblem(const Discretization& disc, const FrictionModel& fric, const MomentumOperators& ops,
                  double mass_coeff, double dt, double eps);

  void set_data(const VectorField& u_prev, const VectorField& v_prev, const Vector& thermal_load,
                const Vector& mech_load, double t);

  Vector residual(const VectorField& v) const;
  SparseMatrix jacobian(const VectorField& v) const;
  /// Traction xi at every contact node for the velocity v.
  std::vector<Vec2> contact_traction(const VectorField& v) const;
  /// Nodal contact force gamma* xi(v_tau) on E_h.
  Vector friction_force(const VectorField& v) const;

  double load_norm() const { return mech_load_.norm(); }
  double dt() const { return dt_; }
  const VectorField& u_prev() const { return u_prev_; }
  const VectorField& v_prev() const { return v_prev_; }

 private:
  Vec2 tangential(const VectorField& v, std::size_t c) const;

  const Discretization& disc_;
  const FrictionModel& fric_;
  const MomentumOperators& ops_;
  double mass_coeff_;
  double dt_;
  double eps_;
  SparseMatrix linear_;  // (m/dt) M + A_d + dt B_d
  VectorField u_prev_, v_prev_;
  Vector thermal_load_, mech_load_;
  std::vector<double> contact_F_;
};

struct MomentumResult {
  VectorField v;
  VectorField u;
  std::vector<Vec2> xi;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// One implicit step of the nonmonotone friction momentum equation, solved by
/// Newton with backtracking. Throws SolverError on non-convergence.
MomentumResult solve_momentum_step(const MomentumProblem& problem, const NewtonOptions& options = {});

struct SubgradientReport {
  int samples = 0;
  double max_bound_ratio = 0.0;  // max |xi| / (mu_bar F_bar), must be <= 1
  double min_pairing = 0.0;      // min <xi1 - xi2, v1 - v2> / |v1 - v2|^2
  double min_margin = 0.0;       // min of <xi1 - xi2, v1 - v2> + F_bar d_mu |v1 - v2|^2
  bool bound_holds = true;
  bool monotonicity_holds = true;
  std::string witness;  // a violating pair, if any
};

/// Sampled check of the boundedness and relaxed monotonicity of the
/// (regularized) Clarke subgradient over random contact velocity fields.
SubgradientReport check_subgradient_properties(const FrictionModel& fric, std::uint64_t seed,
                                               int samples = 10000, double eps = 1e-6);

}  // namespace thermistor
