#pragma once

#include "thermistor/assembly.hpp"
#include "thermistor/state.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace thermistor {

/// Discrete norms: H and Q by the mass form, V and E by the gradient forms,
/// U by the elementwise integral of |grad theta|^4 (exact for P1).
class DiscreteNorms {
 public:
  explicit DiscreteNorms(const Discretization& disc);

  double H(const ScalarField& theta) const;
  double V(const ScalarField& theta) const;
  double Q(const VectorField& v) const;
  double E(const VectorField& v) const;
  double U4(const ScalarField& theta) const;  // int |grad theta|^4

  const SparseMatrix& stiffness() const { return stiffness_; }

 private:
  const Discretization& disc_;
  SparseMatrix mass_, stiffness_, vector_mass_, vector_stiffness_;
};

double integrate_grad_fourth(const Discretization& disc, const ScalarField& theta);

/// Terms of the constant bounding the potential:
/// C = (M |phi_b|_{H1} + H_N |phi_b|_{Gamma_N} g + H_C_bar |phi_b|_{Gamma_C} g) / sigma_*.
struct PotentialConstant {
  double phi_b_h1 = 0.0;
  double phi_b_neumann = 0.0;
  double phi_b_contact = 0.0;
  double trace_norm = 0.0;
  std::array<double, 3> terms{};  // the three summands, already divided by sigma_*
  double value = 0.0;
};

PotentialConstant potential_constant(const Discretization& disc, const Models& models, double trace_norm);

struct PotentialBound {
  double lhs = 0.0;  // |phi(t)|_V
  double rhs = 0.0;  // C
  bool holds = true;
};

PotentialBound potential_bound(const DiscreteNorms& norms, const PotentialConstant& constant,
                               const SystemState& state);

/// int sigma_el(theta) phi^2 |grad phi|^2 over Omega.
double weighted_gradient_integral(const Discretization& disc, const Models& models, const ScalarField& theta,
                                  const ScalarField& phi);

/// max over free basis functions of |direct - reformulated| Joule load.
double joule_gap(const Discretization& disc, const Models& models, const ScalarField& theta,
                 const ScalarField& phi, double t);

/// Dual norm of a load vector r with respect to |w|_U = |grad w|_{L4}: solves
/// the 4-Laplacian problem F(w) = r and returns |w|_U^3.
double dual_norm_u(const Discretization& disc, const Vector& r);

struct RegularizerMagnitude {
  double majorant = 0.0;       // h |theta|_U^3
  double dual_estimate = 0.0;  // |h F theta|_{U'} by the convex dual solve
  double surrogate = 0.0;      // |Omega|^{1/4} |h F theta|_{V'}, an upper bound
};

RegularizerMagnitude regularizer_magnitude(const Discretization& disc, const ScalarField& theta, double h);

/// Time-integrated versions over a trajectory, rectangle rule on the new-time values:
/// majorant h^{1/4} (h int_0^T |theta|_U^4)^{3/4}, and the L^{4/3}(0,T) norms of the estimates.
RegularizerMagnitude regularizer_summary(const Discretization& disc, const Trajectory& trajectory, double h,
                                         double dt);

struct DiagnosticsRow {
  double level_h = 0.0;
  int step = 0;
  double t = 0.0;
  double phi_v = 0.0;
  double potential_c = 0.0;
  double weighted_joule = 0.0;
  double kinetic = 0.0;        // |v|_Q^2
  double viscous_acc = 0.0;    // int_0^t |v|_E^2
  double u_e2 = 0.0;           // |u|_E^2
  double theta_h2 = 0.0;       // |theta|_H^2
  double theta_v2_acc = 0.0;   // int_0^t |theta|_V^2
  double theta_u4_acc = 0.0;   // h int_0^t |theta|_U^4
  double mech_energy = 0.0;     // kinetic + viscous_acc + u_e2
  double thermal_energy = 0.0;  // theta_h2 + theta_v2_acc + theta_u4_acc
  double reg_majorant = 0.0;
  double reg_dual = 0.0;
  double reg_surrogate = 0.0;
  double joule_gap = 0.0;
  double xi_ratio = 0.0;       // max |xi| / (mu_bar F_bar)
  double min_heat_load = 0.0;  // smallest Joule or frictional heat entry
};

struct DiagnosticsOptions {
  double h = 0.05;   // delay (time-integral weight of the U term)
  double regularizer = 0.05;
  double dt = 0.0125;
  bool dual_norms = true;
  std::optional<double> weighted_ceiling;  // bound on the weighted Joule integral
  std::optional<double> energy_ceiling;    // bound on mech_energy and thermal_energy
};

struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  double max_of(double DiagnosticsRow::*field) const;
};

class DiagnosticsContext {
 public:
  DiagnosticsContext(const Discretization& disc, const Models& models);

  DiagnosticsReport energy_report(const Trajectory& trajectory, const DiagnosticsOptions& options) const;

  const DiscreteNorms& norms() const { return norms_; }
  const PotentialConstant& constant() const { return constant_; }

 private:
  const Discretization& disc_;
  const Models& models_;
  DiscreteNorms norms_;
  PotentialConstant constant_;
};

void write_diagnostics_csv(std::ostream& out, const std::string& header_comment, const DiagnosticsReport& report);

}  // namespace thermistor
