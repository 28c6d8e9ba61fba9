#pragma once

#include "thermistor/assembly.hpp"
#include "thermistor/friction.hpp"
#include "thermistor/state.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thermistor {

enum class JouleMode { Direct, Reformulated };

struct SolverConfig {
  double T = 1.0;
  double h = 0.05;      // delay, also the weight of the 4-Laplacian regularizer
  double dt = 0.0125;   // h / dt must be an integer
  double eps = 1e-6;    // friction smoothing length
  NewtonOptions temperature{};
  NewtonOptions momentum{};
  JouleMode joule_mode = JouleMode::Direct;
  std::vector<double> cascade_levels;
  std::uint64_t seed = 12345;
  std::optional<double> regularizer_coeff;  // experiment override; defaults to h

  /// Throws ConfigError when an invariant fails.
  void validate() const;
  int steps() const;
  int delay_steps() const;
  double regularizer() const { return regularizer_coeff.value_or(h); }
};

/// Grid-time history providing the delayed state g_h(t) = g(max(t - h, 0)).
class DelayBuffer {
 public:
  DelayBuffer(SystemState initial, double h, double dt);

  void push(SystemState state);

  /// Delayed state for grid time t (exact, no interpolation).
  const SystemState& delayed(double t) const;
  /// Delayed state seen by grid step n, i.e. at t_n = n dt.
  const SystemState& delayed_step(int n) const;

  const SystemState& latest() const { return recent_.empty() ? initial_ : recent_.back(); }
  const SystemState& initial() const { return initial_; }
  int delay_steps() const { return k_; }
  double dt() const { return dt_; }
  double h() const { return h_; }

 private:
  SystemState initial_;
  std::deque<SystemState> recent_;  // the last k + 1 states after the initial one
  int k_;
  double h_;
  double dt_;
};

struct InitialData {
  VectorField u0;
  VectorField v0;
  ScalarField theta0;

  static InitialData zero(const Discretization& disc);
};

struct StepHooks {
  /// Called with the partially built new state (theta and phi set) right
  /// before the momentum solve.
  std::function<void(SystemState&)> before_momentum;
};

/// Time-retarded staggered scheme: per grid step, temperature (delayed
/// couplings) then potential (current temperature) then momentum (delayed
/// temperature, implicit friction).
class Scheme {
 public:
  Scheme(const Discretization& disc, const Models& models, SolverConfig config);

  DelayBuffer initialize(const InitialData& data) const;

  ScalarField solve_electric(const ScalarField& theta, double t) const;
  ScalarField solve_temperature_step(const DelayBuffer& buffer, int step) const;
  MomentumResult solve_momentum_step(const DelayBuffer& buffer, int step) const;

  SystemState step(DelayBuffer& buffer, int n, const StepHooks& hooks = {}) const;
  /// Runs all steps up to T; the trajectory starts with the initial state.
  Trajectory advance(DelayBuffer& buffer, const StepHooks& hooks = {}) const;

  const SolverConfig& config() const { return config_; }
  const Discretization& discretization() const { return disc_; }
  const Models& models() const { return models_; }
  const MomentumOperators& momentum_operators() const { return momentum_ops_; }

 private:
  Vector temperature_sources(const SystemState& delayed, double t) const;

  const Discretization& disc_;
  const Models& models_;
  SolverConfig config_;
  SparseMatrix scalar_mass_;
  MomentumOperators momentum_ops_;
};

struct CauchyRow {
  double h_coarse = 0.0;
  double h_fine = 0.0;
  double theta_l2h = 0.0;  // || theta^h - theta^{h'} ||_{L2(0,T;H)}
  double phi_l2v = 0.0;    // || phi^h - phi^{h'} ||_{L2(0,T;V)}
  double v_l2e = 0.0;      // || v^h - v^{h'} ||_{L2(0,T;E)}
};

struct CascadeLevel {
  double h = 0.0;
  Trajectory trajectory;
  double majorant = 0.0;       // h^{1/4} (h int_0^T int |grad theta|^4)^{3/4}
  double dual_estimate = 0.0;  // || h F theta ||_{L^{4/3}(0,T;U')} from the convex dual solve
  double surrogate = 0.0;      // same with the H1-dual upper bound per step
};

struct CascadeReport {
  std::vector<CascadeLevel> levels;
  std::vector<CauchyRow> rows;
};

/// Solves the scheme for each delay in config.cascade_levels (same dt) and
/// measures successive differences.
CascadeReport run_cascade(const Discretization& disc, const Models& models, const SolverConfig& config,
                          const InitialData& data);

}  // namespace thermistor
