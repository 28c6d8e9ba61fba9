#include "thermistor/scheme.hpp"

#include "thermistor/diagnostics.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

namespace thermistor {

namespace {

bool is_multiple(double value, double step) {
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

int ratio_index(double value, double step) { return static_cast<int>(std::llround(value / step)); }

void check_newton(const NewtonOptions& o, const char* name) {
  if (!(o.tol > 0.0)) throw ConfigError(std::string(name) + " tolerance must be positive");
  if (o.max_iter < 1) throw ConfigError(std::string(name) + " max_iter must be at least 1");
  if (o.max_halvings < 0) throw ConfigError(std::string(name) + " max_halvings must be nonnegative");
}

}  // namespace

void SolverConfig::validate() const {
  std::ostringstream os;
  if (!(dt > 0.0)) os << "dt must be positive (got " << dt << ")";
  else if (!(dt <= h)) os << "dt must not exceed h (dt=" << dt << ", h=" << h << ")";
  else if (!(h < T)) os << "h must be smaller than T (h=" << h << ", T=" << T << ")";
  else if (!is_multiple(h, dt)) os << "dt must divide h exactly (h=" << h << ", dt=" << dt << ")";
  else if (!(eps > 0.0)) os << "friction eps must be positive";
  else if (regularizer_coeff && *regularizer_coeff < 0.0) os << "regularizer coefficient must be nonnegative";
  if (!os.str().empty()) throw ConfigError(os.str());
  check_newton(temperature, "temperature");
  check_newton(momentum, "momentum");
  for (std::size_t i = 0; i < cascade_levels.size(); ++i) {
    const double level = cascade_levels[i];
    if (!(level >= dt) || !(level < T) || !is_multiple(level, dt)) {
      std::ostringstream msg;
      msg << "cascade level " << level << " must be a multiple of dt=" << dt << " below T=" << T;
      throw ConfigError(msg.str());
    }
    if (i > 0 && !(level < cascade_levels[i - 1]))
      throw ConfigError("cascade levels must be strictly decreasing");
  }
}

int SolverConfig::steps() const { return static_cast<int>(std::floor(T / dt + 1e-9)); }

int SolverConfig::delay_steps() const { return ratio_index(h, dt); }

DelayBuffer::DelayBuffer(SystemState initial, double h, double dt)
    : initial_(std::move(initial)), h_(h), dt_(dt) {
  if (!(dt > 0.0) || !(h >= dt) || !is_multiple(h, dt))
    throw ConfigError("delay buffer needs h to be a positive multiple of dt");
  k_ = ratio_index(h, dt);
}

void DelayBuffer::push(SystemState state) {
  if (state.step != latest().step + 1) {
    std::ostringstream os;
    os << "delay buffer expects step " << latest().step + 1 << ", got " << state.step;
    throw SolverError(os.str());
  }
  recent_.push_back(std::move(state));
  while (recent_.size() > static_cast<std::size_t>(k_ + 1)) recent_.pop_front();
}

const SystemState& DelayBuffer::delayed_step(int n) const {
  const int target = n - k_;
  if (target <= 0) return initial_;
  if (target > latest().step) {
    std::ostringstream os;
    os << "delayed lookup at t=" << n * dt_ << " needs step " << target << " beyond stored history (latest "
       << latest().step << ")";
    throw SolverError(os.str());
  }
  const int first = recent_.front().step;
  if (target < first) {
    std::ostringstream os;
    os << "delayed lookup at t=" << n * dt_ << " needs step " << target << ", already discarded";
    throw SolverError(os.str());
  }
  return recent_[static_cast<std::size_t>(target - first)];
}

const SystemState& DelayBuffer::delayed(double t) const {
  if (t < 0.0 || !is_multiple(t, dt_)) {
    std::ostringstream os;
    os << "delayed lookup at t=" << t << " is not a grid time";
    throw SolverError(os.str());
  }
  return delayed_step(ratio_index(t, dt_));
}

InitialData InitialData::zero(const Discretization& disc) {
  const auto ns = static_cast<Eigen::Index>(disc.dofs.num_scalar());
  const auto nv = static_cast<Eigen::Index>(disc.dofs.num_vector());
  return {VectorField::Zero(nv), VectorField::Zero(nv), ScalarField::Zero(ns)};
}

Scheme::Scheme(const Discretization& disc, const Models& models, SolverConfig config)
    : disc_(disc),
      models_(models),
      config_(std::move(config)),
      scalar_mass_(assemble_scalar_mass(disc)),
      momentum_ops_(MomentumOperators::assemble(disc, models.material)) {
  config_.validate();
}

DelayBuffer Scheme::initialize(const InitialData& data) const {
  const auto ns = static_cast<Eigen::Index>(disc_.dofs.num_scalar());
  const auto nv = static_cast<Eigen::Index>(disc_.dofs.num_vector());
  if (data.theta0.size() != ns || data.u0.size() != nv || data.v0.size() != nv)
    throw ConfigError("initial data does not match the discretization");
  SystemState s;
  s.step = 0;
  s.t = 0.0;
  s.u = data.u0;
  s.v = data.v0;
  s.theta = data.theta0;
  s.phi = solve_electric(data.theta0, 0.0);
  MomentumProblem probe(disc_, models_.friction, momentum_ops_, models_.material.mass_mech(), config_.dt,
                        config_.eps);
  probe.set_data(s.u, s.v, Vector::Zero(nv), Vector::Zero(nv), 0.0);
  s.xi = probe.contact_traction(s.v);
  return DelayBuffer(std::move(s), config_.h, config_.dt);
}

ScalarField Scheme::solve_electric(const ScalarField& theta, double t) const {
  const auto sys = assemble_electric_system(disc_, models_, theta, t);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Eigen::SparseMatrix<double>(sys.matrix));
  if (solver.info() != Eigen::Success) throw SolverError("electric matrix is numerically singular");
  ScalarField phi = solver.solve(sys.load);
  const double scale = sys.load.norm();
  for (int refine = 0; refine < 3; ++refine) {
    const Vector r = sys.load - sys.matrix * phi;
    if (r.norm() <= 1e-12 * scale) break;
    phi += solver.solve(r);
  }
  if (!phi.allFinite()) throw SolverError("electric solve produced non-finite values");
  return phi;
}

Vector Scheme::temperature_sources(const SystemState& delayed, double t) const {
  const Vector joule = config_.joule_mode == JouleMode::Direct
                           ? assemble_joule_load_direct(disc_, models_, delayed.theta, delayed.phi)
                           : assemble_joule_load_reformulated(disc_, models_, delayed.theta, delayed.phi, t);
  const Vector velocity_heat = models_.material.theta_ref * (momentum_ops_.coupling.transpose() * delayed.v);
  return joule + velocity_heat + assemble_frictional_heat(disc_, models_.friction, delayed.v, t);
}

ScalarField Scheme::solve_temperature_step(const DelayBuffer& buffer, int step) const {
  const double t = step * config_.dt;
  const SystemState& del = buffer.delayed_step(step);
  const ScalarField& prev = buffer.latest().theta;
  const double c = models_.material.mass_thermal() / config_.dt;
  const double reg = config_.regularizer();

  const SparseMatrix base = c * scalar_mass_ + assemble_thermal_stiffness(disc_, models_.material, del.theta) +
                            assemble_thermal_robin(disc_, models_.boundary, models_.friction, t);
  const Vector rhs = c * (scalar_mass_ * prev) + temperature_sources(del, t);
  const double target = config_.temperature.tol * (1.0 + rhs.norm());

  auto residual = [&](const ScalarField& theta, SparseMatrix* jac) {
    Vector r = base * theta - rhs;
    if (reg != 0.0) {
      auto pl = assemble_p_laplacian(disc_, theta);
      r += reg * pl.residual;
      if (jac) *jac = base + reg * pl.jacobian;
    } else if (jac) {
      *jac = base;
    }
    return r;
  };

  ScalarField theta = prev;
  SparseMatrix jac;
  Vector r = residual(theta, &jac);
  double rnorm = r.norm();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  for (int it = 0; rnorm > target; ++it) {
    if (it == config_.temperature.max_iter) {
      std::ostringstream os;
      os << "temperature Newton did not converge after " << it << " iterations, residual " << rnorm;
      throw SolverError(os.str());
    }
    solver.compute(Eigen::SparseMatrix<double>(jac));
    if (solver.info() != Eigen::Success) throw SolverError("temperature Jacobian factorization failed");
    const Vector delta = solver.solve(-r);
    double alpha = 1.0;
    ScalarField trial = theta + delta;
    Vector rt = residual(trial, nullptr);
    for (int k = 0; k < config_.temperature.max_halvings && !(rt.norm() < rnorm); ++k) {
      alpha *= 0.5;
      trial = theta + alpha * delta;
      rt = residual(trial, nullptr);
    }
    theta = std::move(trial);
    r = residual(theta, &jac);
    rnorm = r.norm();
  }
  return theta;
}

MomentumResult Scheme::solve_momentum_step(const DelayBuffer& buffer, int step) const {
  const double t = step * config_.dt;
  const SystemState& del = buffer.delayed_step(step);
  const SystemState& prev = buffer.latest();
  MomentumProblem problem(disc_, models_.friction, momentum_ops_, models_.material.mass_mech(), config_.dt,
                          config_.eps);
  problem.set_data(prev.u, prev.v, momentum_ops_.coupling * del.theta,
                   assemble_mech_load(disc_, models_.boundary, models_.friction, t), t);
  return thermistor::solve_momentum_step(problem, config_.momentum);
}

SystemState Scheme::step(DelayBuffer& buffer, int n, const StepHooks& hooks) const {
  SystemState s;
  s.step = n;
  s.t = n * config_.dt;
  try {
    s.theta = solve_temperature_step(buffer, n);
    s.phi = solve_electric(s.theta, s.t);
    if (hooks.before_momentum) hooks.before_momentum(s);
    auto mom = solve_momentum_step(buffer, n);
    s.u = std::move(mom.u);
    s.v = std::move(mom.v);
    s.xi = std::move(mom.xi);
  } catch (const SolverError& err) {
    std::ostringstream os;
    os << "step " << n << " (t=" << s.t << "): " << err.what();
    throw SolverError(os.str());
  }
  if (!s.theta.allFinite() || !s.phi.allFinite() || !s.u.allFinite() || !s.v.allFinite()) {
    std::ostringstream os;
    os << "step " << n << " (t=" << s.t << "): non-finite state";
    throw SolverError(os.str());
  }
  buffer.push(s);
  return s;
}

Trajectory Scheme::advance(DelayBuffer& buffer, const StepHooks& hooks) const {
  Trajectory out;
  const int n_steps = config_.steps();
  out.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.push_back(buffer.latest());
  for (int n = buffer.latest().step + 1; n <= n_steps; ++n) out.push_back(step(buffer, n, hooks));
  return out;
}

CascadeReport run_cascade(const Discretization& disc, const Models& models, const SolverConfig& config,
                          const InitialData& data) {
  config.validate();
  if (config.cascade_levels.empty()) throw ConfigError("cascade needs at least one level");
  const DiscreteNorms norms(disc);
  CascadeReport report;
  for (double h : config.cascade_levels) {
    SolverConfig level_config = config;
    level_config.h = h;
    Scheme scheme(disc, models, level_config);
    auto buffer = scheme.initialize(data);
    CascadeLevel level;
    level.h = h;
    level.trajectory = scheme.advance(buffer);
    const auto reg = regularizer_summary(disc, level.trajectory, level_config.regularizer(), config.dt);
    level.majorant = reg.majorant;
    level.dual_estimate = reg.dual_estimate;
    level.surrogate = reg.surrogate;
    report.levels.push_back(std::move(level));
  }
  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
    const auto& a = report.levels[i].trajectory;
    const auto& b = report.levels[i + 1].trajectory;
    CauchyRow row;
    row.h_coarse = report.levels[i].h;
    row.h_fine = report.levels[i + 1].h;
    for (std::size_t n = 1; n < a.size(); ++n) {
      row.theta_l2h += config.dt * std::pow(norms.H(a[n].theta - b[n].theta), 2);
      row.phi_l2v += config.dt * std::pow(norms.V(a[n].phi - b[n].phi), 2);
      row.v_l2e += config.dt * std::pow(norms.E(a[n].v - b[n].v), 2);
    }
    row.theta_l2h = std::sqrt(row.theta_l2h);
    row.phi_l2v = std::sqrt(row.phi_l2v);
    row.v_l2e = std::sqrt(row.v_l2e);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace thermistor
