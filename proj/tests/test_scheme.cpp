#include "oracle.hpp"

#include "thermistor/scheme.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace thermistor;

namespace {

constexpr auto D = BoundaryTag::Dirichlet;

Discretization square(int n, const SideTags& s = {}) { return Discretization(build_unit_square_mesh(n, s)); }

SystemState scalar_state(int step, double dt, double value) {
  SystemState s;
  s.step = step;
  s.t = step * dt;
  s.theta = ScalarField::Constant(1, value);
  return s;
}

SolverConfig short_config(double T = 0.2, double h = 0.05, double dt = 0.025) {
  SolverConfig c;
  c.T = T;
  c.h = h;
  c.dt = dt;
  return c;
}

std::string config_error(const SolverConfig& c) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Delay, ShortTimesSeeInitialState) {
  DelayBuffer buf(scalar_state(0, 0.05, -1.0), 0.25, 0.05);
  EXPECT_EQ(buf.delay_steps(), 5);
  for (int n = 1; n <= 10; ++n) buf.push(scalar_state(n, 0.05, n));
  // t = 0.1 is before the delay: g(max(0.1 - 0.25, 0)) = g(0)
  EXPECT_EQ(buf.delayed(0.1).step, 0);
  EXPECT_EQ(buf.delayed(0.1).theta[0], -1.0);
  EXPECT_EQ(buf.delayed(0.25).step, 0);
  // t = 0.5 reads the state stored at 0.25
  EXPECT_EQ(buf.delayed(0.5).step, 5);
  EXPECT_NEAR(buf.delayed(0.5).t, 0.25, 1e-15);
  EXPECT_EQ(buf.delayed_step(11).step, 6);
}

TEST(Delay, RejectsBadLookupsAndPushes) {
  DelayBuffer buf(scalar_state(0, 0.05, 0.0), 0.1, 0.05);
  EXPECT_THROW(buf.delayed(0.07), SolverError);
  EXPECT_THROW(buf.delayed(-0.05), SolverError);
  EXPECT_THROW(buf.delayed_step(4), SolverError);  // needs step 2, not stored yet
  EXPECT_THROW(buf.push(scalar_state(2, 0.05, 0.0)), SolverError);
  for (int n = 1; n <= 10; ++n) buf.push(scalar_state(n, 0.05, n));
  EXPECT_THROW(buf.delayed_step(5), SolverError);  // step 3 already discarded
  EXPECT_NO_THROW(buf.delayed_step(11));
  EXPECT_THROW(DelayBuffer(scalar_state(0, 0.05, 0.0), 0.07, 0.05), ConfigError);
}

// dt sum_{i=1..N} |g(t_i - h)|^2 = h |g_0|^2 + dt sum_{j=1..N-k} |g_j|^2,
// which is bounded by h |g_0|^2 + dt sum_{j=1..N} |g_j|^2.
TEST(Delay, DiscreteDelayInequalityOnRandomHistories) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double dt = 0.01;
    const int k = 1 + trial % 7, steps = 20 + trial;
    const double h = k * dt;
    DelayBuffer buf(scalar_state(0, dt, g(rng)), h, dt);
    std::vector<double> history{buf.initial().theta[0]};
    double lhs = 0.0;
    for (int n = 1; n <= steps; ++n) {
      buf.push(scalar_state(n, dt, g(rng)));
      history.push_back(buf.latest().theta[0]);
      lhs += dt * std::pow(buf.delayed_step(n).theta[0], 2);
    }
    double tail = 0.0, full = 0.0;
    for (int j = 1; j <= steps; ++j) {
      full += dt * history[j] * history[j];
      if (j <= steps - k) tail += dt * history[j] * history[j];
    }
    const double g0 = h * history[0] * history[0];
    EXPECT_NEAR(lhs, g0 + tail, 1e-13);
    EXPECT_LE(lhs, g0 + full + 1e-13);
  }
}

TEST(Config, ValidationMessages) {
  EXPECT_EQ(config_error(short_config()), "");
  EXPECT_NE(config_error(short_config(1.0, 0.05, 0.02)).find("dt must divide h"), std::string::npos);
  EXPECT_NE(config_error(short_config(1.0, 0.05, 0.1)).find("dt must not exceed h"), std::string::npos);
  EXPECT_NE(config_error(short_config(0.05, 0.05, 0.025)).find("smaller than T"), std::string::npos);
  EXPECT_NE(config_error(short_config(1.0, 0.05, 0.0)).find("dt must be positive"), std::string::npos);
  auto c = short_config();
  c.eps = 0.0;
  EXPECT_FALSE(config_error(c).empty());
  c = short_config();
  c.cascade_levels = {0.1, 0.1};
  EXPECT_NE(config_error(c).find("strictly decreasing"), std::string::npos);
  c.cascade_levels = {0.1, 0.03};
  EXPECT_NE(config_error(c).find("cascade level"), std::string::npos);
  c = short_config();
  c.temperature.tol = -1.0;
  EXPECT_FALSE(config_error(c).empty());
  EXPECT_EQ(short_config(1.0, 0.05, 0.0125).steps(), 80);
  EXPECT_EQ(short_config(1.0, 0.05, 0.0125).delay_steps(), 4);
}

// With the regularizer off and v0 = 0 the first temperature step is one
// linear solve; the operators and the Joule source are rebuilt densely.
TEST(Temperature, FirstStepMatchesDenseLinearSolve) {
  const auto d = square(3);
  const auto models = default_ptc_model();
  auto config = short_config();
  config.regularizer_coeff = 0.0;
  const Scheme scheme(d, models, config);
  auto data = InitialData::zero(d);
  data.theta0 = d.dofs.interpolate_scalar(d.mesh, [](const Vec2& x) { return 0.5 + x.y() - x.x() * x.x(); });
  const auto buffer = scheme.initialize(data);
  const ScalarField theta1 = scheme.solve_temperature_step(buffer, 1);

  const auto& mat = models.material;
  const auto& bd = models.boundary;
  const double t = config.dt;
  const auto& theta0 = data.theta0;
  const auto& phi0 = buffer.initial().phi;
  const oracle::Dense mass = oracle::scalar_mass(d);
  const oracle::Dense lhs =
      mat.mass_thermal() / config.dt * mass +
      oracle::scalar_stiffness(d, [&](const oracle::LocalP1& e, const Vec2& x) {
        return mat.k(oracle::interp(d, e, theta0, x))(0, 0);
      }) +
      oracle::edge_mass(d, BoundaryTag::Neumann, [&](const Vec2&) { return bd.h_N; }) +
      oracle::edge_mass(d, BoundaryTag::Contact, [&](const Vec2& x) { return bd.h_C(models.friction.F(x, t)); });
  Eigen::VectorXd joule = Eigen::VectorXd::Zero(theta0.size());
  for (std::size_t k = 0; k < d.mesh.num_triangles(); ++k) {
    const auto e = oracle::local(d, k);
    const Vec2 gphi = oracle::grad(d, e, phi0);
    for (const auto& q : oracle::quad_points(e)) {
      const double value = mat.sigma_el(oracle::interp(d, e, theta0, q)) * (gphi + bd.grad_phi_b(q)).squaredNorm();
      for (int a = 0; a < 3; ++a)
        if (oracle::sidx(d, e.nodes[a]) >= 0) joule[oracle::sidx(d, e.nodes[a])] += e.area / 3.0 * value * e.value(a, q);
    }
  }
  const Eigen::VectorXd rhs = mat.mass_thermal() / config.dt * mass * theta0 + joule;
  const Eigen::VectorXd expected = lhs.lu().solve(rhs);
  EXPECT_LE((theta1 - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Temperature, RegularizedStepSolvesNonlinearEquation) {
  const auto d = square(4);
  const auto models = default_ptc_model();
  auto config = short_config();
  config.regularizer_coeff = 0.5;  // strong enough to matter
  const Scheme scheme(d, models, config);
  auto data = InitialData::zero(d);
  data.theta0 = d.dofs.interpolate_scalar(d.mesh, [](const Vec2& x) { return 3.0 * x.y() * (1.0 - x.x()); });
  const auto buffer = scheme.initialize(data);
  const ScalarField theta = scheme.solve_temperature_step(buffer, 1);

  config.regularizer_coeff = 0.0;
  const ScalarField linear = Scheme(d, models, config).solve_temperature_step(buffer, 1);
  const double c = models.material.mass_thermal() / config.dt;
  const SparseMatrix mass = assemble_scalar_mass(d);
  const SparseMatrix base = c * mass + assemble_thermal_stiffness(d, models.material, data.theta0) +
                            assemble_thermal_robin(d, models.boundary, models.friction, config.dt);
  // both solve base * theta + reg F(theta) = rhs with the same right-hand side
  const Vector rhs = base * linear;
  const Vector r = base * theta + 0.5 * assemble_p_laplacian(d, theta).residual - rhs;
  EXPECT_LE(r.norm(), 1e-9 * (1.0 + rhs.norm()));
  EXPECT_GT((theta - linear).norm(), 1e-6);
}

TEST(Scheme, ZeroDataStaysZero) {
  PtcParameters p;
  p.voltage = 0.0;
  p.f0 = Vec2::Zero();
  p.F = 0.0;
  const auto models = default_ptc_model(p);
  const auto d = square(4);
  const Scheme scheme(d, models, short_config());
  auto buffer = scheme.initialize(InitialData::zero(d));
  const auto traj = scheme.advance(buffer);
  ASSERT_EQ(traj.size(), 9u);
  for (const auto& s : traj) {
    EXPECT_EQ(s.theta.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.phi.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.v.cwiseAbs().maxCoeff(), 0.0);
  }
}

// sigma = 1 and phi_b = x_1 on an all-Dirichlet square give phi = 0 and a unit
// Joule source; without thermal expansion the temperature relaxes to K^{-1} 1.
TEST(Scheme, SteadyJouleSourceReached) {
  auto models = default_ptc_model();
  models.material.sigma_el = [](double) { return 1.0; };
  models.material.k = [](double) { return Mat2::Identity(); };
  models.material.m = Mat2::Zero();
  const auto d = square(4, {D, D, D, D});
  auto config = short_config(5.0, 0.05, 0.05);
  config.regularizer_coeff = 0.0;
  const Scheme scheme(d, models, config);
  auto buffer = scheme.initialize(InitialData::zero(d));
  const auto traj = scheme.advance(buffer);

  const oracle::Dense k = oracle::scalar_stiffness(d, [](const auto&, const Vec2&) { return 1.0; });
  Eigen::VectorXd load = Eigen::VectorXd::Zero(k.rows());  // int w = patch area / 3
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto e = oracle::local(d, t);
    for (int a = 0; a < 3; ++a)
      if (oracle::sidx(d, e.nodes[a]) >= 0) load[oracle::sidx(d, e.nodes[a])] += e.area / 3.0;
  }
  const Eigen::VectorXd steady = k.lu().solve(load);
  EXPECT_LE(traj.back().phi.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((traj.back().theta - steady).cwiseAbs().maxCoeff(), 1e-8 * steady.cwiseAbs().maxCoeff());
}

TEST(Scheme, PoisonedStateReportsStep) {
  const auto d = square(3);
  const auto models = default_ptc_model();
  const Scheme scheme(d, models, short_config());
  auto buffer = scheme.initialize(InitialData::zero(d));
  StepHooks hooks;
  hooks.before_momentum = [](SystemState& s) {
    if (s.step == 3) s.theta[0] = std::numeric_limits<double>::quiet_NaN();
  };
  try {
    scheme.advance(buffer, hooks);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(Scheme, NewtonFailureReportsStep) {
  const auto d = square(3);
  const auto models = default_ptc_model();
  auto config = short_config();
  config.temperature.max_iter = 1;
  config.temperature.tol = 1e-300;
  const Scheme scheme(d, models, config);
  auto buffer = scheme.initialize(InitialData::zero(d));
  try {
    scheme.advance(buffer);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("temperature Newton"), std::string::npos) << msg;
  }
}

TEST(Scheme, DeterministicTrajectories) {
  const auto d = square(4);
  const auto models = default_ptc_model();
  const Scheme scheme(d, models, short_config());
  auto b1 = scheme.initialize(InitialData::zero(d));
  auto b2 = scheme.initialize(InitialData::zero(d));
  const auto t1 = scheme.advance(b1);
  const auto t2 = scheme.advance(b2);
  ASSERT_EQ(t1.size(), t2.size());
  for (std::size_t n = 0; n < t1.size(); ++n) {
    EXPECT_EQ(t1[n].theta, t2[n].theta);
    EXPECT_EQ(t1[n].phi, t2[n].phi);
    EXPECT_EQ(t1[n].v, t2[n].v);
  }
  EXPECT_GT(t1.back().theta.norm(), 0.0);
  EXPECT_GT(t1.back().v.norm(), 0.0);
}

TEST(Scheme, TemperatureUsesOnlyDelayedCouplings) {
  // before the delay has elapsed every step sees the initial state
  const auto d = square(3);
  const auto models = default_ptc_model();
  const Scheme scheme(d, models, short_config(0.2, 0.1, 0.025));
  auto buffer = scheme.initialize(InitialData::zero(d));
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(&buffer.delayed_step(n), &buffer.initial());
    scheme.step(buffer, n);
  }
  EXPECT_EQ(buffer.delayed_step(5).step, 1);
}

TEST(Scheme, ReformulatedJouleCloseToDirect) {
  const auto d = square(8);
  const auto models = default_ptc_model();
  auto config = short_config();
  const Scheme direct(d, models, config);
  config.joule_mode = JouleMode::Reformulated;
  const Scheme reform(d, models, config);
  auto b1 = direct.initialize(InitialData::zero(d));
  auto b2 = reform.initialize(InitialData::zero(d));
  const auto a = direct.advance(b1).back().theta;
  const auto b = reform.advance(b2).back().theta;
  EXPECT_GT((a - b).norm(), 0.0);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 0.05 * a.cwiseAbs().maxCoeff());
}

TEST(Cascade, RowsAndLevels) {
  const auto d = square(4);
  const auto models = default_ptc_model();
  auto config = short_config(0.4, 0.05, 0.05);
  config.cascade_levels = {0.2, 0.1, 0.05};
  const auto report = run_cascade(d, models, config, InitialData::zero(d));
  ASSERT_EQ(report.levels.size(), 3u);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& level : report.levels) {
    EXPECT_EQ(level.trajectory.size(), 9u);
    EXPECT_GT(level.majorant, 0.0);
    EXPECT_LE(level.dual_estimate, level.majorant * (1.0 + 1e-6));
    EXPECT_GE(level.surrogate, level.dual_estimate * (1.0 - 1e-6));
  }
  EXPECT_DOUBLE_EQ(report.rows[0].h_coarse, 0.2);
  EXPECT_DOUBLE_EQ(report.rows[1].h_fine, 0.05);
  EXPECT_GT(report.rows[0].theta_l2h, 0.0);
  config.cascade_levels.clear();
  EXPECT_THROW(run_cascade(d, models, config, InitialData::zero(d)), ConfigError);
}
