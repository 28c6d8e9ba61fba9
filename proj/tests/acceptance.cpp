// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "oracle.hpp"

#include "thermistor/diagnostics.hpp"
#include "thermistor/driver.hpp"
#include "thermistor/friction.hpp"
#include "thermistor/scheme.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace thermistor;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << o.detail << ")"
            << std::endl;
  if (!o.pass) ++failures;
}

template <class Fn>
void criterion(int id, const std::string& title, Fn&& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, title, o);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Discretization square(int n, const SideTags& s = {}) { return Discretization(build_unit_square_mesh(n, s)); }

SolverConfig default_solver(double T) {
  SolverConfig c;
  c.T = T;
  c.h = 0.05;
  c.dt = 0.0125;
  return c;
}

// Shared cascade on the default scenario; criteria 5 to 7 read from it.
struct CascadeData {
  CascadeReport report;
  std::vector<DiagnosticsReport> diagnostics;
  double seconds = 0.0;
};

CascadeData& default_cascade() {
  static CascadeData data = [] {
    const auto start = Clock::now();
    static const Discretization disc = square(8);
    static const Models models = default_ptc_model();
    auto config = default_solver(1.0);
    config.cascade_levels = {0.2, 0.1, 0.05, 0.025};
    CascadeData d;
    d.report = run_cascade(disc, models, config, InitialData::zero(disc));
    const DiagnosticsContext ctx(disc, models);
    for (const auto& level : d.report.levels) {
      DiagnosticsOptions o;
      o.h = level.h;
      o.regularizer = level.h;
      o.dt = config.dt;
      o.dual_norms = false;
      d.diagnostics.push_back(ctx.energy_report(level.trajectory, o));
    }
    d.seconds = seconds_since(start);
    return d;
  }();
  return data;
}

Outcome manufactured_convergence() {
  const auto start = Clock::now();
  auto models = default_ptc_model();
  models.material.sigma_el = [](double) { return 0.7; };
  // total potential x1 x2; the boundary lift carries an interior bubble so
  // that the shifted unknown is nontrivial
  auto bubble = [](const Vec2& x) { return 16.0 * x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y()); };
  auto bubble_grad = [](const Vec2& x) {
    return Vec2(16.0 * (1.0 - 2.0 * x.x()) * x.y() * (1.0 - x.y()), 16.0 * x.x() * (1.0 - x.x()) * (1.0 - 2.0 * x.y()));
  };
  models.boundary.phi_b = [&](const Vec2& x) { return x.x() * x.y() + bubble(x); };
  models.boundary.grad_phi_b = [&](const Vec2& x) -> Vec2 { return Vec2(x.y(), x.x()) + bubble_grad(x); };

  std::vector<double> l2, energy;
  for (int n : {4, 8, 16}) {
    const auto d = square(n, {BoundaryTag::Dirichlet, BoundaryTag::Dirichlet, BoundaryTag::Dirichlet,
                              BoundaryTag::Dirichlet});
    const Scheme scheme(d, models, default_solver(1.0));
    const ScalarField phi = scheme.solve_electric(ScalarField::Zero(static_cast<Eigen::Index>(d.dofs.num_scalar())), 0.0);
    // error of the total potential = error of the shifted one against -bubble;
    // six-point edge-midpoint and vertex-free rule, exact for quartics is not
    // needed, a fourth-order rule per element is enough for the rates
    double e2 = 0.0, g2 = 0.0;
    for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
      const auto e = oracle::local(d, t);
      const Vec2 grad_h = oracle::grad(d, e, phi);
      // Dunavant degree-4 rule
      static const double w1 = 0.223381589678011, w2 = 0.109951743655322;
      static const double a1 = 0.445948490915965, a2 = 0.091576213509771;
      const std::array<std::array<double, 3>, 6> bary{{{1 - 2 * a1, a1, a1}, {a1, 1 - 2 * a1, a1}, {a1, a1, 1 - 2 * a1},
                                                       {1 - 2 * a2, a2, a2}, {a2, 1 - 2 * a2, a2}, {a2, a2, 1 - 2 * a2}}};
      for (int q = 0; q < 6; ++q) {
        Vec2 x = Vec2::Zero();
        for (int a = 0; a < 3; ++a) x += bary[q][a] * e.x[a];
        const double w = (q < 3 ? w1 : w2) * e.area;
        const double err = oracle::interp(d, e, phi, x) + bubble(x);
        e2 += w * err * err;
        g2 += w * (grad_h + bubble_grad(x)).squaredNorm();
      }
    }
    l2.push_back(std::sqrt(e2));
    energy.push_back(std::sqrt(g2));
  }
  const double elapsed = seconds_since(start);
  bool pass = elapsed < 10.0;
  std::ostringstream detail;
  for (std::size_t i = 1; i < l2.size(); ++i) {
    const double rl2 = std::log2(l2[i - 1] / l2[i]);
    const double ren = std::log2(energy[i - 1] / energy[i]);
    pass = pass && rl2 >= 1.7 && rl2 <= 2.3 && ren >= 0.8 && ren <= 1.2;
    detail << "L2 order " << fmt(rl2) << ", energy order " << fmt(ren) << "; ";
  }
  detail << fmt(elapsed) << " s";
  return {pass, detail.str()};
}

Outcome potential_bound_on_default_run() {
  const auto start = Clock::now();
  const auto d = square(8);
  const auto models = default_ptc_model();
  const Scheme scheme(d, models, default_solver(0.5));
  auto buffer = scheme.initialize(InitialData::zero(d));
  const auto traj = scheme.advance(buffer);
  const DiagnosticsContext ctx(d, models);
  int held = 0;
  double worst = 0.0;
  for (const auto& s : traj) {
    const auto b = potential_bound(ctx.norms(), ctx.constant(), s);
    if (b.lhs <= b.rhs * (1.0 + 1e-8)) ++held;
    worst = std::max(worst, b.lhs / b.rhs);
  }
  const double elapsed = seconds_since(start);
  const bool pass = held == static_cast<int>(traj.size()) && elapsed < 60.0;
  return {pass, std::to_string(held) + "/" + std::to_string(traj.size()) + " steps, max |phi|_V / C = " +
                    fmt(worst) + ", C = " + fmt(ctx.constant().value) + ", " + fmt(elapsed) + " s"};
}

Outcome friction_bound() {
  const auto d = square(8);
  const auto models = default_ptc_model();
  const Scheme scheme(d, models, default_solver(1.0));
  auto buffer = scheme.initialize(InitialData::zero(d));
  const auto traj = scheme.advance(buffer);
  const double cap = models.friction.mu_bar * models.friction.F_bar;
  double worst = 0.0;
  std::size_t nodes = 0;
  for (const auto& s : traj)
    for (const auto& xi : s.xi) {
      worst = std::max(worst, xi.norm() / cap);
      ++nodes;
    }
  const auto sub = check_subgradient_properties(models.friction, 12345, 10000);
  const bool pass = worst <= 1.0 + 1e-10 && nodes > 0 && sub.bound_holds && sub.monotonicity_holds;
  return {pass, "max |xi| / (mu_bar F_bar) = " + fmt(worst) + " over " + std::to_string(nodes) +
                    " node-steps; sampled pairs " + std::to_string(sub.samples) + ", min margin " + fmt(sub.min_margin) +
                    (sub.monotonicity_holds ? "" : ", witness " + sub.witness)};
}

Outcome delay_inequality() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kdist(1, 10), ndist(5, 60), mdist(1, 20);
  std::normal_distribution<double> g(0.0, 1.0);
  int violations = 0;
  double tightest = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const double dt = 0.01 * (1 + trial % 3);
    const int k = kdist(rng), steps = ndist(rng), m = mdist(rng);
    const double h = k * dt;
    auto field = [&](int step) {
      SystemState s;
      s.step = step;
      s.t = step * dt;
      s.theta = ScalarField(m);
      for (int i = 0; i < m; ++i) s.theta[i] = g(rng);
      return s;
    };
    DelayBuffer buf(field(0), h, dt);
    double lhs = 0.0, rhs = h * buf.initial().theta.squaredNorm();
    for (int n = 1; n <= steps; ++n) {
      buf.push(field(n));
      lhs += dt * buf.delayed_step(n).theta.squaredNorm();
      rhs += dt * buf.latest().theta.squaredNorm();
    }
    if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    tightest = std::min(tightest, rhs - lhs);
  }
  return {violations == 0, std::to_string(violations) + " violations in 100 histories, smallest slack " + fmt(tightest)};
}

Outcome energy_uniform_in_h() {
  const auto& c = default_cascade();
  // the cascade holds 0.2, 0.1, 0.05, 0.025; this criterion uses the last three
  bool pass = c.seconds < 300.0;
  std::ostringstream detail;
  for (auto field : {&DiagnosticsRow::mech_energy, &DiagnosticsRow::thermal_energy}) {
    std::vector<double> maxima;
    for (std::size_t i = 1; i < c.diagnostics.size(); ++i) maxima.push_back(c.diagnostics[i].max_of(field));
    const double lo = *std::min_element(maxima.begin(), maxima.end());
    const double hi = *std::max_element(maxima.begin(), maxima.end());
    const double spread = (hi - lo) / lo;
    pass = pass && lo > 0.0 && spread < 0.5 && hi <= 10.0 * maxima.front();
    detail << (field == &DiagnosticsRow::mech_energy ? "mechanical" : "thermal") << " maxima " << fmt(maxima[0]) << ", "
           << fmt(maxima[1]) << ", " << fmt(maxima[2]) << " (spread " << fmt(100.0 * spread) << "%); ";
  }
  detail << "cascade " << fmt(c.seconds) << " s";
  return {pass, detail.str()};
}

Outcome cauchy_convergence() {
  const auto& rows = default_cascade().report.rows;
  if (rows.size() < 3) return {false, "cascade produced fewer than three rows"};
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double rt = rows[i].theta_l2h / rows[i - 1].theta_l2h;
    const double rv = rows[i].v_l2e / rows[i - 1].v_l2e;
    pass = pass && rt < 1.0 && rv < 1.0;
    detail << "theta ratio " << fmt(rt) << ", v ratio " << fmt(rv) << "; ";
  }
  detail << "theta diffs " << fmt(rows[0].theta_l2h) << " " << fmt(rows[1].theta_l2h) << " " << fmt(rows[2].theta_l2h);
  return {pass, detail.str()};
}

Outcome vanishing_regularizer() {
  const auto& levels = default_cascade().report.levels;
  bool pass = levels.size() >= 2;
  std::ostringstream detail;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) pass = pass && levels[i].majorant < levels[i - 1].majorant;
    detail << "h=" << levels[i].h << ": " << fmt(levels[i].majorant) << (i + 1 < levels.size() ? ", " : "");
  }
  return {pass, detail.str()};
}

Outcome joule_consistency() {
  const auto models = default_ptc_model();
  std::vector<double> gaps;
  double zero_gap = 0.0;
  for (int n : {4, 8, 16}) {
    const auto d = square(n);
    const Scheme scheme(d, models, default_solver(1.0));
    // stationary temperature, potential from the electric equation
    const ScalarField theta = d.dofs.interpolate_scalar(d.mesh, [](const Vec2& x) { return 1.0 + x.y() * (1.0 - x.x()); });
    const ScalarField phi = scheme.solve_electric(theta, 0.0);
    gaps.push_back(joule_gap(d, models, theta, phi, 0.0));
    zero_gap = std::max(zero_gap, joule_gap(d, models, theta, ScalarField::Zero(phi.size()), 0.0));
  }
  const bool pass = gaps[1] < gaps[0] && gaps[2] < gaps[1] && zero_gap <= 1e-12;
  return {pass, "gaps " + fmt(gaps[0]) + ", " + fmt(gaps[1]) + ", " + fmt(gaps[2]) + "; gap at phi = 0: " + fmt(zero_gap)};
}

// Dense monolithic oracle for the first step with friction and the 4-Laplacian
// switched off, constant conductivities. All matrices and loads come from the
// naive element loops in oracle.hpp plus the quadrature below.
Outcome monolithic_oracle() {
  const auto d = square(2);
  auto models = default_ptc_model();
  const double sigma0 = 0.6, k0 = 1.3;
  models.material.sigma_el = [&](double) { return sigma0; };
  models.material.k = [&](double) -> Mat2 { return k0 * Mat2::Identity(); };
  models.friction.mu = [](double) { return 0.0; };
  models.friction.mu_prime = [](double) { return 0.0; };
  models.friction.mu_primitive = [](double) { return 0.0; };
  models.friction.mu_bar = 0.0;
  models.friction.d_mu = 0.0;
  auto config = default_solver(1.0);
  config.regularizer_coeff = 0.0;
  const Scheme scheme(d, models, config);

  const auto ns = static_cast<Eigen::Index>(d.dofs.num_scalar());
  const auto nv = static_cast<Eigen::Index>(d.dofs.num_vector());
  std::mt19937_64 rng(77);
  InitialData data;
  data.theta0 = oracle::random_vector(ns, rng);
  data.u0 = oracle::random_vector(nv, rng, 0.1);
  data.v0 = oracle::random_vector(nv, rng, 0.1);
  auto buffer = scheme.initialize(data);
  const auto s1 = scheme.step(buffer, 1);

  const auto& mat = models.material;
  const auto& bd = models.boundary;
  const double dt = config.dt, t1 = dt;
  const double F0 = models.friction.F(Vec2::Zero(), 0.0);
  const double gauss = 0.5 / std::sqrt(3.0);

  const oracle::Dense mass = oracle::scalar_mass(d);
  const oracle::Dense stiff = oracle::scalar_stiffness(d, [](const auto&, const Vec2&) { return 1.0; });
  const oracle::Dense coupling = oracle::coupling(d, mat.m);
  const oracle::Dense vmass = oracle::vector_mass(d);
  const oracle::Dense visc = oracle::tensor_operator(d, mat.a), elast = oracle::tensor_operator(d, mat.b);

  // electric operator and its load
  const oracle::Dense a_el = sigma0 * stiff + oracle::edge_mass(d, BoundaryTag::Neumann, [&](const Vec2&) { return bd.H_N; }) +
                             oracle::edge_mass(d, BoundaryTag::Contact, [&](const Vec2&) { return bd.H_C(F0); });
  Eigen::VectorXd load_el = Eigen::VectorXd::Zero(ns);
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto e = oracle::local(d, t);
    for (const auto& q : oracle::quad_points(e))
      for (int a = 0; a < 3; ++a)
        if (oracle::sidx(d, e.nodes[a]) >= 0)
          load_el[oracle::sidx(d, e.nodes[a])] -= e.area / 3.0 * sigma0 * bd.grad_phi_b(q).dot(e.grad(a));
  }
  Eigen::VectorXd mech = Eigen::VectorXd::Zero(nv);
  for (const auto& edge : d.mesh.boundary_edges()) {
    if (edge.tag == BoundaryTag::Dirichlet) continue;
    const Vec2 pa = d.mesh.nodes()[edge.a], pb = d.mesh.nodes()[edge.b];
    const double half = 0.5 * (pb - pa).norm();
    const double coeff = edge.tag == BoundaryTag::Neumann ? bd.H_N : bd.H_C(F0);
    for (double s : {0.5 - gauss, 0.5 + gauss}) {
      const Vec2 x = (1.0 - s) * pa + s * pb;
      const Vec2 traction = edge.tag == BoundaryTag::Neumann ? bd.f2(x, t1) : Vec2(-F0 * edge.normal);
      for (const auto& [node, basis] : {std::pair{edge.a, 1.0 - s}, std::pair{edge.b, s}}) {
        const int r = oracle::sidx(d, node);
        if (r < 0) continue;
        load_el[r] -= half * coeff * bd.phi_b(x) * basis;
        mech[2 * r] += half * traction.x() * basis;
        mech[2 * r + 1] += half * traction.y() * basis;
      }
    }
  }
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto e = oracle::local(d, t);
    for (const auto& q : oracle::quad_points(e))
      for (int a = 0; a < 3; ++a) {
        const int r = oracle::sidx(d, e.nodes[a]);
        if (r < 0) continue;
        const Vec2 f = bd.f0(q, t1) * (e.area / 3.0 * e.value(a, q));
        mech[2 * r] += f.x();
        mech[2 * r + 1] += f.y();
      }
  }

  // Joule heating of the initial state; the initial potential is itself an oracle solve
  const Eigen::VectorXd phi0 = a_el.lu().solve(load_el);
  Eigen::VectorXd joule = Eigen::VectorXd::Zero(ns);
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto e = oracle::local(d, t);
    const Vec2 g = oracle::grad(d, e, phi0);
    for (const auto& q : oracle::quad_points(e))
      for (int a = 0; a < 3; ++a)
        if (oracle::sidx(d, e.nodes[a]) >= 0)
          joule[oracle::sidx(d, e.nodes[a])] += e.area / 3.0 * sigma0 * (g + bd.grad_phi_b(q)).squaredNorm() * e.value(a, q);
  }

  // one block system for (theta1, phi1, v1)
  const Eigen::Index n = 2 * ns + nv;
  oracle::Dense big = oracle::Dense::Zero(n, n);
  Eigen::VectorXd rhs(n);
  const double c = mat.mass_thermal() / dt;
  big.block(0, 0, ns, ns) = c * mass + k0 * stiff +
                            oracle::edge_mass(d, BoundaryTag::Neumann, [&](const Vec2&) { return bd.h_N; }) +
                            oracle::edge_mass(d, BoundaryTag::Contact, [&](const Vec2&) { return bd.h_C(F0); });
  rhs.segment(0, ns) = c * mass * data.theta0 + joule + mat.theta_ref * coupling.transpose() * data.v0;
  big.block(ns, ns, ns, ns) = a_el;
  rhs.segment(ns, ns) = load_el;
  const double cm = mat.mass_mech() / dt;
  big.block(2 * ns, 2 * ns, nv, nv) = cm * vmass + visc + dt * elast;
  rhs.segment(2 * ns, nv) = cm * vmass * data.v0 - elast * data.u0 - coupling * data.theta0 + mech;
  const Eigen::VectorXd x = big.fullPivLu().solve(rhs);

  Eigen::VectorXd got(n);
  got << s1.theta, s1.phi, s1.v;
  const double rel = (got - x).norm() / x.norm();
  const double u_rel = (s1.u - (data.u0 + dt * x.segment(2 * ns, nv))).norm() / s1.u.norm();
  return {rel <= 1e-10 && u_rel <= 1e-10, "relative difference " + fmt(rel) + " over " + std::to_string(n) +
                                              " unknowns, displacement " + fmt(u_rel)};
}

Outcome jacobians() {
  const auto d = square(2);
  const auto ns = static_cast<Eigen::Index>(d.dofs.num_scalar());
  std::mt19937_64 rng(4242);
  double worst_p = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto theta = oracle::random_vector(ns, rng);
    const oracle::Dense jac(assemble_p_laplacian(d, theta).jacobian);
    const double step = 1e-5;
    oracle::Dense fd(ns, ns);
    for (Eigen::Index j = 0; j < ns; ++j) {
      Vector tp = theta, tm = theta;
      tp[j] += step;
      tm[j] -= step;
      fd.col(j) = (assemble_p_laplacian(d, tp).residual - assemble_p_laplacian(d, tm).residual) / (2.0 * step);
    }
    worst_p = std::max(worst_p, (jac - fd).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff());
  }

  const auto models = default_ptc_model();
  const auto ops = MomentumOperators::assemble(d, models.material);
  MomentumProblem problem(d, models.friction, ops, models.material.mass_mech(), 0.0125, 1e-6);
  const auto nv = static_cast<Eigen::Index>(d.dofs.num_vector());
  problem.set_data(oracle::random_vector(nv, rng), oracle::random_vector(nv, rng), oracle::random_vector(nv, rng),
                   oracle::random_vector(nv, rng), 0.0125);
  double worst_m = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = oracle::random_vector(nv, rng, 0.5);
    const oracle::Dense jac(problem.jacobian(v));
    const double step = 1e-7;
    oracle::Dense fd(nv, nv);
    for (Eigen::Index j = 0; j < nv; ++j) {
      Vector vp = v, vm = v;
      vp[j] += step;
      vm[j] -= step;
      fd.col(j) = (problem.residual(vp) - problem.residual(vm)) / (2.0 * step);
    }
    worst_m = std::max(worst_m, (jac - fd).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff());
  }
  return {worst_p <= 1e-6 && worst_m <= 1e-5,
          "4-Laplacian " + fmt(worst_p) + ", friction step " + fmt(worst_m) + " (max relative discrepancy)"};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Cli {
  int code;
  std::string out, err;
};

Cli cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"thermistor"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("thermistor_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

fs::path default_config() { return fs::path(THERMISTOR_SOURCE_DIR) / "configs" / "default.cfg"; }

Outcome a8_gate() {
  const auto ok = cli({"check", "--config", default_config().string()});
  std::string text = read_file(default_config());
  const auto pos = text.find("[friction]\n");
  if (pos == std::string::npos) return {false, "default config has no [friction] section"};
  text.insert(pos + 11, "d_mu = 200000\n");  // 10^6 times the default 0.2
  const auto path = scratch() / "inflated.cfg";
  std::ofstream(path, std::ios::binary) << text;
  const auto bad = cli({"check", "--config", path.string()});
  const bool named = bad.err.find("A8") != std::string::npos;
  return {ok.code == 0 && bad.code == 4 && named,
          "default exit " + std::to_string(ok.code) + ", inflated exit " + std::to_string(bad.code) +
              (named ? ", A8 named" : ", A8 not named")};
}

Outcome zero_and_determinism() {
  const auto zero_cfg = scratch() / "zero.cfg";
  std::ofstream(zero_cfg, std::ios::binary) << "[mesh]\nn = 8\n[friction]\nF = 0\n[boundary]\nvoltage = 0\nf0_x = 0\n"
                                               "[solver]\nT = 0.5\n[diagnostics]\nvalidation_samples = 1000\n";
  const auto z = cli({"run", "--config", zero_cfg.string(), "--out", (scratch() / "zero").string()});
  bool all_zero = z.code == 0;
  std::istringstream traj(read_file(scratch() / "zero" / "trajectory.csv"));
  std::string line;
  std::getline(traj, line);
  std::getline(traj, line);
  std::size_t rows = 0;
  while (std::getline(traj, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string cell;
    std::getline(fields, cell, ',');  // step
    std::getline(fields, cell, ',');  // t
    while (std::getline(fields, cell, ',')) all_zero = all_zero && std::stod(cell) == 0.0;
  }
  all_zero = all_zero && rows == 41;

  const auto a = cli({"run", "--config", default_config().string(), "--out", (scratch() / "a").string()});
  const auto b = cli({"run", "--config", default_config().string(), "--out", (scratch() / "b").string()});
  bool identical = a.code == 0 && b.code == 0;
  for (const char* name : {"trajectory.csv", "diagnostics.csv", "cascade.csv"}) {
    const auto fa = read_file(scratch() / "a" / name);
    identical = identical && !fa.empty() && fa == read_file(scratch() / "b" / name);
  }
  return {all_zero && identical, std::string("zero run ") + (all_zero ? "identically zero" : "NOT zero") + " over " +
                                     std::to_string(rows) + " rows; repeated default runs " +
                                     (identical ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion(1, "elliptic manufactured-solution convergence", manufactured_convergence);
  criterion(2, "discrete potential bound on the default run", potential_bound_on_default_run);
  criterion(3, "friction traction bound and sampled relaxed monotonicity", friction_bound);
  criterion(4, "discrete delay inequality on random histories", delay_inequality);
  criterion(5, "energy bounds uniform in h", energy_uniform_in_h);
  criterion(6, "Cauchy convergence along the delay cascade", cauchy_convergence);
  criterion(7, "vanishing 4-Laplacian regularizer", vanishing_regularizer);
  criterion(8, "Joule reformulation consistency", joule_consistency);
  criterion(9, "staggered step equals a dense monolithic solve", monolithic_oracle);
  criterion(10, "Jacobians against central finite differences", jacobians);
  criterion(11, "assumption gate on the friction constant", a8_gate);
  criterion(12, "zero fixed point and determinism", zero_and_determinism);
  fs::remove_all(scratch());
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " in "
            << fmt(seconds_since(start)) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
