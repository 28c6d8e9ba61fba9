#include "thermistor/diagnostics.hpp"

#include "thermistor/fe.hpp"
#include "thermistor/friction.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace thermistor {

namespace {

double quadratic_form(const SparseMatrix& m, const Vector& x) { return std::max(0.0, x.dot(m * x)); }

}  // namespace

DiscreteNorms::DiscreteNorms(const Discretization& disc)
    : disc_(disc),
      mass_(assemble_scalar_mass(disc)),
      stiffness_(assemble_unit_stiffness(disc)),
      vector_mass_(assemble_vector_mass(disc)),
      vector_stiffness_(assemble_vector_stiffness(disc)) {}

double DiscreteNorms::H(const ScalarField& theta) const { return std::sqrt(quadratic_form(mass_, theta)); }
double DiscreteNorms::V(const ScalarField& theta) const { return std::sqrt(quadratic_form(stiffness_, theta)); }
double DiscreteNorms::Q(const VectorField& v) const { return std::sqrt(quadratic_form(vector_mass_, v)); }
double DiscreteNorms::E(const VectorField& v) const { return std::sqrt(quadratic_form(vector_stiffness_, v)); }
double DiscreteNorms::U4(const ScalarField& theta) const { return integrate_grad_fourth(disc_, theta); }

double integrate_grad_fourth(const Discretization& disc, const ScalarField& theta_field) {
  const Vector theta = disc.dofs.expand_scalar(theta_field);
  double sum = 0.0;
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    const double g2 = fe::gradient(e, theta).squaredNorm();
    sum += e.area * g2 * g2;
  }
  return sum;
}

PotentialConstant potential_constant(const Discretization& disc, const Models& models, double trace_norm) {
  const auto& bd = models.boundary;
  const auto& mat = models.material;
  PotentialConstant c;
  double h1 = 0.0;
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    for (const auto& q : fe::kTriangleOrder2) {
      const Vec2 x = e.point(q.bary);
      const double v = bd.phi_b(x);
      h1 += e.area * q.weight * (v * v + bd.grad_phi_b(x).squaredNorm());
    }
  }
  double neumann = 0.0, contact = 0.0;
  const auto& nodes = disc.mesh.nodes();
  for (const auto& edge : disc.mesh.boundary_edges()) {
    if (edge.tag == BoundaryTag::Dirichlet) continue;
    const double len = edge.length(nodes);
    for (const auto& q : fe::kEdgeGauss2) {
      const double v = bd.phi_b((1.0 - q.s) * nodes[edge.a] + q.s * nodes[edge.b]);
      (edge.tag == BoundaryTag::Neumann ? neumann : contact) += q.weight * len * v * v;
    }
  }
  c.phi_b_h1 = std::sqrt(h1);
  c.phi_b_neumann = std::sqrt(neumann);
  c.phi_b_contact = std::sqrt(contact);
  c.trace_norm = trace_norm;
  c.terms = {mat.M_sigma * c.phi_b_h1 / mat.sigma_star,
             bd.H_N * c.phi_b_neumann * trace_norm / mat.sigma_star,
             bd.H_C_bar * c.phi_b_contact * trace_norm / mat.sigma_star};
  c.value = c.terms[0] + c.terms[1] + c.terms[2];
  return c;
}

PotentialBound potential_bound(const DiscreteNorms& norms, const PotentialConstant& constant,
                               const SystemState& state) {
  PotentialBound b;
  b.lhs = norms.V(state.phi);
  b.rhs = constant.value;
  b.holds = b.lhs <= b.rhs * (1.0 + 1e-8);
  return b;
}

double weighted_gradient_integral(const Discretization& disc, const Models& models, const ScalarField& theta_field,
                                  const ScalarField& phi_field) {
  const Vector theta = disc.dofs.expand_scalar(theta_field);
  const Vector phi = disc.dofs.expand_scalar(phi_field);
  double sum = 0.0;
  for (std::size_t k = 0; k < disc.mesh.num_triangles(); ++k) {
    const auto e = fe::make_element(disc.mesh, k);
    const double g2 = fe::gradient(e, phi).squaredNorm();
    for (const auto& q : fe::kTriangleOrder2) {
      const double p = fe::interpolate(e, phi, q.bary);
      sum += e.area * q.weight * models.material.sigma_el(fe::interpolate(e, theta, q.bary)) * p * p * g2;
    }
  }
  return sum;
}

double joule_gap(const Discretization& disc, const Models& models, const ScalarField& theta,
                 const ScalarField& phi, double t) {
  const Vector direct = assemble_joule_load_direct(disc, models, theta, phi);
  const Vector reformulated = assemble_joule_load_reformulated(disc, models, theta, phi, t);
  return direct.size() == 0 ? 0.0 : (direct - reformulated).cwiseAbs().maxCoeff();
}

double dual_norm_u(const Discretization& disc, const Vector& r) {
  const double rnorm = r.norm();
  if (rnorm == 0.0) return 0.0;
  const SparseMatrix stiffness = assemble_unit_stiffness(disc);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> linear(stiffness);
  if (linear.info() != Eigen::Success) throw SolverError("stiffness factorization failed");

  // Start on the ray of the linear solution at the energy minimizer along it.
  Vector w = linear.solve(r);
  const double a = integrate_grad_fourth(disc, w);
  const double b = r.dot(w);
  if (a <= 0.0 || b <= 0.0) return 0.0;
  w *= std::cbrt(b / a);

  auto energy = [&](const Vector& x) { return 0.25 * integrate_grad_fourth(disc, x) - r.dot(x); };
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  const double floor = 1e-14 * stiffness.diagonal().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    auto pl = assemble_p_laplacian(disc, w);
    const Vector g = pl.residual - r;
    if (g.norm() <= 1e-11 * rnorm) break;
    // the 4-Laplacian tangent is only semidefinite where gradients vanish
    const double shift = std::max(floor, 1e-12 * pl.jacobian.diagonal().maxCoeff());
    solver.compute(Eigen::SparseMatrix<double>(pl.jacobian + shift * stiffness));
    if (solver.info() != Eigen::Success) throw SolverError("dual-norm Newton factorization failed");
    const Vector step = solver.solve(-g);
    const double e0 = energy(w);
    const double slope = g.dot(step);
    double alpha = 1.0;
    while (alpha > 1e-12 && energy(w + alpha * step) > e0 + 1e-4 * alpha * slope) alpha *= 0.5;
    w += alpha * step;
  }
  return std::pow(integrate_grad_fourth(disc, w), 0.75);
}

RegularizerMagnitude regularizer_magnitude(const Discretization& disc, const ScalarField& theta, double h) {
  RegularizerMagnitude m;
  const double u4 = integrate_grad_fourth(disc, theta);
  m.majorant = h * std::pow(u4, 0.75);
  if (h == 0.0 || u4 == 0.0) return m;
  const Vector r = h * assemble_p_laplacian(disc, theta).residual;
  m.dual_estimate = dual_norm_u(disc, r);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> linear(
      Eigen::SparseMatrix<double>(assemble_unit_stiffness(disc)));
  m.surrogate = std::pow(disc.mesh.total_area(), 0.25) * std::sqrt(std::max(0.0, r.dot(linear.solve(r))));
  return m;
}

RegularizerMagnitude regularizer_summary(const Discretization& disc, const Trajectory& trajectory, double h,
                                         double dt) {
  double u4 = 0.0, dual = 0.0, surrogate = 0.0;
  for (std::size_t n = 1; n < trajectory.size(); ++n) {
    const auto m = regularizer_magnitude(disc, trajectory[n].theta, h);
    u4 += dt * integrate_grad_fourth(disc, trajectory[n].theta);
    dual += dt * std::pow(m.dual_estimate, 4.0 / 3.0);
    surrogate += dt * std::pow(m.surrogate, 4.0 / 3.0);
  }
  RegularizerMagnitude out;
  out.majorant = std::pow(h, 0.25) * std::pow(h * u4, 0.75);
  out.dual_estimate = std::pow(dual, 0.75);
  out.surrogate = std::pow(surrogate, 0.75);
  return out;
}

double DiagnosticsReport::max_of(double DiagnosticsRow::*field) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) m = std::max(m, row.*field);
  return m;
}

DiagnosticsContext::DiagnosticsContext(const Discretization& disc, const Models& models)
    : disc_(disc),
      models_(models),
      norms_(disc),
      constant_(potential_constant(disc, models, estimate_scalar_trace_norm(disc.mesh, disc.dofs))) {}

DiagnosticsReport DiagnosticsContext::energy_report(const Trajectory& trajectory,
                                                    const DiagnosticsOptions& options) const {
  DiagnosticsReport report;
  const double cap = models_.friction.mu_bar * models_.friction.F_bar;
  double viscous = 0.0, theta_v2 = 0.0, theta_u4 = 0.0;
  auto flag = [&](const SystemState& s, const std::string& what) {
    std::ostringstream os;
    os << "t=" << s.t << ": " << what;
    report.violations.push_back(os.str());
  };

  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    const auto& s = trajectory[n];
    DiagnosticsRow row;
    row.level_h = options.h;
    row.step = s.step;
    row.t = s.t;
    const auto bound = potential_bound(norms_, constant_, s);
    row.phi_v = bound.lhs;
    row.potential_c = bound.rhs;
    row.weighted_joule = weighted_gradient_integral(disc_, models_, s.theta, s.phi);
    row.kinetic = std::pow(norms_.Q(s.v), 2);
    row.u_e2 = std::pow(norms_.E(s.u), 2);
    row.theta_h2 = std::pow(norms_.H(s.theta), 2);
    const double u4 = norms_.U4(s.theta);
    if (n > 0) {
      viscous += options.dt * std::pow(norms_.E(s.v), 2);
      theta_v2 += options.dt * std::pow(norms_.V(s.theta), 2);
      theta_u4 += options.h * options.dt * u4;
    }
    row.viscous_acc = viscous;
    row.theta_v2_acc = theta_v2;
    row.theta_u4_acc = theta_u4;
    row.mech_energy = row.kinetic + row.viscous_acc + row.u_e2;
    row.thermal_energy = row.theta_h2 + row.theta_v2_acc + row.theta_u4_acc;
    if (options.dual_norms) {
      const auto reg = regularizer_magnitude(disc_, s.theta, options.regularizer);
      row.reg_majorant = reg.majorant;
      row.reg_dual = reg.dual_estimate;
      row.reg_surrogate = reg.surrogate;
    } else {
      row.reg_majorant = options.regularizer * std::pow(u4, 0.75);
    }
    row.joule_gap = joule_gap(disc_, models_, s.theta, s.phi, s.t);
    for (const auto& xi : s.xi) row.xi_ratio = std::max(row.xi_ratio, cap > 0.0 ? xi.norm() / cap : xi.norm());
    const Vector joule = assemble_joule_load_direct(disc_, models_, s.theta, s.phi);
    const Vector friction = assemble_frictional_heat(disc_, models_.friction, s.v, s.t);
    row.min_heat_load = std::min(joule.size() ? joule.minCoeff() : 0.0, friction.size() ? friction.minCoeff() : 0.0);

    if (!bound.holds) flag(s, "potential bound violated");
    if (row.xi_ratio > 1.0 + 1e-10) flag(s, "friction traction exceeds mu_bar * F_bar");
    if (row.min_heat_load < -1e-14) flag(s, "negative heat source entry");
    if (options.weighted_ceiling && row.weighted_joule > *options.weighted_ceiling)
      flag(s, "weighted gradient integral above ceiling");
    if (options.energy_ceiling && std::max(row.mech_energy, row.thermal_energy) > *options.energy_ceiling)
      flag(s, "energy above ceiling");
    const double values[] = {row.phi_v, row.weighted_joule, row.mech_energy, row.thermal_energy, row.reg_dual, row.joule_gap};
    for (double v : values)
      if (!std::isfinite(v)) {
        flag(s, "non-finite diagnostic");
        break;
      }
    report.rows.push_back(row);
  }
  return report;
}

void write_diagnostics_csv(std::ostream& out, const std::string& header_comment, const DiagnosticsReport& report) {
  out << "# " << header_comment << '\n';
  out << "h,step,t,phi_V,potential_C,weighted_joule,kinetic,viscous_acc,u_E2,theta_H2,theta_V2_acc,"
         "theta_U4_acc,mech_energy,thermal_energy,reg_majorant,reg_dual,reg_surrogate,joule_gap,xi_ratio,min_heat_load\n";
  out << std::setprecision(17);
  for (const auto& r : report.rows) {
    out << r.level_h << ',' << r.step << ',' << r.t << ',' << r.phi_v << ',' << r.potential_c << ','
        << r.weighted_joule << ',' << r.kinetic << ',' << r.viscous_acc << ',' << r.u_e2 << ',' << r.theta_h2
        << ',' << r.theta_v2_acc << ',' << r.theta_u4_acc << ',' << r.mech_energy << ',' << r.thermal_energy << ','
        << r.reg_majorant << ',' << r.reg_dual << ',' << r.reg_surrogate << ',' << r.joule_gap << ','
        << r.xi_ratio << ',' << r.min_heat_load << '\n';
  }
}

}  // namespace thermistor
