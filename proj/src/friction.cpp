#include "thermistor/friction.hpp"

#include "thermistor/fe.hpp"

#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace thermistor {

double mu_integral(const FrictionModel& fric, double r) {
  if (r <= 0.0) return 0.0;
  if (fric.mu_primitive) return fric.mu_primitive(r);
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(fric.mu, 0.0, r, 15, 1e-13);
}

double j_value(const Discretization& disc, const FrictionModel& fric, const VectorField& velocity,
               double t) {
  const auto v = disc.dofs.expand_vector(velocity);
  const auto& nodes = disc.mesh.nodes();
  double sum = 0.0;
  for (const auto& edge : disc.mesh.boundary_edges()) {
    if (edge.tag != BoundaryTag::Contact) continue;
    const double len = edge.length(nodes);
    const Vec2 tau(-edge.normal.y(), edge.normal.x());
    for (const auto& q : fe::kEdgeGauss2) {
      const Vec2 x = (1.0 - q.s) * nodes[edge.a] + q.s * nodes[edge.b];
      const Vec2 vx = (1.0 - q.s) * v[edge.a] + q.s * v[edge.b];
      sum += q.weight * len * fric.F(x, t) * mu_integral(fric, std::abs(vx.dot(tau)));
    }
  }
  return sum;
}

Vec2 xi_regularized(const FrictionModel& fric, const Vec2& v_tau, double F_val, double eps) {
  const double r = std::sqrt(v_tau.squaredNorm() + eps * eps);
  return (fric.mu(r) * F_val / r) * v_tau;
}

Mat2 xi_regularized_jacobian(const FrictionModel& fric, const Vec2& v_tau, double F_val, double eps) {
  const double r = std::sqrt(v_tau.squaredNorm() + eps * eps);
  const double mu = fric.mu(r);
  const double dmu = fric.mu_derivative(r);
  return F_val * ((mu / r) * Mat2::Identity() +
                  (dmu / (r * r) - mu / (r * r * r)) * (v_tau * v_tau.transpose()));
}

MomentumOperators MomentumOperators::assemble(const Discretization& disc, const MaterialModel& mat) {
  return {assemble_vector_mass(disc), assemble_elastic_operators(disc, mat),
          assemble_coupling_matrix(disc, mat)};
}

MomentumProblem::MomentumProblem(const Discretization& disc, const FrictionModel& fric,
                                 const MomentumOperators& ops, double mass_coeff, double dt, double eps)
    : disc_(disc), fric_(fric), ops_(ops), mass_coeff_(mass_coeff), dt_(dt), eps_(eps) {
  linear_ = (mass_coeff / dt) * ops.mass + ops.elastic.viscosity + dt * ops.elastic.elasticity;
  const auto n = static_cast<Eigen::Index>(disc.dofs.num_vector());
  u_prev_ = v_prev_ = thermal_load_ = mech_load_ = Vector::Zero(n);
}

void MomentumProblem::set_data(const VectorField& u_prev, const VectorField& v_prev,
                               const Vector& thermal_load, const Vector& mech_load, double t) {
  u_prev_ = u_prev;
  v_prev_ = v_prev;
  thermal_load_ = thermal_load;
  mech_load_ = mech_load;
  contact_F_.clear();
  for (int node : disc_.dofs.contact_nodes) contact_F_.push_back(fric_.F(disc_.mesh.nodes()[node], t));
}

Vec2 MomentumProblem::tangential(const VectorField& v, std::size_t c) const {
  const int node = disc_.dofs.contact_nodes[c];
  const int s = disc_.dofs.scalar_index[node];
  const Vec2 vn(v[2 * s], v[2 * s + 1]);
  const Vec2& tau = disc_.dofs.contact_tangent[c];
  return vn.dot(tau) * tau;
}

std::vector<Vec2> MomentumProblem::contact_traction(const VectorField& v) const {
  std::vector<Vec2> xi;
  xi.reserve(disc_.dofs.contact_nodes.size());
  for (std::size_t c = 0; c < disc_.dofs.contact_nodes.size(); ++c)
    xi.push_back(xi_regularized(fric_, tangential(v, c), contact_F_[c], eps_));
  return xi;
}

Vector MomentumProblem::friction_force(const VectorField& v) const {
  Vector out = Vector::Zero(v.size());
  const auto& dofs = disc_.dofs;
  for (std::size_t c = 0; c < dofs.contact_nodes.size(); ++c) {
    const Vec2 xi = xi_regularized(fric_, tangential(v, c), contact_F_[c], eps_);
    const int s = dofs.scalar_index[dofs.contact_nodes[c]];
    out[2 * s] += dofs.contact_weight[c] * xi.x();
    out[2 * s + 1] += dofs.contact_weight[c] * xi.y();
  }
  return out;
}

Vector MomentumProblem::residual(const VectorField& v) const {
  Vector r = (mass_coeff_ / dt_) * (ops_.mass * (v - v_prev_)) + ops_.elastic.viscosity * v +
             ops_.elastic.elasticity * (u_prev_ + dt_ * v) + thermal_load_ - mech_load_;
  return r + friction_force(v);
}

SparseMatrix MomentumProblem::jacobian(const VectorField& v) const {
  std::vector<Eigen::Triplet<double>> trip;
  const auto& dofs = disc_.dofs;
  for (std::size_t c = 0; c < dofs.contact_nodes.size(); ++c) {
    const Vec2& tau = dofs.contact_tangent[c];
    const Mat2 proj = tau * tau.transpose();
    const Mat2 block =
        dofs.contact_weight[c] * xi_regularized_jacobian(fric_, tangential(v, c), contact_F_[c], eps_) * proj;
    const int s = dofs.scalar_index[dofs.contact_nodes[c]];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.emplace_back(2 * s + i, 2 * s + j, block(i, j));
  }
  SparseMatrix friction(linear_.rows(), linear_.cols());
  friction.setFromTriplets(trip.begin(), trip.end());
  return linear_ + friction;
}

MomentumResult solve_momentum_step(const MomentumProblem& problem, const NewtonOptions& options) {
  const double target = options.tol * (1.0 + problem.load_norm());
  VectorField v = problem.v_prev();
  Vector r = problem.residual(v);
  double rnorm = r.norm();
  int it = 0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  while (rnorm > target) {
    if (it == options.max_iter) {
      std::ostringstream os;
      os << "momentum Newton did not converge after " << it << " iterations, residual " << rnorm;
      throw SolverError(os.str());
    }
    lu.compute(Eigen::SparseMatrix<double>(problem.jacobian(v)));
    if (lu.info() != Eigen::Success) throw SolverError("momentum Jacobian factorization failed");
    const Vector step = lu.solve(-r);
    double alpha = 1.0;
    VectorField trial = v + step;
    Vector rt = problem.residual(trial);
    for (int h = 0; h < options.max_halvings && !(rt.norm() < rnorm); ++h) {
      alpha *= 0.5;
      trial = v + alpha * step;
      rt = problem.residual(trial);
    }
    v = std::move(trial);
    r = std::move(rt);
    rnorm = r.norm();
    ++it;
  }
  MomentumResult out;
  out.u = problem.u_prev() + problem.dt() * v;
  out.xi = problem.contact_traction(v);
  out.v = std::move(v);
  out.iterations = it;
  out.residual_norm = rnorm;
  return out;
}

SubgradientReport check_subgradient_properties(const FrictionModel& fric, std::uint64_t seed,
                                               int samples, double eps) {
  constexpr int kPoints = 3;  // quadrature points per sampled contact field
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), coord(-2.0, 2.0), angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> log_scale(-4.0, 0.0);

  SubgradientReport report;
  report.samples = samples;
  report.min_pairing = std::numeric_limits<double>::infinity();
  report.min_margin = std::numeric_limits<double>::infinity();
  const double cap = fric.mu_bar * fric.F_bar;

  for (int n = 0; n < samples; ++n) {
    double pairing = 0.0, dist2 = 0.0;
    std::array<Vec2, kPoints> v1, v2;
    for (int p = 0; p < kPoints; ++p) {
      const double w = 0.05 + unit(rng);
      const double F = fric.F_bar * unit(rng);
      v1[p] = Vec2(coord(rng), coord(rng));
      if (n % 2 == 0) {
        v2[p] = Vec2(coord(rng), coord(rng));
      } else {
        // nearby pair, scales 1e-4 .. 1
        const double a = angle(rng);
        v2[p] = v1[p] + std::pow(10.0, log_scale(rng)) * Vec2(std::cos(a), std::sin(a));
      }
      const Vec2 x1 = xi_regularized(fric, v1[p], F, eps);
      const Vec2 x2 = xi_regularized(fric, v2[p], F, eps);
      if (cap > 0.0)
        report.max_bound_ratio = std::max({report.max_bound_ratio, x1.norm() / cap, x2.norm() / cap});
      else
        report.max_bound_ratio = std::max({report.max_bound_ratio, x1.norm(), x2.norm()});
      pairing += w * (x1 - x2).dot(v1[p] - v2[p]);
      dist2 += w * (v1[p] - v2[p]).squaredNorm();
    }
    if (dist2 == 0.0) continue;
    report.min_pairing = std::min(report.min_pairing, pairing / dist2);
    const double margin = pairing + fric.F_bar * fric.d_mu * dist2;
    report.min_margin = std::min(report.min_margin, margin);
    // roundoff floor relative to the size of the pairing
    if (margin < -1e-12 * std::abs(pairing) && report.monotonicity_holds) {
      report.monotonicity_holds = false;
      std::ostringstream os;
      os.precision(12);
      os << "v1[0]=(" << v1[0].x() << ", " << v1[0].y() << ") v2[0]=(" << v2[0].x() << ", "
         << v2[0].y() << ") margin=" << margin;
      report.witness = os.str();
    }
  }
  report.bound_holds = report.max_bound_ratio <= 1.0 + 1e-12;
  return report;
}

}  // namespace thermistor
