#include "thermistor/materials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace thermistor {

Tensor4 Tensor4::isotropic(double lambda, double mu) {
  Tensor4 t;
  auto kd = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          t(i, j, k, l) = lambda * kd(i, j) * kd(k, l) + mu * (kd(i, k) * kd(j, l) + kd(i, l) * kd(j, k));
  return t;
}

double Tensor4::contract(const Mat2& xi, const Mat2& eta) const {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) sum += (*this)(i, j, k, l) * xi(i, j) * eta(k, l);
  return sum;
}

double FrictionModel::mu_derivative(double s) const {
  if (mu_prime) return mu_prime(s);
  const double step = 1e-6 * std::max(1.0, std::abs(s));
  if (s - step < 0.0) return (mu(s + step) - mu(s)) / step;
  return (mu(s + step) - mu(s - step)) / (2.0 * step);
}

Models default_ptc_model(const PtcParameters& p) {
  Models models;
  auto& mat = models.material;
  mat.rho = p.rho;
  mat.c_p = p.c_p;
  mat.theta_ref = p.theta_ref;
  mat.a = Tensor4::isotropic(p.visc_lambda, p.visc_mu);
  mat.b = Tensor4::isotropic(p.elast_lambda, p.elast_mu);
  mat.m = p.m0 * Mat2::Identity();

  const double k_amp = p.k_amp;
  mat.k = [k_amp](double s) -> Mat2 {
    return (1.0 + k_amp * s * s / (1.0 + s * s)) * Mat2::Identity();
  };
  const double lo = p.sigma_star, hi = p.sigma_max, kappa = p.kappa, s_c = p.s_c;
  mat.sigma_el = [lo, hi, kappa, s_c](double s) {
    // logistic in s; exp overflow saturates to the lower bound
    return lo + (hi - lo) / (1.0 + std::exp(kappa * (s - s_c)));
  };
  mat.sigma_star = lo;
  mat.M_sigma = hi;
  mat.sigma_lipschitz = (hi - lo) * kappa / 4.0;
  // max of d/ds [s^2 / (1 + s^2)] = 3 sqrt(3) / 8, attained at s = 1/sqrt(3)
  mat.k_lipschitz = k_amp * 3.0 * std::sqrt(3.0) / 8.0;
  mat.k_upper = 1.0 + k_amp;
  mat.delta = std::min({1.0, 2.0 * p.visc_mu, 2.0 * p.elast_mu});

  auto& fr = models.friction;
  const double mu_s = p.mu_s, mu_d = p.mu_d, beta = p.beta;
  fr.mu = [mu_s, mu_d, beta](double s) { return mu_d + (mu_s - mu_d) * std::exp(-beta * s); };
  fr.mu_prime = [mu_s, mu_d, beta](double s) { return -beta * (mu_s - mu_d) * std::exp(-beta * s); };
  fr.mu_primitive = [mu_s, mu_d, beta](double r) {
    return mu_d * r + (mu_s - mu_d) * (-std::expm1(-beta * r)) / beta;
  };
  fr.mu_bar = std::max(mu_s, mu_d);
  fr.d_mu = p.d_mu.value_or(beta * std::max(0.0, mu_s - mu_d));
  const double F = p.F;
  fr.F = [F](const Vec2&, double) { return F; };
  fr.F_bar = F;

  auto& bd = models.boundary;
  bd.h_N = p.h_N;
  bd.H_N = p.H_N;
  bd.h_C = [](double f) { return 1.0 / (1.0 + f); };
  bd.H_C = [](double f) { return 1.0 / (1.0 + f); };
  bd.H_C_bar = 1.0;  // sup of 1 / (1 + f) over f >= 0
  const double volt = p.voltage;
  bd.phi_b = [volt](const Vec2& x) { return volt * x.x(); };
  bd.grad_phi_b = [volt](const Vec2&) { return Vec2(volt, 0.0); };
  const Vec2 f0 = p.f0, f2 = p.f2;
  bd.f0 = [f0](const Vec2&, double) { return f0; };
  bd.f2 = [f2](const Vec2&, double) { return f2; };
  return models;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kLipschitzSlack = 1.01;

std::string witness(std::initializer_list<std::pair<const char*, double>> values) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [name, v] : values) {
    os << (first ? "" : ", ") << name << "=" << v;
    first = false;
  }
  return os.str();
}

// Tracks the smallest slack seen and the sample that produced it.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::string detail;

  void update(double m, const std::function<std::string()>& describe) {
    if (m < margin) {
      margin = m;
      detail = describe();
    }
  }
};

// Mixture of O(1) arguments and the full range [-1e6, 1e6].
double sample_argument(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> near(-10.0, 10.0), far(-1e6, 1e6);
  std::bernoulli_distribution pick_far(0.25);
  return pick_far(rng) ? far(rng) : near(rng);
}

AssumptionCheck check_a2(const MaterialModel& mat, std::mt19937_64& rng, int samples) {
  AssumptionCheck c{"A2", true, 0.0, {}};
  Worst lower, upper, lip;
  std::normal_distribution<double> gap(0.0, 0.1);
  for (int i = 0; i < samples; ++i) {
    const double s = sample_argument(rng);
    const double v = mat.sigma_el(s);
    lower.update(v - mat.sigma_star, [&] { return witness({{"s", s}, {"sigma_el", v}}); });
    upper.update(mat.M_sigma - v, [&] { return witness({{"s", s}, {"sigma_el", v}}); });
    const double t = s + gap(rng);
    if (t != s) {
      const double q = std::abs(mat.sigma_el(t) - v) / std::abs(t - s);
      lip.update(mat.sigma_lipschitz * kLipschitzSlack - q,
                 [&] { return witness({{"s1", s}, {"s2", t}, {"quotient", q}}); });
    }
  }
  const bool positive = mat.sigma_star > 0.0;
  c.margin = std::min({lower.margin, upper.margin, lip.margin});
  c.passed = positive && lower.margin >= 0.0 && upper.margin >= -kRelTol * mat.M_sigma &&
             lip.margin >= 0.0;
  if (!positive)
    c.detail = "sigma_star must be positive";
  else if (lower.margin < 0.0)
    c.detail = "lower bound violated: " + lower.detail;
  else if (upper.margin < -kRelTol * mat.M_sigma)
    c.detail = "upper bound violated: " + upper.detail;
  else if (lip.margin < 0.0)
    c.detail = "Lipschitz bound violated: " + lip.detail;
  return c;
}

AssumptionCheck check_a3(const MaterialModel& mat, std::mt19937_64& rng, int samples) {
  AssumptionCheck c{"A3", true, 0.0, {}};
  Worst ell, bound, lip;
  std::normal_distribution<double> normal(0.0, 1.0), gap(0.0, 0.1);
  for (int i = 0; i < samples; ++i) {
    const double s = sample_argument(rng);
    const Mat2 k = mat.k(s);
    const Vec2 xi(normal(rng), normal(rng));
    const double q = xi.dot(k * xi) - mat.delta * xi.squaredNorm();
    ell.update(q + kRelTol * xi.squaredNorm(), [&] { return witness({{"s", s}, {"xi1", xi.x()}, {"xi2", xi.y()}}); });
    bound.update(mat.k_upper - k.cwiseAbs().maxCoeff(), [&] { return witness({{"s", s}}); });
    const double t = s + gap(rng);
    if (t != s) {
      const double d = (mat.k(t) - k).cwiseAbs().maxCoeff() / std::abs(t - s);
      lip.update(mat.k_lipschitz * kLipschitzSlack - d,
                 [&] { return witness({{"s1", s}, {"s2", t}, {"quotient", d}}); });
    }
  }
  c.margin = std::min({ell.margin, bound.margin, lip.margin});
  c.passed = mat.delta > 0.0 && ell.margin >= 0.0 && bound.margin >= 0.0 && lip.margin >= 0.0;
  if (mat.delta <= 0.0)
    c.detail = "delta must be positive";
  else if (ell.margin < 0.0)
    c.detail = "ellipticity violated: " + ell.detail;
  else if (bound.margin < 0.0)
    c.detail = "bound k_upper violated: " + bound.detail;
  else if (lip.margin < 0.0)
    c.detail = "Lipschitz bound violated: " + lip.detail;
  return c;
}

bool symmetric(const Tensor4& t) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double v = t(i, j, k, l);
          if (v != t(j, i, k, l) || v != t(k, l, i, j)) return false;
        }
  return true;
}

AssumptionCheck check_a4(const MaterialModel& mat, std::mt19937_64& rng, int samples) {
  AssumptionCheck c{"A4", true, 0.0, {}};
  if (!symmetric(mat.a) || !symmetric(mat.b)) {
    c.passed = false;
    c.margin = -1.0;
    c.detail = "tensor symmetry a_ijkl = a_jikl = a_klij violated";
    return c;
  }
  Worst worst;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < samples; ++i) {
    const double off = normal(rng);
    Mat2 xi;
    xi << normal(rng), off, off, normal(rng);
    const double n2 = xi.squaredNorm();
    for (const auto& [t, name] : {std::pair{&mat.a, "a"}, std::pair{&mat.b, "b"}}) {
      const double m = t->contract(xi, xi) - mat.delta * n2 + kRelTol * n2;
      worst.update(m, [&] {
        return std::string(name) + ": " + witness({{"xi11", xi(0, 0)}, {"xi12", xi(0, 1)}, {"xi22", xi(1, 1)}});
      });
    }
  }
  c.margin = worst.margin;
  c.passed = worst.margin >= 0.0;
  if (!c.passed) c.detail = "ellipticity violated for " + worst.detail;
  return c;
}

AssumptionCheck check_a5(const FrictionModel& fr, const ValidationOptions& opt, std::mt19937_64& rng) {
  AssumptionCheck c{"A5", true, 0.0, {}};
  Worst nonneg, bound;
  std::uniform_real_distribution<double> time(0.0, opt.horizon);
  std::vector<Vec2> points = opt.contact_points;
  if (points.empty()) points.emplace_back(0.5, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  for (int i = 0; i < opt.samples; ++i) {
    const Vec2& x = points[pick(rng)];
    const double t = time(rng);
    const double f = fr.F(x, t);
    nonneg.update(f, [&] { return witness({{"x1", x.x()}, {"x2", x.y()}, {"t", t}, {"F", f}}); });
    bound.update(fr.F_bar - f, [&] { return witness({{"x1", x.x()}, {"x2", x.y()}, {"t", t}, {"F", f}}); });
  }
  c.margin = std::min(nonneg.margin, bound.margin);
  c.passed = nonneg.margin >= 0.0 && bound.margin >= 0.0;
  if (nonneg.margin < 0.0)
    c.detail = "F negative: " + nonneg.detail;
  else if (bound.margin < 0.0)
    c.detail = "F exceeds F_bar: " + bound.detail;
  return c;
}

AssumptionCheck check_a6(const BoundaryData& bd, const FrictionModel& fr, std::mt19937_64& rng, int samples) {
  AssumptionCheck c{"A6", true, 0.0, {}};
  if (!(bd.h_N > 0.0 && bd.H_N > 0.0)) {
    c.passed = false;
    c.margin = std::min(bd.h_N, bd.H_N);
    c.detail = "h_N and H_N must be positive";
    return c;
  }
  Worst worst;
  std::uniform_real_distribution<double> traction(0.0, std::max(fr.F_bar, 1e-12));
  for (int i = 0; i < samples; ++i) {
    const double f = traction(rng);
    const double hc = bd.h_C(f), Hc = bd.H_C(f);
    const double m = std::min({hc, Hc, bd.H_C_bar - Hc});
    worst.update(std::isfinite(m) ? m : -1.0, [&] { return witness({{"F", f}, {"h_C", hc}, {"H_C", Hc}}); });
  }
  c.margin = std::min({bd.h_N, bd.H_N, worst.margin});
  c.passed = worst.margin >= 0.0;
  if (!c.passed) c.detail = "h_C/H_C negative or above H_C_bar: " + worst.detail;
  return c;
}

AssumptionCheck check_a7(const FrictionModel& fr, std::mt19937_64& rng, int samples) {
  AssumptionCheck c{"A7", true, 0.0, {}};
  Worst range, mono;
  std::uniform_real_distribution<double> speed(0.0, 10.0);
  std::exponential_distribution<double> gap(10.0);
  for (int i = 0; i < samples; ++i) {
    const double s1 = speed(rng);
    const double mu1 = fr.mu(s1);
    range.update(std::min(mu1, fr.mu_bar - mu1), [&] { return witness({{"s", s1}, {"mu", mu1}}); });
    const double s2 = (i % 2 == 0) ? speed(rng) : s1 + gap(rng);
    const double ds = s1 - s2;
    const double m = (mu1 - fr.mu(s2)) * ds + fr.d_mu * ds * ds;
    mono.update(m, [&] { return witness({{"s1", s1}, {"s2", s2}}); });
  }
  c.margin = std::min(range.margin, mono.margin);
  c.passed = fr.d_mu > 0.0 && range.margin >= 0.0 && mono.margin >= 0.0;
  if (fr.d_mu <= 0.0)
    c.detail = "d_mu must be positive";
  else if (range.margin < 0.0)
    c.detail = "mu outside [0, mu_bar]: " + range.detail;
  else if (mono.margin < 0.0)
    c.detail = "one-sided Lipschitz condition violated: " + mono.detail;
  return c;
}

}  // namespace

ValidationReport validate_assumptions(const Models& models, double trace_norm,
                                      const ValidationOptions& options) {
  std::mt19937_64 rng(options.seed);
  ValidationReport report;
  report.checks.push_back(check_a2(models.material, rng, options.samples));
  report.checks.push_back(check_a3(models.material, rng, options.samples));
  report.checks.push_back(check_a4(models.material, rng, options.samples));
  report.checks.push_back(check_a5(models.friction, options, rng));
  report.checks.push_back(check_a6(models.boundary, models.friction, rng, options.samples));
  report.checks.push_back(check_a7(models.friction, rng, options.samples));

  AssumptionCheck a8{"A8", true, 0.0, {}};
  const double rhs = models.friction.F_bar * models.friction.d_mu * trace_norm * trace_norm;
  a8.margin = models.material.delta - rhs;
  a8.passed = a8.margin > 0.0;
  {
    std::ostringstream os;
    os.precision(12);
    os << "delta=" << models.material.delta << " vs F_bar*d_mu*|gamma|^2=" << rhs;
    a8.detail = os.str();
  }
  report.checks.push_back(a8);
  return report;
}

}  // namespace thermistor
