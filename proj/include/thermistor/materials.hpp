#pragma once

#include "thermistor/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermistor {

/// Constant fourth-order tensor in 2D, indexed (i, j, k, l).
class Tensor4 {
 public:
  double operator()(int i, int j, int k, int l) const { return c_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return c_[index(i, j, k, l)]; }

  static Tensor4 isotropic(double lambda, double mu);

  /// c_ijkl xi_ij eta_kl
  double contract(const Mat2& xi, const Mat2& eta) const;

 private:
  static constexpr int index(int i, int j, int k, int l) { return ((i * 2 + j) * 2 + k) * 2 + l; }
  std::array<double, 16> c_{};
};

using ScalarFn = std::function<double(double)>;

struct MaterialModel {
  double rho = 1.0;
  double c_p = 1.0;
  double theta_ref = 1.0;
  Tensor4 a;  // viscosity
  Tensor4 b;  // elasticity
  Mat2 m = Mat2::Zero();  // thermal expansion coupling

  std::function<Mat2(double)> k;  // conductivity k_ij(s)
  ScalarFn sigma_el;              // electric conductivity

  double sigma_star = 0.0;  // lower bound of sigma_el
  double M_sigma = 0.0;     // upper bound of sigma_el
  double delta = 0.0;       // ellipticity constant shared by k, a, b
  double sigma_lipschitz = 0.0;
  double k_lipschitz = 0.0;
  double k_upper = 0.0;  // declared bound on |k_ij(s)|

  /// Mass coefficient of the heat equation.
  double mass_thermal() const { return rho * c_p; }
  /// Mass coefficient of the momentum equation (rho of the equation of motion).
  double mass_mech() const { return rho; }
};

using SpaceTimeFn = std::function<double(const Vec2&, double)>;
using SpaceTimeVecFn = std::function<Vec2(const Vec2&, double)>;

struct FrictionModel {
  ScalarFn mu;
  ScalarFn mu_prime;      // optional derivative; finite differences when empty
  ScalarFn mu_primitive;  // optional closed form of int_0^r mu(s) ds
  double mu_bar = 0.0;
  double d_mu = 0.0;
  SpaceTimeFn F;  // normal traction on Gamma_C
  double F_bar = 0.0;

  double mu_derivative(double s) const;
};

struct BoundaryData {
  double h_N = 1.0;
  double H_N = 1.0;
  ScalarFn h_C;  // of F
  ScalarFn H_C;  // of F
  double H_C_bar = 0.0;
  std::function<double(const Vec2&)> phi_b;
  std::function<Vec2(const Vec2&)> grad_phi_b;
  SpaceTimeVecFn f0;
  SpaceTimeVecFn f2;
};

struct Models {
  MaterialModel material;
  FrictionModel friction;
  BoundaryData boundary;
};

/// Tunable parameters of the built-in PTC thermistor scenario.
struct PtcParameters {
  double sigma_star = 0.1;
  double sigma_max = 1.0;
  double kappa = 2.0;
  double s_c = 1.0;
  double k_amp = 0.1;
  double mu_s = 0.4;
  double mu_d = 0.2;
  double beta = 1.0;
  std::optional<double> d_mu;  // defaults to beta (mu_s - mu_d)
  double F = 0.1;
  double visc_lambda = 1.0;
  double visc_mu = 0.5;
  double elast_lambda = 2.0;
  double elast_mu = 1.0;
  double m0 = 0.05;
  double rho = 1.0;
  double c_p = 1.0;
  double theta_ref = 1.0;
  double h_N = 1.0;
  double H_N = 1.0;
  double voltage = 1.0;  // phi_b(x) = voltage * x_1
  Vec2 f0 = Vec2(1.0, 0.0);
  Vec2 f2 = Vec2::Zero();
};

Models default_ptc_model(const PtcParameters& p = {});

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  double margin = 0.0;  // worst observed slack (negative when violated)
  std::string detail;   // witnessing sample on failure
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

struct ValidationOptions {
  std::uint64_t seed = 12345;
  int samples = 10000;
  double horizon = 1.0;             // T, for sampling F(x, t)
  std::vector<Vec2> contact_points;  // where F is sampled
};

ValidationReport validate_assumptions(const Models& models, double trace_norm,
                                      const ValidationOptions& options = {});

}  // namespace thermistor
