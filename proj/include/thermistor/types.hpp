#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace thermistor {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Nodal coefficients over the free scalar DOFs (V_h). Dirichlet nodes carry
// no coefficient; their value is identically zero.
using ScalarField = Eigen::VectorXd;
// Interleaved (x, y) coefficients over the free vector DOFs (E_h).
using VectorField = Eigen::VectorXd;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermistor
