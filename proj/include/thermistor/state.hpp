#pragma once

#include "thermistor/types.hpp"

#include <vector>

namespace thermistor {

/// Discrete fields at one grid time. phi stores the shifted potential
/// (total potential minus phi_b), so every field vanishes on Gamma_D.
struct SystemState {
  int step = 0;
  double t = 0.0;
  VectorField u;
  VectorField v;
  ScalarField theta;
  ScalarField phi;
  std::vector<Vec2> xi;  // tangential traction at each contact node
};

using Trajectory = std::vector<SystemState>;

}  // namespace thermistor
