#pragma once

// P1 element geometry and the quadrature rules shared by every assembler.

#include "thermistor/mesh.hpp"

#include <array>

namespace thermistor::fe {

struct QuadPoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the element measure
};

// 3-point rule, exact for quadratics on triangles.
inline constexpr std::array<QuadPoint, 3> kTriangleOrder2{{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

struct EdgePoint {
  double s;       // position along the edge, basis value of the second node
  double weight;  // fraction of the edge length
};

// 2-point Gauss-Legendre on [0, 1].
inline const std::array<EdgePoint, 2> kEdgeGauss2{{
    {0.5 - 0.5 / 1.7320508075688772, 0.5},
    {0.5 + 0.5 / 1.7320508075688772, 0.5},
}};

struct Element {
  std::array<int, 3> nodes;
  std::array<Vec2, 3> vertex;
  std::array<Vec2, 3> grad;  // constant gradients of the barycentric basis
  double area;

  Vec2 point(const std::array<double, 3>& bary) const {
    return bary[0] * vertex[0] + bary[1] * vertex[1] + bary[2] * vertex[2];
  }
};

inline Element make_element(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  Element e;
  e.nodes = tri;
  for (int i = 0; i < 3; ++i) e.vertex[i] = mesh.nodes()[tri[i]];
  const Vec2 d1 = e.vertex[1] - e.vertex[0];
  const Vec2 d2 = e.vertex[2] - e.vertex[0];
  const double det = d1.x() * d2.y() - d1.y() * d2.x();
  e.area = 0.5 * det;
  // grad lambda_i = rot90(opposite edge) / (2 area)
  for (int i = 0; i < 3; ++i) {
    const Vec2& p = e.vertex[(i + 1) % 3];
    const Vec2& q = e.vertex[(i + 2) % 3];
    e.grad[i] = Vec2(p.y() - q.y(), q.x() - p.x()) / det;
  }
  return e;
}

template <class Values>
double interpolate(const Element& e, const Values& nodal,
                   const std::array<double, 3>& bary) {
  return bary[0] * nodal[e.nodes[0]] + bary[1] * nodal[e.nodes[1]] +
         bary[2] * nodal[e.nodes[2]];
}

template <class Values>
Vec2 gradient(const Element& e, const Values& nodal) {
  return nodal[e.nodes[0]] * e.grad[0] + nodal[e.nodes[1]] * e.grad[1] +
         nodal[e.nodes[2]] * e.grad[2];
}

}  // namespace thermistor::fe
