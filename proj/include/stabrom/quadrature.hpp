// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

#include "stabrom/types.hpp"

namespace stabrom {

/// Symmetric Gauss rule on the reference triangle. Points are barycentric;
/// weights sum to the reference-triangle area 1/2.
struct QuadratureRule {
  int degree = 0;  // highest polynomial degree integrated exactly
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline void push_perm3(QuadratureRule& rule, double a, double b, double w) {
  // three permutations of (a, b, b), weight normalized to reference area
  rule.points.emplace_back(a, b, b);
  rule.points.emplace_back(b, a, b);
  rule.points.emplace_back(b, b, a);
  for (int i = 0; i < 3; ++i) rule.weights.push_back(0.5 * w);
}

inline void push_perm6(QuadratureRule& rule, double a, double b, double c, double w) {
  rule.points.emplace_back(a, b, c);
  rule.points.emplace_back(a, c, b);
  rule.points.emplace_back(b, a, c);
  rule.points.emplace_back(b, c, a);
  rule.points.emplace_back(c, a, b);
  rule.points.emplace_back(c, b, a);
  for (int i = 0; i < 6; ++i) rule.weights.push_back(0.5 * w);
}

}  // namespace detail

/// Dunavant rules of degree 2 (3 points), 4 (6 points) and 6 (12 points).
inline const QuadratureRule& triangle_quadrature(int degree) {
  static const QuadratureRule deg2 = [] {
    QuadratureRule rule;
    rule.degree = 2;
    detail::push_perm3(rule, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
    return rule;
  }();
  static const QuadratureRule deg4 = [] {
    QuadratureRule rule;
    rule.degree = 4;
    detail::push_perm3(rule, 0.108103018168070, 0.445948490915965, 0.223381589678011);
    detail::push_perm3(rule, 0.816847572980459, 0.091576213509771, 0.109951743655322);
    return rule;
  }();
  static const QuadratureRule deg6 = [] {
    QuadratureRule rule;
    rule.degree = 6;
    detail::push_perm3(rule, 0.873821971016996, 0.063089014491502, 0.050844906370207);
    detail::push_perm3(rule, 0.501426509658179, 0.249286745170910, 0.116786275726379);
    detail::push_perm6(rule, 0.636502499121399, 0.310352451033785, 0.053145049844816,
                       0.082851075618374);
    return rule;
  }();
  if (degree <= 2) return deg2;
  if (degree <= 4) return deg4;
  if (degree <= 6) return deg6;
  throw std::invalid_argument("triangle_quadrature: no rule beyond degree 6");
}

}  // namespace stabrom
