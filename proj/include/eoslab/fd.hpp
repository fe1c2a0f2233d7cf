#pragma once

#include "eoslab/problem.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace eoslab::fd {

using ScalarField = std::function<double(const Vector&)>;

// Default step per derivative order, scaled by max(1, |theta|). Higher orders
// need larger steps to keep the divided differences above round-off; one
// Richardson level then removes the leading h^2 truncation term.
inline double default_step(int order) {
  switch (order) {
    case 1: return 1e-4;
    case 2: return 1e-3;
    case 3: return 4e-3;
    case 4: return 8e-3;
    default: throw std::invalid_argument("fd: order must be in 1..4");
  }
}

// Central-difference directional derivative of g at theta along dir.
inline double directional(const ScalarField& g, const Vector& theta,
                          const Vector& dir, int order, double step = 0.0) {
  const double scale = std::max(1.0, theta.norm());
  const double h0 = (step > 0.0 ? step : default_step(order)) * scale;

  auto stencil = [&](double h) -> double {
    switch (order) {
      case 1:
        return (g(theta + h * dir) - g(theta - h * dir)) / (2.0 * h);
      case 2:
        return (g(theta + h * dir) - 2.0 * g(theta) + g(theta - h * dir)) /
               (h * h);
      case 3:
        return (g(theta + 2.0 * h * dir) - 2.0 * g(theta + h * dir) +
                2.0 * g(theta - h * dir) - g(theta - 2.0 * h * dir)) /
               (2.0 * h * h * h);
      case 4:
        return (g(theta + 2.0 * h * dir) - 4.0 * g(theta + h * dir) +
                6.0 * g(theta) - 4.0 * g(theta - h * dir) +
                g(theta - 2.0 * h * dir)) /
               (h * h * h * h);
      default:
        throw std::invalid_argument("fd: order must be in 1..4");
    }
  };

  if (order == 1) return stencil(h0);
  return (4.0 * stencil(0.5 * h0) - stencil(h0)) / 3.0;
}

// Gradient of g by per-coordinate central differences.
inline Vector gradient(const ScalarField& g, const Vector& theta,
                       double step = 0.0) {
  Vector out(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    Vector e = Vector::Zero(theta.size());
    e[i] = 1.0;
    out[i] = directional(g, theta, e, 1, step);
  }
  return out;
}

}  // namespace eoslab::fd
