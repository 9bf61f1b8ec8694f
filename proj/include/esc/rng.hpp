#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace esc {

// One generator per chain / per worker; never shared across threads.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Index draw proportional to non-negative weights. Throws if the total
// mass is not positive and finite.
inline int sample_weights(std::span<const double> w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::runtime_error("sample_weights: weight mass not positive and finite");
  double u = uniform01(rng) * total;
  double cum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    cum += w[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;  // rounding fell past the end
}

inline double gamma_draw(double shape, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

inline double beta_draw(double a, double b, Rng& rng) {
  double x = gamma_draw(a, rng);
  double y = gamma_draw(b, rng);
  if (x + y <= 0.0) return 0.0;  // both shapes tiny; mass is at the corners anyway
  return x / (x + y);
}

inline std::vector<double> dirichlet_draw(std::span<const double> shapes, Rng& rng) {
  std::vector<double> g(shapes.size());
  double total = 0.0;
  for (size_t i = 0; i < shapes.size(); ++i) {
    g[i] = gamma_draw(shapes[i], rng);
    total += g[i];
  }
  if (total <= 0.0) throw std::runtime_error("dirichlet_draw: all gamma draws underflowed");
  for (double& x : g) x /= total;
  return g;
}

}  // namespace esc
