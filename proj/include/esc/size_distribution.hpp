#pragma once

#include <variant>
#include <vector>

#include "esc/rng.hpp"

namespace esc {

// Negative binomial (r, p) conditioned on being >= 1:
//   mu_s = gamma * Gamma(s + r) p^s / (Gamma(r) s!),   s = 1, 2, ...
// with gamma = (1-p)^r / (1 - (1-p)^r).
struct TruncNegBin {
  double r = 1.0;
  double p = 0.5;

  TruncNegBin(double r_, double p_);
  double log_norm() const;  // log gamma
  double pmf(int s) const;
  double log_pmf(int s) const;
  double mean() const;
};

double trunc_negbin_pmf(int s, double r, double p);
double trunc_negbin_mean(double r, double p);

// A cluster-size distribution on {1, 2, ...}: either parametric TruncNegBin
// or an explicit table mu_1..mu_m plus untabulated tail mass beyond m.
class SizeDistribution {
 public:
  SizeDistribution(TruncNegBin tnb);                          // NOLINT implicit
  SizeDistribution(std::vector<double> probs, double tail_mass);

  bool parametric() const { return std::holds_alternative<TruncNegBin>(rep_); }
  const TruncNegBin& tnb() const { return std::get<TruncNegBin>(rep_); }

  // Explicit truncation point m; parametric distributions report 0.
  int truncation() const;
  double tail_mass() const;
  // Mutable access for tail extension (explicit form only).
  std::vector<double>& probs();
  const std::vector<double>& probs() const;
  void set_tail_mass(double t);

  // pmf at size s >= 1; the explicit form reports 0 beyond its truncation.
  double pmf(int s) const;
  // Tabulated first moment; the explicit form sums its table (tail excluded).
  double mean() const;

  // One draw S ~ mu. The explicit form throws if the draw lands in the
  // untabulated tail; generate with enough components for the use at hand.
  int sample(Rng& rng) const;

 private:
  std::variant<TruncNegBin, std::pair<std::vector<double>, double>> rep_;
};

}  // namespace esc
