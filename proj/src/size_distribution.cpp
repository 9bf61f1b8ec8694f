#include "esc/size_distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace esc {

TruncNegBin::TruncNegBin(double r_, double p_) : r(r_), p(p_) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("TruncNegBin: r must be positive");
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("TruncNegBin: p must be in (0, 1)");
}

double TruncNegBin::log_norm() const {
  // log gamma = r log(1-p) - log(1 - (1-p)^r), kept in log1p/expm1 form so
  // small p and small r survive.
  double rl = r * std::log1p(-p);
  return rl - std::log(-std::expm1(rl));
}

double TruncNegBin::log_pmf(int s) const {
  if (s < 1) return -std::numeric_limits<double>::infinity();
  return log_norm() + std::lgamma(s + r) - std::lgamma(r) - std::lgamma(s + 1.0) +
         s * std::log(p);
}

double TruncNegBin::pmf(int s) const {
  if (s < 1) return 0.0;
  return std::exp(log_pmf(s));
}

double TruncNegBin::mean() const {
  // r p / (1-p) divided by 1 - (1-p)^r.
  double rl = r * std::log1p(-p);
  return r * p / (1.0 - p) / (-std::expm1(rl));
}

double trunc_negbin_pmf(int s, double r, double p) {
  if (s < 1) throw std::invalid_argument("trunc_negbin_pmf: s must be >= 1");
  return TruncNegBin(r, p).pmf(s);
}

double trunc_negbin_mean(double r, double p) { return TruncNegBin(r, p).mean(); }

SizeDistribution::SizeDistribution(TruncNegBin tnb) : rep_(tnb) {}

SizeDistribution::SizeDistribution(std::vector<double> probs, double tail_mass)
    : rep_(std::make_pair(std::move(probs), tail_mass)) {
  auto& [pr, tail] = std::get<1>(rep_);
  if (pr.empty()) throw std::invalid_argument("SizeDistribution: empty table");
  double total = tail;
  for (double x : pr) {
    if (x < 0.0) throw std::invalid_argument("SizeDistribution: negative mass");
    total += x;
  }
  if (tail < 0.0 || std::abs(total - 1.0) > 1e-8)
    throw std::invalid_argument("SizeDistribution: masses must sum to 1");
}

int SizeDistribution::truncation() const {
  return parametric() ? 0 : static_cast<int>(std::get<1>(rep_).first.size());
}

double SizeDistribution::tail_mass() const {
  return parametric() ? 0.0 : std::get<1>(rep_).second;
}

std::vector<double>& SizeDistribution::probs() { return std::get<1>(rep_).first; }
const std::vector<double>& SizeDistribution::probs() const {
  return std::get<1>(rep_).first;
}

void SizeDistribution::set_tail_mass(double t) { std::get<1>(rep_).second = t; }

double SizeDistribution::pmf(int s) const {
  if (s < 1) return 0.0;
  if (parametric()) return tnb().pmf(s);
  const auto& pr = std::get<1>(rep_).first;
  return s <= static_cast<int>(pr.size()) ? pr[s - 1] : 0.0;
}

double SizeDistribution::mean() const {
  if (parametric()) return tnb().mean();
  const auto& pr = std::get<1>(rep_).first;
  double m = 0.0;
  for (size_t s = 0; s < pr.size(); ++s) m += (s + 1.0) * pr[s];
  return m;
}

int SizeDistribution::sample(Rng& rng) const {
  double u = uniform01(rng);
  if (parametric()) {
    // Inverse cdf by walking the pmf with the term recurrence
    // mu_{s+1} = mu_s * p (s + r) / (s + 1); expected steps = mean().
    const auto& d = tnb();
    double term = std::exp(d.log_pmf(1));
    double cum = term;
    int s = 1;
    while (u >= cum && s < 1 << 24) {
      term *= d.p * (s + d.r) / (s + 1.0);
      cum += term;
      ++s;
    }
    return s;
  }
  const auto& [pr, tail] = std::get<1>(rep_);
  double cum = 0.0;
  for (size_t s = 0; s < pr.size(); ++s) {
    cum += pr[s];
    if (u < cum) return static_cast<int>(s + 1);
  }
  if (tail > 1e-12)
    throw std::runtime_error(
        "SizeDistribution::sample: draw fell in the untabulated tail; extend the table");
  return static_cast<int>(pr.size());  // rounding slack at the top
}

}  // namespace esc
