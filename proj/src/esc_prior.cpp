#include "esc/esc_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace esc {
namespace {

constexpr long kMaxRejectionTries = 1000000;

// mu_1..mu_n as a dense table (recurrence for the parametric form, table
// lookup otherwise).
std::vector<double> pmf_table(const SizeDistribution& mu, int n) {
  std::vector<double> t(n + 1, 0.0);
  if (mu.parametric()) {
    const auto& d = mu.tnb();
    double term = std::exp(d.log_pmf(1));
    for (int s = 1; s <= n; ++s) {
      t[s] = term;
      term *= d.p * (s + d.r) / (s + 1.0);
    }
  } else {
    for (int s = 1; s <= n; ++s) t[s] = mu.pmf(s);
  }
  return t;
}

}  // namespace

double p_event_en(const SizeDistribution& mu, int n) {
  if (n < 0) throw std::invalid_argument("p_event_en: n must be >= 0");
  if (n == 0) return 1.0;
  std::vector<double> m = pmf_table(mu, n);
  std::vector<double> u(n + 1, 0.0);
  u[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    double acc = 0.0;
    for (int s = 1; s <= k; ++s) acc += m[s] * u[k - s];
    u[k] = acc;
  }
  return u[n];
}

std::vector<double> realloc_weights(std::span<const int> sizes_minus_i,
                                    const SizeDistribution& mu) {
  std::vector<double> w(sizes_minus_i.size() + 1, 0.0);
  for (size_t j = 0; j < sizes_minus_i.size(); ++j) {
    int s = sizes_minus_i[j];
    if (s < 1) throw std::invalid_argument("realloc_weights: cluster sizes must be >= 1");
    double num = mu.pmf(s + 1), den = mu.pmf(s);
    w[j] = (num > 0.0 && den > 0.0) ? (s + 1.0) * num / den : 0.0;
  }
  w.back() = (sizes_minus_i.size() + 1.0) * mu.pmf(1);
  return w;
}

std::vector<double> realloc_weights_nb(std::span<const int> sizes_minus_i,
                                       double r, double p) {
  TruncNegBin d(r, p);
  std::vector<double> w(sizes_minus_i.size() + 1, 0.0);
  for (size_t j = 0; j < sizes_minus_i.size(); ++j) {
    int s = sizes_minus_i[j];
    if (s < 1)
      throw std::invalid_argument("realloc_weights_nb: cluster sizes must be >= 1");
    w[j] = s + r;
  }
  w.back() = (sizes_minus_i.size() + 1.0) * std::exp(d.log_norm()) * r;
  return w;
}

double log_cond_rp_nb_occ(const std::map<int, int>& occupancy, int n, double r,
                          double p, const EscHyper& hyper) {
  if (!(r > 0.0) || !(p > 0.0) || !(p < 1.0))
    return -std::numeric_limits<double>::infinity();
  TruncNegBin d(r, p);
  int k = 0;
  for (auto [s, count] : occupancy) k += count;
  double lp = (hyper.eta_r - 1.0) * std::log(r) - r / hyper.s_r +
              (n + hyper.u_p - 1.0) * std::log(p) +
              (hyper.v_p - 1.0) * std::log1p(-p) + k * d.log_norm();
  double lgr = std::lgamma(r);
  for (auto [s, count] : occupancy)
    lp += count * (std::lgamma(s + r) - lgr);
  return lp;
}

double log_cond_rp_nb(const Partition& part, double r, double p,
                      const EscHyper& hyper) {
  return log_cond_rp_nb_occ(part.occupancy(), part.n(), r, p, hyper);
}

double log_cond_rp_escd(const std::map<int, int>& occupancy, double r, double p,
                        const EscHyper& hyper) {
  if (!(r > 0.0) || !(p > 0.0) || !(p < 1.0))
    return -std::numeric_limits<double>::infinity();
  TruncNegBin mu0(r, p);
  double lp = (hyper.eta_r - 1.0) * std::log(r) - r / hyper.s_r +
              (hyper.u_p - 1.0) * std::log(p) + (hyper.v_p - 1.0) * std::log1p(-p);
  for (auto [s, count] : occupancy) {
    if (s < 1 || count < 1)
      throw std::invalid_argument("log_cond_rp_escd: bad occupancy entry");
    double a = hyper.alpha * mu0.pmf(s);
    lp += std::lgamma(count + a) - std::lgamma(a);
  }
  return lp;
}

SizeDistribution sample_mu_posterior(const std::map<int, int>& occupancy,
                                     double alpha, double r, double p, int m,
                                     Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_mu_posterior: alpha must be > 0");
  int max_occupied = occupancy.empty() ? 0 : occupancy.rbegin()->first;
  if (m < std::max(max_occupied, 1))
    throw std::invalid_argument(
        "sample_mu_posterior: truncation below the largest occupied size");
  TruncNegBin mu0(r, p);
  std::vector<double> shapes(m + 1, 0.0);
  double base_cum = 0.0;
  {  // pmf recurrence as in pmf_table
    double term = std::exp(mu0.log_pmf(1));
    for (int s = 1; s <= m; ++s) {
      shapes[s - 1] = alpha * term;
      base_cum += term;
      term *= p * (s + r) / (s + 1.0);
    }
  }
  shapes[m] = alpha * std::max(0.0, 1.0 - base_cum);  // tail component
  for (auto [s, count] : occupancy) shapes[s - 1] += count;
  std::vector<double> draw = dirichlet_draw(shapes, rng);
  double tail = draw.back();
  draw.pop_back();
  return SizeDistribution(std::move(draw), tail);
}

void extend_mu_posterior(SizeDistribution& mu, double alpha, double r, double p,
                         int new_m, Rng& rng) {
  if (mu.parametric())
    throw std::invalid_argument("extend_mu_posterior: needs the explicit form");
  int m = mu.truncation();
  if (new_m <= m) return;
  TruncNegBin mu0(r, p);
  // Base-measure mass up to the current truncation, by the same recurrence.
  double term = std::exp(mu0.log_pmf(1));
  double base_cum = 0.0;
  for (int s = 1; s <= m; ++s) {
    base_cum += term;
    term *= p * (s + r) / (s + 1.0);
  }
  double tail = mu.tail_mass();
  auto& probs = mu.probs();
  for (int s = m + 1; s <= new_m; ++s) {
    // Dirichlet tail splits by stick-breaking: component s takes
    // Beta(alpha mu0_s, alpha (1 - base mass through s)) of what remains.
    double a = alpha * term;
    base_cum += term;
    term *= p * (s + r) / (s + 1.0);
    double b = alpha * std::max(0.0, 1.0 - base_cum);
    double frac = (tail > 0.0) ? beta_draw(a, b, rng) : 0.0;
    probs.push_back(tail * frac);
    tail *= (1.0 - frac);
  }
  mu.set_tail_mass(tail);
}

std::vector<int> rejection_sample_sizes(const MuGenerator& mu_prior, int n,
                                        Rng& rng) {
  if (n < 1) throw std::invalid_argument("rejection_sample: n must be >= 1");
  std::vector<int> sizes;
  for (long tries = 0; tries < kMaxRejectionTries; ++tries) {
    SizeDistribution mu = mu_prior(rng);
    sizes.clear();
    int total = 0;
    while (total < n) {
      int s = mu.sample(rng);
      sizes.push_back(s);
      total += s;
    }
    if (total == n) return sizes;
  }
  throw std::runtime_error(
      "rejection_sample: no acceptance within 1e6 proposals; is P(E_n | mu) ~ 0?");
}

namespace {

Partition partition_from_sizes(const std::vector<int>& sizes, Rng& rng) {
  std::vector<int> alloc;
  alloc.reserve(std::accumulate(sizes.begin(), sizes.end(), 0));
  for (size_t j = 0; j < sizes.size(); ++j)
    alloc.insert(alloc.end(), sizes[j], static_cast<int>(j + 1));
  std::shuffle(alloc.begin(), alloc.end(), rng);
  return Partition::from_allocations(alloc);
}

}  // namespace

Partition rejection_sample(const MuGenerator& mu_prior, int n, Rng& rng) {
  return partition_from_sizes(rejection_sample_sizes(mu_prior, n, rng), rng);
}

WeightedPartition importance_sample(const MuGenerator& mu_prior, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("importance_sample: n must be >= 1");
  for (long tries = 0; tries < kMaxRejectionTries; ++tries) {
    SizeDistribution mu = mu_prior(rng);
    // Propose sizes until the running sum passes n; D_k is what a cluster
    // at position k would have to absorb to land exactly on n.
    std::vector<int> sizes;
    std::vector<double> mu_at_deficit;
    int prefix = 0;
    double w = 0.0;
    while (prefix < n) {
      mu_at_deficit.push_back(mu.pmf(n - prefix));
      w += mu_at_deficit.back();
      int s = mu.sample(rng);
      sizes.push_back(s);
      prefix += s;
    }
    if (w <= 0.0) continue;  // no feasible truncation this round (needs mu_1 = 0)
    int k = sample_weights(mu_at_deficit, rng);
    int deficit = n;
    for (int j = 0; j < k; ++j) deficit -= sizes[j];
    sizes.resize(k + 1);
    sizes[k] = deficit;
    return WeightedPartition{partition_from_sizes(sizes, rng), w};
  }
  throw std::runtime_error("importance_sample: no draw with positive weight in 1e6 tries");
}

double self_normalized_mean(std::span<const WeightedPartition> draws,
                            const std::function<double(const Partition&)>& h) {
  if (draws.empty())
    throw std::invalid_argument("self_normalized_mean: no draws");
  double num = 0.0, den = 0.0;
  for (const auto& d : draws) {
    num += d.weight * h(d.partition);
    den += d.weight;
  }
  if (den <= 0.0)
    throw std::runtime_error("self_normalized_mean: total weight is not positive");
  return num / den;
}

}  // namespace esc
