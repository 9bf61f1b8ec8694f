#pragma once

#include <functional>
#include <map>
#include <span>

#include "esc/partition.hpp"
#include "esc/rng.hpp"
#include "esc/size_distribution.hpp"

namespace esc {

// Hyperparameters shared by the ESC samplers: Gamma(eta_r, scale s_r) on r,
// Beta(u_p, v_p) on p, Dirichlet concentration alpha (ESC-D only).
struct EscHyper {
  double eta_r = 1.0;
  double s_r = 1.0;
  double u_p = 2.0;
  double v_p = 2.0;
  double alpha = 1.0;
};

// P(E_n | mu): probability that the running sum of iid sizes from mu ever
// hits n exactly, via the renewal recursion u_k = sum_s mu_s u_{k-s}, u_0 = 1.
double p_event_en(const SizeDistribution& mu, int n);

// One-record Gibbs weights given the other records' cluster sizes:
// slot j = join existing cluster j, weight (s_j + 1) mu_{s_j+1} / mu_{s_j};
// last slot = open a new cluster, weight (k + 1) mu_1. Unnormalized. Slots
// whose required size has no mass get weight 0.
std::vector<double> realloc_weights(std::span<const int> sizes_minus_i,
                                    const SizeDistribution& mu);

// Same target with mu = TruncNegBin(r, p) collapsed algebraically:
// existing cluster j gets S_j + r, a new cluster gets (k + 1) gamma r
// (common factor p dropped). Proportional to realloc_weights.
std::vector<double> realloc_weights_nb(std::span<const int> sizes_minus_i,
                                       double r, double p);

// log conditional density (up to a constant) of (r, p) given the partition,
// ESC-NB form: prior terms + (n + u_p - 1) log p + (v_p - 1) log(1-p)
// + K log gamma + sum_j [lgamma(S_j + r) - lgamma(r)].
double log_cond_rp_nb(const Partition& part, double r, double p,
                      const EscHyper& hyper);
// Same value from occupancy counts plus n (what the sampler keeps around).
double log_cond_rp_nb_occ(const std::map<int, int>& occupancy, int n, double r,
                          double p, const EscHyper& hyper);

// ESC-D form with mu marginalized out: prior terms + (u_p - 1) log p
// + (v_p - 1) log(1-p) + sum_s [lgamma(M_s + alpha mu0_s) - lgamma(alpha mu0_s)]
// where mu0 = TruncNegBin(r, p) and M_s is the occupancy at size s.
double log_cond_rp_escd(const std::map<int, int>& occupancy, double r, double p,
                        const EscHyper& hyper);

// Dirichlet posterior draw of (mu_1..mu_m, tail) given occupancy counts:
// Dir(alpha mu0_1 + M_1, ..., alpha mu0_m + M_m, alpha (1 - sum_{s<=m} mu0_s)).
// Requires m >= max occupied size.
SizeDistribution sample_mu_posterior(const std::map<int, int>& occupancy,
                                     double alpha, double r, double p, int m,
                                     Rng& rng);

// Stick-breaks further components off the tail of a sample_mu_posterior draw,
// exact as long as sizes beyond the current truncation are unoccupied.
void extend_mu_posterior(SizeDistribution& mu, double alpha, double r, double p,
                         int new_m, Rng& rng);

struct WeightedPartition {
  Partition partition;
  double weight = 1.0;
};

// Draws one SizeDistribution per call; return a fixed mu for conditional
// sampling.
using MuGenerator = std::function<SizeDistribution(Rng&)>;

// Exact draw from the conditional ESC law: sample sizes until the running
// sum reaches n, accept on equality, allocate by uniform permutation.
// Throws after 10^6 rejected proposals.
Partition rejection_sample(const MuGenerator& mu_prior, int n, Rng& rng);
// Size multiset only (cheaper; used by the asymptotics driver).
std::vector<int> rejection_sample_sizes(const MuGenerator& mu_prior, int n,
                                        Rng& rng);

// One importance draw: propose unconstrained sizes S_1..S_R until the sum
// passes n, weight W = sum_k mu_{D_k} over the feasible truncations
// D_k = n - S_1 - ... - S_{k-1}, pick truncation K w.p. mu_{D_K} / W.
WeightedPartition importance_sample(const MuGenerator& mu_prior, int n, Rng& rng);

// sum_t W_t h(P_t) / sum_t W_t.
double self_normalized_mean(std::span<const WeightedPartition> draws,
                            const std::function<double(const Partition&)>& h);

}  // namespace esc
