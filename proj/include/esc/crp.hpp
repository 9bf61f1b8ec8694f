#pragma once

#include <span>
#include <vector>

#include "esc/partition.hpp"

namespace esc {

// Pitman-Yor (theta, sigma); sigma = 0 is the Dirichlet process.
struct CrpParams {
  double theta = 1.0;
  double sigma = 0.0;
};

// One-record Gibbs weights: existing cluster j gets S_j - sigma, a new
// cluster gets theta + sigma k. Unnormalized.
std::vector<double> crp_realloc_weights(std::span<const int> sizes_minus_i,
                                        const CrpParams& params);

// log conditional (up to a constant) of the DP concentration theta under a
// Gamma(shape, rate) prior: (shape-1) log theta - rate theta
// + K log theta + lgamma(theta) - lgamma(theta + n).
double log_cond_concentration(int k, int n, double theta, double prior_shape,
                              double prior_rate);

// Pitman-Yor analogue for sigma > 0; the partition term becomes
// sum_{j=1}^{K-1} log(theta + j sigma) + lgamma(theta + 1) - lgamma(theta + n).
// Reduces to log_cond_concentration at sigma = 0.
double log_cond_concentration_py(int k, int n, double theta, double sigma,
                                 double prior_shape, double prior_rate);

// log conditional of the discount sigma (flat prior on [0,1)):
// sum_{j=1}^{K-1} log(theta + j sigma) + sum_j [lgamma(S_j - sigma) - lgamma(1 - sigma)].
double log_cond_discount(std::span<const int> sizes, double theta, double sigma);

// Exact Pitman-Yor EPPF by the product formula, log scale; sigma = 0 gives
// the CRP case.
double log_py_eppf(const Partition& part, const CrpParams& params);

}  // namespace esc
