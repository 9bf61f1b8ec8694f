#pragma once

#include <cstdint>
#include <vector>

#include "esc/size_distribution.hpp"

namespace esc {

// Monte Carlo estimates of the large-n cluster statistics from exact
// conditional draws. Limits for reference: K_n/n -> 1/E[S],
// M_{s,n}/n -> mu_s/E[S], M_{max,n}/n -> 0, and the size of a uniformly
// chosen cluster -> mu.
struct AsymptoticEstimates {
  int n = 0;
  int reps = 0;
  double mean_k_over_n = 0.0;
  std::vector<double> mean_ms_over_n;    // s = 1..smax
  double mean_max_over_n = 0.0;
  // Size distribution of a uniformly chosen cluster, s = 1..smax; estimated
  // by the per-draw occupancy proportions M_{s,n}/K_n averaged over draws
  // (the exact conditional law of the sampled cluster's size, so the
  // estimator is unbiased with far less noise than drawing one cluster).
  std::vector<double> cluster_size_dist;
};

// reps independent rejection draws at size n, fanned out over worker threads
// with one RNG stream per rep (derived from seed + rep), so results do not
// depend on scheduling. threads <= 0 picks the hardware count.
AsymptoticEstimates asymptotic_estimates(const TruncNegBin& mu, int n, int reps,
                                         int smax, std::uint64_t seed,
                                         int threads = 0);

}  // namespace esc
