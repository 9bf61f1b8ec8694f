#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "esc/mcmc.hpp"
#include "esc/partition.hpp"

namespace esc {

// Pairwise link confusion between an estimated and a true partition.
struct PairConfusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  // fn / (tp + fn); 0 when the truth has no links.
  double fnr() const;
  // fp / (tp + fp); 0 when the estimate declares no links.
  double fdr() const;
};

PairConfusion pairwise_confusion(const Partition& estimate, const Partition& truth);

// Posterior expectations of the per-sample pairwise rates, with batch-means
// uncertainty from `diagnostics`.
struct RateSummary {
  DiagStats fnr;
  DiagStats fdr;
  DiagStats k;
};

RateSummary posterior_rates(const Trace& trace, const Partition& truth);

// Cluster-count and occupancy summaries of a trace: K with MCSE/ESS, and
// per-size quantiles (2.5/25/50/75/97.5%) of M_{s,n} across samples.
struct PosteriorSummaries {
  DiagStats k;
  std::map<int, std::array<double, 5>> size_quantiles;
};

PosteriorSummaries posterior_summaries(const Trace& trace);

}  // namespace esc
