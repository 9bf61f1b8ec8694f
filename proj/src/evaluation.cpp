#include "esc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace esc {

double PairConfusion::fnr() const {
  std::int64_t den = tp + fn;
  return den == 0 ? 0.0 : static_cast<double>(fn) / den;
}

double PairConfusion::fdr() const {
  std::int64_t den = tp + fp;
  return den == 0 ? 0.0 : static_cast<double>(fp) / den;
}

namespace {

std::int64_t pairs_within(const std::vector<int>& sizes) {
  std::int64_t total = 0;
  for (int s : sizes) total += static_cast<std::int64_t>(s) * (s - 1) / 2;
  return total;
}

}  // namespace

PairConfusion pairwise_confusion(const Partition& estimate, const Partition& truth) {
  if (estimate.n() != truth.n())
    throw std::invalid_argument("pairwise_confusion: size mismatch");
  std::int64_t n = estimate.n();
  // tp = pairs co-clustered on both sides = sum over joint cells of C(m, 2)
  std::unordered_map<std::int64_t, std::int64_t> joint;
  joint.reserve(estimate.num_clusters() * 2);
  for (int i = 0; i < n; ++i) {
    std::int64_t key =
        static_cast<std::int64_t>(estimate.allocations()[i]) * (n + 1) +
        truth.allocations()[i];
    ++joint[key];
  }
  PairConfusion c;
  for (auto [key, m] : joint) c.tp += m * (m - 1) / 2;
  c.fp = pairs_within(estimate.sizes()) - c.tp;
  c.fn = pairs_within(truth.sizes()) - c.tp;
  c.tn = n * (n - 1) / 2 - c.tp - c.fp - c.fn;
  return c;
}

RateSummary posterior_rates(const Trace& trace, const Partition& truth) {
  if (trace.samples.empty())
    throw std::invalid_argument("posterior_rates: empty trace");
  std::vector<double> fnr, fdr, k;
  fnr.reserve(trace.samples.size());
  fdr.reserve(trace.samples.size());
  k.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    Partition est = Partition::from_allocations(s.allocations);
    PairConfusion c = pairwise_confusion(est, truth);
    fnr.push_back(c.fnr());
    fdr.push_back(c.fdr());
    k.push_back(s.k);
  }
  return {diagnostics(fnr), diagnostics(fdr), diagnostics(k)};
}

namespace {

std::array<double, 5> quantiles_5(std::vector<double>& x) {
  std::sort(x.begin(), x.end());
  const double probs[5] = {0.025, 0.25, 0.5, 0.75, 0.975};
  std::array<double, 5> q{};
  size_t m = x.size();
  for (int j = 0; j < 5; ++j) {
    double h = (m - 1) * probs[j];
    size_t lo = static_cast<size_t>(h);
    size_t hi = std::min(lo + 1, m - 1);
    q[j] = x[lo] + (h - lo) * (x[hi] - x[lo]);
  }
  return q;
}

}  // namespace

PosteriorSummaries posterior_summaries(const Trace& trace) {
  if (trace.samples.empty())
    throw std::invalid_argument("posterior_summaries: empty trace");
  std::vector<double> k;
  k.reserve(trace.samples.size());
  int smax = 0;
  std::vector<std::map<int, int>> occs;
  occs.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    k.push_back(s.k);
    occs.push_back(Partition::from_allocations(s.allocations).occupancy());
    smax = std::max(smax, occs.back().empty() ? 0 : occs.back().rbegin()->first);
  }
  PosteriorSummaries out;
  out.k = diagnostics(k);
  std::vector<double> col(trace.samples.size());
  for (int s = 1; s <= smax; ++s) {
    for (size_t t = 0; t < occs.size(); ++t) {
      auto it = occs[t].find(s);
      col[t] = it == occs[t].end() ? 0.0 : it->second;
    }
    out.size_quantiles[s] = quantiles_5(col);
  }
  return out;
}

}  // namespace esc
