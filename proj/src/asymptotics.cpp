#include "esc/asymptotics.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

#include "esc/esc_prior.hpp"

namespace esc {

namespace {

struct Accum {
  double k_over_n = 0.0;
  std::vector<double> ms_over_n;
  double max_over_n = 0.0;
  std::vector<double> size_dist;

  explicit Accum(int smax) : ms_over_n(smax, 0.0), size_dist(smax, 0.0) {}

  void add(const Accum& o) {
    k_over_n += o.k_over_n;
    max_over_n += o.max_over_n;
    for (size_t s = 0; s < ms_over_n.size(); ++s) {
      ms_over_n[s] += o.ms_over_n[s];
      size_dist[s] += o.size_dist[s];
    }
  }
};

}  // namespace

AsymptoticEstimates asymptotic_estimates(const TruncNegBin& mu, int n, int reps,
                                         int smax, std::uint64_t seed,
                                         int threads) {
  if (n < 1 || reps < 1 || smax < 1)
    throw std::invalid_argument("asymptotic_estimates: n, reps, smax must be >= 1");
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<int>(threads, reps);

  MuGenerator gen = [&mu](Rng&) { return SizeDistribution(mu); };
  std::vector<Accum> partial(threads, Accum(smax));
  auto worker = [&](int t) {
    int lo = static_cast<int>(static_cast<long>(reps) * t / threads);
    int hi = static_cast<int>(static_cast<long>(reps) * (t + 1) / threads);
    Accum& acc = partial[t];
    std::vector<int> counts(smax + 1);
    for (int rep = lo; rep < hi; ++rep) {
      Rng rng(seed + static_cast<std::uint64_t>(rep));
      std::vector<int> sizes = rejection_sample_sizes(gen, n, rng);
      int k = static_cast<int>(sizes.size());
      std::fill(counts.begin(), counts.end(), 0);
      int mx = 0;
      for (int s : sizes) {
        if (s <= smax) ++counts[s];
        mx = std::max(mx, s);
      }
      acc.k_over_n += static_cast<double>(k) / n;
      acc.max_over_n += static_cast<double>(mx) / n;
      for (int s = 1; s <= smax; ++s) {
        acc.ms_over_n[s - 1] += static_cast<double>(counts[s]) / n;
        // occupancy proportion = exact conditional law of a uniform cluster's size
        acc.size_dist[s - 1] += static_cast<double>(counts[s]) / k;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  Accum total(smax);
  for (const Accum& a : partial) total.add(a);

  AsymptoticEstimates out;
  out.n = n;
  out.reps = reps;
  out.mean_k_over_n = total.k_over_n / reps;
  out.mean_max_over_n = total.max_over_n / reps;
  out.mean_ms_over_n.resize(smax);
  out.cluster_size_dist.resize(smax);
  for (int s = 0; s < smax; ++s) {
    out.mean_ms_over_n[s] = total.ms_over_n[s] / reps;
    out.cluster_size_dist[s] = total.size_dist[s] / reps;
  }
  return out;
}

}  // namespace esc
