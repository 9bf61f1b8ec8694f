#include "esc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "esc/size_distribution.hpp"

namespace esc {

Partition Partition::from_allocations(std::span<const int> z) {
  if (z.empty()) throw std::invalid_argument("from_allocations: empty allocation array");
  Partition p;
  p.alloc_.assign(z.begin(), z.end());
  p.canonicalize();
  return p;
}

// Relabels clusters by order of first appearance and rebuilds sizes.
void Partition::canonicalize() {
  sizes_.clear();
  auto [lo_it, hi_it] = std::minmax_element(alloc_.begin(), alloc_.end());
  int lo = *lo_it, hi = *hi_it;
  if (lo >= 1 && hi <= n() + 1) {
    // Common case: labels already small positive ints; dense relabel table.
    std::vector<int> canon_of(hi + 1, 0);
    for (int& a : alloc_) {
      int& c = canon_of[a];
      if (c == 0) {
        c = static_cast<int>(sizes_.size()) + 1;
        sizes_.push_back(0);
      }
      a = c;
      ++sizes_[a - 1];
    }
  } else {
    std::map<int, int> canon_of;
    for (int& a : alloc_) {
      auto [it, fresh] = canon_of.try_emplace(a, static_cast<int>(sizes_.size()) + 1);
      if (fresh) sizes_.push_back(0);
      a = it->second;
      ++sizes_[a - 1];
    }
  }
}

int Partition::max_cluster_size() const {
  int m = 0;
  for (int s : sizes_) m = std::max(m, s);
  return m;
}

std::map<int, int> Partition::occupancy() const {
  std::map<int, int> occ;
  for (int s : sizes_) ++occ[s];
  return occ;
}

void Partition::move_record(int i, int target) {
  if (i < 0 || i >= n()) throw std::out_of_range("move_record: record index out of range");
  if (target < 0 || target > num_clusters())
    throw std::invalid_argument("move_record: target is neither an existing label nor kNewCluster");
  int cur = alloc_[i];
  if (target == cur) return;
  if (target == kNewCluster && sizes_[cur - 1] == 1) return;  // already alone
  // A fresh cluster gets a label past the current ones; canonicalize() then
  // restores first-appearance order and drops any emptied label.
  alloc_[i] = (target == kNewCluster) ? num_clusters() + 1 : target;
  canonicalize();
}

void enumerate_partitions(int n, const std::function<void(const Partition&)>& fn) {
  if (n < 1 || n > 12)
    throw std::invalid_argument("enumerate_partitions: n must be in 1..12");
  // Restricted growth strings are exactly the canonical allocation arrays:
  // z_0 = 1, z_i <= 1 + max(z_0..z_{i-1}).
  Partition scratch;
  std::vector<int> z(n, 1), zmax(n, 1);  // zmax[i] = max of z[0..i]
  for (;;) {
    scratch.alloc_ = z;
    scratch.canonicalize();
    fn(scratch);
    int i = n - 1;
    while (i > 0 && z[i] == zmax[i - 1] + 1) --i;
    if (i == 0) break;
    ++z[i];
    zmax[i] = std::max(zmax[i - 1], z[i]);
    for (int j = i + 1; j < n; ++j) {
      z[j] = 1;
      zmax[j] = zmax[i];
    }
  }
}

double log_eppf_conditional(const Partition& part, const SizeDistribution& mu,
                            double log_p_en) {
  double lp = std::lgamma(part.num_clusters() + 1.0) - std::lgamma(part.n() + 1.0) -
              log_p_en;
  for (int s : part.sizes()) {
    double m = mu.pmf(s);
    if (m <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += std::lgamma(s + 1.0) + std::log(m);
  }
  return lp;
}

}  // namespace esc
