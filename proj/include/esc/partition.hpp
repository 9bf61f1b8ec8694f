#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

namespace esc {

class SizeDistribution;

// A partition of records 0..n-1 into labeled clusters. Labels are kept
// canonical: cluster j is the j-th distinct label in order of first
// appearance in the allocation array, so two objects describing the same
// grouping compare equal.
class Partition {
 public:
  Partition() = default;

  // Canonicalizes an arbitrary label array. Throws std::invalid_argument on
  // empty input.
  static Partition from_allocations(std::span<const int> z);

  int n() const { return static_cast<int>(alloc_.size()); }
  int num_clusters() const { return static_cast<int>(sizes_.size()); }

  // Canonical label per record, values in 1..num_clusters().
  const std::vector<int>& allocations() const { return alloc_; }
  // sizes()[j-1] is the size of cluster j.
  const std::vector<int>& sizes() const { return sizes_; }
  int max_cluster_size() const;

  // cluster size -> number of clusters of that size
  std::map<int, int> occupancy() const;

  // Moves record i (0-based) into an existing cluster label, or with
  // target == kNewCluster into a fresh singleton. An emptied cluster
  // vanishes and labels re-canonicalize. Throws std::out_of_range /
  // std::invalid_argument on bad arguments.
  static constexpr int kNewCluster = 0;
  void move_record(int i, int target);

  bool operator==(const Partition&) const = default;

 private:
  std::vector<int> alloc_;
  std::vector<int> sizes_;

  void canonicalize();

  friend void enumerate_partitions(int n,
                                   const std::function<void(const Partition&)>& fn);
};

// Streams every partition of {0..n-1} in restricted-growth-string order.
// The Partition passed to the callback is a scratch object reused between
// calls. Guarded to 1 <= n <= 12 (4,213,597 partitions at n = 12).
void enumerate_partitions(int n, const std::function<void(const Partition&)>& fn);

// log of the conditional EPPF: log K! - log n! + sum_j [log S_j! + log mu_{S_j}]
// minus the supplied log P(E_n | mu). Returns -inf when mu has no mass at
// some occupied size.
double log_eppf_conditional(const Partition& part, const SizeDistribution& mu,
                            double log_p_en);

}  // namespace esc
