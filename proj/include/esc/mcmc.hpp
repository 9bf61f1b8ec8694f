#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "esc/crp.hpp"
#include "esc/esc_prior.hpp"
#include "esc/likelihood.hpp"
#include "esc/partition.hpp"
#include "esc/rng.hpp"

namespace esc {

// Mutable partition bookkeeping for the samplers: stable slot ids instead of
// canonical labels, O(1) membership moves, occupancy tracked by size.
class ClusterState {
 public:
  static constexpr int kFresh = -1;

  explicit ClusterState(const Partition& part);

  int n() const { return static_cast<int>(slot_of_.size()); }
  int num_clusters() const { return static_cast<int>(occupied_.size()); }
  int slot_of(int i) const { return slot_of_[i]; }
  int slot_size(int s) const { return sizes_[s]; }
  const std::vector<int>& members(int s) const { return members_[s]; }
  const std::vector<int>& occupied_slots() const { return occupied_; }
  // counts[s] = number of clusters of size s (index 0 unused)
  const std::vector<int>& occupancy_counts() const { return occ_counts_; }
  int max_cluster_size() const { return max_size_; }

  // Moves record i to slot `to` (kFresh opens a new slot); returns the slot
  // it landed in. Emptied slots are recycled.
  int move(int i, int to);

  Partition to_partition() const;
  std::map<int, int> occupancy_map() const;

 private:
  std::vector<int> slot_of_;
  std::vector<int> pos_in_cluster_;
  std::vector<std::vector<int>> members_;
  std::vector<int> sizes_;
  std::vector<int> occupied_;      // dense list of live slots
  std::vector<int> occupied_pos_;  // slot -> index in occupied_
  std::vector<int> free_slots_;
  std::vector<int> occ_counts_;
  int max_size_ = 0;

  void occ_add(int size);
  void occ_remove(int size);
};

// Prior part of the one-record reallocation weights, on a common scale.
class ReallocRule {
 public:
  virtual ~ReallocRule() = default;
  // weight to join a cluster whose size without the moving record is `size`
  virtual double existing(int size) const = 0;
  // weight to open a new cluster when `k` clusters remain without the record
  virtual double fresh(int k) const = 0;
};

class EscMuRule : public ReallocRule {  // explicit mu, ratio form
 public:
  explicit EscMuRule(const SizeDistribution& mu) : mu_(&mu) {}
  double existing(int size) const override;
  double fresh(int k) const override;

 private:
  const SizeDistribution* mu_;
};

class EscNbRule : public ReallocRule {  // collapsed TruncNegBin form
 public:
  EscNbRule(double r, double p);
  double existing(int size) const override { return size + r_; }
  double fresh(int k) const override { return (k + 1) * gamma_r_; }

 private:
  double r_, gamma_r_;  // gamma_r_ = gamma(r, p) * r
};

class CrpRule : public ReallocRule {
 public:
  explicit CrpRule(CrpParams params) : params_(params) {}
  double existing(int size) const override { return size - params_.sigma; }
  double fresh(int k) const override {
    return params_.theta + params_.sigma * k;
  }

 private:
  CrpParams params_;
};

// Chaperone pair selection. Bias on: draw N_f ~ Uniform{0..L}, pick N_f
// fields uniformly, then a uniform record pair among those agreeing on all
// chosen fields (uniform over all pairs when none agree). Depends on the
// records only, never on the partition, and every pair has positive
// probability via N_f = 0.
class ChaperoneSelector {
 public:
  ChaperoneSelector(const RecordTable& records, bool bias);
  std::pair<int, int> draw(Rng& rng) const;

 private:
  struct SubsetIndex {
    std::vector<int> order;        // records grouped by agreement class
    std::vector<int> group_start;  // group g = order[start[g]..start[g+1])
    std::vector<double> cum_pairs;
    double total_pairs = 0.0;
  };
  int n_;
  int L_;
  bool bias_;
  std::vector<SubsetIndex> subsets_;  // one per field subset, bit mask order

  std::pair<int, int> uniform_pair(Rng& rng) const;
};

// One draw as above; builds the index on the fly (use ChaperoneSelector
// directly inside loops).
std::pair<int, int> chaperone_pair(const RecordTable& records, bool bias,
                                   Rng& rng);

// Restricted Gibbs sweep given chaperones (i, j): every other record of
// cluster(i) and cluster(j) is reassigned between those two clusters with
// weight prior x likelihood factor; i and j never move. No-op when the
// chaperones share a cluster. `lik` may be null (unit likelihood).
void chaperones_move(ClusterState& state, LikelihoodCache* lik,
                     const ReallocRule& rule, std::pair<int, int> chaps,
                     Rng& rng);

// Full sequential scan: each record in turn is removed and reassigned among
// all clusters plus a fresh one.
void gibbs_scan(ClusterState& state, LikelihoodCache* lik,
                const ReallocRule& rule, Rng& rng);

// Stepping-out / shrinkage slice sampler for one coordinate on the open
// interval (lower, upper); logf may return -inf inside the interval.
double slice_sample(double x0, const std::function<double(double)>& logf,
                    double width, double lower, double upper, Rng& rng);

// Slice-updates r over (0, inf) then p over (0, 1) against log_cond(r, p).
void slice_update_rp(double& r, double& p,
                     const std::function<double(double, double)>& log_cond,
                     Rng& rng);

struct ChainConfig {
  std::string model = "esc-d";  // esc-nb | esc-d | dp | py
  EscHyper esc;

  double concentration_shape = 1.0;
  double concentration_rate = -1.0;  // <= 0: use 2/n
  double py_sigma = 0.5;
  bool py_update_sigma = false;

  long iterations = 20000;
  int partition_moves_per_iter = 1000;
  long burn_in = 5000;  // outer iterations dropped before thinning
  int thin = 1;
  int full_scan_interval = 100;  // a gibbs_scan replaces every k-th move

  std::uint64_t seed = 1;
  int chains = 1;  // fit-level fan-out; run_chain itself runs one

  bool beta_infer = false;
  std::vector<double> beta_fixed{0.01};  // broadcast over fields if length 1
  double beta_prior_mean = 0.005;
  double beta_prior_sd = 0.01;

  bool chaperone_bias = true;
  bool fix_rp = false;     // freeze global parameters at their inits
  bool prior_only = false;  // unit likelihood

  double r_init = 1.0;
  double p_init = 0.5;
  double theta_init = 1.0;
  double sigma_init = -1.0;  // < 0: use py_sigma
  int mu_truncation_min = 32;
};

struct TraceSample {
  long iteration = 0;
  int k = 0;
  // For dp / py these slots carry (theta, sigma).
  double r = 0.0;
  double p = 0.0;
  std::vector<double> beta;
  std::vector<int> allocations;
};

struct Trace {
  std::string model;
  int n = 0;
  int L = 0;
  std::vector<TraceSample> samples;
};

// One MCMC chain: per outer iteration one global-parameter update, then
// partition_moves_per_iter chaperones moves with periodic full scans, then
// one thinned sample. Deterministic given the seed.
Trace run_chain(const ChainConfig& config, const RecordTable& records);

struct DiagStats {
  double mean = 0.0;
  double mcse = 0.0;
  double ess = 0.0;
};

// Batch-means MCSE and effective sample size; needs >= 100 samples.
DiagStats diagnostics(std::span<const double> x);

}  // namespace esc
