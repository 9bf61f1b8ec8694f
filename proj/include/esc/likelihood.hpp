#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "esc/partition.hpp"
#include "esc/rng.hpp"

namespace esc {

// Categorical records: n rows, L fields, codes 0..domain[l]-1, row-major.
struct RecordTable {
  int n = 0;
  int L = 0;
  std::vector<int> codes;
  std::vector<int> domain;

  int at(int i, int l) const { return codes[static_cast<size_t>(i) * L + l]; }
  int& at(int i, int l) { return codes[static_cast<size_t>(i) * L + l]; }
};

// Per-field category frequencies; theta[l] is a simplex over domain[l].
using Theta = std::vector<std::vector<double>>;
// Per-field distortion probabilities beta_l in [0,1].
using DistortionVector = std::vector<double>;

Theta empirical_theta(const RecordTable& records);

// Marginal log-likelihood of one cluster-field value multiset under the
// hit-miss model: records copy the latent entity value with probability
// 1 - beta and draw fresh from theta with probability beta, entity values
// themselves drawn from theta and integrated out. Singletons contribute
// exactly log theta[x].
double cluster_field_loglik(std::span<const int> values, double beta,
                            std::span<const double> theta);
// Same on a precomputed (code, count) table.
double cluster_field_loglik_counts(std::span<const std::pair<int, int>> counts,
                                   double beta, std::span<const double> theta);

double partition_loglik(const RecordTable& records, const Partition& part,
                        const DistortionVector& beta, const Theta& theta);

// Moment-matched Beta(a, b): a = c m, b = c (1 - m), c = m(1-m)/sd^2 - 1.
// Throws when sd^2 >= m(1-m).
std::pair<double, double> beta_prior_from_moments(double mean, double sd);

// Slice-updates every beta_l in place against its Beta(a, b) prior times the
// collapsed record likelihood. `lower` truncates the support (the chain uses
// 1e-6 so the incremental cache's linear-space form stays valid).
void sample_beta(const RecordTable& records, const Partition& part,
                 const Theta& theta, double prior_a, double prior_b,
                 DistortionVector& beta, Rng& rng, double lower = 0.0);

// Generates records from the model given a truth partition: one latent value
// per cluster-field from theta, each record distorted independently w.p.
// beta_l.
RecordTable sample_records(const Partition& truth, const DistortionVector& beta,
                           const Theta& theta, Rng& rng);

// Incremental evaluator of the partition-dependent likelihood part. Cluster
// slots mirror the caller's bookkeeping; a Partition's label j maps to slot
// j-1. Tracks per-slot per-field value counts and the collapsed factor f in
// linear space (f = 1/beta_l exactly for singletons), so single-record moves
// cost O(fields) instead of a full rescan.
class LikelihoodCache {
 public:
  static constexpr int kFresh = -1;

  LikelihoodCache(const RecordTable& records, const Partition& part,
                  DistortionVector beta, Theta theta);
  LikelihoodCache(const RecordTable& records, std::span<const int> slot_of_record,
                  DistortionVector beta, Theta theta);

  int slot_of(int i) const { return slot_of_[i]; }
  // Lowest slot id that apply_move would use for kFresh.
  int fresh_slot() const;

  // Multiplicative likelihood factor, product over fields of f'/f, if record
  // i were added to occupied slot `to`.
  double add_factor(int i, int to) const;
  // Factor for opening a singleton: prod_l 1/beta_l (independent of i).
  double fresh_factor() const { return fresh_factor_; }

  // log-likelihood change of moving record i from `from` to `to` (kFresh =
  // new singleton). Pure. Throws std::runtime_error when `from` disagrees
  // with the cached assignment (staleness guard).
  double delta_move(int i, int from, int to) const;

  // Applies the move; returns the slot used (fresh allocations pick
  // fresh_slot() unless `slot_hint` names an unoccupied slot to use instead).
  int apply_move(int i, int to, int slot_hint = -1);

  // Sum over occupied slots and fields of log f (the partition-dependent
  // log-likelihood up to the record-constant prefix).
  double total_logf() const;
  // Full model log-likelihood, prefix included; matches partition_loglik.
  double full_loglik() const;

  // Order-independent hash of the record -> slot assignment.
  std::uint64_t checksum() const { return checksum_; }

  const DistortionVector& beta() const { return beta_; }
  // Replacing beta rebuilds every cached factor.
  void set_beta(DistortionVector beta);

 private:
  struct FieldCell {
    std::vector<std::pair<int, int>> counts;  // (code, count), small
    double f = 1.0;                           // collapsed factor, linear space
  };

  const RecordTable* records_;
  DistortionVector beta_;
  Theta theta_;
  std::vector<int> slot_of_;
  std::vector<FieldCell> cells_;  // slot-major [slot * L + l]
  std::vector<int> slot_sizes_;
  double fresh_factor_ = 1.0;
  double prefix_ = 0.0;  // partition-independent sum_i sum_l log(beta_l theta_lx)
  std::uint64_t checksum_ = 0;

  void ensure_slot(int slot);
  void rebuild_cells();
  double cell_add_ratio(const FieldCell& cell, int code, double beta,
                        std::span<const double> theta) const;
  double cell_remove_ratio(const FieldCell& cell, int code, double beta,
                           std::span<const double> theta) const;
  static double cell_f(const FieldCell& cell, double beta,
                       std::span<const double> theta);
};

// log partition_loglik(after move) - partition_loglik(before); thin wrapper
// over LikelihoodCache::delta_move.
double loglik_delta_move(const LikelihoodCache& cache, int i, int from, int to);

}  // namespace esc
