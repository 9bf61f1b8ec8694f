#include "esc/likelihood.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "esc/mcmc.hpp"

namespace esc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Below this distortion level the factored form of the cluster marginal
// divides by ~0; evaluate the algebraically equivalent sum over latent
// values instead.
constexpr double kBetaStableCutoff = 1e-6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t assign_hash(int record, int slot) {
  return splitmix64((static_cast<std::uint64_t>(record) << 20) ^
                    static_cast<std::uint64_t>(slot + 1));
}

double checked_theta(std::span<const double> theta, int code) {
  if (code < 0 || code >= static_cast<int>(theta.size()))
    throw std::out_of_range("cluster_field_loglik: code outside theta's domain");
  return theta[code];
}

}  // namespace

Theta empirical_theta(const RecordTable& records) {
  if (records.n < 1) throw std::invalid_argument("empirical_theta: empty table");
  Theta theta(records.L);
  for (int l = 0; l < records.L; ++l) theta[l].assign(records.domain[l], 0.0);
  for (int i = 0; i < records.n; ++i)
    for (int l = 0; l < records.L; ++l) theta[l][records.at(i, l)] += 1.0;
  for (auto& t : theta)
    for (double& x : t) x /= records.n;
  return theta;
}

double cluster_field_loglik_counts(std::span<const std::pair<int, int>> counts,
                                   double beta, std::span<const double> theta) {
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("cluster_field_loglik: beta outside [0, 1]");
  int total = 0;
  for (auto [code, q] : counts) total += q;
  if (total == 0) return 0.0;
  if (total == 1) return std::log(checked_theta(theta, counts.front().first));

  double sum_theta = 0.0;
  for (auto [code, q] : counts) {
    double th = checked_theta(theta, code);
    if (th <= 0.0) return kNegInf;  // observed a zero-probability value
    sum_theta += th;
  }
  double slack = std::max(0.0, 1.0 - sum_theta);

  if (beta < kBetaStableCutoff) {
    // Sum over the latent entity value d: the observed values each as d,
    // plus one pooled term for every unobserved d. Stable down to beta = 0.
    double match_base = 0.0;  // sum_j q_j log(beta theta_j)
    for (auto [code, q] : counts) match_base += q * std::log(beta * theta[code]);
    double best = kNegInf;
    std::vector<double> terms;
    terms.reserve(counts.size() + 1);
    for (auto [code_d, q_d] : counts) {
      double t = std::log(theta[code_d]);
      for (auto [code, q] : counts)
        t += q * std::log(beta * theta[code] + (code == code_d ? 1.0 - beta : 0.0));
      terms.push_back(t);
      best = std::max(best, t);
    }
    if (slack > 0.0) {
      double t = std::log(slack) + match_base;
      terms.push_back(t);
      best = std::max(best, t);
    }
    if (best == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - best);
    return best + std::log(acc);
  }

  // Factored form: prod_j (beta theta_j)^{q_j} * f with
  // f = 1 - sum_j theta_j + sum_j theta_j R_j^{q_j}, R_j = 1 + (1-beta)/(beta theta_j).
  double prefix = 0.0;
  double amax = 0.0;  // the slack term sits at exponent 0
  std::vector<double> a(counts.size());
  for (size_t j = 0; j < counts.size(); ++j) {
    auto [code, q] = counts[j];
    prefix += q * std::log(beta * theta[code]);
    a[j] = q * std::log1p((1.0 - beta) / (beta * theta[code]));
    amax = std::max(amax, a[j]);
  }
  double f_scaled = slack * std::exp(-amax);
  for (size_t j = 0; j < counts.size(); ++j)
    f_scaled += theta[counts[j].first] * std::exp(a[j] - amax);
  return prefix + amax + std::log(f_scaled);
}

double cluster_field_loglik(std::span<const int> values, double beta,
                            std::span<const double> theta) {
  if (values.empty()) throw std::invalid_argument("cluster_field_loglik: no values");
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("cluster_field_loglik: beta outside [0, 1]");
  if (values.size() == 1) return std::log(checked_theta(theta, values.front()));
  std::vector<std::pair<int, int>> counts;
  for (int v : values) {
    auto it = std::find_if(counts.begin(), counts.end(),
                           [v](const auto& c) { return c.first == v; });
    if (it == counts.end())
      counts.emplace_back(v, 1);
    else
      ++it->second;
  }
  return cluster_field_loglik_counts(counts, beta, theta);
}

double partition_loglik(const RecordTable& records, const Partition& part,
                        const DistortionVector& beta, const Theta& theta) {
  if (part.n() != records.n)
    throw std::invalid_argument("partition_loglik: partition/table size mismatch");
  if (static_cast<int>(beta.size()) != records.L ||
      static_cast<int>(theta.size()) != records.L)
    throw std::invalid_argument("partition_loglik: beta/theta arity mismatch");
  std::vector<std::vector<int>> members(part.num_clusters());
  for (int i = 0; i < part.n(); ++i)
    members[part.allocations()[i] - 1].push_back(i);
  double lp = 0.0;
  std::vector<int> values;
  for (const auto& cluster : members) {
    for (int l = 0; l < records.L; ++l) {
      values.clear();
      for (int i : cluster) values.push_back(records.at(i, l));
      lp += cluster_field_loglik(values, beta[l], theta[l]);
    }
  }
  return lp;
}

std::pair<double, double> beta_prior_from_moments(double mean, double sd) {
  if (!(mean > 0.0) || !(mean < 1.0))
    throw std::invalid_argument("beta_prior_from_moments: mean must be in (0, 1)");
  double c = mean * (1.0 - mean) / (sd * sd) - 1.0;
  if (!(c > 0.0))
    throw std::invalid_argument(
        "beta_prior_from_moments: sd too large for a Beta with this mean");
  return {c * mean, c * (1.0 - mean)};
}

void sample_beta(const RecordTable& records, const Partition& part,
                 const Theta& theta, double prior_a, double prior_b,
                 DistortionVector& beta, Rng& rng, double lower) {
  if (static_cast<int>(beta.size()) != records.L)
    throw std::invalid_argument("sample_beta: beta arity mismatch");
  std::vector<std::vector<int>> members(part.num_clusters());
  for (int i = 0; i < part.n(); ++i)
    members[part.allocations()[i] - 1].push_back(i);

  for (int l = 0; l < records.L; ++l) {
    // Per-cluster value counts once; singletons are beta-free, skip them.
    std::vector<std::vector<std::pair<int, int>>> counts;
    for (const auto& cluster : members) {
      if (cluster.size() < 2) continue;
      std::vector<std::pair<int, int>> c;
      for (int i : cluster) {
        int v = records.at(i, l);
        auto it = std::find_if(c.begin(), c.end(),
                               [v](const auto& e) { return e.first == v; });
        if (it == c.end())
          c.emplace_back(v, 1);
        else
          ++it->second;
      }
      counts.push_back(std::move(c));
    }
    auto logpost = [&](double b) {
      double lp = (prior_a - 1.0) * std::log(b) + (prior_b - 1.0) * std::log1p(-b);
      for (const auto& c : counts) lp += cluster_field_loglik_counts(c, b, theta[l]);
      return lp;
    };
    beta[l] = slice_sample(std::clamp(beta[l], std::max(lower, 1e-10), 1.0 - 1e-10),
                           logpost, 0.1, lower, 1.0, rng);
  }
}

RecordTable sample_records(const Partition& truth, const DistortionVector& beta,
                           const Theta& theta, Rng& rng) {
  int L = static_cast<int>(beta.size());
  if (static_cast<int>(theta.size()) != L)
    throw std::invalid_argument("sample_records: beta/theta arity mismatch");
  RecordTable records;
  records.n = truth.n();
  records.L = L;
  records.codes.assign(static_cast<size_t>(records.n) * L, 0);
  for (const auto& t : theta) records.domain.push_back(static_cast<int>(t.size()));

  auto draw_cat = [&](std::span<const double> probs) {
    double u = uniform01(rng), cum = 0.0;
    for (size_t d = 0; d < probs.size(); ++d) {
      cum += probs[d];
      if (u < cum) return static_cast<int>(d);
    }
    return static_cast<int>(probs.size()) - 1;
  };

  std::vector<std::vector<int>> members(truth.num_clusters());
  for (int i = 0; i < truth.n(); ++i)
    members[truth.allocations()[i] - 1].push_back(i);
  for (const auto& cluster : members) {
    for (int l = 0; l < L; ++l) {
      int entity_value = draw_cat(theta[l]);
      for (int i : cluster) {
        bool distort = uniform01(rng) < beta[l];
        records.at(i, l) = distort ? draw_cat(theta[l]) : entity_value;
      }
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// LikelihoodCache

LikelihoodCache::LikelihoodCache(const RecordTable& records, const Partition& part,
                                 DistortionVector beta, Theta theta)
    : records_(&records), beta_(std::move(beta)), theta_(std::move(theta)) {
  if (part.n() != records.n)
    throw std::invalid_argument("LikelihoodCache: partition/table size mismatch");
  slot_of_.resize(records.n);
  for (int i = 0; i < records.n; ++i) slot_of_[i] = part.allocations()[i] - 1;
  rebuild_cells();
}

LikelihoodCache::LikelihoodCache(const RecordTable& records,
                                 std::span<const int> slot_of_record,
                                 DistortionVector beta, Theta theta)
    : records_(&records),
      beta_(std::move(beta)),
      theta_(std::move(theta)),
      slot_of_(slot_of_record.begin(), slot_of_record.end()) {
  if (static_cast<int>(slot_of_.size()) != records.n)
    throw std::invalid_argument("LikelihoodCache: assignment/table size mismatch");
  rebuild_cells();
}

void LikelihoodCache::rebuild_cells() {
  const RecordTable& rec = *records_;
  if (static_cast<int>(beta_.size()) != rec.L ||
      static_cast<int>(theta_.size()) != rec.L)
    throw std::invalid_argument("LikelihoodCache: beta/theta arity mismatch");
  for (int l = 0; l < rec.L; ++l)
    if (!(beta_[l] >= kBetaStableCutoff) || !(beta_[l] <= 1.0))
      throw std::invalid_argument(
          "LikelihoodCache: beta must be in [1e-6, 1] for the incremental form");

  int max_slot = -1;
  for (int s : slot_of_) max_slot = std::max(max_slot, s);
  cells_.assign(static_cast<size_t>(max_slot + 1) * rec.L, FieldCell{});
  slot_sizes_.assign(max_slot + 1, 0);
  checksum_ = 0;
  prefix_ = 0.0;
  for (int i = 0; i < rec.n; ++i) {
    int slot = slot_of_[i];
    if (slot < 0) throw std::invalid_argument("LikelihoodCache: negative slot");
    ++slot_sizes_[slot];
    checksum_ ^= assign_hash(i, slot);
    for (int l = 0; l < rec.L; ++l) {
      auto& counts = cells_[static_cast<size_t>(slot) * rec.L + l].counts;
      int v = rec.at(i, l);
      prefix_ += std::log(beta_[l] * checked_theta(theta_[l], v));
      auto it = std::find_if(counts.begin(), counts.end(),
                             [v](const auto& c) { return c.first == v; });
      if (it == counts.end())
        counts.emplace_back(v, 1);
      else
        ++it->second;
    }
  }
  for (int slot = 0; slot <= max_slot; ++slot)
    for (int l = 0; l < rec.L; ++l) {
      auto& cell = cells_[static_cast<size_t>(slot) * rec.L + l];
      cell.f = cell_f(cell, beta_[l], theta_[l]);
    }
  fresh_factor_ = 1.0;
  for (double b : beta_) fresh_factor_ /= b;
}

void LikelihoodCache::set_beta(DistortionVector beta) {
  beta_ = std::move(beta);
  rebuild_cells();
}

double LikelihoodCache::cell_f(const FieldCell& cell, double beta,
                               std::span<const double> theta) {
  int total = 0;
  for (auto [code, q] : cell.counts) total += q;
  if (total == 0) return 1.0;
  if (total == 1) return 1.0 / beta;  // exact singleton marginal
  double sum_theta = 0.0, acc = 0.0;
  for (auto [code, q] : cell.counts) {
    double th = theta[code];
    double r = 1.0 + (1.0 - beta) / (beta * th);
    acc += th * std::pow(r, q);
    sum_theta += th;
  }
  double f = std::max(0.0, 1.0 - sum_theta) + acc;
  if (!std::isfinite(f))
    throw std::runtime_error(
        "LikelihoodCache: collapsed factor overflowed; cluster too large for "
        "this beta/theta");
  return f;
}

void LikelihoodCache::ensure_slot(int slot) {
  if (slot < static_cast<int>(slot_sizes_.size())) return;
  slot_sizes_.resize(slot + 1, 0);
  cells_.resize(static_cast<size_t>(slot + 1) * records_->L, FieldCell{});
}

int LikelihoodCache::fresh_slot() const {
  for (int s = 0; s < static_cast<int>(slot_sizes_.size()); ++s)
    if (slot_sizes_[s] == 0) return s;
  return static_cast<int>(slot_sizes_.size());
}

double LikelihoodCache::cell_add_ratio(const FieldCell& cell, int code, double beta,
                                       std::span<const double> theta) const {
  double th = theta[code];
  if (th <= 0.0) return 0.0;
  double r = 1.0 + (1.0 - beta) / (beta * th);
  int q = 0;
  for (auto [c, cnt] : cell.counts)
    if (c == code) {
      q = cnt;
      break;
    }
  double rq = 1.0;
  for (int t = 0; t < q; ++t) rq *= r;  // q is a cluster size; stays small
  // f gains theta (R^{q+1} - R^q) = theta R^q (R - 1)
  return (cell.f + th * rq * (r - 1.0)) / cell.f;
}

double LikelihoodCache::cell_remove_ratio(const FieldCell& cell, int code,
                                          double beta,
                                          std::span<const double> theta) const {
  double th = theta[code];
  double r = 1.0 + (1.0 - beta) / (beta * th);
  int q = 0;
  for (auto [c, cnt] : cell.counts)
    if (c == code) {
      q = cnt;
      break;
    }
  assert(q >= 1 && "removing a value the cell does not hold");
  double rq = 1.0;
  for (int t = 0; t < q - 1; ++t) rq *= r;
  return (cell.f - th * rq * (r - 1.0)) / cell.f;
}

double LikelihoodCache::add_factor(int i, int to) const {
  const RecordTable& rec = *records_;
  if (to < 0 || to >= static_cast<int>(slot_sizes_.size()) || slot_sizes_[to] == 0)
    throw std::invalid_argument("add_factor: target slot is not occupied");
  double ratio = 1.0;
  for (int l = 0; l < rec.L; ++l)
    ratio *= cell_add_ratio(cells_[static_cast<size_t>(to) * rec.L + l],
                            rec.at(i, l), beta_[l], theta_[l]);
  return ratio;
}

double LikelihoodCache::delta_move(int i, int from, int to) const {
  if (i < 0 || i >= records_->n)
    throw std::out_of_range("delta_move: record index out of range");
  if (slot_of_[i] != from)
    throw std::runtime_error(
        "delta_move: stale cache; record is not in the stated source slot");
  if (from == to) return 0.0;
  const RecordTable& rec = *records_;
  double ratio = 1.0;
  for (int l = 0; l < rec.L; ++l)
    ratio *= cell_remove_ratio(cells_[static_cast<size_t>(from) * rec.L + l],
                               rec.at(i, l), beta_[l], theta_[l]);
  if (to == kFresh) {
    ratio *= fresh_factor_;
  } else {
    // Disallow "moves" that target the source via an alias.
    if (to < 0) throw std::invalid_argument("delta_move: bad target slot");
    ratio *= add_factor(i, to);
  }
  return std::log(ratio);
}

int LikelihoodCache::apply_move(int i, int to, int slot_hint) {
  const RecordTable& rec = *records_;
  int from = slot_of_[i];
  if (to == kFresh) {
    to = (slot_hint >= 0) ? slot_hint : fresh_slot();
    ensure_slot(to);
    if (slot_sizes_[to] != 0)
      throw std::invalid_argument("apply_move: fresh slot hint is occupied");
  }
  if (to == from) return to;
  ensure_slot(to);
  for (int l = 0; l < rec.L; ++l) {
    int v = rec.at(i, l);
    auto& src = cells_[static_cast<size_t>(from) * rec.L + l];
    auto it = std::find_if(src.counts.begin(), src.counts.end(),
                           [v](const auto& c) { return c.first == v; });
    assert(it != src.counts.end());
    if (--it->second == 0) {
      *it = src.counts.back();
      src.counts.pop_back();
    }
    src.f = cell_f(src, beta_[l], theta_[l]);
    auto& dst = cells_[static_cast<size_t>(to) * rec.L + l];
    auto jt = std::find_if(dst.counts.begin(), dst.counts.end(),
                           [v](const auto& c) { return c.first == v; });
    if (jt == dst.counts.end())
      dst.counts.emplace_back(v, 1);
    else
      ++jt->second;
    dst.f = cell_f(dst, beta_[l], theta_[l]);
  }
  --slot_sizes_[from];
  ++slot_sizes_[to];
  checksum_ ^= assign_hash(i, from) ^ assign_hash(i, to);
  slot_of_[i] = to;
  return to;
}

double LikelihoodCache::total_logf() const {
  double acc = 0.0;
  for (int slot = 0; slot < static_cast<int>(slot_sizes_.size()); ++slot) {
    if (slot_sizes_[slot] == 0) continue;
    for (int l = 0; l < records_->L; ++l)
      acc += std::log(cells_[static_cast<size_t>(slot) * records_->L + l].f);
  }
  return acc;
}

double LikelihoodCache::full_loglik() const { return prefix_ + total_logf(); }

double loglik_delta_move(const LikelihoodCache& cache, int i, int from, int to) {
  return cache.delta_move(i, from, to);
}

}  // namespace esc
