#include "esc/mcmc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace esc {

// ---------------------------------------------------------------------------
// ClusterState

ClusterState::ClusterState(const Partition& part) {
  int n = part.n();
  slot_of_.resize(n);
  pos_in_cluster_.resize(n);
  int k = part.num_clusters();
  members_.resize(n + 1);  // capacity for every reachable slot
  sizes_.assign(n + 1, 0);
  occupied_pos_.assign(n + 1, -1);
  occ_counts_.assign(n + 2, 0);
  for (int i = 0; i < n; ++i) {
    int slot = part.allocations()[i] - 1;
    slot_of_[i] = slot;
    pos_in_cluster_[i] = static_cast<int>(members_[slot].size());
    members_[slot].push_back(i);
    ++sizes_[slot];
  }
  occupied_.reserve(n);
  for (int s = 0; s < k; ++s) {
    occupied_pos_[s] = static_cast<int>(occupied_.size());
    occupied_.push_back(s);
    occ_add(sizes_[s]);
  }
  for (int s = n; s >= k; --s) free_slots_.push_back(s);
}

void ClusterState::occ_add(int size) {
  ++occ_counts_[size];
  max_size_ = std::max(max_size_, size);
}

void ClusterState::occ_remove(int size) {
  --occ_counts_[size];
  assert(occ_counts_[size] >= 0);
  while (max_size_ > 0 && occ_counts_[max_size_] == 0) --max_size_;
}

int ClusterState::move(int i, int to) {
  int from = slot_of_[i];
  if (to == from) return from;
  if (to == kFresh) {
    assert(!free_slots_.empty());
    to = free_slots_.back();
    free_slots_.pop_back();
    occupied_pos_[to] = static_cast<int>(occupied_.size());
    occupied_.push_back(to);
  } else if (sizes_[to] == 0) {
    throw std::invalid_argument("ClusterState::move: target slot is empty");
  }
  // unhook from the old cluster (swap-remove keeps membership O(1))
  auto& src = members_[from];
  int last = src.back();
  src[pos_in_cluster_[i]] = last;
  pos_in_cluster_[last] = pos_in_cluster_[i];
  src.pop_back();
  occ_remove(sizes_[from]);
  if (--sizes_[from] > 0) {
    occ_add(sizes_[from]);
  } else {
    int pos = occupied_pos_[from];
    occupied_[pos] = occupied_.back();
    occupied_pos_[occupied_.back()] = pos;
    occupied_.pop_back();
    occupied_pos_[from] = -1;
    free_slots_.push_back(from);
  }
  auto& dst = members_[to];
  pos_in_cluster_[i] = static_cast<int>(dst.size());
  dst.push_back(i);
  if (sizes_[to] > 0) occ_remove(sizes_[to]);
  occ_add(++sizes_[to]);
  slot_of_[i] = to;
  return to;
}

Partition ClusterState::to_partition() const {
  std::vector<int> alloc(slot_of_.size());
  for (size_t i = 0; i < slot_of_.size(); ++i) alloc[i] = slot_of_[i] + 1;
  return Partition::from_allocations(alloc);
}

std::map<int, int> ClusterState::occupancy_map() const {
  std::map<int, int> occ;
  for (int s = 1; s <= max_size_; ++s)
    if (occ_counts_[s] > 0) occ[s] = occ_counts_[s];
  return occ;
}

// ---------------------------------------------------------------------------
// Reallocation rules

double EscMuRule::existing(int size) const {
  double num = mu_->pmf(size + 1), den = mu_->pmf(size);
  return (num > 0.0 && den > 0.0) ? (size + 1.0) * num / den : 0.0;
}

double EscMuRule::fresh(int k) const { return (k + 1.0) * mu_->pmf(1); }

EscNbRule::EscNbRule(double r, double p) : r_(r) {
  gamma_r_ = std::exp(TruncNegBin(r, p).log_norm()) * r;
}

namespace {

// Explicit-mu rule that stick-breaks more tail components on demand, so a
// cluster may grow past the truncation chosen when mu was drawn.
class LazyMuRule : public ReallocRule {
 public:
  LazyMuRule(SizeDistribution* mu, double alpha, double r, double p, Rng* rng)
      : mu_(mu), alpha_(alpha), r_(r), p_(p), rng_(rng) {}

  double existing(int size) const override {
    if (size + 1 > mu_->truncation())
      extend_mu_posterior(*mu_, alpha_, r_, p_, size + 9, *rng_);
    double num = mu_->pmf(size + 1), den = mu_->pmf(size);
    return (num > 0.0 && den > 0.0) ? (size + 1.0) * num / den : 0.0;
  }
  double fresh(int k) const override { return (k + 1.0) * mu_->pmf(1); }

 private:
  SizeDistribution* mu_;
  double alpha_, r_, p_;
  Rng* rng_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Chaperone selection

ChaperoneSelector::ChaperoneSelector(const RecordTable& records, bool bias)
    : n_(records.n), L_(records.L), bias_(bias) {
  if (n_ < 2)
    throw std::invalid_argument("ChaperoneSelector: need at least two records");
  if (!bias_) return;
  if (L_ > 12)
    throw std::invalid_argument(
        "ChaperoneSelector: similarity bias supports at most 12 fields");
  subsets_.resize(size_t{1} << L_);
  std::vector<int> key;
  for (size_t mask = 0; mask < subsets_.size(); ++mask) {
    // Group records agreeing on the masked fields; groups with >= 2 records
    // contribute their within-group pairs.
    std::map<std::vector<int>, std::vector<int>> groups;
    for (int i = 0; i < n_; ++i) {
      key.clear();
      for (int l = 0; l < L_; ++l)
        if (mask >> l & 1) key.push_back(records.at(i, l));
      groups[key].push_back(i);
    }
    SubsetIndex& idx = subsets_[mask];
    for (auto& [k, ids] : groups) {
      if (ids.size() < 2) continue;
      idx.group_start.push_back(static_cast<int>(idx.order.size()));
      idx.order.insert(idx.order.end(), ids.begin(), ids.end());
      double pairs = 0.5 * ids.size() * (ids.size() - 1.0);
      idx.total_pairs += pairs;
      idx.cum_pairs.push_back(idx.total_pairs);
    }
    idx.group_start.push_back(static_cast<int>(idx.order.size()));
  }
}

std::pair<int, int> ChaperoneSelector::uniform_pair(Rng& rng) const {
  int i = std::uniform_int_distribution<int>(0, n_ - 1)(rng);
  int j = std::uniform_int_distribution<int>(0, n_ - 2)(rng);
  if (j >= i) ++j;
  return {i, j};
}

std::pair<int, int> ChaperoneSelector::draw(Rng& rng) const {
  if (!bias_) return uniform_pair(rng);
  // N_f ~ Uniform{0..L}, then N_f distinct fields uniformly.
  int nf = std::uniform_int_distribution<int>(0, L_)(rng);
  std::uint32_t mask = 0;
  std::vector<int> fields(L_);
  for (int l = 0; l < L_; ++l) fields[l] = l;
  for (int t = 0; t < nf; ++t) {
    int j = std::uniform_int_distribution<int>(t, L_ - 1)(rng);
    std::swap(fields[t], fields[j]);
    mask |= 1u << fields[t];
  }
  const SubsetIndex& idx = subsets_[mask];
  if (idx.total_pairs <= 0.0) return uniform_pair(rng);  // nobody agrees
  double u = uniform01(rng) * idx.total_pairs;
  size_t g = std::lower_bound(idx.cum_pairs.begin(), idx.cum_pairs.end(), u) -
             idx.cum_pairs.begin();
  g = std::min(g, idx.cum_pairs.size() - 1);
  int start = idx.group_start[g], stop = idx.group_start[g + 1];
  int m = stop - start;
  int a = std::uniform_int_distribution<int>(0, m - 1)(rng);
  int b = std::uniform_int_distribution<int>(0, m - 2)(rng);
  if (b >= a) ++b;
  return {idx.order[start + a], idx.order[start + b]};
}

std::pair<int, int> chaperone_pair(const RecordTable& records, bool bias,
                                   Rng& rng) {
  return ChaperoneSelector(records, bias).draw(rng);
}

// ---------------------------------------------------------------------------
// Partition kernels

void chaperones_move(ClusterState& state, LikelihoodCache* lik,
                     const ReallocRule& rule, std::pair<int, int> chaps,
                     Rng& rng) {
  auto [ci, cj] = chaps;
  if (ci == cj) throw std::invalid_argument("chaperones_move: chaperones must differ");
  int si = state.slot_of(ci), sj = state.slot_of(cj);
  if (si == sj) return;  // both chaperones pinned to the same cluster
  std::vector<int> sweep;
  sweep.reserve(state.slot_size(si) + state.slot_size(sj) - 2);
  for (int k : state.members(si))
    if (k != ci) sweep.push_back(k);
  for (int k : state.members(sj))
    if (k != cj) sweep.push_back(k);
  for (int k : sweep) {
    int from = state.slot_of(k);
    int other = (from == si) ? sj : si;
    // Weights relative to the partition without k; the common remove-ratio is
    // folded into the `other` branch so no division happens.
    double w_stay = rule.existing(state.slot_size(from) - 1);
    double w_other = rule.existing(state.slot_size(other));
    if (lik != nullptr) {
      double rem = std::exp(lik->delta_move(k, from, LikelihoodCache::kFresh)) /
                   lik->fresh_factor();
      w_other *= rem * lik->add_factor(k, other);
    }
    double total = w_stay + w_other;
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::runtime_error("chaperones_move: degenerate restricted weights");
    if (uniform01(rng) * total >= w_stay) {
      state.move(k, other);
      if (lik != nullptr) lik->apply_move(k, other);
    }
  }
}

void gibbs_scan(ClusterState& state, LikelihoodCache* lik, const ReallocRule& rule,
                Rng& rng) {
  int n = state.n();
  std::vector<double> weights;
  std::vector<int> targets;
  for (int i = 0; i < n; ++i) {
    int from = state.slot_of(i);
    bool singleton = state.slot_size(from) == 1;
    int k_minus = state.num_clusters() - (singleton ? 1 : 0);
    double rem = 1.0;
    if (lik != nullptr)
      rem = std::exp(lik->delta_move(i, from, LikelihoodCache::kFresh)) /
            lik->fresh_factor();
    weights.clear();
    targets.clear();
    for (int c : state.occupied_slots()) {
      if (c == from) {
        if (singleton) continue;  // staying alone is the fresh option below
        weights.push_back(rule.existing(state.slot_size(from) - 1));
      } else {
        double w = rule.existing(state.slot_size(c));
        if (lik != nullptr && w > 0.0) w *= rem * lik->add_factor(i, c);
        weights.push_back(w);
      }
      targets.push_back(c);
    }
    double w_fresh = rule.fresh(k_minus);
    if (lik != nullptr) w_fresh *= rem * lik->fresh_factor();
    weights.push_back(w_fresh);
    targets.push_back(ClusterState::kFresh);

    int pick = targets[sample_weights(weights, rng)];
    if (pick == from) continue;
    int slot = state.move(i, pick);
    if (lik != nullptr) lik->apply_move(i, pick, slot);
  }
}

// ---------------------------------------------------------------------------
// Slice sampling

double slice_sample(double x0, const std::function<double(double)>& logf,
                    double width, double lower, double upper, Rng& rng) {
  if (!(x0 > lower) || !(x0 < upper))
    throw std::invalid_argument("slice_sample: x0 outside (lower, upper)");
  double y0 = logf(x0);
  if (!std::isfinite(y0))
    throw std::invalid_argument("slice_sample: logf(x0) not finite");
  double logy = y0 + std::log(uniform01(rng));
  double u = uniform01(rng) * width;
  double lo = std::max(lower, x0 - u);
  double hi = std::min(upper, x0 + (width - u));
  for (int steps = 0; steps < 100 && lo > lower && logf(lo) > logy; ++steps)
    lo = std::max(lower, lo - width);
  for (int steps = 0; steps < 100 && hi < upper && logf(hi) > logy; ++steps)
    hi = std::min(upper, hi + width);
  for (int tries = 0; tries < 1000; ++tries) {
    double x1 = lo + uniform01(rng) * (hi - lo);
    if (logf(x1) >= logy) return x1;
    (x1 < x0 ? lo : hi) = x1;
  }
  throw std::runtime_error("slice_sample: shrinkage failed to accept");
}

void slice_update_rp(double& r, double& p,
                     const std::function<double(double, double)>& log_cond,
                     Rng& rng) {
  double pl = p;
  r = slice_sample(
      r, [&](double x) { return log_cond(x, pl); }, 1.0, 0.0,
      std::numeric_limits<double>::infinity(), rng);
  double rl = r;
  p = slice_sample(
      p, [&](double x) { return log_cond(rl, x); }, 0.2, 0.0, 1.0, rng);
}

// ---------------------------------------------------------------------------
// run_chain

namespace {

ChainConfig validated(const ChainConfig& config, const RecordTable& records) {
  ChainConfig c = config;
  if (records.n < 1) throw std::invalid_argument("run_chain: empty record table");
  if (c.model != "esc-nb" && c.model != "esc-d" && c.model != "dp" && c.model != "py")
    throw std::invalid_argument("run_chain: unknown model '" + c.model + "'");
  if (c.iterations < 1 || c.thin < 1 || c.partition_moves_per_iter < 0)
    throw std::invalid_argument("run_chain: bad schedule");
  if (c.burn_in < 0 || c.burn_in >= c.iterations)
    throw std::invalid_argument("run_chain: burn_in must be in [0, iterations)");
  if (c.concentration_rate <= 0.0) c.concentration_rate = 2.0 / records.n;
  if (c.sigma_init < 0.0) c.sigma_init = c.py_sigma;
  if (!c.prior_only && records.L < 1)
    throw std::invalid_argument("run_chain: records have no fields");
  // beta is recorded in the trace even when the likelihood is off
  if (c.beta_fixed.size() == 1 && records.L >= 1)
    c.beta_fixed.assign(records.L, c.beta_fixed[0]);
  if (static_cast<int>(c.beta_fixed.size()) != records.L)
    throw std::invalid_argument("run_chain: beta arity mismatch");
  return c;
}

}  // namespace

Trace run_chain(const ChainConfig& config_in, const RecordTable& records) {
  ChainConfig cfg = validated(config_in, records);
  int n = records.n;
  Rng rng(cfg.seed);

  // all-singleton start
  std::vector<int> init(n);
  for (int i = 0; i < n; ++i) init[i] = i + 1;
  ClusterState state(Partition::from_allocations(init));

  Theta theta;
  // recorded in every sample, so keep it populated for prior-only runs too
  DistortionVector beta = cfg.beta_infer
                              ? DistortionVector(records.L, cfg.beta_prior_mean)
                              : cfg.beta_fixed;
  std::pair<double, double> beta_ab{0.0, 0.0};
  std::unique_ptr<LikelihoodCache> lik;
  if (!cfg.prior_only) {
    theta = empirical_theta(records);
    if (cfg.beta_infer)
      beta_ab = beta_prior_from_moments(cfg.beta_prior_mean, cfg.beta_prior_sd);
    std::vector<int> slots(n);
    for (int i = 0; i < n; ++i) slots[i] = i;
    lik = std::make_unique<LikelihoodCache>(records, slots, beta, theta);
  }

  std::unique_ptr<ChaperoneSelector> selector;
  if (n >= 2 && cfg.partition_moves_per_iter > 0)
    selector = std::make_unique<ChaperoneSelector>(records, cfg.chaperone_bias);

  bool is_esc = cfg.model == "esc-nb" || cfg.model == "esc-d";
  double r = cfg.r_init, p = cfg.p_init;
  double conc = cfg.theta_init, sigma = (cfg.model == "py") ? cfg.sigma_init : 0.0;
  SizeDistribution mu{TruncNegBin(r, p)};  // replaced per iteration for esc-d

  Trace trace;
  trace.model = cfg.model;
  trace.n = n;
  trace.L = records.L;
  long expected = (cfg.iterations - cfg.burn_in) / cfg.thin;
  trace.samples.reserve(expected);

  for (long it = 1; it <= cfg.iterations; ++it) {
    // global-parameter block
    if (is_esc) {
      if (!cfg.fix_rp) {
        if (cfg.model == "esc-nb") {
          auto occ = state.occupancy_map();
          slice_update_rp(
              r, p,
              [&](double rr, double pp) {
                return log_cond_rp_nb_occ(occ, n, rr, pp, cfg.esc);
              },
              rng);
        } else {
          auto occ = state.occupancy_map();
          slice_update_rp(
              r, p,
              [&](double rr, double pp) {
                return log_cond_rp_escd(occ, rr, pp, cfg.esc);
              },
              rng);
        }
      }
      if (cfg.model == "esc-d") {
        int m = std::max(2 * state.max_cluster_size(), cfg.mu_truncation_min);
        mu = sample_mu_posterior(state.occupancy_map(), cfg.esc.alpha, r, p, m, rng);
      }
    } else if (!cfg.fix_rp) {
      if (cfg.model == "dp") {
        conc = slice_sample(
            conc,
            [&](double t) {
              return log_cond_concentration(state.num_clusters(), n, t,
                                            cfg.concentration_shape,
                                            cfg.concentration_rate);
            },
            1.0, 0.0, std::numeric_limits<double>::infinity(), rng);
      } else {
        conc = slice_sample(
            conc,
            [&](double t) {
              return log_cond_concentration_py(state.num_clusters(), n, t, sigma,
                                               cfg.concentration_shape,
                                               cfg.concentration_rate);
            },
            1.0, 0.0, std::numeric_limits<double>::infinity(), rng);
        if (cfg.py_update_sigma) {
          std::vector<int> sizes;
          for (int c : state.occupied_slots()) sizes.push_back(state.slot_size(c));
          double th = conc;
          sigma = slice_sample(
              sigma,
              [&](double s) { return log_cond_discount(sizes, th, s); }, 0.1,
              0.0, 1.0 - 1e-9, rng);
        }
      }
    }
    if (!cfg.prior_only && cfg.beta_infer) {
      sample_beta(records, state.to_partition(), theta, beta_ab.first,
                  beta_ab.second, beta, rng, 1e-6);
      lik->set_beta(beta);
    }

    // partition block
    if (selector) {
      EscNbRule nb_rule(r, p);
      LazyMuRule lazy_rule(&mu, cfg.esc.alpha, r, p, &rng);
      CrpRule crp_rule({conc, sigma});
      const ReallocRule& rule =
          cfg.model == "esc-nb"
              ? static_cast<const ReallocRule&>(nb_rule)
              : cfg.model == "esc-d" ? static_cast<const ReallocRule&>(lazy_rule)
                                     : static_cast<const ReallocRule&>(crp_rule);
      for (int mvs = 1; mvs <= cfg.partition_moves_per_iter; ++mvs) {
        if (cfg.full_scan_interval > 0 && mvs % cfg.full_scan_interval == 0)
          gibbs_scan(state, lik.get(), rule, rng);
        else
          chaperones_move(state, lik.get(), rule, selector->draw(rng), rng);
      }
    }

    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      TraceSample s;
      s.iteration = it;
      s.k = state.num_clusters();
      if (is_esc) {
        s.r = r;
        s.p = p;
      } else {
        s.r = conc;
        s.p = sigma;
      }
      s.beta = beta;
      s.allocations = state.to_partition().allocations();
      trace.samples.push_back(std::move(s));
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// diagnostics

DiagStats diagnostics(std::span<const double> x) {
  long n = static_cast<long>(x.size());
  if (n < 100)
    throw std::invalid_argument("diagnostics: need at least 100 samples");
  long b = static_cast<long>(std::sqrt(static_cast<double>(n)));
  long nb = n / b;
  long used = nb * b;
  bool constant = true;
  for (long i = 1; i < used && constant; ++i) constant = (x[i] == x[0]);
  if (constant) return {x[0], 0.0, static_cast<double>(used)};
  double mean = 0.0;
  for (long i = 0; i < used; ++i) mean += x[i];
  mean /= used;
  double var = 0.0;
  for (long i = 0; i < used; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= (used - 1);
  double bm = 0.0;
  for (long k = 0; k < nb; ++k) {
    double m = 0.0;
    for (long i = k * b; i < (k + 1) * b; ++i) m += x[i];
    m /= b;
    bm += (m - mean) * (m - mean);
  }
  // sigma^2_inf estimate: b * Var(batch means)
  double sigma2 = b * bm / (nb - 1);
  DiagStats out;
  out.mean = mean;
  out.mcse = std::sqrt(sigma2 / used);
  out.ess = (sigma2 > 0.0) ? used * var / sigma2 : static_cast<double>(used);
  return out;
}

}  // namespace esc
