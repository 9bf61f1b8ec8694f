#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "esc/evaluation.hpp"

using namespace esc;

namespace {

Partition from_z(std::vector<int> z) { return Partition::from_allocations(z); }

// quadratic reference: every record pair classified directly
PairConfusion brute_confusion(const std::vector<int>& est,
                              const std::vector<int>& truth) {
  PairConfusion c;
  int n = static_cast<int>(est.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool e = est[i] == est[j], t = truth[i] == truth[j];
      c.tp += e && t;
      c.fp += e && !t;
      c.fn += !e && t;
      c.tn += !e && !t;
    }
  return c;
}

Trace trace_of(std::vector<std::vector<int>> sample_allocs) {
  Trace tr;
  tr.model = "dp";
  tr.n = static_cast<int>(sample_allocs.front().size());
  tr.L = 1;
  long it = 0;
  for (auto& z : sample_allocs) {
    TraceSample s;
    s.iteration = ++it;
    s.allocations = z;
    s.k = Partition::from_allocations(z).num_clusters();
    s.beta = {0.01};
    tr.samples.push_back(std::move(s));
  }
  return tr;
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("pairwise confusion on hand-checked partitions") {
  SUBCASE("mixed split") {
    PairConfusion c = pairwise_confusion(from_z({1, 1, 2, 2}), from_z({1, 1, 1, 2}));
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 2);
    CHECK(c.tn == 2);
    CHECK(c.fnr() == doctest::Approx(2.0 / 3));
    CHECK(c.fdr() == doctest::Approx(0.5));
  }
  SUBCASE("perfect estimate") {
    PairConfusion c = pairwise_confusion(from_z({1, 2, 2, 3}), from_z({1, 2, 2, 3}));
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(c.fnr() == 0.0);
    CHECK(c.fdr() == 0.0);
  }
  SUBCASE("all-singleton estimate: no declared links, missing all true ones") {
    PairConfusion c = pairwise_confusion(from_z({1, 2, 3, 4}), from_z({1, 1, 2, 2}));
    CHECK(c.tp == 0);
    CHECK(c.fp == 0);
    CHECK(c.fnr() == 1.0);
    CHECK(c.fdr() == 0.0);  // 0/0 convention
  }
  SUBCASE("swapping the arguments swaps fp and fn") {
    PairConfusion a = pairwise_confusion(from_z({1, 1, 2, 2, 3}), from_z({1, 1, 1, 2, 2}));
    PairConfusion b = pairwise_confusion(from_z({1, 1, 1, 2, 2}), from_z({1, 1, 2, 2, 3}));
    CHECK(a.tp == b.tp);
    CHECK(a.tn == b.tn);
    CHECK(a.fp == b.fn);
    CHECK(a.fn == b.fp);
  }
  SUBCASE("labels do not matter, only the grouping") {
    PairConfusion a = pairwise_confusion(from_z({1, 1, 2, 2}), from_z({1, 1, 1, 2}));
    PairConfusion b = pairwise_confusion(from_z({2, 2, 1, 1}), from_z({3, 3, 3, 1}));
    CHECK(a.tp == b.tp);
    CHECK(a.fp == b.fp);
    CHECK(a.fn == b.fn);
    CHECK(a.tn == b.tn);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(pairwise_confusion(from_z({1, 1}), from_z({1, 1, 2})),
                    std::invalid_argument);
  }
}

TEST_CASE("pairwise confusion against the quadratic reference") {
  Rng rng(311);
  int n = 40;
  for (int rep = 0; rep < 30; ++rep) {
    int ke = 1 + static_cast<int>(uniform01(rng) * 8);
    int kt = 1 + static_cast<int>(uniform01(rng) * 8);
    std::vector<int> est(n), truth(n);
    for (int i = 0; i < n; ++i) {
      est[i] = 1 + static_cast<int>(uniform01(rng) * ke);
      truth[i] = 1 + static_cast<int>(uniform01(rng) * kt);
    }
    PairConfusion fast = pairwise_confusion(from_z(est), from_z(truth));
    PairConfusion ref = brute_confusion(est, truth);
    REQUIRE(fast.tp == ref.tp);
    REQUIRE(fast.fp == ref.fp);
    REQUIRE(fast.fn == ref.fn);
    REQUIRE(fast.tn == ref.tn);
    REQUIRE(fast.tp + fast.fp + fast.fn + fast.tn == n * (n - 1) / 2);
  }
}

TEST_CASE("posterior rate summaries") {
  Partition truth = from_z({1, 1, 1, 2});

  SUBCASE("a trace stuck at one partition has exact means and zero error") {
    Trace tr = trace_of(std::vector<std::vector<int>>(150, {1, 1, 2, 2}));
    RateSummary rs = posterior_rates(tr, truth);
    CHECK(rs.fnr.mean == doctest::Approx(2.0 / 3));
    CHECK(rs.fdr.mean == doctest::Approx(0.5));
    CHECK(rs.k.mean == doctest::Approx(2.0));
    CHECK(rs.fnr.mcse == 0.0);
    CHECK(rs.fdr.mcse == 0.0);
    CHECK(rs.k.mcse == 0.0);
  }
  SUBCASE("alternating trace averages the per-sample rates") {
    std::vector<std::vector<int>> zs;
    for (int t = 0; t < 75; ++t) {
      zs.push_back({1, 1, 1, 2});  // perfect: fnr 0, fdr 0, k 2
      zs.push_back({1, 1, 2, 2});  // fnr 2/3, fdr 1/2, k 2
    }
    RateSummary rs = posterior_rates(trace_of(zs), truth);
    CHECK(rs.fnr.mean == doctest::Approx(1.0 / 3));
    CHECK(rs.fdr.mean == doctest::Approx(0.25));
    CHECK(rs.k.mean == doctest::Approx(2.0));
    CHECK(rs.k.mcse == 0.0);
    // period 2 divides the batch length, so batch means coincide to rounding
    CHECK(rs.fnr.mcse < 1e-12);
  }
  SUBCASE("empty trace throws") {
    Trace tr;
    tr.n = 4;
    CHECK_THROWS_AS(posterior_rates(tr, truth), std::invalid_argument);
  }
  SUBCASE("record count mismatch throws") {
    Trace tr = trace_of(std::vector<std::vector<int>>(150, {1, 1, 2}));
    CHECK_THROWS_AS(posterior_rates(tr, truth), std::invalid_argument);
  }
}

TEST_CASE("trace occupancy summaries") {
  SUBCASE("alternating cluster counts") {
    std::vector<std::vector<int>> zs;
    for (int t = 0; t < 75; ++t) {
      zs.push_back({1, 1, 2, 2});        // two clusters of size 2
      zs.push_back({1, 1, 2, 3});        // sizes 2, 1, 1
    }
    PosteriorSummaries ps = posterior_summaries(trace_of(zs));
    CHECK(ps.k.mean == doctest::Approx(2.5));
    REQUIRE(ps.size_quantiles.count(1) == 1);
    REQUIRE(ps.size_quantiles.count(2) == 1);
    // M_1 alternates 0 and 2; M_2 alternates 2 and 1
    auto q1 = ps.size_quantiles.at(1);
    CHECK(q1[0] == doctest::Approx(0.0));
    CHECK(q1[2] == doctest::Approx(1.0));  // type-7 median of 75 zeros, 75 twos
    CHECK(q1[4] == doctest::Approx(2.0));
    auto q2 = ps.size_quantiles.at(2);
    CHECK(q2[0] == doctest::Approx(1.0));
    CHECK(q2[2] == doctest::Approx(1.5));
    CHECK(q2[4] == doctest::Approx(2.0));
  }
  SUBCASE("degenerate trace pins every quantile") {
    Trace tr = trace_of(std::vector<std::vector<int>>(120, {1, 1, 1, 2}));
    PosteriorSummaries ps = posterior_summaries(tr);
    CHECK(ps.k.mean == doctest::Approx(2.0));
    CHECK(ps.k.mcse == 0.0);
    for (double q : ps.size_quantiles.at(3)) CHECK(q == doctest::Approx(1.0));
    for (double q : ps.size_quantiles.at(1)) CHECK(q == doctest::Approx(1.0));
  }
  SUBCASE("empty trace throws") {
    Trace tr;
    CHECK_THROWS_AS(posterior_summaries(tr), std::invalid_argument);
  }
}

TEST_SUITE_END();
