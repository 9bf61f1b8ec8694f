#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "esc/crp.hpp"
#include "esc/partition.hpp"

using namespace esc;

TEST_SUITE_BEGIN("baseline");

TEST_CASE("restaurant-process reallocation weights") {
  auto w = crp_realloc_weights(std::vector<int>{2, 1}, {1.0, 0.0});
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(1.0));

  auto wpy = crp_realloc_weights(std::vector<int>{2, 1}, {1.0, 0.5});
  CHECK(wpy[0] == doctest::Approx(1.5));
  CHECK(wpy[1] == doctest::Approx(0.5));
  CHECK(wpy[2] == doctest::Approx(2.0));  // theta + sigma k

  CHECK_THROWS_AS(crp_realloc_weights(std::vector<int>{1}, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(crp_realloc_weights(std::vector<int>{1}, {-0.5, 0.3}),
                  std::invalid_argument);
}

TEST_CASE("two-parameter partition probabilities, hand values") {
  auto together = Partition::from_allocations(std::vector<int>{1, 1});
  auto apart = Partition::from_allocations(std::vector<int>{1, 2});
  CHECK(std::exp(log_py_eppf(together, {1.0, 0.0})) ==
        doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::exp(log_py_eppf(apart, {1.0, 0.0})) ==
        doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::exp(log_py_eppf(together, {1.0, 0.5})) ==
        doctest::Approx(0.25).epsilon(1e-13));
  CHECK(std::exp(log_py_eppf(apart, {1.0, 0.5})) ==
        doctest::Approx(0.75).epsilon(1e-13));
  auto triple = Partition::from_allocations(std::vector<int>{1, 1, 1});
  CHECK(std::exp(log_py_eppf(triple, {1.0, 0.0})) ==
        doctest::Approx(1.0 / 3).epsilon(1e-13));
}

TEST_CASE("partition probabilities sum to one over all of [5]") {
  for (CrpParams params : {CrpParams{1.0, 0.0}, CrpParams{1.0, 0.5},
                           CrpParams{0.7, 0.3}, CrpParams{-0.2, 0.6}}) {
    double total = 0.0;
    enumerate_partitions(5, [&](const Partition& p) {
      total += std::exp(log_py_eppf(p, params));
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("concentration conditional tracks the exact partition law") {
  // moving theta changes log p(partition | theta) by exactly the same amount
  // as the conditional density (the Gamma prior enters with rate `rate`)
  auto part = Partition::from_allocations(std::vector<int>{1, 1, 2, 3, 3});
  int k = part.num_clusters(), n = part.n();
  double shape = 1.0, rate = 0.8;
  for (auto [t1, t2] : std::vector<std::pair<double, double>>{
           {0.5, 1.5}, {1.0, 3.0}, {2.7, 0.4}}) {
    double lhs = log_cond_concentration(k, n, t2, shape, rate) -
                 log_cond_concentration(k, n, t1, shape, rate);
    double rhs = log_py_eppf(part, {t2, 0.0}) - log_py_eppf(part, {t1, 0.0}) -
                 rate * (t2 - t1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  CHECK(log_cond_concentration(k, n, -1.0, shape, rate) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("concentration conditional under a nonzero discount") {
  auto part = Partition::from_allocations(std::vector<int>{1, 1, 2, 3, 3, 3, 4});
  int k = part.num_clusters(), n = part.n();
  double shape = 1.0, rate = 0.8, sigma = 0.4;
  for (auto [t1, t2] : std::vector<std::pair<double, double>>{
           {0.5, 1.5}, {1.0, 3.0}, {2.7, 0.4}}) {
    double lhs = log_cond_concentration_py(k, n, t2, sigma, shape, rate) -
                 log_cond_concentration_py(k, n, t1, sigma, shape, rate);
    double rhs = log_py_eppf(part, {t2, sigma}) - log_py_eppf(part, {t1, sigma}) -
                 rate * (t2 - t1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  // sigma = 0 reduces to the one-parameter conditional
  CHECK(log_cond_concentration_py(k, n, 1.3, 0.0, shape, rate) ==
        doctest::Approx(log_cond_concentration(k, n, 1.3, shape, rate))
            .epsilon(1e-14));
}

TEST_CASE("discount conditional tracks the exact partition law") {
  auto part = Partition::from_allocations(std::vector<int>{1, 1, 1, 2, 2, 3});
  double theta = 0.9;
  for (auto [s1, s2] : std::vector<std::pair<double, double>>{
           {0.1, 0.5}, {0.3, 0.7}, {0.6, 0.05}}) {
    double lhs = log_cond_discount(part.sizes(), theta, s2) -
                 log_cond_discount(part.sizes(), theta, s1);
    double rhs =
        log_py_eppf(part, {theta, s2}) - log_py_eppf(part, {theta, s1});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  CHECK(log_cond_discount(part.sizes(), theta, -0.1) ==
        -std::numeric_limits<double>::infinity());
  CHECK(log_cond_discount(part.sizes(), theta, 1.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_SUITE_END();
