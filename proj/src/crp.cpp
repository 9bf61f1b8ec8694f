#include "esc/crp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace esc {
namespace {

void check_params(const CrpParams& params) {
  if (!(params.sigma >= 0.0) || !(params.sigma < 1.0))
    throw std::invalid_argument("CrpParams: sigma must be in [0, 1)");
  if (!(params.theta > -params.sigma))
    throw std::invalid_argument("CrpParams: theta must exceed -sigma");
}

}  // namespace

std::vector<double> crp_realloc_weights(std::span<const int> sizes_minus_i,
                                        const CrpParams& params) {
  check_params(params);
  std::vector<double> w(sizes_minus_i.size() + 1, 0.0);
  for (size_t j = 0; j < sizes_minus_i.size(); ++j) {
    int s = sizes_minus_i[j];
    if (s < 1)
      throw std::invalid_argument("crp_realloc_weights: cluster sizes must be >= 1");
    w[j] = s - params.sigma;
  }
  w.back() = params.theta + params.sigma * sizes_minus_i.size();
  return w;
}

double log_cond_concentration(int k, int n, double theta, double prior_shape,
                              double prior_rate) {
  if (!(theta > 0.0)) return -std::numeric_limits<double>::infinity();
  return (prior_shape - 1.0) * std::log(theta) - prior_rate * theta +
         k * std::log(theta) + std::lgamma(theta) - std::lgamma(theta + n);
}

double log_cond_concentration_py(int k, int n, double theta, double sigma,
                                 double prior_shape, double prior_rate) {
  if (sigma == 0.0)
    return log_cond_concentration(k, n, theta, prior_shape, prior_rate);
  if (!(theta > -sigma) || !(theta > 0.0))
    return -std::numeric_limits<double>::infinity();
  double lp = (prior_shape - 1.0) * std::log(theta) - prior_rate * theta +
              std::lgamma(theta + 1.0) - std::lgamma(theta + n);
  for (int j = 1; j < k; ++j) lp += std::log(theta + j * sigma);
  return lp;
}

double log_cond_discount(std::span<const int> sizes, double theta, double sigma) {
  if (!(sigma >= 0.0) || !(sigma < 1.0))
    return -std::numeric_limits<double>::infinity();
  int k = static_cast<int>(sizes.size());
  double lp = 0.0;
  for (int j = 1; j < k; ++j) lp += std::log(theta + j * sigma);
  double lg1ms = std::lgamma(1.0 - sigma);
  for (int s : sizes) lp += std::lgamma(s - sigma) - lg1ms;
  return lp;
}

double log_py_eppf(const Partition& part, const CrpParams& params) {
  check_params(params);
  double theta = params.theta, sigma = params.sigma;
  int k = part.num_clusters(), n = part.n();
  // prod_{j=1}^{K-1} (theta + j sigma) / (theta+1)_{n-1} * prod_j (1-sigma)_{S_j - 1}
  double lp = std::lgamma(theta + 1.0) - std::lgamma(theta + n);
  for (int j = 1; j < k; ++j) lp += std::log(theta + j * sigma);
  double lg1ms = std::lgamma(1.0 - sigma);
  for (int s : part.sizes()) lp += std::lgamma(s - sigma) - lg1ms;
  return lp;
}

}  // namespace esc
