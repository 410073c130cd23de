#pragma once

// Exact binomial probabilities from log-space pmf accumulation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace netdenoise {

/// log P(s = k), k = 0..N, for s ~ Binomial(N, prob). Endpoint
/// probabilities 0 and 1 give -inf outside the degenerate mass.
inline std::vector<double> binomial_log_pmf(int N, double prob) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> out(static_cast<std::size_t>(N) + 1, neg_inf);
  if (prob <= 0.0) {
    out[0] = 0.0;
    return out;
  }
  if (prob >= 1.0) {
    out[static_cast<std::size_t>(N)] = 0.0;
    return out;
  }
  const double lp = std::log(prob), lq = std::log1p(-prob);
  double log_choose = 0.0;
  for (int k = 0; k <= N; ++k) {
    if (k > 0) log_choose += std::log(static_cast<double>(N - k + 1)) - std::log(static_cast<double>(k));
    out[static_cast<std::size_t>(k)] = log_choose + k * lp + (N - k) * lq;
  }
  return out;
}

inline std::vector<double> binomial_pmf(int N, double prob) {
  auto v = binomial_log_pmf(N, prob);
  for (double& x : v) x = std::exp(x);
  return v;
}

/// P(s >= k). Summed from the far tail so small tails keep full precision.
inline double binomial_upper_tail(int N, double prob, int k) {
  if (k <= 0) return 1.0;
  if (k > N) return 0.0;
  const auto lp = binomial_log_pmf(N, prob);
  double acc = 0.0;
  for (int r = N; r >= k; --r) acc += std::exp(lp[static_cast<std::size_t>(r)]);
  return std::min(acc, 1.0);
}

/// P(s <= k).
inline double binomial_cdf(int N, double prob, int k) {
  if (k < 0) return 0.0;
  if (k >= N) return 1.0;
  const auto lp = binomial_log_pmf(N, prob);
  double acc = 0.0;
  for (int r = 0; r <= k; ++r) acc += std::exp(lp[static_cast<std::size_t>(r)]);
  return std::min(acc, 1.0);
}

}  // namespace netdenoise
