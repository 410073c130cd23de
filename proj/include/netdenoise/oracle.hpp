#pragma once

// Known-parameter estimators: entrywise MLE, its exact error, and the
// randomized likelihood-ratio test calibrated to a target FDR.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "netdenoise/binomial.hpp"
#include "netdenoise/core_model.hpp"
#include "netdenoise/errors.hpp"
#include "netdenoise/rng.hpp"

namespace netdenoise {

inline void require_interior(const Theta& t) {
  if (!(t.w > 0.0 && t.w < 1.0)) throw ConfigError("w must lie in (0,1)");
  if (!(t.p > 0.0 && t.p < 0.5)) throw ConfigError("p must lie in (0,1/2)");
  if (!(t.q > 0.0 && t.q < 0.5)) throw ConfigError("q must lie in (0,1/2)");
}

/// Vote threshold mu of the MLE a* = 1{s >= mu}.
inline double mle_threshold(const Theta& t, int N) {
  require_interior(t);
  const double num = std::log((1.0 - t.w) / t.w) + N * std::log((1.0 - t.p) / t.q);
  const double den = std::log((1.0 - t.p) * (1.0 - t.q) / (t.p * t.q));
  return num / den;
}

/// Smallest integer s with s >= mu. A mu within 1e-9 of an integer is
/// snapped to it so that symmetric cases (mu = N/2) stay inclusive.
inline int min_votes_for_edge(double mu) {
  const double r = std::round(mu);
  if (std::abs(mu - r) <= 1e-9 * std::max(1.0, std::abs(mu))) return static_cast<int>(r);
  return static_cast<int>(std::ceil(mu));
}

/// Entrywise MLE with the true block parameters.
inline BinaryNetwork mle_estimate(const NetworkSample& sample, const BlockParams& truth) {
  truth.validate();
  const std::size_t n = sample.size();
  if (truth.labels.size() != n) throw DataError("labels length differs from node count");
  const int N = sample.count();
  const auto K = static_cast<std::size_t>(truth.communities());
  SquareMatrix<int> cut(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      cut(k, l) = min_votes_for_edge(mle_threshold(truth.block_theta(int(k), int(l)), N));
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (sample.votes(i, j) >= cut(std::size_t(truth.labels[i]), std::size_t(truth.labels[j])))
        g.set_edge(i, j, true);
  return g;
}

/// P(a* != a) = w P(Bin(N,1-q) < mu) + (1-w) P(Bin(N,p) >= mu).
inline double mle_error(const Theta& t, int N) {
  const int cut = min_votes_for_edge(mle_threshold(t, N));
  return t.w * binomial_cdf(N, 1.0 - t.q, cut - 1) + (1.0 - t.w) * binomial_upper_tail(N, t.p, cut);
}

/// Randomized level-alpha test of a = 0 against a = 1: reject when
/// s > k_alpha, reject with probability eta_alpha when s == k_alpha.
struct LrtSpec {
  double alpha = 1.0;
  int k_alpha = 0;
  double eta_alpha = 1.0;
  double gamma_alpha = 1.0;

  /// Exact size under the null, eta P(s=k|p) + P(s>k|p).
  double level(const Theta& t, int N) const {
    const auto f0 = binomial_pmf(N, t.p);
    return eta_alpha * f0[std::size_t(k_alpha)] + binomial_upper_tail(N, t.p, k_alpha + 1);
  }
};

inline LrtSpec construct_lrt(double alpha, const Theta& t, int N) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
  if (alpha == 1.0) return {1.0, 0, 1.0, 1.0};
  const auto f0 = binomial_pmf(N, t.p);
  const auto f1 = binomial_pmf(N, 1.0 - t.q);
  // above0[k] = P(s > k | null), accumulated from the far tail.
  std::vector<double> above0(f0.size(), 0.0), above1(f1.size(), 0.0);
  for (int k = N - 1; k >= 0; --k) {
    above0[std::size_t(k)] = above0[std::size_t(k) + 1] + f0[std::size_t(k) + 1];
    above1[std::size_t(k)] = above1[std::size_t(k) + 1] + f1[std::size_t(k) + 1];
  }
  int k = 0;
  while (k < N && above0[std::size_t(k)] > alpha) ++k;
  const double mass = f0[std::size_t(k)];
  double eta = mass > 0.0 ? (alpha - above0[std::size_t(k)]) / mass : 1.0;
  eta = std::clamp(eta, 0.0, 1.0);
  return {alpha, k, eta, eta * f1[std::size_t(k)] + above1[std::size_t(k)]};
}

/// xi_alpha = alpha(1-w) / (alpha(1-w) + gamma_alpha w).
inline double fdr_of_alpha(double alpha, const Theta& t, int N) {
  const LrtSpec spec = construct_lrt(alpha, t, N);
  const double false_rej = alpha * (1.0 - t.w);
  return false_rej / (false_rej + spec.gamma_alpha * t.w);
}

/// Bisection for the unique alpha with fdr_of_alpha(alpha) == target.
inline double solve_alpha_for_fdr(double target, const Theta& t, int N, double tol = 1e-10) {
  if (!(target > 0.0 && target < 1.0 - t.w))
    throw ConfigError("target FDR " + std::to_string(target) + " outside (0, 1-w) = (0, " +
                      std::to_string(1.0 - t.w) + ")");
  double lo = 0.0, hi = 1.0, mid = 0.5;
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    const double xi = fdr_of_alpha(mid, t, N);
    if (std::abs(xi - target) <= tol) return mid;
    (xi < target ? lo : hi) = mid;
    if (hi - lo <= 0.0) break;
  }
  return mid;
}

enum class LrtMode {
  Randomized,    ///< exact level: randomize at s == k_alpha
  Conservative,  ///< never reject at s == k_alpha
};

/// Test decision for pair (i, j) with vote count s. Randomization draws
/// from a per-pair substream so decisions do not depend on visit order.
inline bool lrt_reject(int s, const LrtSpec& spec, std::uint64_t seed, std::size_t i, std::size_t j,
                       LrtMode mode) {
  if (s > spec.k_alpha) return true;
  if (s < spec.k_alpha || mode == LrtMode::Conservative) return false;
  Rng rng(derive_seed(seed, {0x17e5, i, j}));
  return rng.uniform() < spec.eta_alpha;
}

/// Per-block FDR-calibrated likelihood-ratio tests with known parameters.
inline BinaryNetwork lrt_estimate(const NetworkSample& sample, const BlockParams& truth,
                                  double target_fdr, std::uint64_t seed,
                                  LrtMode mode = LrtMode::Randomized) {
  truth.validate();
  const std::size_t n = sample.size();
  if (truth.labels.size() != n) throw DataError("labels length differs from node count");
  const int N = sample.count();
  const auto K = static_cast<std::size_t>(truth.communities());
  std::vector<LrtSpec> specs(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k; l < K; ++l) {
      const Theta t = truth.block_theta(int(k), int(l));
      LrtSpec s;
      try {
        s = construct_lrt(solve_alpha_for_fdr(target_fdr, t, N), t, N);
      } catch (const ConfigError& e) {
        throw ConfigError("block (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                          "): " + e.what());
      }
      specs[k * K + l] = specs[l * K + k] = s;
    }
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& s = specs[std::size_t(truth.labels[i]) * K + std::size_t(truth.labels[j])];
      if (lrt_reject(sample.votes(i, j), s, seed, i, j, mode)) g.set_edge(i, j, true);
    }
  return g;
}

}  // namespace netdenoise
