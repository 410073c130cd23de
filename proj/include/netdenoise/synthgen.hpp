#pragma once

// Planted SBM truths and noisy observation samples.

#include <cstdint>
#include <vector>

#include "netdenoise/core_model.hpp"
#include "netdenoise/rng.hpp"

namespace netdenoise {

/// rho/beta parameterization: each K x K matrix has diagonal rho and
/// off-diagonal rho * beta.
struct PlantedConfig {
  std::size_t n = 300;
  int K = 3;
  std::vector<std::size_t> sizes;  // empty -> equal sizes
  double rho_w = 0.15, beta_w = 0.2;
  double rho_p = 0.25, beta_p = 1.0;
  double rho_q = 0.2, beta_q = 1.0;
  int N = 10;
  std::uint64_t seed = 1;

  std::vector<std::size_t> community_sizes() const {
    if (K < 1) throw ConfigError("K must be >= 1");
    if (!sizes.empty()) {
      if (sizes.size() != static_cast<std::size_t>(K)) throw ConfigError("sizes must have K entries");
      std::size_t total = 0;
      for (auto s : sizes) total += s;
      if (total != n) throw ConfigError("community sizes must sum to n");
      return sizes;
    }
    std::vector<std::size_t> s(static_cast<std::size_t>(K), n / static_cast<std::size_t>(K));
    for (std::size_t r = 0; r < n % static_cast<std::size_t>(K); ++r) ++s[r];
    return s;
  }
};

inline SquareMatrix<double> rho_beta_matrix(int K, double rho, double beta) {
  SquareMatrix<double> m(static_cast<std::size_t>(K), rho * beta);
  for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) m(k, k) = rho;
  return m;
}

inline BlockParams planted_params(const PlantedConfig& cfg) {
  if (cfg.rho_w < 0 || cfg.beta_w < 0 || cfg.rho_p < 0 || cfg.beta_p < 0 || cfg.rho_q < 0 ||
      cfg.beta_q < 0)
    throw ConfigError("rho/beta parameters must be nonnegative");
  const auto sizes = cfg.community_sizes();
  BlockParams bp{Labels::contiguous(sizes), rho_beta_matrix(cfg.K, cfg.rho_w, cfg.beta_w),
                 rho_beta_matrix(cfg.K, cfg.rho_p, cfg.beta_p),
                 rho_beta_matrix(cfg.K, cfg.rho_q, cfg.beta_q)};
  bp.validate();
  return bp;
}

/// A_ij ~ Bernoulli(B_{c_i c_j}) independently over i < j, drawn in
/// row-major upper-triangle order from one stream.
inline BinaryNetwork sample_sbm(const BlockParams& params, std::uint64_t seed) {
  const std::size_t n = params.labels.size();
  Rng rng(derive_seed(seed, {0x5b11}));
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < params.pair_theta(i, j).w) g.set_edge(i, j, true);
  return g;
}

/// One noisy observation: edges survive with probability 1 - Q_ij,
/// non-edges appear with probability P_ij.
inline BinaryNetwork corrupt_once(const BinaryNetwork& truth, const BlockParams& params,
                                  std::uint64_t seed) {
  const std::size_t n = truth.size();
  Rng rng(seed);
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Theta t = params.pair_theta(i, j);
      const double u = rng.uniform();
      if (truth.edge(i, j) ? u < 1.0 - t.q : u < t.p) g.set_edge(i, j, true);
    }
  return g;
}

/// N independent noisy observations; observation m uses substream
/// derive_seed(seed, {m}).
inline NetworkSample corrupt_sample(const BinaryNetwork& truth, const BlockParams& params, int N,
                                    std::uint64_t seed) {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (params.labels.size() != truth.size()) throw DataError("labels length differs from node count");
  std::vector<BinaryNetwork> obs;
  obs.reserve(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m)
    obs.push_back(corrupt_once(truth, params, derive_seed(seed, {0xc022, static_cast<std::uint64_t>(m)})));
  return vote_matrix(std::move(obs));
}

}  // namespace netdenoise
