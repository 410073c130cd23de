#pragma once

// Block EM on vote histograms, alternated with spectral re-clustering, and
// the plug-in likelihood-ratio variant.
//
// Within one block every pair shares (w, p, q), so the vote count S_ij is a
// sufficient statistic and EM runs on the histogram |I_r|, r = 0..N:
//
//   M-step  w = sum_r tau_r h_r / |J|
//           p = sum_r r (1 - tau_r) h_r / sum_r N (1 - tau_r) h_r
//           q = sum_r (N - r) tau_r h_r / sum_r N tau_r h_r
//   E-step  tau_r = P(A_ij = 1 | S_ij = r)
//
// starting from the majority-vote posterior tau_r = 1{r >= N/2}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <span>
#include <vector>

#include "netdenoise/binomial.hpp"
#include "netdenoise/core_model.hpp"
#include "netdenoise/oracle.hpp"
#include "netdenoise/spectral.hpp"

namespace netdenoise {

/// Clamp margin keeping w in [eps, 1-eps] and p, q in [eps, 1/2-eps].
inline constexpr double kParamEps = 1e-6;

inline Theta clamp_theta(Theta t) noexcept {
  t.w = std::clamp(t.w, kParamEps, 1.0 - kParamEps);
  t.p = std::clamp(t.p, kParamEps, 0.5 - kParamEps);
  t.q = std::clamp(t.q, kParamEps, 0.5 - kParamEps);
  return t;
}

/// tau[r] = estimated P(A_ij = 1 | S_ij = r).
struct PosteriorTable {
  int N = 0;
  std::vector<double> tau;

  bool edge(int votes) const noexcept { return tau[std::size_t(votes)] >= 0.5; }
};

inline PosteriorTable init_tau(int N) {
  if (N < 1) throw ConfigError("N must be >= 1");
  PosteriorTable t{N, std::vector<double>(std::size_t(N) + 1, 0.0)};
  for (int r = 0; r <= N; ++r)
    if (2 * r >= N) t.tau[std::size_t(r)] = 1.0;
  return t;
}

/// M-step on real-valued bin weights, e.g. an expected histogram.
inline Theta m_step(std::span<const double> counts, const PosteriorTable& post) {
  if (counts.size() != post.tau.size()) throw DataError("posterior and histogram disagree on N");
  const double N = post.N;
  double total = 0.0, on = 0.0, off_votes = 0.0, off_trials = 0.0, on_misses = 0.0, on_trials = 0.0;
  for (int r = 0; r <= post.N; ++r) {
    const double c = counts[std::size_t(r)];
    const double t = post.tau[std::size_t(r)];
    total += c;
    on += t * c;
    off_votes += r * (1.0 - t) * c;
    off_trials += N * (1.0 - t) * c;
    on_misses += (N - r) * t * c;
    on_trials += N * t * c;
  }
  if (!(total > 0.0)) throw DataError("empty block");
  Theta th;
  th.w = on / total;
  // Zero denominators fall back to the lower clamp.
  th.p = off_trials > 0.0 ? off_votes / off_trials : 0.0;
  th.q = on_trials > 0.0 ? on_misses / on_trials : 0.0;
  return clamp_theta(th);
}

inline Theta m_step(const BlockHistogram& h, const PosteriorTable& post) {
  if (h.total <= 0) throw DataError("empty block");
  if (post.N != h.N) throw DataError("posterior and histogram disagree on N");
  const std::vector<double> c(h.counts.begin(), h.counts.end());
  return m_step(std::span<const double>(c), post);
}

/// Posterior as a sigmoid of the log-odds, which is linear in r.
inline PosteriorTable e_step(const Theta& t, int N) {
  PosteriorTable out{N, std::vector<double>(std::size_t(N) + 1)};
  const double base = std::log(t.w) - std::log1p(-t.w) + N * (std::log(t.q) - std::log1p(-t.p));
  const double slope = std::log1p(-t.q) - std::log(t.q) + std::log1p(-t.p) - std::log(t.p);
  for (int r = 0; r <= N; ++r) {
    const double z = base + r * slope;
    out.tau[std::size_t(r)] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  return out;
}

/// Observed-data log-likelihood of the two-component binomial mixture,
/// sum_r h_r log[w Bin(r; N, 1-q) + (1-w) Bin(r; N, p)].
inline double block_log_likelihood(const BlockHistogram& h, const Theta& t) {
  const auto l1 = binomial_log_pmf(h.N, 1.0 - t.q);
  const auto l0 = binomial_log_pmf(h.N, t.p);
  const double lw = std::log(t.w), lnw = std::log1p(-t.w);
  double ll = 0.0;
  for (int r = 0; r <= h.N; ++r) {
    const auto c = h.counts[std::size_t(r)];
    if (c == 0) continue;
    const double a = lw + l1[std::size_t(r)], b = lnw + l0[std::size_t(r)];
    const double m = std::max(a, b);
    ll += static_cast<double>(c) * (m + std::log(std::exp(a - m) + std::exp(b - m)));
  }
  return ll;
}

struct EmBlockResult {
  Theta theta;
  PosteriorTable posterior;
  bool converged = false;
  int iterations = 0;
  std::vector<Theta> trace;  ///< theta after each M-step
};

/// Alternates M and E steps from the majority-vote posterior for at most
/// `iterations` rounds, stopping early when no parameter moves more than
/// `tol`.
inline EmBlockResult em_block(const BlockHistogram& h, int iterations = 20, double tol = 1e-6) {
  if (h.total <= 0) throw DataError("empty block");
  EmBlockResult res;
  res.posterior = init_tau(h.N);
  for (int it = 0; it < iterations; ++it) {
    const Theta next = m_step(h, res.posterior);
    res.posterior = e_step(next, h.N);
    res.trace.push_back(next);
    res.iterations = it + 1;
    if (it > 0) {
      const double delta = std::max({std::abs(next.w - res.theta.w), std::abs(next.p - res.theta.p),
                                     std::abs(next.q - res.theta.q)});
      res.theta = next;
      if (delta <= tol) {
        res.converged = true;
        break;
      }
    }
    res.theta = next;
  }
  return res;
}

struct EmOptions {
  int K = 3;
  int outer_rounds = 2;  ///< T
  int em_iterations = 20;
  double tol = 1e-6;
  KMeansOptions kmeans{};
};

struct EmTraceRow {
  int round = 0;
  int iteration = 0;
  int k = 0, l = 0;
  Theta theta;
};

struct EmReport {
  BinaryNetwork A_hat;
  Labels labels;             ///< final re-clustering of A_hat
  BlockParams params;        ///< K x K estimates; params.labels are the labels they were fit on
  std::vector<PosteriorTable> posteriors;  ///< K*K, row-major, symmetric
  std::vector<EmTraceRow> trace;
  std::vector<std::string> warnings;

  const PosteriorTable& posterior(int k, int l) const {
    return posteriors[std::size_t(k) * std::size_t(params.communities()) + std::size_t(l)];
  }
};

/// Moment estimates from majority vote over all pairs: MV density, mean
/// vote fraction on MV non-edges (p) and mean miss fraction on MV edges (q).
inline Theta majority_vote_moments(const NetworkSample& sample) {
  const std::size_t n = sample.size();
  const double N = sample.count();
  double pairs = 0, edges = 0, off_frac = 0, on_miss = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const int s = sample.votes(i, j);
      pairs += 1;
      if (2 * s >= sample.count()) {
        edges += 1;
        on_miss += 1.0 - s / N;
      } else {
        off_frac += s / N;
      }
    }
  Theta t;
  t.w = pairs > 0 ? edges / pairs : 0.0;
  t.p = pairs - edges > 0 ? off_frac / (pairs - edges) : 0.0;
  t.q = edges > 0 ? on_miss / edges : 0.0;
  return clamp_theta(t);
}

namespace detail {

/// One pass of per-block EM on fixed labels; writes A_hat entries, the
/// block parameters, posteriors and trace rows into `rep`.
inline void em_round(const NetworkSample& sample, const Labels& labels, const EmOptions& opt, int round,
                     const Theta& fallback, EmReport& rep) {
  const int K = labels.communities();
  const auto Ks = std::size_t(K);
  const auto members = labels.members();
  BlockParams params{labels, SquareMatrix<double>(Ks), SquareMatrix<double>(Ks), SquareMatrix<double>(Ks)};
  std::vector<PosteriorTable> posts(Ks * Ks);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const BlockHistogram h = block_histogram(sample, members, k, l);
      Theta th;
      PosteriorTable post;
      if (h.total == 0) {
        th = fallback;
        post = init_tau(sample.count());
        rep.warnings.push_back("round " + std::to_string(round) + ": block (" + std::to_string(k + 1) + "," +
                               std::to_string(l + 1) + ") is empty; using majority-vote moments");
      } else {
        auto res = em_block(h, opt.em_iterations, opt.tol);
        for (std::size_t it = 0; it < res.trace.size(); ++it)
          rep.trace.push_back({round, int(it) + 1, k, l, res.trace[it]});
        th = res.theta;
        post = std::move(res.posterior);
        for_each_block_pair(members, k, l, [&](std::size_t i, std::size_t j) {
          rep.A_hat.set_edge(i, j, post.edge(sample.votes(i, j)));
        });
      }
      const auto a = std::size_t(k), b = std::size_t(l);
      params.B(a, b) = params.B(b, a) = th.w;
      params.P(a, b) = params.P(b, a) = th.p;
      params.Q(a, b) = params.Q(b, a) = th.q;
      posts[a * Ks + b] = posts[b * Ks + a] = std::move(post);
    }
  rep.params = std::move(params);
  rep.posteriors = std::move(posts);
}

inline void check_em_options(const EmOptions& opt) {
  if (opt.K < 1) throw ConfigError("K must be >= 1");
  if (opt.outer_rounds < 1) throw ConfigError("T must be >= 1");
  if (opt.em_iterations < 1) throw ConfigError("EM iteration count must be >= 1");
}

}  // namespace detail

/// Majority-vote start, spectral labels, then T rounds of (per-block EM,
/// threshold tau at 1/2, re-cluster).
inline EmReport em_fit(const NetworkSample& sample, const EmOptions& opt, std::uint64_t seed) {
  detail::check_em_options(opt);
  if (std::size_t(opt.K) > sample.size()) throw ConfigError("K exceeds the number of nodes");
  EmReport rep;
  rep.A_hat = majority_vote(sample);
  rep.labels = spectral_cluster(rep.A_hat, opt.K, derive_seed(seed, {0x5c, 0}), opt.kmeans);
  const Theta fallback = majority_vote_moments(sample);
  for (int round = 0; round < opt.outer_rounds; ++round) {
    detail::em_round(sample, rep.labels, opt, round + 1, fallback, rep);
    rep.labels = spectral_cluster(rep.A_hat, opt.K, derive_seed(seed, {0x5c, std::uint64_t(round) + 1}),
                                  opt.kmeans);
  }
  return rep;
}

/// Block EM with known community labels: a single pass, no re-clustering.
inline EmReport em_fit_labels(const NetworkSample& sample, const Labels& labels, const EmOptions& opt = {}) {
  detail::check_em_options(opt);
  if (labels.size() != sample.size()) throw DataError("labels and sample differ in size");
  EmReport rep;
  rep.A_hat = majority_vote(sample);
  rep.labels = labels;
  detail::em_round(sample, labels, opt, 1, majority_vote_moments(sample), rep);
  return rep;
}

/// Replaces the tau threshold in each block by the FDR-calibrated test
/// with (w, p, q) = `plugin` block parameters. Blocks whose target is
/// infeasible keep their entries in `est` and add a warning.
inline void apply_plugin_lrt(const NetworkSample& sample, const BlockParams& plugin, double target_fdr,
                             std::uint64_t seed, LrtMode mode, BinaryNetwork& est,
                             std::vector<std::string>& warnings) {
  const int K = plugin.communities();
  const int N = sample.count();
  const auto members = plugin.labels.members();
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const Theta t = plugin.block_theta(k, l);
      if (!(target_fdr > 0.0 && target_fdr < 1.0 - t.w)) {
        warnings.push_back("block (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                           "): target FDR infeasible for w=" + std::to_string(t.w) +
                           "; keeping posterior threshold");
        continue;
      }
      const LrtSpec spec = construct_lrt(solve_alpha_for_fdr(target_fdr, t, N), t, N);
      for_each_block_pair(members, k, l, [&](std::size_t i, std::size_t j) {
        est.set_edge(i, j, lrt_reject(sample.votes(i, j), spec, seed, i, j, mode));
      });
    }
}

/// EM followed by per-block likelihood-ratio tests using the EM estimates
/// as plug-in parameters.
inline EmReport em_t_fit(const NetworkSample& sample, const EmOptions& opt, double target_fdr,
                         std::uint64_t seed, LrtMode mode = LrtMode::Randomized) {
  if (!(target_fdr > 0.0 && target_fdr < 1.0)) throw ConfigError("target FDR must lie in (0,1)");
  EmReport rep = em_fit(sample, opt, seed);
  apply_plugin_lrt(sample, rep.params, target_fdr, seed, mode, rep.A_hat, rep.warnings);
  return rep;
}

}  // namespace netdenoise
