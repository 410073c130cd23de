#pragma once

// Evaluation against a planted truth and graph-level summary statistics.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "netdenoise/core_model.hpp"
#include "netdenoise/spectral.hpp"

namespace netdenoise {

struct FdrTpr {
  double fdr = 0.0;
  double tpr = 1.0;
};

/// FDR = false edges / declared edges (0 when nothing is declared);
/// TPR = recovered edges / true edges (1 when the truth is empty).
inline FdrTpr fdr_tpr(const BinaryNetwork& est, const BinaryNetwork& truth) {
  if (est.size() != truth.size()) throw DataError("networks differ in size");
  std::size_t declared = 0, false_pos = 0, true_edges = 0, hits = 0;
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      const bool e = est.edge(i, j), t = truth.edge(i, j);
      declared += e;
      false_pos += e && !t;
      true_edges += t;
      hits += e && t;
    }
  FdrTpr r;
  r.fdr = declared ? double(false_pos) / double(declared) : 0.0;
  r.tpr = true_edges ? double(hits) / double(true_edges) : 1.0;
  return r;
}

/// Majority-vote parameter conventions. P_hat is defined only where
/// A_hat = 0 and Q_hat only where A_hat = 1 (NaN elsewhere).
struct MvParams {
  SquareMatrix<double> W_block;  ///< K x K block densities of A_hat; NaN for empty blocks
  SquareMatrix<double> P_hat;    ///< n x n
  SquareMatrix<double> Q_hat;    ///< n x n
  Labels labels;
  std::vector<std::string> warnings;
};

inline MvParams mv_params(const NetworkSample& sample, const BinaryNetwork& A_hat, const Labels& labels) {
  const std::size_t n = sample.size();
  if (A_hat.size() != n || labels.size() != n) throw DataError("inputs differ in size");
  const int K = labels.communities();
  const auto Ks = std::size_t(K);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double N = sample.count();
  MvParams out{SquareMatrix<double>(Ks, nan), SquareMatrix<double>(n, nan), SquareMatrix<double>(n, nan),
               labels, {}};
  const auto members = labels.members();
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      double pairs = 0, edges = 0;
      for_each_block_pair(members, k, l, [&](std::size_t i, std::size_t j) {
        pairs += 1;
        edges += A_hat.edge(i, j);
      });
      if (pairs == 0) {
        out.warnings.push_back("block (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                               ") is empty; W entry undefined");
        continue;
      }
      out.W_block(std::size_t(k), std::size_t(l)) = out.W_block(std::size_t(l), std::size_t(k)) = edges / pairs;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double frac = sample.votes(i, j) / N;
      if (A_hat.edge(i, j))
        out.Q_hat(i, j) = 1.0 - frac;
      else
        out.P_hat(i, j) = frac;
    }
  return out;
}

/// ||est - truth||_F / ||truth||_F over the masked entries. When the
/// truth has zero norm the absolute norm is returned and `absolute` set.
struct FrobRatio {
  double value = 0.0;
  bool absolute = false;
};

inline FrobRatio frob_ratio(std::span<const double> est, std::span<const double> truth,
                            std::span<const std::uint8_t> mask = {}) {
  if (est.size() != truth.size() || (!mask.empty() && mask.size() != est.size()))
    throw DataError("frob_ratio: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double d = est[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) return {std::sqrt(num), true};
  return {std::sqrt(num / den), false};
}

struct ParamErrors {
  FrobRatio w, p, q;
};

namespace detail {

/// Off-diagonal n x n expansion of one K x K block matrix.
inline std::vector<double> expand_offdiag(const SquareMatrix<double>& block, const Labels& labels) {
  const std::size_t n = labels.size();
  std::vector<double> out;
  out.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.push_back(block(std::size_t(labels[i]), std::size_t(labels[j])));
  return out;
}

inline std::vector<double> offdiag(const SquareMatrix<double>& m) {
  std::vector<double> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j) out.push_back(m(i, j));
  return out;
}

}  // namespace detail

/// Full-matrix relative errors of block-constant estimates (the EM
/// convention), computed over off-diagonal entries.
inline ParamErrors block_param_errors(const BlockParams& est, const BlockParams& truth) {
  if (est.labels.size() != truth.labels.size()) throw DataError("label vectors differ in length");
  using detail::expand_offdiag;
  return {frob_ratio(expand_offdiag(est.B, est.labels), expand_offdiag(truth.B, truth.labels)),
          frob_ratio(expand_offdiag(est.P, est.labels), expand_offdiag(truth.P, truth.labels)),
          frob_ratio(expand_offdiag(est.Q, est.labels), expand_offdiag(truth.Q, truth.labels))};
}

/// Majority-vote convention: W from block densities, P over A_hat = 0 and
/// Q over A_hat = 1. Pairs in empty estimated blocks are excluded from W.
inline ParamErrors mv_param_errors(const MvParams& mv, const BlockParams& truth) {
  using detail::expand_offdiag;
  using detail::offdiag;
  const auto w_est = expand_offdiag(mv.W_block, mv.labels);
  const auto w_true = expand_offdiag(truth.B, truth.labels);
  const auto p_est = offdiag(mv.P_hat), q_est = offdiag(mv.Q_hat);
  std::vector<std::uint8_t> w_mask(w_est.size()), p_mask(p_est.size()), q_mask(q_est.size());
  for (std::size_t i = 0; i < w_est.size(); ++i) {
    w_mask[i] = !std::isnan(w_est[i]);
    p_mask[i] = !std::isnan(p_est[i]);
    q_mask[i] = !std::isnan(q_est[i]);
  }
  auto zero_nan = [](std::vector<double> v) {
    for (double& x : v)
      if (std::isnan(x)) x = 0.0;
    return v;
  };
  return {frob_ratio(zero_nan(w_est), w_true, w_mask),
          frob_ratio(zero_nan(p_est), expand_offdiag(truth.P, truth.labels), p_mask),
          frob_ratio(zero_nan(q_est), expand_offdiag(truth.Q, truth.labels), q_mask)};
}

struct GraphSummaries {
  double avg_degree = 0.0;
  double global_efficiency = 0.0;
  double transitivity = 0.0;
  double modularity = 0.0;
  int k_hat = 0;
  bool modularity_defined = true;
};

/// Mean over ordered pairs of 1 / shortest-path length (BFS); unreachable
/// pairs contribute 0.
inline double global_efficiency(const BinaryNetwork& net) {
  const std::size_t n = net.size();
  if (n < 2) return 0.0;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (net.edge(i, j)) adj[i].push_back(j);
  double sum = 0.0;
  std::vector<int> dist(n);
  std::queue<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          sum += 1.0 / dist[v];
          frontier.push(v);
        }
    }
  }
  return sum / (double(n) * double(n - 1));
}

namespace detail {

/// Triangles through each node.
inline std::vector<double> node_triangles(const BinaryNetwork& net) {
  const std::size_t n = net.size();
  std::vector<double> t(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < n; ++j)
      if (net.edge(i, j)) nb.push_back(j);
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) t[i] += net.edge(nb[a], nb[b]);
  }
  return t;
}

}  // namespace detail

/// Global transitivity 3 * triangles / connected triples (0 without triples).
inline double transitivity(const BinaryNetwork& net) {
  const auto t = detail::node_triangles(net);
  double closed = 0.0, triples = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double d = double(net.degree(i));
    closed += t[i];
    triples += d * (d - 1.0) / 2.0;
  }
  return triples > 0.0 ? closed / triples : 0.0;
}

/// Mean local clustering coefficient; nodes of degree < 2 count as 0.
inline double average_clustering(const BinaryNetwork& net) {
  if (net.size() == 0) return 0.0;
  const auto t = detail::node_triangles(net);
  double sum = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double d = double(net.degree(i));
    if (d >= 2.0) sum += t[i] / (d * (d - 1.0) / 2.0);
  }
  return sum / double(net.size());
}

/// Newman modularity of a partition; nullopt for a graph without edges.
inline std::optional<double> modularity(const BinaryNetwork& net, const Labels& labels) {
  const double m = double(net.edge_count());
  if (m == 0.0) return std::nullopt;
  const auto Ks = std::size_t(labels.communities());
  std::vector<double> inside(Ks, 0.0), degree(Ks, 0.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    degree[std::size_t(labels[i])] += double(net.degree(i));
    for (std::size_t j = i + 1; j < net.size(); ++j)
      if (net.edge(i, j) && labels[i] == labels[j]) inside[std::size_t(labels[i])] += 1.0;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < Ks; ++c) q += inside[c] / m - std::pow(degree[c] / (2.0 * m), 2);
  return q;
}

struct SummaryOptions {
  bool average_clustering = false;  ///< report mean local clustering as "transitivity"
  int modularity_k = 0;             ///< 0: partition at K = k_hat
};

/// Average degree, global efficiency, transitivity, spectral-partition
/// modularity and the Bethe-Hessian community count.
inline GraphSummaries graph_summaries(const BinaryNetwork& net, std::uint64_t seed,
                                      const SummaryOptions& opt = {}) {
  const std::size_t n = net.size();
  if (n < 2) throw DataError("graph summaries need at least 2 nodes");
  GraphSummaries s;
  s.avg_degree = 2.0 * double(net.edge_count()) / double(n);
  s.global_efficiency = global_efficiency(net);
  s.transitivity = opt.average_clustering ? average_clustering(net) : transitivity(net);
  s.k_hat = estimate_k_bethe_hessian(net);
  const int k = opt.modularity_k > 0 ? opt.modularity_k : s.k_hat;
  if (net.edge_count() == 0 || k < 1) {
    s.modularity = 0.0;
    s.modularity_defined = false;
    return s;
  }
  const Labels part = spectral_cluster(net, std::min<int>(k, int(n)), seed);
  s.modularity = *modularity(net, part);
  return s;
}

}  // namespace netdenoise
