#pragma once

// Regularized spectral clustering, k-means, Bethe-Hessian community
// counting and the worst-community label error.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "netdenoise/core_model.hpp"
#include "netdenoise/linalg.hpp"
#include "netdenoise/rng.hpp"

namespace netdenoise {

/// Rows of the n x K matrix of leading eigenvectors of the regularized
/// normalized adjacency.
struct Embedding {
  Eigen::MatrixXd rows;
  Eigen::VectorXd eigenvalues;
};

/// L = D^{-1/2} (A + 0.5/n 11^T) D^{-1/2} with D the row sums of the
/// regularized matrix.
inline Eigen::MatrixXd regularized_laplacian(const BinaryNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.size());
  const double tau = 0.5 / static_cast<double>(n);
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i)
    inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(net.degree(std::size_t(i))) + 0.5);
  Eigen::MatrixXd L(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      L(i, j) = (net.edge(std::size_t(i), std::size_t(j)) + tau) * inv_sqrt(i) * inv_sqrt(j);
  return L;
}

inline Embedding regularized_embed(const BinaryNetwork& net, int K,
                                   EigenMethod method = EigenMethod::Auto) {
  const auto n = static_cast<Eigen::Index>(net.size());
  if (K < 1 || K > n) throw ConfigError("K must satisfy 1 <= K <= n");
  const bool dense = method == EigenMethod::Dense ||
                     (method == EigenMethod::Auto && net.size() <= kDenseEigenLimit);
  EigenPairs ep;
  if (dense) {
    ep = dense_top_eigenpairs(regularized_laplacian(net), K);
  } else {
    const double tau = 0.5 / static_cast<double>(n);
    Eigen::VectorXd inv_sqrt(n);
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(net.degree(std::size_t(i))) + 0.5);
      for (Eigen::Index j = 0; j < n; ++j)
        if (net.edge(std::size_t(i), std::size_t(j))) adj[std::size_t(i)].push_back(j);
    }
    ep = lanczos_top_eigenpairs(
        [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
          const Eigen::VectorXd z = inv_sqrt.cwiseProduct(x);
          const double s = tau * z.sum();
          y.resize(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            double acc = s;
            for (Eigen::Index j : adj[std::size_t(i)]) acc += z(j);
            y(i) = inv_sqrt(i) * acc;
          }
        },
        n, K);
  }
  return {std::move(ep.vectors), std::move(ep.values)};
}

struct KMeansOptions {
  int iterations = 20;
  int restarts = 10;
};

struct KMeansResult {
  Labels labels;
  double inertia = 0.0;  ///< within-cluster sum of squares
};

namespace detail {

inline int nearest_centroid(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& c,
                            double* dist = nullptr) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    const double d = (x.row(i) - c.row(k)).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(k);
    }
  }
  if (dist) *dist = bd;
  return best;
}

/// Relabels clusters in order of first appearance.
inline std::vector<int> canonical_order(const std::vector<int>& a, int K) {
  std::vector<int> map(std::size_t(K), -1);
  int next = 0;
  std::vector<int> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    int& m = map[std::size_t(a[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

inline KMeansResult kmeans_single(const Eigen::MatrixXd& x, int K, int iterations, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(K, x.cols());
  // k-means++ seeding
  c.row(0) = x.row(Eigen::Index(rng.below(std::uint64_t(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (int k = 1; k < K; ++k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) best = std::min(best, (x.row(i) - c.row(j)).squaredNorm());
      d2[std::size_t(i)] = best;
      total += best;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2[std::size_t(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = Eigen::Index(rng.below(std::uint64_t(n)));
    }
    c.row(k) = x.row(pick);
  }

  std::vector<int> assign(std::size_t(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = nearest_centroid(x, i, c, &dist[std::size_t(i)]);
      if (a != assign[std::size_t(i)]) changed = true;
      assign[std::size_t(i)] = a;
    }
    if (!changed && it > 0) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(K, x.cols());
    std::vector<Eigen::Index> count(std::size_t(K), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(assign[std::size_t(i)]) += x.row(i);
      ++count[std::size_t(assign[std::size_t(i)])];
    }
    for (int k = 0; k < K; ++k) {
      if (count[std::size_t(k)] > 0) {
        c.row(k) = sum.row(k) / static_cast<double>(count[std::size_t(k)]);
        continue;
      }
      // Empty cluster: reseed at the point farthest from its centroid.
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      c.row(k) = x.row(far);
      dist[std::size_t(far)] = 0.0;
    }
  }
  KMeansResult r;
  std::vector<int> final_assign(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double d;
    final_assign[std::size_t(i)] = nearest_centroid(x, i, c, &d);
    r.inertia += d;
  }
  r.labels = Labels(canonical_order(final_assign, K), K);
  return r;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
/// inertia. Deterministic for a given seed.
inline KMeansResult kmeans_fit(const Eigen::MatrixXd& points, int K, const KMeansOptions& opt,
                               std::uint64_t seed) {
  if (K < 1 || K > points.rows()) throw ConfigError("k-means needs 1 <= K <= n");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(derive_seed(seed, {0x4b3a, std::uint64_t(r)}));
    auto res = detail::kmeans_single(points, K, opt.iterations, rng);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

inline Labels kmeans(const Embedding& e, int K, int iterations, int restarts, std::uint64_t seed) {
  return kmeans_fit(e.rows, K, {iterations, restarts}, seed).labels;
}

inline Labels spectral_cluster(const BinaryNetwork& net, int K, std::uint64_t seed,
                               const KMeansOptions& opt = {}) {
  return kmeans_fit(regularized_embed(net, K).rows, K, opt, seed).labels;
}

/// Bethe-Hessian H(r) = (r^2 - 1) I - r A + D at r = sqrt(sum d^2 / sum d - 1).
inline Eigen::MatrixXd bethe_hessian(const BinaryNetwork& net, double* radius = nullptr) {
  const auto n = static_cast<Eigen::Index>(net.size());
  double sd = 0.0, sd2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(net.degree(std::size_t(i)));
    sd += d;
    sd2 += d * d;
  }
  const double r = sd > 0.0 ? std::sqrt(std::max(0.0, sd2 / sd - 1.0)) : 0.0;
  if (radius) *radius = r;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    H(i, i) = r * r - 1.0 + static_cast<double>(net.degree(std::size_t(i)));
    for (Eigen::Index j = 0; j < n; ++j)
      if (net.edge(std::size_t(i), std::size_t(j))) H(i, j) = -r;
  }
  return H;
}

/// Number of negative Bethe-Hessian eigenvalues. A graph without edges
/// returns 0.
inline int estimate_k_bethe_hessian(const BinaryNetwork& net, double tol = 1e-8) {
  if (net.size() == 0) throw DataError("empty node set");
  if (net.edge_count() == 0) return 0;
  return count_negative_eigenvalues(bethe_hessian(net), tol);
}

/// Result of the worst-community label error.
struct LabelError {
  double gamma = 0.0;
  std::vector<int> skipped_classes;  ///< truth classes with no members
  bool exact = true;                 ///< false when matching replaced enumeration

  double overlap() const noexcept { return std::max(0.0, 1.0 - gamma); }
};

namespace detail {

/// Minimum-cost perfect assignment (Hungarian algorithm, O(K^3)).
/// Returns row_to_col.
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int K = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(std::size_t(K) + 1, 0.0), v(std::size_t(K) + 1, 0.0);
  std::vector<int> p(std::size_t(K) + 1, 0), way(std::size_t(K) + 1, 0);
  for (int i = 1; i <= K; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(std::size_t(K) + 1, inf);
    std::vector<char> used(std::size_t(K) + 1, 0);
    do {
      used[std::size_t(j0)] = 1;
      const int i0 = p[std::size_t(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= K; ++j) {
        if (used[std::size_t(j)]) continue;
        const double cur = cost[std::size_t(i0 - 1)][std::size_t(j - 1)] - u[std::size_t(i0)] - v[std::size_t(j)];
        if (cur < minv[std::size_t(j)]) {
          minv[std::size_t(j)] = cur;
          way[std::size_t(j)] = j0;
        }
        if (minv[std::size_t(j)] < delta) {
          delta = minv[std::size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= K; ++j) {
        if (used[std::size_t(j)]) {
          u[std::size_t(p[std::size_t(j)])] += delta;
          v[std::size_t(j)] -= delta;
        } else {
          minv[std::size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[std::size_t(j0)] != 0);
    do {
      const int j1 = way[std::size_t(j0)];
      p[std::size_t(j0)] = p[std::size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(std::size_t(K), 0);
  for (int j = 1; j <= K; ++j)
    if (p[std::size_t(j)] > 0) row_to_col[std::size_t(p[std::size_t(j)] - 1)] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// gamma(c, c_hat): minimum over relabelings of the truth of the worst
/// per-class (false members + missed members) / class size. Exhaustive
/// over permutations for K <= 8, maximum-agreement matching above.
inline LabelError label_error_gamma(const Labels& truth, const Labels& est) {
  if (truth.size() != est.size()) throw DataError("label vectors differ in length");
  const int K = std::max(truth.communities(), est.communities());
  const auto Ks = std::size_t(K);
  std::vector<std::vector<double>> conf(Ks, std::vector<double>(Ks, 0.0));
  std::vector<double> row(Ks, 0.0), col(Ks, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    conf[std::size_t(truth[i])][std::size_t(est[i])] += 1.0;
    row[std::size_t(truth[i])] += 1.0;
    col[std::size_t(est[i])] += 1.0;
  }
  LabelError out;
  for (int a = 0; a < truth.communities(); ++a)
    if (row[std::size_t(a)] == 0.0) out.skipped_classes.push_back(a);

  // perm[k] = truth class relabeled as k.
  auto worst = [&](const std::vector<int>& perm) {
    double g = 0.0;
    for (std::size_t k = 0; k < Ks; ++k) {
      const auto a = std::size_t(perm[k]);
      if (row[a] == 0.0) continue;
      g = std::max(g, (col[k] + row[a] - 2.0 * conf[a][k]) / row[a]);
    }
    return g;
  };

  std::vector<int> perm(Ks);
  std::iota(perm.begin(), perm.end(), 0);
  if (K <= 8) {
    double best = std::numeric_limits<double>::infinity();
    do best = std::min(best, worst(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    out.gamma = best;
  } else {
    std::vector<std::vector<double>> cost(Ks, std::vector<double>(Ks));
    for (std::size_t a = 0; a < Ks; ++a)
      for (std::size_t k = 0; k < Ks; ++k) cost[a][k] = -conf[a][k];
    const auto row_to_col = detail::hungarian(cost);
    for (std::size_t a = 0; a < Ks; ++a) perm[std::size_t(row_to_col[a])] = int(a);
    out.gamma = worst(perm);
    out.exact = false;
  }
  return out;
}

}  // namespace netdenoise
