#pragma once

// Core data model: binary networks, noisy samples with their vote matrix,
// community labels, block-structured parameters and per-block histograms.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "netdenoise/errors.hpp"

namespace netdenoise {

/// Dense row-major n x n matrix.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T value = T{}) : n_(n), data_(n * n, value) {}

  std::size_t size() const noexcept { return n_; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * n_, n_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }

  const std::vector<T>& data() const noexcept { return data_; }

  bool is_symmetric() const noexcept {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

/// Symmetric {0,1} adjacency matrix with zero diagonal.
class BinaryNetwork {
 public:
  BinaryNetwork() = default;
  explicit BinaryNetwork(std::size_t n) : adj_(n, 0) {}

  std::size_t size() const noexcept { return adj_.size(); }

  bool edge(std::size_t i, std::size_t j) const noexcept { return adj_(i, j) != 0; }

  /// Sets both (i,j) and (j,i). Self-loops are ignored.
  void set_edge(std::size_t i, std::size_t j, bool present) noexcept {
    if (i == j) return;
    const std::uint8_t v = present ? 1 : 0;
    adj_(i, j) = v;
    adj_(j, i) = v;
  }

  std::size_t edge_count() const noexcept {
    std::size_t m = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) m += adj_(i, j);
    return m;
  }

  std::size_t degree(std::size_t i) const noexcept {
    const auto r = adj_.row(i);
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), std::uint8_t{1}));
  }

  const SquareMatrix<std::uint8_t>& adjacency() const noexcept { return adj_; }

  static BinaryNetwork complete(std::size_t n) {
    BinaryNetwork g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) g.set_edge(i, j, true);
    return g;
  }

  friend bool operator==(const BinaryNetwork&, const BinaryNetwork&) = default;

 private:
  SquareMatrix<std::uint8_t> adj_;
};

/// Node-to-community assignment. Communities are stored 0-based
/// (0..K-1); file formats use 1-based labels.
class Labels {
 public:
  Labels() = default;
  Labels(std::vector<int> assignment, int communities)
      : assignment_(std::move(assignment)), k_(communities) {
    if (k_ < 1) throw ConfigError("community count must be >= 1");
    for (int c : assignment_)
      if (c < 0 || c >= k_) throw DataError("label out of range [1, K]");
  }

  /// Contiguous labels: the first sizes[0] nodes in community 0, etc.
  static Labels contiguous(std::span<const std::size_t> sizes) {
    std::vector<int> a;
    for (std::size_t k = 0; k < sizes.size(); ++k) a.insert(a.end(), sizes[k], static_cast<int>(k));
    return Labels(std::move(a), static_cast<int>(sizes.size()));
  }

  std::size_t size() const noexcept { return assignment_.size(); }
  int communities() const noexcept { return k_; }
  int operator[](std::size_t i) const noexcept { return assignment_[i]; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }

  std::vector<std::size_t> community_sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(k_), 0);
    for (int c : assignment_) ++s[static_cast<std::size_t>(c)];
    return s;
  }

  /// Node indices per community, in increasing node order.
  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(k_));
    for (std::size_t i = 0; i < assignment_.size(); ++i)
      m[static_cast<std::size_t>(assignment_[i])].push_back(i);
    return m;
  }

  friend bool operator==(const Labels&, const Labels&) = default;

 private:
  std::vector<int> assignment_;
  int k_ = 1;
};

/// Per-block parameter triple: edge probability w, false-positive rate p,
/// false-negative rate q.
struct Theta {
  double w = 0.0;
  double p = 0.0;
  double q = 0.0;

  friend bool operator==(const Theta&, const Theta&) = default;
};

/// Labels plus K x K block matrices for edge probability (B), false
/// positives (P) and false negatives (Q).
struct BlockParams {
  Labels labels;
  SquareMatrix<double> B;
  SquareMatrix<double> P;
  SquareMatrix<double> Q;

  int communities() const noexcept { return labels.communities(); }

  Theta block_theta(int k, int l) const noexcept {
    const auto a = static_cast<std::size_t>(k), b = static_cast<std::size_t>(l);
    return {B(a, b), P(a, b), Q(a, b)};
  }

  /// Parameters of node pair (i, j).
  Theta pair_theta(std::size_t i, std::size_t j) const noexcept {
    return block_theta(labels[i], labels[j]);
  }

  /// Throws ConfigError unless the matrices are K x K, symmetric, B in
  /// [0,1] and P, Q in [0, 1/2).
  void validate() const {
    const auto k = static_cast<std::size_t>(communities());
    if (B.size() != k || P.size() != k || Q.size() != k)
      throw ConfigError("block matrices must be K x K");
    if (!B.is_symmetric() || !P.is_symmetric() || !Q.is_symmetric())
      throw ConfigError("block matrices must be symmetric");
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        if (!(B(a, b) >= 0.0 && B(a, b) <= 1.0)) throw ConfigError("B entry outside [0,1]");
        if (!(P(a, b) >= 0.0 && P(a, b) < 0.5)) throw ConfigError("P entry outside [0,1/2)");
        if (!(Q(a, b) >= 0.0 && Q(a, b) < 0.5)) throw ConfigError("Q entry outside [0,1/2)");
      }
  }
};

/// N observations of one network and their entrywise sum S.
class NetworkSample {
 public:
  NetworkSample() = default;

  std::size_t size() const noexcept { return votes_.size(); }
  int count() const noexcept { return static_cast<int>(observations_.size()); }
  int votes(std::size_t i, std::size_t j) const noexcept { return votes_(i, j); }
  const SquareMatrix<int>& vote_matrix() const noexcept { return votes_; }
  const std::vector<BinaryNetwork>& observations() const noexcept { return observations_; }

 private:
  friend NetworkSample vote_matrix(std::vector<BinaryNetwork> observations);
  std::vector<BinaryNetwork> observations_;
  SquareMatrix<int> votes_;
};

/// Vote counts |I_r| = #{pairs in the block with S_ij = r}, r = 0..N.
struct BlockHistogram {
  int N = 0;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  explicit BlockHistogram(int observations = 0)
      : N(observations), counts(static_cast<std::size_t>(observations) + 1, 0) {}

  void add(int r, std::int64_t c = 1) {
    counts[static_cast<std::size_t>(r)] += c;
    total += c;
  }
};

/// Validates a raw integer matrix as a binary network. Asymmetric input is
/// rejected unless symmetrize_by_or is set, in which case (i,j) is an edge
/// when either orientation is.
inline BinaryNetwork validate_network(const std::vector<std::vector<int>>& raw,
                                      bool symmetrize_by_or = false) {
  const std::size_t n = raw.size();
  for (const auto& row : raw)
    if (row.size() != n) throw DataError("adjacency matrix is not square");
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int v = raw[i][j];
      if (v != 0 && v != 1)
        throw DataError("non-binary entry at (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ")");
      if (i == j) {
        if (v != 0) throw DataError("self-loop at node " + std::to_string(i + 1));
        continue;
      }
      if (raw[j][i] != v && !symmetrize_by_or)
        throw DataError("asymmetric entry at (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ")");
      if (v == 1) g.set_edge(i, j, true);
    }
  }
  return g;
}

/// Builds a sample and its vote matrix S = sum_m A^(m).
inline NetworkSample vote_matrix(std::vector<BinaryNetwork> observations) {
  if (observations.empty()) throw DataError("sample needs at least one observation");
  const std::size_t n = observations.front().size();
  for (const auto& g : observations)
    if (g.size() != n) throw DataError("observations have mismatched node counts");
  NetworkSample s;
  s.votes_ = SquareMatrix<int>(n, 0);
  for (const auto& g : observations)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s.votes_(i, j) += g.adjacency()(i, j);
  s.observations_ = std::move(observations);
  return s;
}

/// A_hat_ij = 1{S_ij >= N/2}; an exact tie at N/2 counts as an edge.
inline BinaryNetwork majority_vote(const NetworkSample& sample) {
  const std::size_t n = sample.size();
  const int N = sample.count();
  BinaryNetwork g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (2 * sample.votes(i, j) >= N) g.set_edge(i, j, true);
  return g;
}

/// Calls f(i, j) for every unordered pair in block (k, l): i in k, j in l,
/// and i < j when k == l.
template <class F>
void for_each_block_pair(const std::vector<std::vector<std::size_t>>& members, int k, int l,
                         F&& f) {
  const auto& a = members[static_cast<std::size_t>(k)];
  const auto& b = members[static_cast<std::size_t>(l)];
  if (k == l) {
    for (std::size_t x = 0; x < a.size(); ++x)
      for (std::size_t y = x + 1; y < a.size(); ++y) f(a[x], a[y]);
  } else {
    for (std::size_t i : a)
      for (std::size_t j : b) f(i, j);
  }
}

inline BlockHistogram block_histogram(const NetworkSample& sample,
                                      const std::vector<std::vector<std::size_t>>& members,
                                      int k, int l) {
  BlockHistogram h(sample.count());
  for_each_block_pair(members, k, l, [&](std::size_t i, std::size_t j) { h.add(sample.votes(i, j)); });
  return h;
}

/// Histogram of vote counts over the unordered pairs of block (k, l). An
/// empty block yields total == 0.
inline BlockHistogram block_histogram(const NetworkSample& sample, const Labels& labels, int k,
                                      int l) {
  if (labels.size() != sample.size()) throw DataError("labels length differs from node count");
  if (k < 0 || l < 0 || k >= labels.communities() || l >= labels.communities())
    throw ConfigError("block index out of range");
  return block_histogram(sample, labels.members(), k, l);
}

}  // namespace netdenoise
