#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "netdenoise/linalg.hpp"
#include "netdenoise/spectral.hpp"
#include "netdenoise/synthgen.hpp"
#include "support/oracles.hpp"

using namespace netdenoise;

namespace {

BinaryNetwork disjoint_cliques(const std::vector<std::size_t>& sizes) {
  std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  BinaryNetwork g(n);
  std::size_t start = 0;
  for (auto s : sizes) {
    for (std::size_t i = start; i < start + s; ++i)
      for (std::size_t j = i + 1; j < start + s; ++j) g.set_edge(i, j, true);
    start += s;
  }
  return g;
}

BinaryNetwork permute(const BinaryNetwork& g, const std::vector<std::size_t>& perm) {
  BinaryNetwork out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.edge(i, j)) out.set_edge(perm[i], perm[j], true);
  return out;
}

BlockParams two_level(std::size_t n, int K, double in, double out) {
  PlantedConfig pc;
  pc.n = n;
  pc.K = K;
  pc.rho_w = in;
  pc.beta_w = out / in;
  return planted_params(pc);
}

}  // namespace

TEST(DenseEigen, MatchesJacobiOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = oracle::random_graph(50, 0.15, seed);
    const Eigen::MatrixXd L = regularized_laplacian(g);
    std::vector<std::vector<double>> a(50, std::vector<double>(50));
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) a[std::size_t(i)][std::size_t(j)] = L(i, j);
    std::vector<double> vals;
    std::vector<std::vector<double>> vecs;
    oracle::jacobi_eigen(a, vals, vecs);
    const auto ep = top_eigenpairs(L, 4, EigenMethod::Dense);
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(ep.values(c), vals[std::size_t(c)], 1e-6);
      // compare up to sign
      double dot = 0;
      for (int i = 0; i < 50; ++i) dot += ep.vectors(i, c) * vecs[std::size_t(i)][std::size_t(c)];
      if (c < 3) {
        EXPECT_NEAR(std::abs(dot), 1.0, 1e-6) << "seed " << seed << " col " << c;
      }
    }
  }
}

TEST(Lanczos, MatchesDenseSolver) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto g = oracle::random_graph(120, 0.08, seed);
    const Eigen::MatrixXd L = regularized_laplacian(g);
    const auto d = top_eigenpairs(L, 3, EigenMethod::Dense);
    const auto l = top_eigenpairs(L, 3, EigenMethod::Lanczos);
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(l.values(c), d.values(c), 1e-8);
      EXPECT_NEAR(std::abs(l.vectors.col(c).dot(d.vectors.col(c))), 1.0, 1e-6);
    }
  }
}

TEST(Lanczos, HandlesInvariantSubspaceRestart) {
  // Block-diagonal with repeated eigenvalues forces an early breakdown.
  const auto g = disjoint_cliques({5, 5, 5, 5});
  const Eigen::MatrixXd L = regularized_laplacian(g);
  const auto d = top_eigenpairs(L, 4, EigenMethod::Dense);
  const auto l = top_eigenpairs(L, 4, EigenMethod::Lanczos);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(l.values(c), d.values(c), 1e-8);
}

TEST(RegularizedEmbed, CompleteGraphLeadingVectorIsConstant) {
  const auto e = regularized_embed(BinaryNetwork::complete(20), 1);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(e.rows(i, 0), 1.0 / std::sqrt(20.0), 1e-10);
}

TEST(RegularizedEmbed, TwoCliquesSeparate) {
  const auto e = regularized_embed(disjoint_cliques({5, 5}), 2);
  for (int i = 1; i < 5; ++i) {
    EXPECT_NEAR((e.rows.row(i) - e.rows.row(0)).norm(), 0.0, 1e-8);
    EXPECT_NEAR((e.rows.row(5 + i) - e.rows.row(5)).norm(), 0.0, 1e-8);
  }
  EXPECT_GT((e.rows.row(0) - e.rows.row(5)).norm(), 0.5);
}

TEST(RegularizedEmbed, ResidualsAndOrthonormality) {
  const auto g = oracle::random_graph(80, 0.1, 21);
  const auto e = regularized_embed(g, 3);
  const Eigen::MatrixXd L = regularized_laplacian(g);
  for (int c = 0; c < 3; ++c) EXPECT_LT((L * e.rows.col(c) - e.eigenvalues(c) * e.rows.col(c)).norm(), 1e-6);
  EXPECT_LT((e.rows.transpose() * e.rows - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-8);
  for (int c = 0; c < 3; ++c) {
    int first = 0;
    while (std::abs(e.rows(first, c)) <= 1e-12) ++first;
    EXPECT_GT(e.rows(first, c), 0.0);
  }
  EXPECT_THROW(regularized_embed(g, 0), ConfigError);
  EXPECT_THROW(regularized_embed(g, 81), ConfigError);
}

TEST(KMeans, SeparatedCloudsRecoveredExactly) {
  Rng rng(5);
  Eigen::MatrixXd x(90, 2);
  std::vector<int> truth(90);
  for (int i = 0; i < 90; ++i) {
    truth[std::size_t(i)] = i % 3;
    x(i, 0) = 10.0 * (i % 3) + 0.1 * rng.normal();
    x(i, 1) = -5.0 * (i % 3) + 0.1 * rng.normal();
  }
  const auto res = kmeans_fit(x, 3, {}, 1);
  EXPECT_DOUBLE_EQ(label_error_gamma(Labels(truth, 3), res.labels).gamma, 0.0);
}

TEST(KMeans, SingleClusterAndDuplicates) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 3);
  const auto one = kmeans_fit(x, 1, {}, 2);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(one.labels[i], 0);
  // Only two distinct rows but K = 3: the two groups stay apart at zero cost.
  Eigen::MatrixXd dup(10, 1);
  for (int i = 0; i < 10; ++i) dup(i, 0) = i < 5 ? 0.0 : 1.0;
  const auto res = kmeans_fit(dup, 3, {}, 3);
  EXPECT_EQ(res.inertia, 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(res.labels[i], res.labels[i < 5 ? 0 : 5]);
    EXPECT_LT(res.labels[i], 3);
  }
  EXPECT_NE(res.labels[0], res.labels[5]);
  EXPECT_THROW(kmeans_fit(dup, 11, {}, 3), ConfigError);
}

TEST(KMeans, BeatsRandomAssignments) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(60, 3);
    for (int i = 0; i < 60; ++i)
      for (int d = 0; d < 3; ++d) x(i, d) = rng.normal();
    const int K = 4;
    const auto res = kmeans_fit(x, K, {}, seed);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<int> a(60);
      for (auto& v : a) v = int(rng.below(K));
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(K, 3);
      std::vector<int> cnt(K, 0);
      for (int i = 0; i < 60; ++i) {
        c.row(a[std::size_t(i)]) += x.row(i);
        ++cnt[std::size_t(a[std::size_t(i)])];
      }
      double obj = 0;
      for (int i = 0; i < 60; ++i) {
        const int k = a[std::size_t(i)];
        obj += (x.row(i) - c.row(k) / std::max(1, cnt[std::size_t(k)])).squaredNorm();
      }
      ASSERT_LE(res.inertia, obj + 1e-9);
    }
  }
}

TEST(KMeans, DeterministicGivenSeed) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(50, 2);
  EXPECT_EQ(kmeans_fit(x, 4, {}, 7).labels.assignment(), kmeans_fit(x, 4, {}, 7).labels.assignment());
}

TEST(SpectralCluster, StrongPlantedBlocks) {
  const auto bp = two_level(150, 3, 0.5, 0.05);
  const auto g = sample_sbm(bp, 4);
  EXPECT_DOUBLE_EQ(label_error_gamma(bp.labels, spectral_cluster(g, 3, 1)).overlap(), 1.0);
}

TEST(SpectralCluster, DisconnectedComponents) {
  const auto g = disjoint_cliques({7, 9, 11});
  const auto truth = Labels::contiguous(std::vector<std::size_t>{7, 9, 11});
  EXPECT_DOUBLE_EQ(label_error_gamma(truth, spectral_cluster(g, 3, 1)).gamma, 0.0);
}

TEST(SpectralCluster, EquivariantUnderNodePermutation) {
  const auto bp = two_level(120, 3, 0.4, 0.05);
  const auto g = sample_sbm(bp, 8);
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> permuted_truth(120);
  for (std::size_t i = 0; i < 120; ++i) permuted_truth[perm[i]] = bp.labels[i];
  const auto est = spectral_cluster(permute(g, perm), 3, 2);
  EXPECT_DOUBLE_EQ(label_error_gamma(Labels(permuted_truth, 3), est).overlap(), 1.0);
}

TEST(BetheHessian, CompleteGraphHasOneNegativeEigenvalue) {
  // K_n: r = sqrt(n - 2); spectrum of H is r^2 - 1 + (n-1) - r(n-1) once
  // and r^2 - 1 + (n-1) + r with multiplicity n-1.
  const std::size_t n = 30;
  double r = 0;
  const Eigen::MatrixXd H = bethe_hessian(BinaryNetwork::complete(n), &r);
  EXPECT_NEAR(r, std::sqrt(double(n) - 2.0), 1e-12);
  const double low = r * r - 1 + (n - 1) - r * (n - 1);
  EXPECT_LT(low, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  EXPECT_NEAR(es.eigenvalues()(0), low, 1e-9);
  EXPECT_NEAR(es.eigenvalues()(1), r * r - 1 + (n - 1) + r, 1e-9);
  EXPECT_EQ(estimate_k_bethe_hessian(BinaryNetwork::complete(n)), 1);
}

TEST(BetheHessian, EmptyGraphIsZero) { EXPECT_EQ(estimate_k_bethe_hessian(BinaryNetwork(10)), 0); }

TEST(BetheHessian, StrongSbmFindsThreeCommunities) {
  const auto bp = two_level(300, 3, 0.15, 0.02);
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) hits += estimate_k_bethe_hessian(sample_sbm(bp, 1000 + s)) == 3;
  EXPECT_GE(hits, 18);
}

TEST(BetheHessian, LdltInertiaMatchesDenseCount) {
  const auto g = sample_sbm(two_level(90, 3, 0.3, 0.03), 6);
  const Eigen::MatrixXd H = bethe_hessian(g);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H + 1e-8 * Eigen::MatrixXd::Identity(90, 90));
  EXPECT_EQ(int((ldlt.vectorD().array() < 0).count()), count_negative_eigenvalues(H));
}

TEST(LabelError, PermutationOfTruthIsZero) {
  const std::vector<int> t{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(label_error_gamma(Labels(t, 3), Labels({2, 2, 0, 0, 1, 1}, 3)).gamma, 0.0);
  EXPECT_DOUBLE_EQ(label_error_gamma(Labels(t, 3), Labels({2, 2, 0, 0, 1, 1}, 3)).overlap(), 1.0);
}

TEST(LabelError, OneMisplacedNodeMatchesEnumeration) {
  // Three communities of 100; node 0 of community 0 labelled as community 1.
  auto truth = Labels::contiguous(std::vector<std::size_t>{100, 100, 100});
  auto est = truth.assignment();
  est[0] = 1;
  const double g = label_error_gamma(truth, Labels(est, 3)).gamma;
  EXPECT_DOUBLE_EQ(g, oracle::gamma_enumerate(truth.assignment(), est, 3));
  EXPECT_DOUBLE_EQ(g, 0.01);
}

TEST(LabelError, ConstantEstimateHasZeroOverlap) {
  const auto truth = Labels::contiguous(std::vector<std::size_t>{10, 10, 10});
  const auto r = label_error_gamma(truth, Labels(std::vector<int>(30, 0), 3));
  EXPECT_GE(r.gamma, 1.0);
  EXPECT_DOUBLE_EQ(r.gamma, oracle::gamma_enumerate(truth.assignment(), std::vector<int>(30, 0), 3));
  EXPECT_DOUBLE_EQ(r.overlap(), 0.0);
}

TEST(LabelError, RandomInstancesAgreeWithEnumerationAndAreInvariant) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 2 + int(rng.below(4));
    std::vector<int> t(40), e(40);
    for (int i = 0; i < 40; ++i) {
      t[std::size_t(i)] = i % K;
      e[std::size_t(i)] = rng.uniform() < 0.7 ? t[std::size_t(i)] : int(rng.below(std::uint64_t(K)));
    }
    const double g = label_error_gamma(Labels(t, K), Labels(e, K)).gamma;
    ASSERT_NEAR(g, oracle::gamma_enumerate(t, e, K), 1e-12);
    std::vector<int> sigma(static_cast<std::size_t>(K));
    std::iota(sigma.begin(), sigma.end(), 0);
    std::shuffle(sigma.begin(), sigma.end(), rng);
    std::vector<int> tp(40), ep(40);
    for (int i = 0; i < 40; ++i) {
      tp[std::size_t(i)] = sigma[std::size_t(t[std::size_t(i)])];
      ep[std::size_t(i)] = sigma[std::size_t(e[std::size_t(i)])];
    }
    ASSERT_NEAR(label_error_gamma(Labels(tp, K), Labels(ep, K)).gamma, g, 1e-12);
  }
}

TEST(LabelError, MatchingPathForLargeK) {
  const int K = 10;
  std::vector<int> t(200), e(200);
  for (int i = 0; i < 200; ++i) {
    t[std::size_t(i)] = i % K;
    e[std::size_t(i)] = (i % K + 3) % K;  // a pure relabeling
  }
  e[0] = (e[0] + 1) % K;
  const auto r = label_error_gamma(Labels(t, K), Labels(e, K));
  EXPECT_FALSE(r.exact);
  EXPECT_NEAR(r.gamma, 1.0 / 20.0, 1e-12);  // one miss in one class, one intruder in another
}

TEST(LabelError, EmptyTruthClassIsSkipped) {
  const auto r = label_error_gamma(Labels({0, 0, 1, 1}, 3), Labels({0, 0, 1, 1}, 3));
  EXPECT_EQ(r.skipped_classes, std::vector<int>{2});
  EXPECT_DOUBLE_EQ(r.gamma, 0.0);
}
