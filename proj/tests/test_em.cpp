#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "netdenoise/em.hpp"
#include "netdenoise/metrics.hpp"
#include "netdenoise/synthgen.hpp"
#include "support/oracles.hpp"

using namespace netdenoise;

namespace {

/// Histogram proportional to the exact mixture pmf, scaled to `total`.
BlockHistogram expected_histogram(const Theta& t, int N, double total) {
  const auto f1 = oracle::binom_pmf(N, 1 - t.q), f0 = oracle::binom_pmf(N, t.p);
  BlockHistogram h(N);
  for (int r = 0; r <= N; ++r)
    h.add(r, std::llround(total * (t.w * f1[std::size_t(r)] + (1 - t.w) * f0[std::size_t(r)])));
  return h;
}

PosteriorTable exact_posterior(const Theta& t, int N) {
  PosteriorTable p{N, std::vector<double>(std::size_t(N) + 1)};
  for (int r = 0; r <= N; ++r) p.tau[std::size_t(r)] = oracle::posterior_direct(t.w, t.p, t.q, N, r);
  return p;
}

}  // namespace

TEST(InitTau, InclusiveHalfThreshold) {
  EXPECT_EQ(init_tau(10).tau, (std::vector<double>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(init_tau(1).tau, (std::vector<double>{0, 1}));
  EXPECT_EQ(init_tau(2).tau[1], 1.0);
  EXPECT_THROW(init_tau(0), ConfigError);
}

TEST(MStep, DegenerateMassAtN) {
  BlockHistogram h(6);
  h.add(6, 40);
  const Theta t = m_step(h, init_tau(6));
  EXPECT_DOUBLE_EQ(t.w, 1 - kParamEps);
  EXPECT_DOUBLE_EQ(t.q, kParamEps);
  EXPECT_DOUBLE_EQ(t.p, kParamEps);  // zero denominator
}

TEST(MStep, TwoBinHandCase) {
  const int N = 5;
  BlockHistogram h(N);
  h.add(0, 3);
  h.add(N, 1);
  const Theta t = m_step(h, init_tau(N));
  EXPECT_DOUBLE_EQ(t.w, 0.25);
  EXPECT_DOUBLE_EQ(t.p, kParamEps);
  EXPECT_DOUBLE_EQ(t.q, kParamEps);
}

TEST(MStep, ExactPosteriorIsFixedPoint) {
  for (const Theta t : {Theta{0.2, 0.25, 0.2}, Theta{0.6, 0.1, 0.35}, Theta{0.05, 0.3, 0.1}}) {
    const auto h = expected_histogram(t, 10, 1e12);
    const Theta m = m_step(h, exact_posterior(t, 10));
    EXPECT_NEAR(m.w, t.w, 1e-8);
    EXPECT_NEAR(m.p, t.p, 1e-8);
    EXPECT_NEAR(m.q, t.q, 1e-8);
  }
}

TEST(MStep, EmptyHistogramAndMismatchedN) {
  EXPECT_THROW(m_step(BlockHistogram(4), init_tau(4)), DataError);
  BlockHistogram h(4);
  h.add(1);
  EXPECT_THROW(m_step(h, init_tau(5)), DataError);
}

TEST(EStep, SymmetricMidpointIsHalf) {
  for (int N : {2, 6, 10}) EXPECT_NEAR(e_step({0.5, 0.3, 0.3}, N).tau[std::size_t(N / 2)], 0.5, 1e-15);
}

TEST(EStep, MatchesDirectRatio) {
  for (double w : {0.05, 0.3, 0.7})
    for (double p : {0.02, 0.2, 0.45})
      for (double q : {0.03, 0.25, 0.49}) {
        const auto tau = e_step({w, p, q}, 10).tau;
        for (int r = 0; r <= 10; ++r)
          ASSERT_NEAR(tau[std::size_t(r)], oracle::posterior_direct(w, p, q, 10, r), 1e-12);
      }
}

TEST(EStep, MonotoneInVotes) {
  const auto tau = e_step({0.1, 0.4, 0.45}, 30).tau;
  for (std::size_t r = 1; r < tau.size(); ++r) EXPECT_GE(tau[r], tau[r - 1]);
}

TEST(EmBlock, NoiselessConvergesImmediately) {
  BlockHistogram h(8);
  h.add(0, 70);
  h.add(8, 30);
  const auto res = em_block(h);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 2);
  EXPECT_NEAR(res.theta.w, 0.3, 1e-12);
}

TEST(EmBlock, ExactHistogramStaysAtTruth) {
  const Theta t{0.2, 0.25, 0.2};
  const auto res = em_block(expected_histogram(t, 10, 1e12), 200, 1e-13);
  EXPECT_NEAR(res.theta.w, t.w, 1e-6);
  EXPECT_NEAR(res.theta.p, t.p, 1e-6);
  EXPECT_NEAR(res.theta.q, t.q, 1e-6);
}

TEST(EmBlock, LikelihoodNondecreasing) {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const Theta t{0.05 + 0.9 * rng.uniform(), 0.05 + 0.4 * rng.uniform(), 0.05 + 0.4 * rng.uniform()};
    const int N = 3 + int(rng.below(15));
    BlockHistogram h(N);
    for (int pair = 0; pair < 2000; ++pair) {
      const bool a = rng.uniform() < t.w;
      int s = 0;
      for (int m = 0; m < N; ++m) s += a ? rng.uniform() >= t.q : rng.uniform() < t.p;
      h.add(s);
    }
    const auto res = em_block(h, 50, 0.0);
    for (std::size_t k = 1; k < res.trace.size(); ++k)
      ASSERT_GE(block_log_likelihood(h, res.trace[k]), block_log_likelihood(h, res.trace[k - 1]) - 1e-10);
  }
}

TEST(EmBlock, PlantedBlockConsistency) {
  const Theta t{0.15, 0.25, 0.2};
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(seed, {31}));
    BlockHistogram h(20);
    for (int pair = 0; pair < 100 * 100; ++pair) {
      const bool a = rng.uniform() < t.w;
      int s = 0;
      for (int m = 0; m < 20; ++m) s += a ? rng.uniform() >= t.q : rng.uniform() < t.p;
      h.add(s);
    }
    const auto r = em_block(h);
    good += std::max({std::abs(r.theta.w - t.w), std::abs(r.theta.p - t.p), std::abs(r.theta.q - t.q)}) <= 0.05;
  }
  EXPECT_GE(good, 95);
}

TEST(EmFit, NoiselessSampleRecoversTruth) {
  PlantedConfig pc;
  pc.n = 90;
  pc.rho_p = pc.rho_q = 0.0;
  const auto bp = planted_params(pc);
  const auto a = sample_sbm(bp, 1);
  const auto s = corrupt_sample(a, bp, 6, 2);
  for (int K : {1, 3, 4})
    for (int T : {1, 2}) {
      EmOptions opt;
      opt.K = K;
      opt.outer_rounds = T;
      EXPECT_EQ(em_fit(s, opt, 5).A_hat, a) << K << " " << T;
    }
}

TEST(EmFit, ParametersStayInClampRange) {
  PlantedConfig pc;
  pc.n = 120;
  const auto bp = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(bp, 3), bp, 10, 4);
  const auto rep = em_fit(s, {}, 8);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      const Theta t = rep.params.block_theta(k, l);
      EXPECT_GE(t.w, kParamEps);
      EXPECT_LE(t.w, 1 - kParamEps);
      EXPECT_GE(t.p, kParamEps);
      EXPECT_LE(t.p, 0.5 - kParamEps);
      EXPECT_GE(t.q, kParamEps);
      EXPECT_LE(t.q, 0.5 - kParamEps);
      for (std::size_t r = 1; r < rep.posterior(k, l).tau.size(); ++r)
        EXPECT_GE(rep.posterior(k, l).tau[r], rep.posterior(k, l).tau[r - 1]);
    }
  EXPECT_FALSE(rep.trace.empty());
  EXPECT_EQ(rep.params.labels.size(), 120u);
}

TEST(EmFit, EmptyBlockFallsBackWithWarning) {
  // K = 5 on a graph with 3 planted communities and labels fixed so that
  // one community is empty.
  PlantedConfig pc;
  pc.n = 60;
  const auto bp = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(bp, 2), bp, 8, 3);
  const Labels four(bp.labels.assignment(), 4);
  const auto rep = em_fit_labels(s, four);
  EXPECT_FALSE(rep.warnings.empty());
  const Theta mv = majority_vote_moments(s);
  EXPECT_EQ(rep.params.block_theta(3, 3), mv);
  EXPECT_EQ(rep.posterior(3, 0).tau, init_tau(8).tau);
}

TEST(EmFit, Deterministic) {
  PlantedConfig pc;
  pc.n = 90;
  const auto bp = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(bp, 3), bp, 10, 4);
  const auto a = em_fit(s, {}, 8), b = em_fit(s, {}, 8);
  EXPECT_EQ(a.A_hat, b.A_hat);
  EXPECT_EQ(a.labels.assignment(), b.labels.assignment());
}

TEST(EmFit, RejectsBadOptions) {
  const auto s = vote_matrix(std::vector<BinaryNetwork>(2, BinaryNetwork(5)));
  EmOptions opt;
  opt.K = 0;
  EXPECT_THROW(em_fit(s, opt, 1), ConfigError);
  opt.K = 2;
  opt.outer_rounds = 0;
  EXPECT_THROW(em_fit(s, opt, 1), ConfigError);
}

TEST(EmTFit, TruthAsPluginMatchesOracleTest) {
  PlantedConfig pc;
  pc.n = 90;
  const auto bp = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(bp, 3), bp, 10, 4);
  BinaryNetwork est = majority_vote(s);
  std::vector<std::string> warnings;
  apply_plugin_lrt(s, bp, 0.05, 17, LrtMode::Randomized, est, warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(est, lrt_estimate(s, bp, 0.05, 17));
}

TEST(EmTFit, InfeasibleBlockKeepsPosteriorDecision) {
  PlantedConfig pc;
  pc.n = 60;
  const auto bp = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(bp, 3), bp, 10, 4);
  auto plug = bp;
  plug.B(0, 0) = 0.97;  // 1 - w = 0.03 < target
  BinaryNetwork est = majority_vote(s);
  const BinaryNetwork before = est;
  std::vector<std::string> warnings;
  apply_plugin_lrt(s, plug, 0.05, 1, LrtMode::Randomized, est, warnings);
  ASSERT_EQ(warnings.size(), 1u);
  const auto m = bp.labels.members();
  for_each_block_pair(m, 0, 0, [&](std::size_t i, std::size_t j) { EXPECT_EQ(est.edge(i, j), before.edge(i, j)); });
}

TEST(EmTFit, TargetNearUpperBoundDeclaresAlmostAll) {
  PlantedConfig pc;
  pc.n = 90;
  pc.rho_w = 0.4;
  pc.beta_w = 1.0;
  const auto bp = planted_params(pc);
  const auto a = sample_sbm(bp, 5);
  const auto s = corrupt_sample(a, bp, 10, 6);
  EmOptions opt;
  opt.K = 1;
  const auto rep = em_fit(s, opt, 7);
  const double w = rep.params.B(0, 0);
  const auto t = em_t_fit(s, opt, 1 - w - 1e-9, 7);
  EXPECT_GT(fdr_tpr(t.A_hat, a).tpr, 0.999);
}
