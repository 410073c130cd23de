#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "netdenoise/core_model.hpp"
#include "netdenoise/io.hpp"
#include "netdenoise/rng.hpp"
#include "netdenoise/synthgen.hpp"
#include "support/oracles.hpp"

using namespace netdenoise;

TEST(ValidateNetwork, ZeroMatrixIsEmptyNetwork) {
  const auto g = validate_network({{0, 0}, {0, 0}});
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(ValidateNetwork, RejectsNonBinaryEntry) {
  try {
    validate_network({{0, 2}, {2, 0}});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("non-binary entry"), std::string::npos);
  }
}

TEST(ValidateNetwork, RejectsSelfLoopsAndRaggedRows) {
  EXPECT_THROW(validate_network({{1, 0}, {0, 0}}), DataError);
  EXPECT_THROW(validate_network({{0, 1}, {1}}), DataError);
}

TEST(ValidateNetwork, AsymmetricNeedsOrFlag) {
  EXPECT_THROW(validate_network({{0, 1}, {0, 0}}), DataError);
  const auto g = validate_network({{0, 1}, {0, 0}}, true);
  EXPECT_TRUE(g.edge(0, 1));
  EXPECT_TRUE(g.edge(1, 0));
}

TEST(BinaryNetwork, SetEdgeKeepsSymmetryAndIgnoresDiagonal) {
  BinaryNetwork g(4);
  g.set_edge(2, 1, true);
  g.set_edge(3, 3, true);
  EXPECT_TRUE(g.edge(1, 2));
  EXPECT_FALSE(g.edge(3, 3));
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.adjacency().is_symmetric());
  EXPECT_EQ(BinaryNetwork::complete(5).edge_count(), 10u);
}

TEST(VoteMatrix, IdenticalCopiesGiveNTimesA) {
  const auto a = oracle::random_graph(12, 0.3, 5);
  const auto s = vote_matrix(std::vector<BinaryNetwork>(7, a));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(s.votes(i, j), 7 * a.edge(i, j));
}

TEST(VoteMatrix, CountsEdgePresence) {
  BinaryNetwork on(2), off(2);
  on.set_edge(0, 1, true);
  const auto s = vote_matrix({on, off, on});
  EXPECT_EQ(s.votes(0, 1), 2);
  EXPECT_EQ(s.count(), 3);
}

TEST(VoteMatrix, RejectsMismatchedSizesAndEmptyInput) {
  EXPECT_THROW(vote_matrix({BinaryNetwork(2), BinaryNetwork(3)}), DataError);
  EXPECT_THROW(vote_matrix({}), DataError);
}

TEST(VoteMatrix, NoiselessChannelRepeatsTruth) {
  PlantedConfig pc;
  pc.n = 30;
  pc.rho_p = pc.rho_q = 0.0;
  pc.N = 10;
  const auto params = planted_params(pc);
  const auto a = sample_sbm(params, 3);
  const auto s = corrupt_sample(a, params, 10, 4);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) EXPECT_EQ(s.votes(i, j), 10 * a.edge(i, j));
}

namespace {
NetworkSample two_node_sample(int N, int votes) {
  BinaryNetwork on(2), off(2);
  on.set_edge(0, 1, true);
  std::vector<BinaryNetwork> obs;
  for (int m = 0; m < N; ++m) obs.push_back(m < votes ? on : off);
  return vote_matrix(obs);
}
}  // namespace

TEST(MajorityVote, TieAtHalfIsAnEdge) {
  EXPECT_TRUE(majority_vote(two_node_sample(10, 5)).edge(0, 1));
  EXPECT_FALSE(majority_vote(two_node_sample(10, 4)).edge(0, 1));
  EXPECT_FALSE(majority_vote(two_node_sample(3, 1)).edge(0, 1));
  EXPECT_TRUE(majority_vote(two_node_sample(2, 1)).edge(0, 1));
}

TEST(MajorityVote, ZeroVotesGiveEmptyNetwork) {
  const auto s = vote_matrix(std::vector<BinaryNetwork>(4, BinaryNetwork(6)));
  EXPECT_EQ(majority_vote(s).edge_count(), 0u);
}

TEST(BlockHistogram, ConstantBlock) {
  // Two communities of sizes 3 and 4: the off-diagonal block has 12 pairs.
  const auto all = vote_matrix(std::vector<BinaryNetwork>(5, BinaryNetwork::complete(7)));
  const auto labels = Labels::contiguous(std::vector<std::size_t>{3, 4});
  const auto h = block_histogram(all, labels, 0, 1);
  EXPECT_EQ(h.total, 12);
  EXPECT_EQ(h.counts[5], 12);
  for (int r = 0; r < 5; ++r) EXPECT_EQ(h.counts[std::size_t(r)], 0);
  EXPECT_EQ(block_histogram(all, labels, 1, 1).total, 6);  // 4 * 3 / 2
  EXPECT_EQ(block_histogram(all, labels, 1, 0).total, 12);
}

TEST(BlockHistogram, MatchesPairScan) {
  PlantedConfig pc;
  pc.n = 60;
  pc.N = 6;
  const auto params = planted_params(pc);
  const auto s = corrupt_sample(sample_sbm(params, 1), params, pc.N, 2);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      std::vector<std::int64_t> ref(7, 0);
      for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t j = 0; j < 60; ++j) {
          if (i == j) continue;
          const bool in = (params.labels[i] == k && params.labels[j] == l);
          // unordered pairs: for k == l count i < j only; for k != l every (i in k, j in l)
          if (in && (k != l || i < j)) ++ref[std::size_t(s.votes(i, j))];
        }
      const auto h = block_histogram(s, params.labels, k, l);
      EXPECT_EQ(h.counts, ref) << "block " << k << "," << l;
    }
}

TEST(Labels, ValidatesRange) {
  EXPECT_THROW(Labels({0, 3}, 3), DataError);
  EXPECT_THROW(Labels({0}, 0), ConfigError);
  const Labels l({2, 0, 2, 1}, 3);
  EXPECT_EQ(l.community_sizes(), (std::vector<std::size_t>{1, 1, 2}));
  EXPECT_EQ(l.members()[2], (std::vector<std::size_t>{0, 2}));
}

TEST(Rng, DeterministicAndSeedSensitive) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_EQ(derive_seed(9, {4}), derive_seed(9, {4}));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(7);
  double su = 0, sn = 0, sn2 = 0;
  const int M = 200000;
  for (int i = 0; i < M; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / M, 0.5, 4 * std::sqrt(1.0 / 12 / M));
  EXPECT_NEAR(sn / M, 0.0, 4 / std::sqrt(double(M)));
  EXPECT_NEAR(sn2 / M, 1.0, 4 * std::sqrt(2.0 / M));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

class IoTest : public ::testing::Test {
 protected:
  std::filesystem::path dir;
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("netdenoise_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(IoTest, BundleRoundTripBothFormats) {
  std::vector<BinaryNetwork> nets;
  for (int m = 0; m < 3; ++m) nets.push_back(oracle::random_graph(15, 0.2, 100 + m));
  for (auto f : {io::AdjacencyFormat::DenseCsv, io::AdjacencyFormat::EdgeTsv}) {
    const auto d = dir / std::string(io::format_name(f));
    io::write_bundle(d, nets, f);
    EXPECT_EQ(io::read_bundle_networks(d), nets);
    EXPECT_EQ(io::read_adjacency(d / (f == io::AdjacencyFormat::DenseCsv ? "obs_0002.csv" : "obs_0002.tsv")),
              nets[1]);
  }
}

TEST_F(IoTest, LabelsAndParamsRoundTrip) {
  PlantedConfig pc;
  pc.n = 20;
  pc.sizes = {5, 7, 8};
  const auto params = planted_params(pc);
  io::write_text(dir / "labels.csv", io::labels_text(params.labels));
  EXPECT_EQ(io::read_labels(dir / "labels.csv").assignment(), params.labels.assignment());
  const auto back = io::block_params_from_json(io::block_params_json(params));
  EXPECT_EQ(back.B, params.B);
  EXPECT_EQ(back.Q, params.Q);
  EXPECT_EQ(back.labels.assignment(), params.labels.assignment());
}

TEST_F(IoTest, MalformedInputsAreDataErrors) {
  io::write_text(dir / "bad.tsv", "n=3\n1\t4\n");
  EXPECT_THROW(io::read_adjacency(dir / "bad.tsv"), DataError);
  io::write_text(dir / "bad.csv", "0,1\n1,x\n");
  EXPECT_THROW(io::read_adjacency(dir / "bad.csv"), DataError);
  io::write_text(dir / "labels.csv", "1\n0\n");
  EXPECT_THROW(io::read_labels(dir / "labels.csv"), DataError);
  EXPECT_THROW(io::read_bundle(dir / "missing"), DataError);
}

TEST(Io, FormatDoubleRoundTripsAndMarksNaN) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(std::nan("")), "NA");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(io::format_double(x)), x);
}
