#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "mtax/analysis.hpp"
#include "mtax/lexicon.hpp"
#include "mtax/text.hpp"
#include "oracles.hpp"

using namespace mtax;
using namespace mtax::analysis;
using gmm::GaussianMixtured;

namespace {

GaussianMixtured gauss1(double mu, double var = 1.0) {
  return GaussianMixtured::single(Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var));
}

DivergenceMatrix make_matrix(std::vector<std::string> labels, const Eigen::MatrixXd &v) {
  DivergenceMatrix m;
  m.labels = std::move(labels);
  m.values = v;
  return m;
}

DivergenceMatrix golden_matrix() {
  Eigen::MatrixXd v(3, 3);
  v << 0, 0.5, 2.25, 0.5, 0, 1.123456789123, 2.25, 1.123456789123, 0;
  return make_matrix({"cut", "pick, place", "stir"}, v);
}

std::string golden(const std::string &name) {
  return text::read_file(std::string(MTAX_SOURCE_DIR) + "/tests/golden/" + name);
}

} // namespace

TEST(DivergenceMatrix, TwoSingleGaussians) {
  const std::map<std::string, std::vector<GaussianMixtured>> models{{"a", {gauss1(0)}}, {"b", {gauss1(1)}}};
  const auto m = divergence_matrix(models);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.values(0, 0), 0.0);
  EXPECT_EQ(m.values(1, 1), 0.0);
  EXPECT_NEAR(m.values(0, 1), 0.5, 1e-14);
  EXPECT_EQ(m.values(0, 1), m.values(1, 0));
  EXPECT_EQ(m.metadata.total_evaluations, 2u);
}

TEST(DivergenceMatrix, VariantAveraging) {
  // label a has two variants; cell is the mean over variant pairs
  const std::map<std::string, std::vector<GaussianMixtured>> models{{"a", {gauss1(0), gauss1(2)}},
                                                                    {"b", {gauss1(1)}}};
  const auto m = divergence_matrix(models);
  EXPECT_NEAR(m.values(0, 1), 0.5 * (0.5 + 0.5), 1e-14);
  const std::map<std::string, std::vector<GaussianMixtured>> far{{"a", {gauss1(0), gauss1(3)}}, {"b", {gauss1(1)}}};
  EXPECT_NEAR(divergence_matrix(far).values(0, 1), 0.5 * (0.5 + 2.0), 1e-14);
}

TEST(DivergenceMatrix, Errors) {
  EXPECT_THROW(divergence_matrix(std::map<std::string, std::vector<GaussianMixtured>>{{"a", {gauss1(0)}}}),
               InvalidArgument);
  const auto two = GaussianMixtured::single(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(divergence_matrix(std::map<std::string, std::vector<GaussianMixtured>>{{"a", {gauss1(0)}}, {"b", {two}}}),
               InvalidArgument);
  EXPECT_THROW(divergence_matrix(std::map<std::string, std::vector<GaussianMixtured>>{{"a", {gauss1(0)}}, {"b", {}}}),
               InvalidArgument);
}

TEST(DivergenceMatrix, PermutationAndThreadInvariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::vector<LabeledModels> models;
  for (int i = 0; i < 7; ++i) {
    std::vector<GaussianMixtured> vs;
    for (int v = 0; v < 1 + i % 2; ++v) {
      Eigen::Matrix2d a;
      a << nd(rng), nd(rng), nd(rng), nd(rng);
      const Eigen::MatrixXd s = a * a.transpose() + Eigen::Matrix2d::Identity();
      vs.push_back(GaussianMixtured({{0.4, Eigen::Vector2d(nd(rng), nd(rng)), s},
                                     {0.6, Eigen::Vector2d(nd(rng), nd(rng)), Eigen::MatrixXd::Identity(2, 2)}}));
    }
    models.push_back({"m" + std::to_string(i), vs});
  }
  const auto base = divergence_matrix(models, 1);
  check_matrix(base);
  for (unsigned threads : {2u, 3u, 8u}) EXPECT_EQ(divergence_matrix(models, threads).values, base.values);

  std::vector<std::size_t> perm(models.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<LabeledModels> shuffled;
  for (auto p : perm) shuffled.push_back(models[p]);
  const auto sm = divergence_matrix(shuffled, 4);
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = 0; j < perm.size(); ++j)
      EXPECT_EQ(sm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                base.values(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])));
}

TEST(CheckMatrix, RejectsBrokenMatrices) {
  Eigen::MatrixXd v(2, 2);
  v << 0, 1, 2, 0;
  EXPECT_THROW(check_matrix(make_matrix({"a", "b"}, v)), InvalidArgument);
  v << 0.1, 1, 1, 0;
  EXPECT_THROW(check_matrix(make_matrix({"a", "b"}, v)), InvalidArgument);
  v << 0, -1, -1, 0;
  EXPECT_THROW(check_matrix(make_matrix({"a", "b"}, v)), InvalidArgument);
  v << 0, 1, 1, 0;
  EXPECT_THROW(check_matrix(make_matrix({"a"}, v)), InvalidArgument);
  EXPECT_NO_THROW(check_matrix(make_matrix({"a", "b"}, v)));
}

TEST(ClusterConsistency, HandComputed) {
  const auto lex = paper_table_lexicon();
  Eigen::MatrixXd v(3, 3);
  v << 0, 0.1, 5, 0.1, 0, 6, 5, 6, 0;
  const auto m = make_matrix({"cut", "slice", "stir"}, v);
  const std::map<std::string, MotionCode> codes{
      {"cut", lookup("cut", lex)}, {"slice", lookup("slice", lex)}, {"stir", lookup("stir", lex)}};
  const auto r = cluster_consistency(m, codes);
  EXPECT_DOUBLE_EQ(*r.intra_mean, 0.1);
  EXPECT_DOUBLE_EQ(*r.inter_mean, 5.5);
  EXPECT_DOUBLE_EQ(*r.ratio, 0.1 / 5.5);
  EXPECT_EQ(r.nearest, (std::vector<std::string>{"slice", "cut", "cut"}));
  EXPECT_DOUBLE_EQ(r.nn_agreement, 2.0 / 3.0);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_TRUE(r.pairs[0].same_code);
  EXPECT_EQ(r.pairs[0].code_distance, 0.0);
  // code distances cut/stir = stir/slice = hamming(11111010, 11001010) = 2
  EXPECT_EQ(r.pairs[1].code_distance, 2.0);
  ASSERT_TRUE(r.rank_correlation.has_value());
  std::vector<double> dv, cd;
  for (const auto &p : r.pairs) {
    dv.push_back(p.divergence);
    cd.push_back(p.code_distance);
  }
  EXPECT_NEAR(*r.rank_correlation, oracle::spearman(dv, cd), 1e-12);
}

TEST(ClusterConsistency, UndefinedRatioAndMissingCodes) {
  const auto lex = paper_table_lexicon();
  Eigen::MatrixXd v(2, 2);
  v << 0, 1, 1, 0;
  const auto m = make_matrix({"cut", "stir"}, v);
  const auto r = cluster_consistency(m, {{"cut", lookup("cut", lex)}, {"stir", lookup("stir", lex)}});
  EXPECT_FALSE(r.intra_mean.has_value());
  EXPECT_FALSE(r.ratio.has_value());
  EXPECT_TRUE(r.inter_mean.has_value());
  EXPECT_THROW(cluster_consistency(m, {{"cut", lookup("cut", lex)}}), InvalidArgument);
}

TEST(ClusterConsistency, NearestNeighbourTiesAreLexicographic) {
  const auto lex = paper_table_lexicon();
  Eigen::MatrixXd v(3, 3);
  v << 0, 1, 1, 1, 0, 2, 1, 2, 0;
  const auto m = make_matrix({"stir", "cut", "insert"}, v);
  const auto r = cluster_consistency(
      m, {{"stir", lookup("stir", lex)}, {"cut", lookup("cut", lex)}, {"insert", lookup("insert", lex)}});
  EXPECT_EQ(r.nearest[0], "cut");
  EXPECT_DOUBLE_EQ(r.nn_agreement, 1.0 / 3.0);  // stir->cut no, cut->stir no, insert->stir yes
}

TEST(ClusterConsistency, PermutationInvariant) {
  const auto lex = paper_table_lexicon();
  const std::vector<std::string> labels{"cut", "slice", "stir", "insert", "pour", "shake", "fold"};
  std::map<std::string, MotionCode> codes;
  for (const auto &l : labels) codes[l] = lookup(l, lex);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v(i, j) = v(j, i) = u(rng);
  const auto base = cluster_consistency(make_matrix(labels, v), codes);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> pl;
    Eigen::MatrixXd pv(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      pl.push_back(labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      for (Eigen::Index j = 0; j < n; ++j)
        pv(i, j) = v(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    const auto r = cluster_consistency(make_matrix(pl, pv), codes);
    EXPECT_EQ(r.intra_mean, base.intra_mean);
    EXPECT_EQ(r.inter_mean, base.inter_mean);
    EXPECT_EQ(r.nn_agreement, base.nn_agreement);
    EXPECT_EQ(r.rank_correlation, base.rank_correlation);
  }
}

TEST(RankCorrelation, Examples) {
  const std::vector<double> a{1, 2, 3}, b{2, 1, 3}, c{4, 5, 6}, k{1, 1, 1};
  EXPECT_NEAR(*rank_correlation(a, b), 0.5, 1e-14);
  EXPECT_NEAR(*rank_correlation(a, c), 1.0, 1e-14);
  EXPECT_FALSE(rank_correlation(a, k).has_value());
  EXPECT_THROW(rank_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
  EXPECT_THROW(rank_correlation(a, std::vector<double>{1, 2, 3, 4}), InvalidArgument);
}

TEST(RankCorrelation, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> u(0, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(4 + t % 9), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = u(rng);
      y[i] = u(rng) + 0.5 * x[i];
    }
    const auto r = rank_correlation(x, y);
    if (!r) continue;
    EXPECT_NEAR(*r, oracle::spearman(x, y), 1e-12);
  }
}

TEST(MatrixCsv, GoldenBytes) {
  const auto m = golden_matrix();
  EXPECT_EQ(matrix_to_csv(m), golden("matrix3.csv"));
  const auto back = parse_matrix_csv(matrix_to_csv(m));
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_LE((back.values - m.values).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(matrix_to_csv(back), matrix_to_csv(m));
  EXPECT_THROW(parse_matrix_csv("label,a,b\na,0,1\nc,1,0\n"), Error);
  EXPECT_THROW(parse_matrix_csv("label,a,b\na,0,1\nb,2,0\n"), Error);
}

TEST(MatrixCsv, RoundTripThroughFile) {
  const auto path = std::string(::testing::TempDir()) + "mtax_matrix.csv";
  export_matrix_csv(golden_matrix(), path);
  EXPECT_EQ(text::read_file(path), golden("matrix3.csv"));
  EXPECT_EQ(import_matrix_csv(path).labels, golden_matrix().labels);
}

TEST(Heatmap, GoldenBytes) {
  const auto pgm = matrix_to_pgm(golden_matrix());
  EXPECT_EQ(pgm, golden("matrix3.pgm"));
  EXPECT_EQ(pgm.substr(0, 3), "P5\n");
  // minimum is light, maximum is dark
  const auto pixels = pgm.substr(pgm.size() - 9);
  EXPECT_EQ(static_cast<unsigned char>(pixels[0]), 255);
  EXPECT_EQ(static_cast<unsigned char>(pixels[2]), 0);
  EXPECT_EQ(pixels[1], pixels[3]);
}

TEST(Heatmap, UniformMatrix) {
  const auto pgm = matrix_to_pgm(make_matrix({"a", "b"}, Eigen::MatrixXd::Zero(2, 2)));
  EXPECT_EQ(pgm.substr(pgm.size() - 4), std::string(4, static_cast<char>(255)));
}

TEST(ConsistencyJson, HasFields) {
  const auto lex = paper_table_lexicon();
  Eigen::MatrixXd v(3, 3);
  v << 0, 0.1, 5, 0.1, 0, 6, 5, 6, 0;
  const auto r = cluster_consistency(make_matrix({"cut", "slice", "stir"}, v),
                                     {{"cut", lookup("cut", lex)}, {"slice", lookup("slice", lex)},
                                      {"stir", lookup("stir", lex)}});
  const auto json = consistency_to_json(r);
  for (const char *key : {"intra_mean", "inter_mean", "ratio", "nn_agreement", "rank_correlation", "pairs"})
    EXPECT_NE(json.find(key), std::string::npos) << key;
}
