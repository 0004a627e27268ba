#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <set>

#include "recourse/dataset.hpp"
#include "recourse/errors.hpp"
#include "recourse/models.hpp"
#include "test_util.hpp"

namespace recourse {
namespace {

TEST(Synthetic, LinearlySeparableShape) {
  const auto d = load_synthetic(SyntheticKind::LinearlySeparable, 100, 1);
  EXPECT_EQ(d.rows(), 100);
  EXPECT_EQ(d.dims(), 2);
  EXPECT_EQ(std::set<int>(d.y().begin(), d.y().end()), (std::set<int>{1, 2}));
}

TEST(Synthetic, MultiClassHasFourLabels) {
  const auto d = load_synthetic("multi_class", 40, 7);
  EXPECT_EQ(std::set<int>(d.y().begin(), d.y().end()).size(), 4u);
}

TEST(Synthetic, MeansSeparatedByFourPooledStd) {
  const auto d = load_synthetic(SyntheticKind::LinearlySeparable, 2000, 3);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(2), m2 = Eigen::VectorXd::Zero(2);
  const auto r1 = d.rows_with_label(1), r2 = d.rows_with_label(2);
  for (auto r : r1) m1 += d.X().row(r).transpose();
  for (auto r : r2) m2 += d.X().row(r).transpose();
  m1 /= static_cast<double>(r1.size());
  m2 /= static_cast<double>(r2.size());
  // pooled within-class variance along the mean difference
  const Eigen::VectorXd u = (m2 - m1).normalized();
  double ss = 0.0;
  for (auto r : r1) ss += std::pow(u.dot(d.X().row(r).transpose() - m1), 2);
  for (auto r : r2) ss += std::pow(u.dot(d.X().row(r).transpose() - m2), 2);
  const double pooled = std::sqrt(ss / static_cast<double>(d.rows() - 2));
  EXPECT_GE((m2 - m1).norm() / pooled, 4.0);
}

TEST(Synthetic, LinearClassifierReachesHighAccuracy) {
  const auto d = testing::blobs();
  TrainConfig cfg;
  cfg.seed = 1;
  EXPECT_GE(accuracy(train_linear(d, cfg), d), 0.95);
}

TEST(Synthetic, DeterministicForSeed) {
  for (auto kind : {SyntheticKind::LinearlySeparable, SyntheticKind::Overlapping, SyntheticKind::MultiClass,
                    SyntheticKind::Circles}) {
    const auto a = load_synthetic(kind, 64, 11);
    const auto b = load_synthetic(kind, 64, 11);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << to_string(kind);
  }
}

TEST(Synthetic, Errors) {
  EXPECT_THROW(load_synthetic("spirals", 100, 1), ConfigError);
  EXPECT_THROW(load_synthetic(SyntheticKind::Circles, 3, 1), ConfigError);
}

TEST(Csv, DropsIncompleteRows) {
  const std::string text = "a,b,y\n1,2,0\n3,,1\n5,6,1\n";
  CsvReport report;
  const auto d = parse_csv(text, "y", true, &report);
  EXPECT_EQ(d.rows(), 2);
  EXPECT_EQ(report.rows_read, 3u);
  EXPECT_EQ(report.rows_dropped, 1u);
}

TEST(Csv, KeepingIncompleteRowsFails) { EXPECT_THROW(parse_csv("a,y\nNA,1\n2,0\n", "y", false), IngestionError); }

TEST(Csv, RemapsLabels) {
  const auto d = parse_csv("a,y\n1,0\n2,1\n3,0\n", "y", true);
  EXPECT_EQ(d.y(), (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(d.original_label(1), 0.0);
  EXPECT_EQ(d.original_label(2), 1.0);
  EXPECT_EQ(d.internal_label(1.0), 2);
}

TEST(Csv, MissingTargetIsSchemaError) { EXPECT_THROW(parse_csv("a,b\n1,2\n", "y", true), SchemaError); }

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  try {
    parse_csv("a,b,y\n1,2,0\n3,x,1\n", "y", true, nullptr, "t.csv");
    FAIL() << "expected an ingestion error";
  } catch (const IngestionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
  }
}

TEST(Csv, CreditStandinHasTenFeatures) {
  const auto d = parse_csv(credit_standin_csv(300, 5), std::string(kCreditTargetColumn), true);
  EXPECT_EQ(d.dims(), 10);
  EXPECT_EQ(d.n_classes(), 2);
  EXPECT_NE(std::find(d.feature_names().begin(), d.feature_names().end(), "age"), d.feature_names().end());
}

TEST(Csv, BundledStandinLoads) {
  const auto d = load_csv(std::string(RECOURSE_SOURCE_DIR) + "/data/gmsc_standin.csv", std::string(kCreditTargetColumn), true);
  EXPECT_EQ(d.dims(), 10);
  EXPECT_GT(d.rows(), 900);
}

TEST(Csv, MissingFile) { EXPECT_THROW(load_csv("/nonexistent/file.csv", "y", true), Error); }

TEST(Standardize, TwoPointColumn) {
  Eigen::MatrixXd X(2, 1);
  X << 0, 2;
  const auto s = standardize(Dataset(X, {1, 2}));
  EXPECT_DOUBLE_EQ(s.X()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.X()(1, 0), 1.0);
}

TEST(Standardize, MomentsAndRoundTrip) {
  const auto raw = load_synthetic(SyntheticKind::Overlapping, 500, 2);
  const auto s = standardize(raw);
  const Eigen::RowVectorXd mean = s.X().colwise().mean();
  const Eigen::RowVectorXd sd = ((s.X().rowwise() - mean).array().square().colwise().sum() / 500.0).sqrt();
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_NEAR(mean(j), 0.0, 1e-9);
    EXPECT_NEAR(sd(j), 1.0, 1e-9);
  }
  EXPECT_LE((destandardize(s).X() - raw.X()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((standardize(s).X() - s.X()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((destandardize(standardize(s)).X() - raw.X()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Standardize, ZeroVarianceListsColumns) {
  Eigen::MatrixXd X(3, 3);
  X << 1, 5, 2, 2, 5, 2, 3, 5, 2;
  try {
    standardize(Dataset(X, {1, 2, 1}, {"a", "flat", "also_flat"}));
    FAIL();
  } catch (const DegenerateFeatureError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("flat"), std::string::npos);
    EXPECT_NE(msg.find("also_flat"), std::string::npos);
  }
}

TEST(Mad, HandComputed) {
  Eigen::MatrixXd X(5, 2);
  X << 1, 0, 2, 0, 3, 0, 4, 0, 5, 7;
  const auto mad = mad_statistics(Dataset(X, {1, 1, 2, 2, 2}));
  EXPECT_DOUBLE_EQ(mad(0), 1.0);
  EXPECT_DOUBLE_EQ(mad(1), kMadFloor);
}

TEST(Mad, ZeroMadIsFloored) {
  Eigen::MatrixXd X(4, 1);
  X << 0, 0, 0, 10;
  EXPECT_DOUBLE_EQ(mad_statistics(Dataset(X, {1, 1, 2, 2}))(0), kMadFloor);
}

TEST(Mad, PermutationInvariant) {
  const auto d = load_synthetic(SyntheticKind::Circles, 101, 4);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd P(d.rows(), d.dims());
  std::vector<int> y;
  for (std::size_t i = 0; i < order.size(); ++i) {
    P.row(static_cast<Eigen::Index>(i)) = d.X().row(order[i]);
    y.push_back(d.y()[static_cast<std::size_t>(order[i])]);
  }
  EXPECT_EQ(mad_statistics(d), mad_statistics(Dataset(P, y)));
}

TEST(Mutability, DefaultsAndStorage) {
  const auto d = load_synthetic(SyntheticKind::LinearlySeparable, 10, 1);
  EXPECT_EQ(d.mutability(), (std::vector<Mutability>{Mutability::Both, Mutability::Both}));
  const auto m = set_mutability(d, {Mutability::None, Mutability::Both});
  EXPECT_EQ(m.mutability(), (std::vector<Mutability>{Mutability::None, Mutability::Both}));
  EXPECT_THROW(set_mutability(d, {Mutability::None, Mutability::Both, Mutability::Both}), ConfigError);
}

TEST(Mutability, ParseTags) {
  EXPECT_EQ(parse_mutability(":increase"), Mutability::Increase);
  EXPECT_EQ(parse_mutability("NONE"), Mutability::None);
  EXPECT_THROW(parse_mutability("sideways"), ConfigError);
}

TEST(SelectFactual, CopySemantics) {
  Eigen::MatrixXd X(2, 2);
  X << 1, 2, 3, 4;
  const Dataset d(X, {1, 2});
  Eigen::VectorXd x = select_factual(d, 1);
  EXPECT_EQ(x, Eigen::Vector2d(1, 2));
  x(0) = 99;
  EXPECT_EQ(d.X()(0, 0), 1.0);
  EXPECT_THROW(select_factual(d, 0), IndexError);
  EXPECT_THROW(select_factual(d, 3), IndexError);
}

TEST(Json, RoundTrip) {
  auto d = standardize(load_synthetic(SyntheticKind::MultiClass, 40, 2));
  d = set_mutability(d, {Mutability::Increase, Mutability::None});
  d = d.with_mad(mad_statistics(d));
  const auto back = dataset_from_json(to_json(d));
  EXPECT_EQ(to_json(back).dump(), to_json(d).dump());
  EXPECT_EQ(back.mutability(), d.mutability());
}

}  // namespace
}  // namespace recourse
