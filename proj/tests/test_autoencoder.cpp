#include <gtest/gtest.h>

#include "recourse/autoencoder.hpp"
#include "recourse/errors.hpp"
#include "test_util.hpp"

namespace recourse {
namespace {

// Blob data stretched along the first axis.
Eigen::MatrixXd stretched(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> a(0.0, 3.0), b(0.0, 0.5);
  Eigen::MatrixXd X(n, 2);
  for (int i = 0; i < n; ++i) X.row(i) << a(rng), b(rng);
  return X;
}

TEST(Autoencoder, FullWidthLinearReconstructs) {
  const auto d = testing::blobs(500, 2);
  AutoencoderConfig cfg;
  cfg.hidden = {};
  const auto ae = train_autoencoder(d, 2, cfg);
  EXPECT_LE(ae.reconstruction_mse(d.X()), 1e-2);
}

TEST(Autoencoder, Shapes) {
  const auto d = standardize(load_synthetic(SyntheticKind::MultiClass, 200, 1));
  AutoencoderConfig cfg;
  cfg.train.epochs = 5;
  const auto ae = train_autoencoder(d, 1, cfg);
  EXPECT_EQ(ae.latent_dim(), 1);
  const Eigen::VectorXd x = d.X().row(0).transpose();
  EXPECT_EQ(ae.encode(x).size(), 1);
  EXPECT_EQ(ae.decode(ae.encode(x)).size(), d.dims());
  EXPECT_EQ(ae.encode_rows(d.X()).rows(), d.rows());
}

TEST(Autoencoder, OneLatentFollowsMainAxis) {
  const Eigen::MatrixXd X = stretched(600, 4);
  std::vector<int> y(600, 1);
  for (int i = 0; i < 300; ++i) y[static_cast<std::size_t>(i)] = 2;
  const Dataset d(X, y);
  for (const std::vector<int> hidden : {std::vector<int>{}, std::vector<int>{32}}) {
    AutoencoderConfig cfg;
    cfg.hidden = hidden;
    const auto ae = train_autoencoder(d, 1, cfg);
    const Eigen::MatrixXd R = ae.decode_rows(ae.encode_rows(X));
    const Eigen::MatrixXd C = R.rowwise() - R.colwise().mean();
    const Eigen::VectorXd var = C.array().square().colwise().sum();
    EXPECT_GE(var(0) / var.sum(), 0.8) << hidden.size();
    // PCA oracle: the first component carries nearly all of the variance here
    EXPECT_LE(ae.reconstruction_mse(X), 1.5 * pca_reconstruction_mse(X, 1)) << hidden.size();
  }
}

TEST(Autoencoder, SanityBoundAgainstPca) {
  const auto d = testing::blobs(1000, 3);
  const auto ae = train_autoencoder(d, 1);
  EXPECT_LE(ae.reconstruction_mse(d.X()), 1.5 * pca_reconstruction_mse(d.X(), 1));
}

TEST(Autoencoder, PcaOracleByHand) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, -1, 0, 0, 0.5, 0, -0.5;
  EXPECT_NEAR(pca_reconstruction_mse(X, 1), (0.25 * 2) / 8.0, 1e-12);
  EXPECT_NEAR(pca_reconstruction_mse(X, 2), 0.0, 1e-12);
}

TEST(Autoencoder, Deterministic) {
  const auto d = testing::blobs(300, 5);
  AutoencoderConfig cfg;
  cfg.train.epochs = 20;
  const auto a = train_autoencoder(d, 1, cfg);
  const auto b = train_autoencoder(d, 1, cfg);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Autoencoder, LatentCodesAreStandardised) {
  const auto d = standardize(load_synthetic(SyntheticKind::MultiClass, 400, 6));
  for (const std::vector<int> hidden : {std::vector<int>{}, std::vector<int>{16}}) {
    AutoencoderConfig cfg;
    cfg.hidden = hidden;
    cfg.train.epochs = 30;
    const auto ae = train_autoencoder(d, 1, cfg);
    const Eigen::VectorXd z = ae.encode_rows(d.X()).col(0);
    const double mean = z.sum() / static_cast<double>(z.size());
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR((z.array() - mean).square().sum() / static_cast<double>(z.size()), 1.0, 1e-9);
  }
}

TEST(Autoencoder, LatentWidthBounds) {
  const auto d = testing::blobs(100, 1);
  EXPECT_THROW(train_autoencoder(d, 0), ConfigError);
  EXPECT_THROW(train_autoencoder(d, 3), ConfigError);
}

TEST(Autoencoder, DecoderVjpMatchesFiniteDifferences) {
  const auto d = standardize(load_synthetic(SyntheticKind::MultiClass, 300, 2));
  AutoencoderConfig cfg;
  cfg.train.epochs = 10;
  const auto ae = train_autoencoder(d, 1, cfg);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd z = testing::random_point(1, rng);
    const Eigen::VectorXd u = testing::random_point(2, rng);
    auto f = [&](const Eigen::VectorXd& v) { return u.dot(ae.decode(v)); };
    EXPECT_LE(testing::relative_error(ae.decoder_vjp(z, u), testing::numeric_gradient(f, z)), 1e-4);
  }
}

}  // namespace
}  // namespace recourse
