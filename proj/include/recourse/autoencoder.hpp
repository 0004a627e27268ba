#ifndef RECOURSE_AUTOENCODER_HPP
#define RECOURSE_AUTOENCODER_HPP

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "recourse/dataset.hpp"
#include "recourse/models.hpp"

namespace recourse {

/// Deterministic autoencoder providing the generative map used by latent-space search.
class Autoencoder {
public:
  Autoencoder(LayerStack encoder, LayerStack decoder);

  Eigen::Index input_dim() const { return encoder_.input_dim(); }
  Eigen::Index latent_dim() const { return encoder_.output_dim(); }
  const LayerStack& encoder() const { return encoder_; }
  const LayerStack& decoder() const { return decoder_; }

  Eigen::VectorXd encode(const Eigen::VectorXd& x) const;
  Eigen::VectorXd decode(const Eigen::VectorXd& z) const;
  /// Rows are samples.
  Eigen::MatrixXd encode_rows(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd decode_rows(const Eigen::MatrixXd& Z) const;
  /// J_decoder(z)^T * upstream.
  Eigen::VectorXd decoder_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& upstream) const;

  /// Mean squared reconstruction error per element over the rows of X.
  double reconstruction_mse(const Eigen::MatrixXd& X) const;

  nlohmann::json to_json() const;

private:
  LayerStack encoder_;
  LayerStack decoder_;
};

using AutoencoderPtr = std::shared_ptr<const Autoencoder>;

struct AutoencoderConfig {
  /// Hidden widths of the encoder; the decoder mirrors them. Empty gives a linear autoencoder.
  std::vector<int> hidden = {32};
  TrainConfig train{.epochs = 300, .learning_rate = 0.005, .batch_size = 32, .seed = 0, .adam = true};
};

/// Training codes are rescaled to zero mean and unit variance per latent dimension.
Autoencoder train_autoencoder(const Dataset& d, Eigen::Index latent_dim, const AutoencoderConfig& cfg = {},
                              TrainReport* report = nullptr);

/// Mean squared error of the best rank-k linear (PCA) reconstruction of the rows of X.
double pca_reconstruction_mse(const Eigen::MatrixXd& X, Eigen::Index k);

}  // namespace recourse

#endif  // RECOURSE_AUTOENCODER_HPP
