#include "recourse/autoencoder.hpp"

#include <random>

#include <Eigen/Eigenvalues>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"

namespace recourse {

Autoencoder::Autoencoder(LayerStack encoder, LayerStack decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (decoder_.input_dim() != encoder_.output_dim()) {
    throw DimensionError("decoder input width must equal the latent dimension");
  }
  if (decoder_.output_dim() != encoder_.input_dim()) {
    throw DimensionError("decoder output width must equal the input dimension");
  }
}

Eigen::VectorXd Autoencoder::encode(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) throw DimensionError("autoencoder input has the wrong dimension");
  return encoder_.forward(x).col(0);
}

Eigen::VectorXd Autoencoder::decode(const Eigen::VectorXd& z) const {
  if (z.size() != latent_dim()) throw DimensionError("latent code has the wrong dimension");
  return decoder_.forward(z).col(0);
}

Eigen::MatrixXd Autoencoder::encode_rows(const Eigen::MatrixXd& X) const {
  return encoder_.forward(X.transpose()).transpose();
}

Eigen::MatrixXd Autoencoder::decode_rows(const Eigen::MatrixXd& Z) const {
  return decoder_.forward(Z.transpose()).transpose();
}

Eigen::VectorXd Autoencoder::decoder_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& upstream) const {
  return decoder_.backward(z, upstream);
}

double Autoencoder::reconstruction_mse(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd R = decode_rows(encode_rows(X));
  return (R - X).squaredNorm() / static_cast<double>(X.size());
}

nlohmann::json Autoencoder::to_json() const {
  auto stack_json = [](const LayerStack& s) {
    auto layers = nlohmann::json::array();
    for (const auto& l : s.layers()) {
      layers.push_back({{"W", matrix_to_json(l.W)}, {"b", vector_to_json(l.b)}, {"activation", to_string(l.activation)}});
    }
    return layers;
  };
  return {{"kind", "autoencoder"},
          {"version", 1},
          {"dims", {{"input", input_dim()}, {"latent", latent_dim()}}},
          {"encoder", stack_json(encoder_)},
          {"decoder", stack_json(decoder_)}};
}

Autoencoder train_autoencoder(const Dataset& d, Eigen::Index latent_dim, const AutoencoderConfig& cfg,
                              TrainReport* report) {
  if (latent_dim < 1 || latent_dim > d.dims()) {
    throw ConfigError("latent dimension must lie in 1.." + std::to_string(d.dims()));
  }
  std::mt19937_64 rng(cfg.train.seed);
  std::vector<DenseLayer> layers;
  Eigen::Index in = d.dims();
  for (int h : cfg.hidden) {
    layers.push_back(init_layer(in, h, Activation::Relu, rng));
    in = h;
  }
  layers.push_back(init_layer(in, latent_dim, Activation::Identity, rng));
  in = latent_dim;
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) {
    layers.push_back(init_layer(in, *it, Activation::Relu, rng));
    in = *it;
  }
  layers.push_back(init_layer(in, d.dims(), Activation::Identity, rng));

  LayerStack chain(std::move(layers));
  StackFit fit;
  fit.classification = false;
  fit.targets = d.X();
  auto losses = fit_stack(chain, d.X(), fit, cfg.train);

  const auto split = cfg.hidden.size() + 1;
  auto& all = chain.mutable_layers();
  // The latent scale is not identified by the reconstruction loss. Fix it so the training codes have
  // zero mean and unit variance; the composed map is unchanged.
  {
    const Eigen::MatrixXd Z =
        LayerStack(std::vector<DenseLayer>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(split)))
            .forward(d.X().transpose());
    const Eigen::VectorXd mu = Z.rowwise().mean();
    Eigen::VectorXd sd = ((Z.colwise() - mu).array().square().rowwise().mean()).sqrt();
    for (Eigen::Index k = 0; k < sd.size(); ++k) {
      if (!(sd(k) > 1e-12)) sd(k) = 1.0;
    }
    auto& enc = all[split - 1];
    enc.W = sd.cwiseInverse().asDiagonal() * enc.W;
    enc.b = (enc.b - mu).cwiseQuotient(sd);
    auto& dec = all[split];
    dec.b += dec.W * mu;
    dec.W = dec.W * sd.asDiagonal();
  }
  LayerStack encoder(std::vector<DenseLayer>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(split)));
  LayerStack decoder(std::vector<DenseLayer>(all.begin() + static_cast<std::ptrdiff_t>(split), all.end()));
  Autoencoder ae(std::move(encoder), std::move(decoder));
  if (report) {
    report->epoch_loss = std::move(losses);
    report->accuracy = 0.0;
  }
  return ae;
}

double pca_reconstruction_mse(const Eigen::MatrixXd& X, Eigen::Index k) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd C = X.rowwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C.transpose() * C);
  // Eigenvalues ascend; the residual is the mass in the smallest D - k directions.
  const Eigen::Index drop = X.cols() - k;
  double residual = 0.0;
  for (Eigen::Index i = 0; i < drop; ++i) residual += std::max(0.0, eig.eigenvalues()(i));
  return residual / static_cast<double>(X.size());
}

}  // namespace recourse
