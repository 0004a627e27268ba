#ifndef RECOURSE_MODELS_HPP
#define RECOURSE_MODELS_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "recourse/dataset.hpp"
#include "recourse/losses.hpp"

namespace recourse {

/// Classifier contract used by every generator.
///
/// Inputs are D x n (one column per sample). Binary models expose a single logit row and report
/// probabilities for both classes; multiclass models expose one logit per class.
class Model {
public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual int n_classes() const = 0;
  virtual Likelihood likelihood() const = 0;
  virtual bool differentiable() const = 0;

  virtual Eigen::MatrixXd logits(const Eigen::MatrixXd& X) const = 0;
  /// C x n, columns sum to one.
  virtual Eigen::MatrixXd probs(const Eigen::MatrixXd& X) const;

  /// Classification loss of a single input against a 1-based target label.
  virtual double loss(const Eigen::VectorXd& x, int target, LossId id) const;
  /// d loss / d x. Throws CapabilityError for non-differentiable models.
  virtual Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, int target, LossId id) const;

  virtual nlohmann::json to_json() const = 0;

  Eigen::VectorXd probs(const Eigen::VectorXd& x) const;
  /// 1-based argmax label; ties go to the lower label.
  int predict_label(const Eigen::VectorXd& x) const;
  std::vector<int> predict_labels(const Eigen::MatrixXd& X) const;

protected:
  void check_input(const Eigen::MatrixXd& X) const;
};

using ModelPtr = std::shared_ptr<const Model>;

enum class Activation { Relu, Identity };

std::string to_string(Activation a);
Activation parse_activation(std::string_view s);

/// Fully connected layer: out = act(W in + b). W is out x in.
struct DenseLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Activation activation = Activation::Identity;
  /// Dropout applied to this layer's output during training only.
  double dropout = 0.0;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& in) const;
};

/// Feed-forward stack with reverse-mode input gradients.
class LayerStack {
public:
  LayerStack() = default;
  explicit LayerStack(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
  /// Vector-Jacobian product: (d out / d x)^T * upstream, for a single input x.
  Eigen::VectorXd backward(const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) const;

private:
  std::vector<DenseLayer> layers_;
};

/// Logistic regression (binary, one logit row) or multinomial logit.
class LinearModel final : public Model {
public:
  LinearModel(Eigen::MatrixXd W, Eigen::VectorXd b, Likelihood likelihood);

  const Eigen::MatrixXd& weights() const { return W_; }
  const Eigen::VectorXd& bias() const { return b_; }

  std::string kind() const override { return "linear"; }
  Eigen::Index input_dim() const override { return W_.cols(); }
  int n_classes() const override;
  Likelihood likelihood() const override { return likelihood_; }
  bool differentiable() const override { return true; }
  Eigen::MatrixXd logits(const Eigen::MatrixXd& X) const override;
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, int target, LossId id) const override;
  nlohmann::json to_json() const override;

private:
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
  Likelihood likelihood_;
};

/// Multi-layer perceptron. The final layer has identity activation and emits raw logits.
class MlpModel final : public Model {
public:
  MlpModel(LayerStack stack, Likelihood likelihood);

  const LayerStack& stack() const { return stack_; }

  std::string kind() const override { return "mlp"; }
  Eigen::Index input_dim() const override { return stack_.input_dim(); }
  int n_classes() const override;
  Likelihood likelihood() const override { return likelihood_; }
  bool differentiable() const override { return true; }
  Eigen::MatrixXd logits(const Eigen::MatrixXd& X) const override;
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, int target, LossId id) const override;
  nlohmann::json to_json() const override;

private:
  LayerStack stack_;
  Likelihood likelihood_;
};

/// Equally weighted MLP ensemble. Probabilities, losses and gradients are member means;
/// logits are the mean of member logits.
class DeepEnsemble final : public Model {
public:
  explicit DeepEnsemble(std::vector<MlpModel> members);

  const std::vector<MlpModel>& members() const { return members_; }

  std::string kind() const override { return "ensemble"; }
  Eigen::Index input_dim() const override { return members_.front().input_dim(); }
  int n_classes() const override { return members_.front().n_classes(); }
  Likelihood likelihood() const override { return members_.front().likelihood(); }
  bool differentiable() const override { return true; }
  Eigen::MatrixXd logits(const Eigen::MatrixXd& X) const override;
  Eigen::MatrixXd probs(const Eigen::MatrixXd& X) const override;
  double loss(const Eigen::VectorXd& x, int target, LossId id) const override;
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x, int target, LossId id) const override;
  nlohmann::json to_json() const override;

private:
  std::vector<MlpModel> members_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool adam = true;
};

struct TrainReport {
  /// Mean training loss per epoch (cross-entropy on logits, or MSE for autoencoders).
  std::vector<double> epoch_loss;
  double accuracy = 0.0;
};

/// Glorot-uniform weights, zero biases.
DenseLayer init_layer(Eigen::Index in, Eigen::Index out, Activation act, std::mt19937_64& rng);

/// Fraction of rows whose predicted label equals the dataset label.
double accuracy(const Model& m, const Dataset& d);

LinearModel train_linear(const Dataset& d, const TrainConfig& cfg, TrainReport* report = nullptr);
MlpModel train_mlp(const Dataset& d, const std::vector<int>& hidden, double dropout, const TrainConfig& cfg,
                   TrainReport* report = nullptr);
DeepEnsemble train_ensemble(const Dataset& d, int size, const std::vector<int>& hidden, double dropout,
                            const TrainConfig& cfg, TrainReport* report = nullptr);

/// Declarative description of which model `train` should build.
struct ModelSpec {
  std::string kind = "linear";  // linear | mlp | ensemble | tree | forest
  std::vector<int> hidden = {32};
  double dropout = 0.0;
  int ensemble_size = 5;
  int max_depth = 5;
  int min_leaf = 1;
  int n_trees = 10;
};

ModelPtr train(const ModelSpec& spec, const Dataset& d, const TrainConfig& cfg, TrainReport* report = nullptr);

/// Fits a layer stack to (inputs, targets) by mini-batch descent. `classification` selects
/// cross-entropy on logits against `labels`; otherwise mean squared error against `targets`.
/// Exposed for the autoencoder trainer.
struct StackFit {
  bool classification = true;
  Likelihood likelihood = Likelihood::Binary;
  std::vector<int> labels;
  Eigen::MatrixXd targets;  // n x out when regression
};
std::vector<double> fit_stack(LayerStack& stack, const Eigen::MatrixXd& inputs, const StackFit& fit,
                              const TrainConfig& cfg);

}  // namespace recourse

#endif  // RECOURSE_MODELS_HPP
