#include "recourse/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"
#include "recourse/trees.hpp"

namespace recourse {

// ---------------------------------------------------------------------------
// Model

void Model::check_input(const Eigen::MatrixXd& X) const {
  if (X.rows() != input_dim()) {
    throw DimensionError(kind() + " model expects " + std::to_string(input_dim()) + " features, got " +
                         std::to_string(X.rows()));
  }
}

Eigen::MatrixXd Model::probs(const Eigen::MatrixXd& X) const {
  return probs_from_logits(logits(X), likelihood());
}

Eigen::VectorXd Model::probs(const Eigen::VectorXd& x) const {
  return probs(Eigen::MatrixXd(x)).col(0);
}

double Model::loss(const Eigen::VectorXd& x, int target, LossId id) const {
  return logit_loss(logits(Eigen::MatrixXd(x)).col(0), target, id, likelihood());
}

Eigen::VectorXd Model::input_gradient(const Eigen::VectorXd&, int, LossId) const {
  throw CapabilityError(kind() + " model is not differentiable; input gradients are unavailable");
}

int Model::predict_label(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd p = probs(x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p(k) > p(best)) best = k;
  }
  return static_cast<int>(best) + 1;
}

std::vector<int> Model::predict_labels(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd P = probs(X);
  std::vector<int> out(static_cast<std::size_t>(P.cols()));
  for (Eigen::Index c = 0; c < P.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < P.rows(); ++k) {
      if (P(k, c) > P(best, c)) best = k;
    }
    out[static_cast<std::size_t>(c)] = static_cast<int>(best) + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layers

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "identity"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

Eigen::MatrixXd DenseLayer::forward(const Eigen::MatrixXd& in) const {
  Eigen::MatrixXd z = (W * in).colwise() + b;
  if (activation == Activation::Relu) z = z.cwiseMax(0.0);
  return z;
}

LayerStack::LayerStack(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("layer stack needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.b.size() != l.W.rows()) throw DimensionError("layer bias length does not match its weights");
    if (i > 0 && l.W.cols() != layers_[i - 1].W.rows()) {
      throw DimensionError("layer " + std::to_string(i) + " input width " + std::to_string(l.W.cols()) +
                           " does not chain with previous output " + std::to_string(layers_[i - 1].W.rows()));
    }
    if (!l.W.allFinite() || !l.b.allFinite()) throw ConfigError("layer parameters must be finite");
  }
}

Eigen::Index LayerStack::input_dim() const { return layers_.front().W.cols(); }
Eigen::Index LayerStack::output_dim() const { return layers_.back().W.rows(); }

Eigen::MatrixXd LayerStack::forward(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd a = X;
  for (const auto& layer : layers_) a = layer.forward(a);
  return a;
}

Eigen::VectorXd LayerStack::backward(const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) const {
  std::vector<Eigen::VectorXd> pre;
  pre.reserve(layers_.size());
  Eigen::VectorXd a = x;
  for (const auto& layer : layers_) {
    Eigen::VectorXd z = layer.W * a + layer.b;
    pre.push_back(z);
    a = layer.activation == Activation::Relu ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  Eigen::VectorXd g = upstream;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& layer = layers_[i];
    if (layer.activation == Activation::Relu) g = g.cwiseProduct((pre[i].array() > 0.0).cast<double>().matrix());
    g = layer.W.transpose() * g;
  }
  return g;
}

// ---------------------------------------------------------------------------
// LinearModel

LinearModel::LinearModel(Eigen::MatrixXd W, Eigen::VectorXd b, Likelihood likelihood)
    : W_(std::move(W)), b_(std::move(b)), likelihood_(likelihood) {
  if (b_.size() != W_.rows()) throw DimensionError("linear model bias length does not match weights");
  if (likelihood_ == Likelihood::Binary && W_.rows() != 1) {
    throw DimensionError("binary linear model needs exactly one weight row");
  }
  if (likelihood_ == Likelihood::Multiclass && W_.rows() < 2) {
    throw DimensionError("multiclass linear model needs at least two weight rows");
  }
  if (!W_.allFinite() || !b_.allFinite()) throw ConfigError("linear model parameters must be finite");
}

int LinearModel::n_classes() const {
  return likelihood_ == Likelihood::Binary ? 2 : static_cast<int>(W_.rows());
}

Eigen::MatrixXd LinearModel::logits(const Eigen::MatrixXd& X) const {
  check_input(X);
  return (W_ * X).colwise() + b_;
}

Eigen::VectorXd LinearModel::input_gradient(const Eigen::VectorXd& x, int target, LossId id) const {
  check_input(x);
  const Eigen::VectorXd z = W_ * x + b_;
  return W_.transpose() * logit_loss_gradient(z, target, id, likelihood_);
}

// ---------------------------------------------------------------------------
// MlpModel

MlpModel::MlpModel(LayerStack stack, Likelihood likelihood) : stack_(std::move(stack)), likelihood_(likelihood) {
  if (stack_.layers().back().activation != Activation::Identity) {
    throw ConfigError("final MLP layer must emit raw logits (identity activation)");
  }
  if (likelihood_ == Likelihood::Binary && stack_.output_dim() != 1) {
    throw DimensionError("binary MLP needs a single output unit");
  }
  if (likelihood_ == Likelihood::Multiclass && stack_.output_dim() < 2) {
    throw DimensionError("multiclass MLP needs at least two output units");
  }
}

int MlpModel::n_classes() const {
  return likelihood_ == Likelihood::Binary ? 2 : static_cast<int>(stack_.output_dim());
}

Eigen::MatrixXd MlpModel::logits(const Eigen::MatrixXd& X) const {
  check_input(X);
  return stack_.forward(X);
}

Eigen::VectorXd MlpModel::input_gradient(const Eigen::VectorXd& x, int target, LossId id) const {
  check_input(x);
  const Eigen::VectorXd z = stack_.forward(x).col(0);
  return stack_.backward(x, logit_loss_gradient(z, target, id, likelihood_));
}

// ---------------------------------------------------------------------------
// DeepEnsemble

DeepEnsemble::DeepEnsemble(std::vector<MlpModel> members) : members_(std::move(members)) {
  if (members_.size() < 2) throw ConfigError("deep ensemble needs at least two members");
  for (const auto& m : members_) {
    if (m.input_dim() != members_.front().input_dim() || m.n_classes() != members_.front().n_classes() ||
        m.likelihood() != members_.front().likelihood()) {
      throw DimensionError("ensemble members must share input and output dimensions");
    }
  }
}

Eigen::MatrixXd DeepEnsemble::logits(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd sum = members_.front().logits(X);
  for (std::size_t i = 1; i < members_.size(); ++i) sum += members_[i].logits(X);
  return sum / static_cast<double>(members_.size());
}

Eigen::MatrixXd DeepEnsemble::probs(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd sum = members_.front().probs(X);
  for (std::size_t i = 1; i < members_.size(); ++i) sum += members_[i].probs(X);
  return sum / static_cast<double>(members_.size());
}

double DeepEnsemble::loss(const Eigen::VectorXd& x, int target, LossId id) const {
  double sum = 0.0;
  for (const auto& m : members_) sum += m.loss(x, target, id);
  return sum / static_cast<double>(members_.size());
}

Eigen::VectorXd DeepEnsemble::input_gradient(const Eigen::VectorXd& x, int target, LossId id) const {
  Eigen::VectorXd sum = members_.front().input_gradient(x, target, id);
  for (std::size_t i = 1; i < members_.size(); ++i) sum += members_[i].input_gradient(x, target, id);
  return sum / static_cast<double>(members_.size());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json layers_to_json(const LayerStack& stack) {
  auto layers = nlohmann::json::array();
  for (const auto& l : stack.layers()) {
    layers.push_back({{"W", matrix_to_json(l.W)},
                      {"b", vector_to_json(l.b)},
                      {"activation", to_string(l.activation)},
                      {"dropout", l.dropout}});
  }
  return layers;
}

}  // namespace

nlohmann::json LinearModel::to_json() const {
  return {{"kind", "linear"},
          {"version", 1},
          {"dims", {{"input", input_dim()}, {"output", W_.rows()}, {"classes", n_classes()}}},
          {"layers", nlohmann::json::array({{{"W", matrix_to_json(W_)},
                                             {"b", vector_to_json(b_)},
                                             {"activation", "identity"}}})},
          {"likelihood", to_string(likelihood_)}};
}

nlohmann::json MlpModel::to_json() const {
  return {{"kind", "mlp"},
          {"version", 1},
          {"dims", {{"input", input_dim()}, {"output", stack_.output_dim()}, {"classes", n_classes()}}},
          {"layers", layers_to_json(stack_)},
          {"likelihood", to_string(likelihood_)}};
}

nlohmann::json DeepEnsemble::to_json() const {
  auto members = nlohmann::json::array();
  for (const auto& m : members_) members.push_back(m.to_json());
  return {{"kind", "ensemble"},
          {"version", 1},
          {"dims", {{"input", input_dim()}, {"classes", n_classes()}}},
          {"members", std::move(members)},
          {"likelihood", to_string(likelihood())}};
}

// ---------------------------------------------------------------------------
// Training

DenseLayer init_layer(Eigen::Index in, Eigen::Index out, Activation act, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer;
  layer.W.resize(out, in);
  for (Eigen::Index i = 0; i < out; ++i) {
    for (Eigen::Index j = 0; j < in; ++j) layer.W(i, j) = dist(rng);
  }
  layer.b = Eigen::VectorXd::Zero(out);
  layer.activation = act;
  return layer;
}

double accuracy(const Model& m, const Dataset& d) {
  if (d.rows() == 0) return 0.0;
  const auto pred = m.predict_labels(d.X().transpose());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == d.y()[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

namespace {

struct AdamSlot {
  Eigen::MatrixXd mW, vW;
  Eigen::VectorXd mb, vb;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

std::vector<double> fit_stack(LayerStack& stack, const Eigen::MatrixXd& inputs, const StackFit& fit,
                              const TrainConfig& cfg) {
  if (inputs.rows() == 0) throw ConfigError("cannot train on an empty dataset");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  auto& layers = stack.mutable_layers();
  const std::size_t n = static_cast<std::size_t>(inputs.rows());
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<AdamSlot> adam(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam[l].mW = Eigen::MatrixXd::Zero(layers[l].W.rows(), layers[l].W.cols());
    adam[l].vW = adam[l].mW;
    adam[l].mb = Eigen::VectorXd::Zero(layers[l].b.size());
    adam[l].vb = adam[l].mb;
  }
  const LossId loss_id = default_loss(fit.likelihood);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_losses;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const auto B = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd a(inputs.cols(), B);
      for (Eigen::Index k = 0; k < B; ++k) a.col(k) = inputs.row(static_cast<Eigen::Index>(order[start + k])).transpose();

      std::vector<Eigen::MatrixXd> acts{a};
      std::vector<Eigen::MatrixXd> pre;
      std::vector<Eigen::MatrixXd> masks;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = (layers[l].W * acts.back()).colwise() + layers[l].b;
        Eigen::MatrixXd out = layers[l].activation == Activation::Relu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
        Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(out.rows(), out.cols());
        const double p = layers[l].dropout;
        if (p > 0.0 && l + 1 < layers.size()) {
          for (Eigen::Index r = 0; r < mask.rows(); ++r) {
            for (Eigen::Index c = 0; c < mask.cols(); ++c) mask(r, c) = unit(rng) < p ? 0.0 : 1.0 / (1.0 - p);
          }
          out = out.cwiseProduct(mask);
        }
        pre.push_back(std::move(z));
        masks.push_back(std::move(mask));
        acts.push_back(std::move(out));
      }

      const Eigen::MatrixXd& y_hat = acts.back();
      Eigen::MatrixXd grad(y_hat.rows(), B);
      double batch_loss = 0.0;
      if (fit.classification) {
        for (Eigen::Index k = 0; k < B; ++k) {
          const int label = fit.labels[order[start + static_cast<std::size_t>(k)]];
          const Eigen::VectorXd z = y_hat.col(k);
          batch_loss += logit_loss(z, label, loss_id, fit.likelihood);
          grad.col(k) = logit_loss_gradient(z, label, loss_id, fit.likelihood);
        }
        grad /= static_cast<double>(B);
      } else {
        const double denom = static_cast<double>(B) * static_cast<double>(y_hat.rows());
        for (Eigen::Index k = 0; k < B; ++k) {
          const Eigen::VectorXd diff =
              y_hat.col(k) - fit.targets.row(static_cast<Eigen::Index>(order[start + k])).transpose();
          batch_loss += diff.squaredNorm() / static_cast<double>(y_hat.rows());
          grad.col(k) = 2.0 * diff / denom;
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch + 1) +
                              "; try a smaller learning rate");
      }
      total += batch_loss;

      ++step;
      for (std::size_t l = layers.size(); l-- > 0;) {
        if (layers[l].activation == Activation::Relu) {
          grad = grad.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
        }
        const Eigen::MatrixXd dW = grad * acts[l].transpose();
        const Eigen::VectorXd db = grad.rowwise().sum();
        if (l > 0) grad = (layers[l].W.transpose() * grad).cwiseProduct(masks[l - 1]);

        if (cfg.adam) {
          auto& s = adam[l];
          s.mW = kBeta1 * s.mW + (1.0 - kBeta1) * dW;
          s.vW = kBeta2 * s.vW + (1.0 - kBeta2) * dW.cwiseProduct(dW);
          s.mb = kBeta1 * s.mb + (1.0 - kBeta1) * db;
          s.vb = kBeta2 * s.vb + (1.0 - kBeta2) * db.cwiseProduct(db);
          const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
          layers[l].W.array() -=
              cfg.learning_rate * (s.mW.array() / c1) / ((s.vW.array() / c2).sqrt() + kAdamEps);
          layers[l].b.array() -=
              cfg.learning_rate * (s.mb.array() / c1) / ((s.vb.array() / c2).sqrt() + kAdamEps);
        } else {
          layers[l].W -= cfg.learning_rate * dW;
          layers[l].b -= cfg.learning_rate * db;
        }
      }
    }
    epoch_losses.push_back(total / static_cast<double>(n));
  }
  return epoch_losses;
}

namespace {

Likelihood likelihood_for(const Dataset& d) { return d.n_classes() <= 2 ? Likelihood::Binary : Likelihood::Multiclass; }

Eigen::Index output_units(const Dataset& d) { return d.n_classes() <= 2 ? 1 : d.n_classes(); }

StackFit classification_fit(const Dataset& d) {
  if (d.rows() == 0) throw ConfigError("cannot train on an empty dataset");
  StackFit fit;
  fit.classification = true;
  fit.likelihood = likelihood_for(d);
  fit.labels = d.y();
  return fit;
}

MlpModel train_mlp_seeded(const Dataset& d, const std::vector<int>& hidden, double dropout, const TrainConfig& cfg,
                          std::vector<double>* losses) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<DenseLayer> layers;
  Eigen::Index in = d.dims();
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden layer widths must be positive");
    layers.push_back(init_layer(in, h, Activation::Relu, rng));
    layers.back().dropout = dropout;
    in = h;
  }
  layers.push_back(init_layer(in, output_units(d), Activation::Identity, rng));
  LayerStack stack(std::move(layers));
  auto l = fit_stack(stack, d.X(), classification_fit(d), cfg);
  if (losses) *losses = std::move(l);
  return MlpModel(std::move(stack), likelihood_for(d));
}

}  // namespace

LinearModel train_linear(const Dataset& d, const TrainConfig& cfg, TrainReport* report) {
  std::mt19937_64 rng(cfg.seed);
  LayerStack stack({init_layer(d.dims(), output_units(d), Activation::Identity, rng)});
  auto losses = fit_stack(stack, d.X(), classification_fit(d), cfg);
  const auto& layer = stack.layers().front();
  LinearModel model(layer.W, layer.b, likelihood_for(d));
  if (report) {
    report->epoch_loss = std::move(losses);
    report->accuracy = accuracy(model, d);
  }
  return model;
}

MlpModel train_mlp(const Dataset& d, const std::vector<int>& hidden, double dropout, const TrainConfig& cfg,
                   TrainReport* report) {
  std::vector<double> losses;
  MlpModel model = train_mlp_seeded(d, hidden, dropout, cfg, &losses);
  if (report) {
    report->epoch_loss = std::move(losses);
    report->accuracy = accuracy(model, d);
  }
  return model;
}

DeepEnsemble train_ensemble(const Dataset& d, int size, const std::vector<int>& hidden, double dropout,
                            const TrainConfig& cfg, TrainReport* report) {
  if (size < 2) throw ConfigError("deep ensemble needs at least two members");
  std::vector<MlpModel> members;
  std::vector<double> mean_losses;
  for (int k = 0; k < size; ++k) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = cfg.seed + 7919ULL * static_cast<std::uint64_t>(k + 1);
    std::vector<double> losses;
    members.push_back(train_mlp_seeded(d, hidden, dropout, member_cfg, &losses));
    if (mean_losses.empty()) mean_losses.assign(losses.size(), 0.0);
    for (std::size_t e = 0; e < losses.size(); ++e) mean_losses[e] += losses[e] / size;
  }
  DeepEnsemble model(std::move(members));
  if (report) {
    report->epoch_loss = std::move(mean_losses);
    report->accuracy = accuracy(model, d);
  }
  return model;
}

ModelPtr train(const ModelSpec& spec, const Dataset& d, const TrainConfig& cfg, TrainReport* report) {
  if (spec.kind == "linear") return std::make_shared<LinearModel>(train_linear(d, cfg, report));
  if (spec.kind == "mlp") return std::make_shared<MlpModel>(train_mlp(d, spec.hidden, spec.dropout, cfg, report));
  if (spec.kind == "ensemble") {
    return std::make_shared<DeepEnsemble>(
        train_ensemble(d, spec.ensemble_size, spec.hidden, spec.dropout, cfg, report));
  }
  if (spec.kind == "tree" || spec.kind == "forest") {
    auto model = spec.kind == "tree"
                     ? std::make_shared<TreeModel>(train_tree(d, spec.max_depth, spec.min_leaf))
                     : std::make_shared<TreeModel>(
                           train_forest(d, spec.n_trees, spec.max_depth, cfg.seed, spec.min_leaf));
    if (report) {
      report->epoch_loss.clear();
      report->accuracy = accuracy(*model, d);
    }
    return model;
  }
  throw UnsupportedKindError("unknown model kind '" + spec.kind + "' (expected linear, mlp, ensemble, tree or forest)");
}

}  // namespace recourse
