#include "recourse/objective.hpp"

#include <cmath>

#include "recourse/errors.hpp"
#include "recourse/penalties.hpp"

namespace recourse {

std::string to_string(PenaltyId id) {
  switch (id) {
    case PenaltyId::DistanceL1: return "distance_l1";
    case PenaltyId::DistanceL2: return "distance_l2";
    case PenaltyId::DistanceLinf: return "distance_linf";
    case PenaltyId::DistanceMad: return "distance_mad";
    case PenaltyId::DdpDiversity: return "ddp_diversity";
    case PenaltyId::Gravitational: return "gravitational";
    case PenaltyId::Claproar: return "claproar";
  }
  return "";
}

PenaltyId parse_penalty(std::string_view s) {
  for (auto id : {PenaltyId::DistanceL1, PenaltyId::DistanceL2, PenaltyId::DistanceLinf, PenaltyId::DistanceMad,
                  PenaltyId::DdpDiversity, PenaltyId::Gravitational, PenaltyId::Claproar}) {
    if (to_string(id) == s) return id;
  }
  throw ConfigError("unknown penalty '" + std::string(s) + "'");
}

std::string to_string(SearchSpace s) { return s == SearchSpace::Feature ? "feature" : "latent"; }

SearchSpace parse_search_space(std::string_view s) {
  if (s == "feature") return SearchSpace::Feature;
  if (s == "latent") return SearchSpace::Latent;
  throw ConfigError("unknown search space '" + std::string(s) + "' (expected feature or latent)");
}

Objective compose_objective(std::optional<LossId> loss, const std::vector<std::pair<std::string, double>>& penalties,
                            SearchSpace space, int num_counterfactuals) {
  if (num_counterfactuals < 1) throw ConfigError("num_counterfactuals must be at least 1");
  Objective obj;
  obj.loss = loss;
  obj.space = space;
  obj.num_counterfactuals = num_counterfactuals;
  for (const auto& [name, weight] : penalties) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw ConfigError("penalty weight for '" + name + "' must be a finite non-negative number");
    }
    obj.penalties.push_back({parse_penalty(name), weight});
  }
  return obj;
}

std::vector<std::string> objective_warnings(const Objective& obj) {
  std::vector<std::string> out;
  for (const auto& p : obj.penalties) {
    if (p.id == PenaltyId::DdpDiversity && obj.num_counterfactuals < 2) {
      out.push_back("ddp_diversity has no effect unless num_counterfactuals is greater than 1");
    }
  }
  return out;
}

namespace {

bool needs(const Objective& obj, PenaltyId id) {
  for (const auto& p : obj.penalties) {
    if (p.id == id) return true;
  }
  return false;
}

}  // namespace

ObjectiveEvaluator::ObjectiveEvaluator(const Objective& obj, const Model& model, const Dataset& data,
                                       Eigen::VectorXd factual, int target, const Autoencoder* autoencoder)
    : obj_(obj),
      model_(model),
      factual_(std::move(factual)),
      target_(target),
      autoencoder_(autoencoder),
      loss_(obj.loss.value_or(default_loss(model.likelihood()))) {
  if (factual_.size() != model.input_dim()) throw DimensionError("factual does not match the model input dimension");
  if (obj_.space == SearchSpace::Latent) {
    if (autoencoder_ == nullptr) {
      throw ConfigError("latent-space search needs a trained autoencoder (see train_autoencoder)");
    }
    if (autoencoder_->input_dim() != factual_.size()) throw DimensionError("autoencoder does not match the data");
  }
  if (needs(obj_, PenaltyId::Gravitational)) centroid_ = class_centroid(data, target);
  if (needs(obj_, PenaltyId::DistanceMad)) mad_ = data.mad() ? *data.mad() : mad_statistics(data);
}

Eigen::MatrixXd ObjectiveEvaluator::decode(const Eigen::MatrixXd& states) const {
  if (obj_.space == SearchSpace::Feature) return states;
  return autoencoder_->decode_rows(states);
}

double ObjectiveEvaluator::loss_term(const Eigen::MatrixXd& states) const {
  const Eigen::MatrixXd decoded = decode(states);
  double sum = 0.0;
  for (Eigen::Index l = 0; l < decoded.rows(); ++l) sum += model_.loss(decoded.row(l).transpose(), target_, loss_);
  return sum / static_cast<double>(decoded.rows());
}

double ObjectiveEvaluator::penalty_value(const PenaltyTerm& term, const Eigen::MatrixXd& decoded) const {
  if (term.id == PenaltyId::DdpDiversity) return ddp_diversity(decoded);
  double sum = 0.0;
  for (Eigen::Index l = 0; l < decoded.rows(); ++l) {
    const Eigen::VectorXd cf = decoded.row(l).transpose();
    switch (term.id) {
      case PenaltyId::DistanceL1: sum += distance(cf, factual_, Norm::L1); break;
      case PenaltyId::DistanceL2: sum += distance(cf, factual_, Norm::L2); break;
      case PenaltyId::DistanceLinf: sum += distance(cf, factual_, Norm::Linf); break;
      case PenaltyId::DistanceMad: sum += distance(cf, factual_, Norm::Mad, &mad_); break;
      case PenaltyId::Gravitational: sum += gravitational(cf, centroid_); break;
      case PenaltyId::Claproar: sum += claproar(model_, cf, target_, loss_); break;
      case PenaltyId::DdpDiversity: break;
    }
  }
  return sum / static_cast<double>(decoded.rows());
}

double ObjectiveEvaluator::penalty_term(const Eigen::MatrixXd& states, std::size_t index) const {
  const auto& term = obj_.penalties.at(index);
  return term.weight * penalty_value(term, decode(states));
}

double ObjectiveEvaluator::value(const Eigen::MatrixXd& states) const {
  const Eigen::MatrixXd decoded = decode(states);
  double total = 0.0;
  for (Eigen::Index l = 0; l < decoded.rows(); ++l) total += model_.loss(decoded.row(l).transpose(), target_, loss_);
  total /= static_cast<double>(decoded.rows());
  for (const auto& term : obj_.penalties) total += term.weight * penalty_value(term, decoded);
  if (!std::isfinite(total)) throw NumericError("search objective is not finite");
  return total;
}

Eigen::MatrixXd ObjectiveEvaluator::feature_gradient(const Eigen::MatrixXd& decoded) const {
  const Eigen::Index L = decoded.rows();
  const double inv_l = 1.0 / static_cast<double>(L);
  if (!model_.differentiable()) {
    throw CapabilityError("gradient-based search needs a differentiable model, got '" + model_.kind() + "'");
  }
  Eigen::MatrixXd G(L, decoded.cols());
  for (Eigen::Index l = 0; l < L; ++l) {
    const Eigen::VectorXd cf = decoded.row(l).transpose();
    Eigen::VectorXd g = model_.input_gradient(cf, target_, loss_);
    for (const auto& term : obj_.penalties) {
      switch (term.id) {
        case PenaltyId::DistanceL1: g += term.weight * distance_gradient(cf, factual_, Norm::L1); break;
        case PenaltyId::DistanceL2: g += term.weight * distance_gradient(cf, factual_, Norm::L2); break;
        case PenaltyId::DistanceLinf: g += term.weight * distance_gradient(cf, factual_, Norm::Linf); break;
        case PenaltyId::DistanceMad: g += term.weight * distance_gradient(cf, factual_, Norm::Mad, &mad_); break;
        case PenaltyId::Gravitational: g += term.weight * gravitational_gradient(cf, centroid_); break;
        case PenaltyId::Claproar: g += term.weight * claproar_gradient(model_, cf, target_, loss_); break;
        case PenaltyId::DdpDiversity: break;
      }
    }
    G.row(l) = inv_l * g.transpose();
  }
  for (const auto& term : obj_.penalties) {
    if (term.id == PenaltyId::DdpDiversity) G += term.weight * ddp_diversity_gradient(decoded);
  }
  return G;
}

Eigen::MatrixXd ObjectiveEvaluator::gradient(const Eigen::MatrixXd& states) const {
  const Eigen::MatrixXd decoded = decode(states);
  const Eigen::MatrixXd Gx = feature_gradient(decoded);
  Eigen::MatrixXd G;
  if (obj_.space == SearchSpace::Feature) {
    G = Gx;
  } else {
    G.resize(states.rows(), states.cols());
    for (Eigen::Index l = 0; l < states.rows(); ++l) {
      G.row(l) = autoencoder_->decoder_vjp(states.row(l).transpose(), Gx.row(l).transpose()).transpose();
    }
  }
  if (!G.allFinite()) throw NumericError("search gradient is not finite");
  return G;
}

}  // namespace recourse
