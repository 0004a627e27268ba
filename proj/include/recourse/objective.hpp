#ifndef RECOURSE_OBJECTIVE_HPP
#define RECOURSE_OBJECTIVE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "recourse/autoencoder.hpp"
#include "recourse/dataset.hpp"
#include "recourse/losses.hpp"
#include "recourse/models.hpp"

namespace recourse {

enum class PenaltyId { DistanceL1, DistanceL2, DistanceLinf, DistanceMad, DdpDiversity, Gravitational, Claproar };

std::string to_string(PenaltyId id);
PenaltyId parse_penalty(std::string_view s);

struct PenaltyTerm {
  PenaltyId id;
  double weight;

  bool operator==(const PenaltyTerm&) const = default;
};

enum class SearchSpace { Feature, Latent };

std::string to_string(SearchSpace s);
SearchSpace parse_search_space(std::string_view s);

/// Search objective: mean classification loss over the L counterfactuals plus weighted penalties.
struct Objective {
  /// Unset means the model's own cross-entropy (binary or multinomial).
  std::optional<LossId> loss;
  std::vector<PenaltyTerm> penalties;
  SearchSpace space = SearchSpace::Feature;
  int num_counterfactuals = 1;

  bool operator==(const Objective&) const = default;
};

/// Builds an objective from registry names. Throws ConfigError on unknown ids or bad weights.
Objective compose_objective(std::optional<LossId> loss, const std::vector<std::pair<std::string, double>>& penalties,
                            SearchSpace space, int num_counterfactuals);

/// Human-readable warnings for legal but ineffective objectives (diversity with L = 1).
std::vector<std::string> objective_warnings(const Objective& obj);

/// Binds an objective to a model, data set, factual and target. States are L x K' with
/// K' = D in feature space and the latent width otherwise.
class ObjectiveEvaluator {
public:
  ObjectiveEvaluator(const Objective& obj, const Model& model, const Dataset& data, Eigen::VectorXd factual, int target,
                     const Autoencoder* autoencoder = nullptr);

  /// Counterfactuals in feature space (L x D).
  Eigen::MatrixXd decode(const Eigen::MatrixXd& states) const;

  double loss_term(const Eigen::MatrixXd& states) const;
  double penalty_term(const Eigen::MatrixXd& states, std::size_t index) const;
  double value(const Eigen::MatrixXd& states) const;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& states) const;

  LossId loss() const { return loss_; }
  const Objective& objective() const { return obj_; }

private:
  Eigen::MatrixXd feature_gradient(const Eigen::MatrixXd& decoded) const;
  double penalty_value(const PenaltyTerm& term, const Eigen::MatrixXd& decoded) const;

  Objective obj_;
  const Model& model_;
  Eigen::VectorXd factual_;
  int target_;
  const Autoencoder* autoencoder_;
  LossId loss_;
  Eigen::VectorXd centroid_;
  Eigen::VectorXd mad_;
};

}  // namespace recourse

#endif  // RECOURSE_OBJECTIVE_HPP
