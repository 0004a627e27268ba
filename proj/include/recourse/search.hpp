#ifndef RECOURSE_SEARCH_HPP
#define RECOURSE_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "recourse/dataset.hpp"
#include "recourse/generator.hpp"
#include "recourse/models.hpp"
#include "recourse/objective.hpp"
#include "recourse/trees.hpp"

namespace recourse {

enum class StopReason {
  ThresholdReached,   // every counterfactual reached p_target >= threshold
  MaxIter,            // iteration budget exhausted
  StepBelowTau,       // largest perturbation fell below the tolerance
  FeaturesExhausted,  // greedy: no eligible feature left
  SearchComplete,     // non-iterative generator finished
  NoCandidate,        // feature tweak: no leaf yields a valid, admissible candidate
  MaxRounds,          // growing spheres: no target-class sample within max_rounds shells
};

std::string to_string(StopReason r);
StopReason parse_stop_reason(std::string_view s);

enum class ConvergenceCheck { ThresholdReached, MaxIter, StepBelowTau };

std::string to_string(ConvergenceCheck c);
ConvergenceCheck parse_convergence_check(std::string_view s);

/// The loop always stops at `max_iter`; `check` selects the additional early-stopping rule.
struct ConvergenceConfig {
  double decision_threshold = 0.5;
  int max_iter = 1000;
  double min_step = 1e-3;
  ConvergenceCheck check = ConvergenceCheck::ThresholdReached;
};

/// Outcome of one search. `path[i]` holds the L x D counterfactuals after iteration i,
/// with `path[0]` the initial state.
struct ExplanationState {
  Eigen::VectorXd factual;
  int target = 0;
  SearchSpace space = SearchSpace::Feature;
  Eigen::MatrixXd states;
  Eigen::MatrixXd counterfactuals;
  std::vector<Eigen::MatrixXd> path;
  StopReason reason = StopReason::MaxIter;
  int iterations = 0;
  std::string generator;
  std::vector<std::string> warnings;

  Eigen::Index num_counterfactuals() const { return counterfactuals.rows(); }
  Eigen::VectorXd counterfactual(Eigen::Index i = 0) const { return counterfactuals.row(i).transpose(); }
};

struct SearchOptions {
  /// 0 uses the generator's num_counterfactuals.
  int num_counterfactuals = 0;
  ConvergenceConfig convergence;
  /// Std of Gaussian noise added to the initial state. Unset: 0.1 when L > 1, otherwise 0.
  std::optional<double> init_noise;
  std::uint64_t seed = 0;
};

/// Per-step update rule over the whole L x K' state matrix.
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig cfg);
  /// Returns the perturbation for this step (descent: -lr * grad; adam: bias-corrected update).
  Eigen::MatrixXd step(const Eigen::MatrixXd& grad);

private:
  OptimizerConfig cfg_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  int t_ = 0;
};

/// Clamps a feature-space perturbation so that immutable features stay fixed, increase-only
/// features never fall below the factual and decrease-only features never rise above it.
Eigen::MatrixXd apply_mutability(const Eigen::MatrixXd& delta, std::span<const Mutability> tags,
                                 const Eigen::VectorXd& factual, const Eigen::MatrixXd& current);

/// Re-imposes the mutability envelope exactly (bitwise) on updated feature-space states.
void enforce_mutability(Eigen::MatrixXd& states, std::span<const Mutability> tags, const Eigen::VectorXd& factual);

struct GreedyStep {
  Eigen::MatrixXd delta;
  /// True when no row had an eligible feature.
  bool exhausted = false;
};

/// For every row, moves the eligible feature with the largest |gradient| by -step * sign(grad).
/// `hits` counts moves per (row, feature) and is updated in place.
GreedyStep greedy_perturbation(const Eigen::MatrixXd& gradient, std::span<const Mutability> tags,
                               const GreedyOptions& opts, Eigen::MatrixXi& hits);

/// Zeroes round(p * K') coordinates of every row, sampled without replacement.
void apply_dropout(Eigen::MatrixXd& delta, double p, std::mt19937_64& rng);

/// Runs `generator` for factual `x` towards the 1-based `target` label.
ExplanationState generate_counterfactual(const Eigen::VectorXd& x, int target, const Dataset& data, const Model& model,
                                         const Generator& generator, const SearchOptions& opts = {});

/// Model-agnostic search: sample growing shells around x until a target-class point appears,
/// then reset coordinates back to x while the prediction holds. Path is [x, raw, sparsified].
ExplanationState growing_spheres(const Eigen::VectorXd& x, int target, const Model& model,
                                 std::span<const Mutability> tags, const GrowingSpheresConfig& cfg, int L,
                                 std::uint64_t seed);

/// Cheapest epsilon-satisfactory instance over all target-class leaves of every tree.
ExplanationState feature_tweak(const Eigen::VectorXd& x, int target, const TreeModel& model,
                               std::span<const Mutability> tags, const FeatureTweakConfig& cfg,
                               const Eigen::VectorXd* mad = nullptr);

/// Objective value of a finished or in-flight state.
double total_objective(const Objective& obj, const ExplanationState& es, const Model& m, const Dataset& d,
                       const Autoencoder* autoencoder = nullptr);
Eigen::MatrixXd objective_gradient(const Objective& obj, const ExplanationState& es, const Model& m, const Dataset& d,
                                   const Autoencoder* autoencoder = nullptr);

nlohmann::json to_json(const ExplanationState& es);
ExplanationState explanation_from_json(const nlohmann::json& j);

}  // namespace recourse

#endif  // RECOURSE_SEARCH_HPP
