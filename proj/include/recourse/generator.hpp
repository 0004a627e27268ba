#ifndef RECOURSE_GENERATOR_HPP
#define RECOURSE_GENERATOR_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "recourse/autoencoder.hpp"
#include "recourse/objective.hpp"
#include "recourse/penalties.hpp"

namespace recourse {

enum class GeneratorKind { Gradient, GrowingSpheres, FeatureTweak };

std::string to_string(GeneratorKind k);

enum class OptimizerKind { Descent, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Descent;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Fixed-step coordinate scheme: move the feature with the largest gradient magnitude by `step`.
struct GreedyOptions {
  double step = 0.1;
  /// A feature moved this many times becomes ineligible.
  int cap = 10;

  bool operator==(const GreedyOptions&) const = default;
};

struct GrowingSpheresConfig {
  int n_samples = 200;
  double initial_radius = 0.1;
  double growth = 1.5;
  int max_rounds = 50;

  bool operator==(const GrowingSpheresConfig&) const = default;
};

struct FeatureTweakConfig {
  double epsilon = 0.1;
  Norm cost = Norm::L2;

  bool operator==(const FeatureTweakConfig&) const = default;
};

/// Immutable generator description. Gradient generators carry an objective and optimizer;
/// the other kinds carry their own search configuration.
struct Generator {
  std::string name = "generic";
  GeneratorKind kind = GeneratorKind::Gradient;
  Objective objective;
  OptimizerConfig optimizer;
  std::optional<GreedyOptions> greedy;
  /// Fraction of perturbation entries zeroed at every step.
  double dropout = 0.0;
  GrowingSpheresConfig spheres;
  FeatureTweakConfig tweak;
  AutoencoderPtr autoencoder;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultDistanceWeight = 0.1;
inline constexpr double kDefaultDiversityWeight = 0.2;
inline constexpr double kDefaultAnchorWeight = 0.5;
inline constexpr int kDefaultDiceCount = 5;

struct PresetOptions {
  /// 0 keeps the preset's default (5 for dice, 1 otherwise).
  int num_counterfactuals = 0;
  AutoencoderPtr autoencoder;
  std::optional<double> distance_weight;
  std::optional<double> second_weight;
};

/// Named generators: generic (alias wachter), dice, greedy, gravitational, claproar, revise,
/// growing_spheres and feature_tweak.
Generator preset(std::string_view name, const PresetOptions& opts = {});
std::vector<std::string> preset_names();

Generator growing_spheres_generator(const GrowingSpheresConfig& cfg = {});
Generator feature_tweak_generator(const FeatureTweakConfig& cfg = {});

/// Adds a penalty term. Only gradient generators compose.
Generator with_penalty(Generator g, PenaltyId id, double weight);
Generator with_latent_search(Generator g, AutoencoderPtr autoencoder);
Generator with_optimizer(Generator g, OptimizerConfig opt);
Generator with_num_counterfactuals(Generator g, int L);
/// Zeroes round(p * size) randomly chosen perturbation entries after each inner step.
Generator with_dropout(Generator inner, double p);

nlohmann::json generator_to_json(const Generator& g);
/// Accepts {"preset": name, ...overrides} or a custom {"objective": {...}, "optimizer": {...}} document.
Generator generator_from_json(const nlohmann::json& j, AutoencoderPtr autoencoder = nullptr);

}  // namespace recourse

#endif  // RECOURSE_GENERATOR_HPP
