#include "recourse/generator.hpp"

#include <cmath>

#include "recourse/errors.hpp"

namespace recourse {

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Gradient: return "gradient";
    case GeneratorKind::GrowingSpheres: return "growing_spheres";
    case GeneratorKind::FeatureTweak: return "feature_tweak";
  }
  return "";
}

namespace {

Generator gradient_generator(std::string name, std::vector<PenaltyTerm> penalties, int L) {
  Generator g;
  g.name = std::move(name);
  g.kind = GeneratorKind::Gradient;
  g.objective.penalties = std::move(penalties);
  g.objective.num_counterfactuals = L;
  g.warnings = objective_warnings(g.objective);
  return g;
}

void require_gradient(const Generator& g, std::string_view what) {
  if (g.kind != GeneratorKind::Gradient) {
    throw ConfigError("generator '" + g.name + "' is not composable: " + std::string(what) +
                      " applies to gradient-based generators only");
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"generic", "dice", "greedy", "gravitational", "claproar", "revise", "growing_spheres", "feature_tweak"};
}

Generator preset(std::string_view name, const PresetOptions& opts) {
  if (opts.num_counterfactuals < 0) throw ConfigError("num_counterfactuals must be positive");
  const double lambda = opts.distance_weight.value_or(kDefaultDistanceWeight);
  const int L = opts.num_counterfactuals > 0 ? opts.num_counterfactuals : 1;

  if (name == "generic" || name == "wachter") {
    return gradient_generator(std::string(name), {{PenaltyId::DistanceL1, lambda}}, L);
  }
  if (name == "dice") {
    const int dice_l = opts.num_counterfactuals > 0 ? opts.num_counterfactuals : kDefaultDiceCount;
    return gradient_generator(
        "dice",
        {{PenaltyId::DistanceL1, lambda}, {PenaltyId::DdpDiversity, opts.second_weight.value_or(kDefaultDiversityWeight)}},
        dice_l);
  }
  if (name == "greedy") {
    Generator g = gradient_generator("greedy", {}, L);
    g.greedy = GreedyOptions{};
    return g;
  }
  if (name == "gravitational") {
    return gradient_generator(
        "gravitational",
        {{PenaltyId::DistanceL1, lambda}, {PenaltyId::Gravitational, opts.second_weight.value_or(kDefaultAnchorWeight)}},
        L);
  }
  if (name == "claproar") {
    return gradient_generator(
        "claproar",
        {{PenaltyId::DistanceL1, lambda}, {PenaltyId::Claproar, opts.second_weight.value_or(kDefaultAnchorWeight)}}, L);
  }
  if (name == "revise") {
    if (!opts.autoencoder) {
      throw ConfigError("the revise generator searches a latent space: train an autoencoder first (train_autoencoder)");
    }
    Generator g = gradient_generator("revise", {{PenaltyId::DistanceL1, lambda}}, L);
    g.objective.space = SearchSpace::Latent;
    g.autoencoder = opts.autoencoder;
    return g;
  }
  if (name == "growing_spheres") {
    Generator g = growing_spheres_generator();
    g.objective.num_counterfactuals = L;
    return g;
  }
  if (name == "feature_tweak") return feature_tweak_generator();
  throw ConfigError("unknown generator preset '" + std::string(name) + "'");
}

Generator growing_spheres_generator(const GrowingSpheresConfig& cfg) {
  if (cfg.n_samples < 1 || !(cfg.initial_radius > 0.0) || !(cfg.growth > 1.0) || cfg.max_rounds < 1) {
    throw ConfigError("growing spheres needs n_samples >= 1, initial radius > 0, growth > 1 and max_rounds >= 1");
  }
  Generator g;
  g.name = "growing_spheres";
  g.kind = GeneratorKind::GrowingSpheres;
  g.spheres = cfg;
  return g;
}

Generator feature_tweak_generator(const FeatureTweakConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ConfigError("feature tweak epsilon must be positive");
  Generator g;
  g.name = "feature_tweak";
  g.kind = GeneratorKind::FeatureTweak;
  g.tweak = cfg;
  return g;
}

Generator with_penalty(Generator g, PenaltyId id, double weight) {
  require_gradient(g, "penalty composition");
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw ConfigError("penalty weight must be finite and non-negative");
  g.objective.penalties.push_back({id, weight});
  g.warnings = objective_warnings(g.objective);
  return g;
}

Generator with_latent_search(Generator g, AutoencoderPtr autoencoder) {
  require_gradient(g, "latent search");
  if (!autoencoder) throw ConfigError("latent search needs a trained autoencoder (train_autoencoder)");
  g.objective.space = SearchSpace::Latent;
  g.autoencoder = std::move(autoencoder);
  return g;
}

Generator with_optimizer(Generator g, OptimizerConfig opt) {
  require_gradient(g, "optimizer selection");
  if (!(opt.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  g.optimizer = opt;
  return g;
}

Generator with_num_counterfactuals(Generator g, int L) {
  if (L < 1) throw ConfigError("num_counterfactuals must be at least 1");
  g.objective.num_counterfactuals = L;
  g.warnings = objective_warnings(g.objective);
  return g;
}

Generator with_dropout(Generator inner, double p) {
  require_gradient(inner, "dropout");
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
  inner.dropout = p;
  return inner;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json generator_to_json(const Generator& g) {
  auto penalties = nlohmann::json::array();
  for (const auto& p : g.objective.penalties) penalties.push_back({{"id", to_string(p.id)}, {"weight", p.weight}});
  nlohmann::json j = {
      {"name", g.name},
      {"kind", to_string(g.kind)},
      {"objective",
       {{"loss", g.objective.loss ? to_string(*g.objective.loss) : std::string("auto")},
        {"penalties", std::move(penalties)},
        {"search_space", to_string(g.objective.space)},
        {"num_counterfactuals", g.objective.num_counterfactuals}}},
      {"optimizer",
       {{"kind", g.optimizer.kind == OptimizerKind::Adam ? "adam" : "descent"},
        {"learning_rate", g.optimizer.learning_rate},
        {"beta1", g.optimizer.beta1},
        {"beta2", g.optimizer.beta2},
        {"epsilon", g.optimizer.epsilon}}},
      {"dropout", g.dropout},
      {"growing_spheres",
       {{"n_samples", g.spheres.n_samples},
        {"initial_radius", g.spheres.initial_radius},
        {"growth", g.spheres.growth},
        {"max_rounds", g.spheres.max_rounds}}},
      {"feature_tweak", {{"epsilon", g.tweak.epsilon}, {"cost", to_string(g.tweak.cost)}}}};
  j["greedy"] = g.greedy ? nlohmann::json{{"step", g.greedy->step}, {"cap", g.greedy->cap}} : nlohmann::json(nullptr);
  return j;
}

Generator generator_from_json(const nlohmann::json& j, AutoencoderPtr autoencoder) {
  try {
    if (!j.is_object()) throw ParseError("generator config must be a JSON object");
    PresetOptions opts;
    opts.autoencoder = autoencoder;
    const auto base_name = j.value("preset", std::string());
    Generator g;
    if (!base_name.empty()) {
      g = preset(base_name, opts);
    } else if (j.contains("kind") && j["kind"] == "growing_spheres") {
      g = growing_spheres_generator();
    } else if (j.contains("kind") && j["kind"] == "feature_tweak") {
      g = feature_tweak_generator();
    } else {
      g = gradient_generator("custom", {}, 1);
    }
    if (j.contains("objective")) {
      if (g.kind != GeneratorKind::Gradient && j["objective"].contains("penalties") &&
          !j["objective"]["penalties"].empty()) {
        throw ConfigError("generator '" + g.name + "' is not composable: penalties apply to gradient generators only");
      }
      const auto& o = j["objective"];
      std::optional<LossId> loss = g.objective.loss;
      if (o.contains("loss")) {
        const auto s = o["loss"].get<std::string>();
        loss = s == "auto" ? std::nullopt : std::optional<LossId>(parse_loss(s));
      }
      std::vector<std::pair<std::string, double>> penalties;
      if (o.contains("penalties")) {
        for (const auto& p : o["penalties"]) penalties.emplace_back(p.at("id").get<std::string>(), p.at("weight").get<double>());
      } else {
        for (const auto& p : g.objective.penalties) penalties.emplace_back(to_string(p.id), p.weight);
      }
      const auto space = o.contains("search_space") ? parse_search_space(o["search_space"].get<std::string>())
                                                    : g.objective.space;
      const int L = o.value("num_counterfactuals", g.objective.num_counterfactuals);
      g.objective = compose_objective(loss, penalties, space, L);
      if (g.objective.space == SearchSpace::Latent) {
        if (!autoencoder) throw ConfigError("latent search needs a trained autoencoder (train_autoencoder)");
        g.autoencoder = autoencoder;
      }
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      OptimizerConfig opt = g.optimizer;
      if (o.contains("kind")) {
        const auto k = o["kind"].get<std::string>();
        if (k == "adam") {
          opt.kind = OptimizerKind::Adam;
        } else if (k == "descent") {
          opt.kind = OptimizerKind::Descent;
        } else {
          throw ConfigError("unknown optimizer '" + k + "' (expected descent or adam)");
        }
      }
      opt.learning_rate = o.value("learning_rate", opt.learning_rate);
      opt.beta1 = o.value("beta1", opt.beta1);
      opt.beta2 = o.value("beta2", opt.beta2);
      opt.epsilon = o.value("epsilon", opt.epsilon);
      if (g.kind == GeneratorKind::Gradient) g = with_optimizer(std::move(g), opt);
    }
    if (j.contains("greedy") && !j["greedy"].is_null()) {
      GreedyOptions greedy;
      greedy.step = j["greedy"].value("step", greedy.step);
      greedy.cap = j["greedy"].value("cap", greedy.cap);
      if (!(greedy.step > 0.0) || greedy.cap < 1) throw ConfigError("greedy step must be positive and cap >= 1");
      g.greedy = greedy;
    }
    if (j.contains("dropout") && j["dropout"].get<double>() > 0.0) g = with_dropout(std::move(g), j["dropout"].get<double>());
    if (j.contains("growing_spheres") && g.kind == GeneratorKind::GrowingSpheres) {
      const auto& s = j["growing_spheres"];
      GrowingSpheresConfig cfg = g.spheres;
      cfg.n_samples = s.value("n_samples", cfg.n_samples);
      cfg.initial_radius = s.value("initial_radius", cfg.initial_radius);
      cfg.growth = s.value("growth", cfg.growth);
      cfg.max_rounds = s.value("max_rounds", cfg.max_rounds);
      const int L = g.objective.num_counterfactuals;
      g = growing_spheres_generator(cfg);
      g.objective.num_counterfactuals = L;
    }
    if (j.contains("feature_tweak") && g.kind == GeneratorKind::FeatureTweak) {
      const auto& s = j["feature_tweak"];
      FeatureTweakConfig cfg = g.tweak;
      cfg.epsilon = s.value("epsilon", cfg.epsilon);
      if (s.contains("cost")) cfg.cost = parse_norm(s["cost"].get<std::string>());
      g = feature_tweak_generator(cfg);
    }
    if (j.contains("name")) g.name = j["name"].get<std::string>();
    g.warnings = objective_warnings(g.objective);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed generator config: ") + e.what());
  }
}

}  // namespace recourse
