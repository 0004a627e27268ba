#include "recourse/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"

namespace recourse {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::ThresholdReached: return "threshold_reached";
    case StopReason::MaxIter: return "max_iter";
    case StopReason::StepBelowTau: return "step_below_tau";
    case StopReason::FeaturesExhausted: return "features_exhausted";
    case StopReason::SearchComplete: return "search_complete";
    case StopReason::NoCandidate: return "no_candidate";
    case StopReason::MaxRounds: return "max_rounds";
  }
  return "";
}

StopReason parse_stop_reason(std::string_view s) {
  for (auto r : {StopReason::ThresholdReached, StopReason::MaxIter, StopReason::StepBelowTau,
                 StopReason::FeaturesExhausted, StopReason::SearchComplete, StopReason::NoCandidate,
                 StopReason::MaxRounds}) {
    if (to_string(r) == s) return r;
  }
  throw ParseError("unknown stop reason '" + std::string(s) + "'");
}

std::string to_string(ConvergenceCheck c) {
  switch (c) {
    case ConvergenceCheck::ThresholdReached: return "threshold_reached";
    case ConvergenceCheck::MaxIter: return "max_iter";
    case ConvergenceCheck::StepBelowTau: return "step_below_tau";
  }
  return "";
}

ConvergenceCheck parse_convergence_check(std::string_view s) {
  for (auto c : {ConvergenceCheck::ThresholdReached, ConvergenceCheck::MaxIter, ConvergenceCheck::StepBelowTau}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown convergence check '" + std::string(s) +
                    "' (expected threshold_reached, max_iter or step_below_tau)");
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
  if (!(cfg_.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

Eigen::MatrixXd Optimizer::step(const Eigen::MatrixXd& grad) {
  if (cfg_.kind == OptimizerKind::Descent) return -cfg_.learning_rate * grad;
  if (m_.rows() != grad.rows() || m_.cols() != grad.cols()) {
    m_ = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
    v_ = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
    t_ = 0;
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  const Eigen::MatrixXd mhat = m_ / c1;
  const Eigen::MatrixXd vhat = v_ / c2;
  return -cfg_.learning_rate * (mhat.array() / (vhat.array().sqrt() + cfg_.epsilon)).matrix();
}

Eigen::MatrixXd apply_mutability(const Eigen::MatrixXd& delta, std::span<const Mutability> tags,
                                 const Eigen::VectorXd& factual, const Eigen::MatrixXd& current) {
  if (static_cast<Eigen::Index>(tags.size()) != delta.cols() || factual.size() != delta.cols() ||
      current.rows() != delta.rows() || current.cols() != delta.cols()) {
    throw DimensionError("mutability tags, factual and perturbation disagree in size");
  }
  Eigen::MatrixXd out = delta;
  for (Eigen::Index j = 0; j < delta.cols(); ++j) {
    for (Eigen::Index l = 0; l < delta.rows(); ++l) {
      const double floor = factual(j) - current(l, j);
      switch (tags[static_cast<std::size_t>(j)]) {
        case Mutability::Both: break;
        case Mutability::None: out(l, j) = 0.0; break;
        case Mutability::Increase: out(l, j) = std::max(out(l, j), floor); break;
        case Mutability::Decrease: out(l, j) = std::min(out(l, j), floor); break;
      }
    }
  }
  return out;
}

void enforce_mutability(Eigen::MatrixXd& states, std::span<const Mutability> tags, const Eigen::VectorXd& factual) {
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    for (Eigen::Index l = 0; l < states.rows(); ++l) {
      switch (tags[static_cast<std::size_t>(j)]) {
        case Mutability::Both: break;
        case Mutability::None: states(l, j) = factual(j); break;
        case Mutability::Increase: states(l, j) = std::max(states(l, j), factual(j)); break;
        case Mutability::Decrease: states(l, j) = std::min(states(l, j), factual(j)); break;
      }
    }
  }
}

GreedyStep greedy_perturbation(const Eigen::MatrixXd& gradient, std::span<const Mutability> tags,
                               const GreedyOptions& opts, Eigen::MatrixXi& hits) {
  if (static_cast<Eigen::Index>(tags.size()) != gradient.cols()) {
    throw DimensionError("mutability tags do not match the gradient width");
  }
  if (hits.rows() != gradient.rows() || hits.cols() != gradient.cols()) {
    hits = Eigen::MatrixXi::Zero(gradient.rows(), gradient.cols());
  }
  GreedyStep out{Eigen::MatrixXd::Zero(gradient.rows(), gradient.cols()), true};
  for (Eigen::Index l = 0; l < gradient.rows(); ++l) {
    Eigen::Index best = -1;
    double best_mag = 0.0;
    for (Eigen::Index j = 0; j < gradient.cols(); ++j) {
      const double g = gradient(l, j);
      if (g == 0.0 || hits(l, j) >= opts.cap) continue;
      const auto tag = tags[static_cast<std::size_t>(j)];
      if (tag == Mutability::None) continue;
      // descent moves against the gradient
      if (tag == Mutability::Increase && g > 0.0) continue;
      if (tag == Mutability::Decrease && g < 0.0) continue;
      if (std::abs(g) > best_mag) {
        best_mag = std::abs(g);
        best = j;
      }
    }
    if (best < 0) continue;
    out.exhausted = false;
    out.delta(l, best) = gradient(l, best) > 0.0 ? -opts.step : opts.step;
    ++hits(l, best);
  }
  return out;
}

void apply_dropout(Eigen::MatrixXd& delta, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return;
  const auto k = static_cast<Eigen::Index>(std::lround(p * static_cast<double>(delta.cols())));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(delta.cols()));
  for (Eigen::Index l = 0; l < delta.rows(); ++l) {
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    // partial Fisher-Yates: the first k entries are a uniform sample without replacement
    for (Eigen::Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, delta.cols() - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
      delta(l, idx[static_cast<std::size_t>(i)]) = 0.0;
    }
  }
}

namespace {

bool all_reached(const Model& m, const Eigen::MatrixXd& decoded, int target, double gamma) {
  const Eigen::MatrixXd P = m.probs(Eigen::MatrixXd(decoded.transpose()));
  for (Eigen::Index l = 0; l < P.cols(); ++l) {
    if (P(target - 1, l) < gamma) return false;
  }
  return true;
}

void validate(const ConvergenceConfig& c) {
  if (!(c.decision_threshold > 0.0 && c.decision_threshold <= 1.0)) {
    throw ConfigError("decision threshold must lie in (0, 1]");
  }
  if (c.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(c.min_step > 0.0)) throw ConfigError("min_step must be positive");
}

std::vector<Mutability> tags_for(const Dataset& data, Eigen::Index dims) {
  std::vector<Mutability> tags(data.mutability().begin(), data.mutability().end());
  if (static_cast<Eigen::Index>(tags.size()) != dims) tags.assign(static_cast<std::size_t>(dims), Mutability::Both);
  return tags;
}

ExplanationState gradient_search(const Eigen::VectorXd& x, int target, const Dataset& data, const Model& model,
                                 const Generator& gen, const SearchOptions& opts, int L) {
  if (!model.differentiable()) {
    throw CapabilityError("generator '" + gen.name + "' is gradient-based and needs a differentiable model; '" +
                          model.kind() + "' models are supported by growing_spheres (any model) or feature_tweak (trees)");
  }
  const auto tags = tags_for(data, x.size());
  const bool latent = gen.objective.space == SearchSpace::Latent;
  if (latent && std::any_of(tags.begin(), tags.end(), [](Mutability m) { return m != Mutability::Both; })) {
    throw ConfigError("mutability constraints are not supported for latent-space search");
  }
  Objective obj = gen.objective;
  obj.num_counterfactuals = L;
  const Autoencoder* ae = gen.autoencoder.get();
  ObjectiveEvaluator ev(obj, model, data, x, target, ae);

  ExplanationState es;
  es.factual = x;
  es.target = target;
  es.space = obj.space;
  es.generator = gen.name;
  es.warnings = objective_warnings(obj);

  std::mt19937_64 rng(opts.seed);
  const Eigen::VectorXd s0 = latent ? ae->encode(x) : x;
  Eigen::MatrixXd s = s0.transpose().replicate(L, 1);
  const double noise = opts.init_noise.value_or(L > 1 ? 0.1 : 0.0);
  if (noise < 0.0) throw ConfigError("init_noise must be non-negative");
  if (noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise);
    for (Eigen::Index l = 0; l < s.rows(); ++l) {
      for (Eigen::Index j = 0; j < s.cols(); ++j) {
        if (!latent && tags[static_cast<std::size_t>(j)] == Mutability::None) continue;
        s(l, j) += gauss(rng);
      }
    }
  }
  if (!latent) enforce_mutability(s, tags, x);

  const auto& conv = opts.convergence;
  Optimizer opt(gen.optimizer);
  Eigen::MatrixXi hits;
  const std::vector<Mutability> free_tags(static_cast<std::size_t>(s.cols()), Mutability::Both);
  Eigen::MatrixXd decoded = ev.decode(s);
  es.path.push_back(decoded);
  const bool check_threshold = conv.check != ConvergenceCheck::MaxIter;
  int iter = 0;
  while (true) {
    if (check_threshold && all_reached(model, decoded, target, conv.decision_threshold)) {
      es.reason = StopReason::ThresholdReached;
      break;
    }
    if (iter >= conv.max_iter) {
      es.reason = StopReason::MaxIter;
      break;
    }
    const Eigen::MatrixXd grad = ev.gradient(s);
    Eigen::MatrixXd delta;
    if (gen.greedy) {
      auto step = greedy_perturbation(grad, latent ? free_tags : tags, *gen.greedy, hits);
      if (step.exhausted) {
        es.reason = StopReason::FeaturesExhausted;
        break;
      }
      delta = std::move(step.delta);
    } else {
      delta = opt.step(grad);
    }
    apply_dropout(delta, gen.dropout, rng);
    if (!latent) delta = apply_mutability(delta, tags, x, s);
    s += delta;
    if (!latent) enforce_mutability(s, tags, x);
    if (!s.allFinite()) {
      throw NumericError("search state became non-finite at iteration " + std::to_string(iter + 1) +
                         "; try a smaller learning rate");
    }
    ++iter;
    decoded = ev.decode(s);
    es.path.push_back(decoded);
    if (conv.check == ConvergenceCheck::StepBelowTau && delta.cwiseAbs().maxCoeff() < conv.min_step) {
      es.reason = StopReason::StepBelowTau;
      break;
    }
  }
  es.iterations = iter;
  es.states = s;
  es.counterfactuals = decoded;
  return es;
}

}  // namespace

ExplanationState generate_counterfactual(const Eigen::VectorXd& x, int target, const Dataset& data, const Model& model,
                                         const Generator& generator, const SearchOptions& opts) {
  if (x.size() != model.input_dim()) throw DimensionError("factual does not match the model input dimension");
  if (x.size() != data.dims()) throw DimensionError("factual does not match the data dimension");
  if (target < 1 || target > model.n_classes()) {
    throw ConfigError("target label " + std::to_string(target) + " is outside 1.." + std::to_string(model.n_classes()));
  }
  validate(opts.convergence);
  if (opts.num_counterfactuals < 0) throw ConfigError("num_counterfactuals must be positive");
  const int L = opts.num_counterfactuals > 0 ? opts.num_counterfactuals : generator.objective.num_counterfactuals;
  if (L < 1) throw ConfigError("num_counterfactuals must be at least 1");

  std::vector<std::string> warnings = generator.warnings;
  if (model.predict_label(x) == target) {
    warnings.push_back("factual is already classified as the target label");
  }

  ExplanationState es;
  switch (generator.kind) {
    case GeneratorKind::Gradient: es = gradient_search(x, target, data, model, generator, opts, L); break;
    case GeneratorKind::GrowingSpheres:
      es = growing_spheres(x, target, model, tags_for(data, x.size()), generator.spheres, L, opts.seed);
      break;
    case GeneratorKind::FeatureTweak: {
      const auto* trees = dynamic_cast<const TreeModel*>(&model);
      if (trees == nullptr) {
        throw CapabilityError("feature_tweak only works with tree-based models (tree or forest), got '" +
                              model.kind() + "'");
      }
      const Eigen::VectorXd mad = data.mad() ? *data.mad() : mad_statistics(data);
      es = feature_tweak(x, target, *trees, tags_for(data, x.size()), generator.tweak, &mad);
      break;
    }
  }
  es.generator = generator.name;
  for (auto& w : es.warnings) warnings.push_back(std::move(w));
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  es.warnings = std::move(warnings);
  return es;
}

double total_objective(const Objective& obj, const ExplanationState& es, const Model& m, const Dataset& d,
                       const Autoencoder* autoencoder) {
  return ObjectiveEvaluator(obj, m, d, es.factual, es.target, autoencoder).value(es.states);
}

Eigen::MatrixXd objective_gradient(const Objective& obj, const ExplanationState& es, const Model& m, const Dataset& d,
                                   const Autoencoder* autoencoder) {
  return ObjectiveEvaluator(obj, m, d, es.factual, es.target, autoencoder).gradient(es.states);
}

nlohmann::json to_json(const ExplanationState& es) {
  auto path = nlohmann::json::array();
  for (const auto& p : es.path) path.push_back(matrix_to_json(p));
  return {{"factual", vector_to_json(es.factual)},
          {"target", es.target},
          {"search_space", to_string(es.space)},
          {"generator", es.generator},
          {"states", matrix_to_json(es.states)},
          {"counterfactuals", matrix_to_json(es.counterfactuals)},
          {"path", std::move(path)},
          {"converged_reason", to_string(es.reason)},
          {"iterations", es.iterations},
          {"warnings", es.warnings}};
}

ExplanationState explanation_from_json(const nlohmann::json& j) {
  try {
    ExplanationState es;
    es.factual = vector_from_json(j.at("factual"));
    es.target = j.at("target").get<int>();
    es.space = parse_search_space(j.value("search_space", std::string("feature")));
    es.generator = j.value("generator", std::string());
    es.counterfactuals = matrix_from_json(j.at("counterfactuals"));
    es.states = j.contains("states") ? matrix_from_json(j["states"]) : es.counterfactuals;
    for (const auto& p : j.at("path")) es.path.push_back(matrix_from_json(p));
    es.reason = parse_stop_reason(j.at("converged_reason").get<std::string>());
    es.iterations = j.at("iterations").get<int>();
    if (j.contains("warnings")) es.warnings = j["warnings"].get<std::vector<std::string>>();
    return es;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed explanation: ") + e.what());
  }
}

}  // namespace recourse
