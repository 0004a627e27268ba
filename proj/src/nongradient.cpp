#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <random>

#include "recourse/errors.hpp"
#include "recourse/penalties.hpp"
#include "recourse/search.hpp"

namespace recourse {

namespace {

ExplanationState trivial_state(const Eigen::VectorXd& x, int target, int L, StopReason reason) {
  ExplanationState es;
  es.factual = x;
  es.target = target;
  es.counterfactuals = x.transpose().replicate(L, 1);
  es.states = es.counterfactuals;
  es.path = {es.counterfactuals};
  es.reason = reason;
  es.iterations = 0;
  return es;
}

/// Uniform sample in the shell a <= ||z|| <= b of dimension D.
Eigen::VectorXd sample_shell(Eigen::Index D, double a, double b, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd dir(D);
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < D; ++j) dir(j) = gauss(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  const double d = static_cast<double>(D);
  const double lo = std::pow(a, d);
  const double hi = std::pow(b, d);
  const double r = std::pow(lo + unif(rng) * (hi - lo), 1.0 / d);
  return dir * (r / norm);
}

void project(Eigen::VectorXd& cand, const Eigen::VectorXd& x, std::span<const Mutability> tags) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = std::abs(cand(j) - x(j));
    switch (tags[static_cast<std::size_t>(j)]) {
      case Mutability::Both: break;
      case Mutability::None: cand(j) = x(j); break;
      case Mutability::Increase: cand(j) = x(j) + step; break;
      case Mutability::Decrease: cand(j) = x(j) - step; break;
    }
  }
}

Eigen::VectorXd sparsify(Eigen::VectorXd cand, const Eigen::VectorXd& x, int target, const Model& model) {
  while (true) {
    Eigen::Index best = -1;
    double best_mag = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double mag = std::abs(cand(j) - x(j));
      if (mag > 0.0 && mag < best_mag) {
        best_mag = mag;
        best = j;
      }
    }
    if (best < 0) return cand;
    Eigen::VectorXd trial = cand;
    trial(best) = x(best);
    if (model.predict_label(trial) != target) return cand;
    cand = std::move(trial);
  }
}

bool admissible(const Eigen::VectorXd& cand, const Eigen::VectorXd& x, std::span<const Mutability> tags) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    switch (tags[static_cast<std::size_t>(j)]) {
      case Mutability::Both: break;
      case Mutability::None:
        if (cand(j) != x(j)) return false;
        break;
      case Mutability::Increase:
        if (cand(j) < x(j)) return false;
        break;
      case Mutability::Decrease:
        if (cand(j) > x(j)) return false;
        break;
    }
  }
  return true;
}

struct Condition {
  int feature;
  double threshold;
  bool left;
};

int argmax_label(const Eigen::VectorXd& p) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p(k) > p(best)) best = k;
  }
  return static_cast<int>(best) + 1;
}

}  // namespace

ExplanationState growing_spheres(const Eigen::VectorXd& x, int target, const Model& model,
                                 std::span<const Mutability> tags, const GrowingSpheresConfig& cfg, int L,
                                 std::uint64_t seed) {
  if (static_cast<Eigen::Index>(tags.size()) != x.size()) throw DimensionError("mutability tags do not match x");
  if (L < 1) throw ConfigError("num_counterfactuals must be at least 1");
  if (model.predict_label(x) == target) return trivial_state(x, target, L, StopReason::SearchComplete);

  std::mt19937_64 rng(seed);
  const Eigen::Index D = x.size();
  double inner = 0.0;
  double outer = cfg.initial_radius;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    Eigen::MatrixXd cands(D, cfg.n_samples);
    for (int i = 0; i < cfg.n_samples; ++i) {
      Eigen::VectorXd c = x + sample_shell(D, inner, outer, rng);
      project(c, x, tags);
      cands.col(i) = c;
    }
    const auto labels = model.predict_labels(cands);
    std::vector<std::pair<double, int>> hits;
    for (int i = 0; i < cfg.n_samples; ++i) {
      if (labels[static_cast<std::size_t>(i)] == target) hits.emplace_back((cands.col(i) - x).norm(), i);
    }
    if (!hits.empty()) {
      std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      ExplanationState es;
      es.factual = x;
      es.target = target;
      es.counterfactuals.resize(L, D);
      Eigen::MatrixXd raw(L, D);
      for (int l = 0; l < L; ++l) {
        // fewer hits than L: reuse the closest ones cyclically
        const auto& h = hits[static_cast<std::size_t>(l) % hits.size()];
        raw.row(l) = cands.col(h.second).transpose();
        es.counterfactuals.row(l) = sparsify(cands.col(h.second), x, target, model).transpose();
      }
      if (hits.size() < static_cast<std::size_t>(L)) {
        es.warnings.push_back("growing_spheres found fewer target-class samples than num_counterfactuals");
      }
      es.states = es.counterfactuals;
      es.path = {x.transpose().replicate(L, 1), raw, es.counterfactuals};
      es.iterations = 2;
      es.reason = StopReason::SearchComplete;
      return es;
    }
    inner = outer;
    outer *= cfg.growth;
  }
  return trivial_state(x, target, L, StopReason::MaxRounds);
}

ExplanationState feature_tweak(const Eigen::VectorXd& x, int target, const TreeModel& model,
                               std::span<const Mutability> tags, const FeatureTweakConfig& cfg,
                               const Eigen::VectorXd* mad) {
  if (static_cast<Eigen::Index>(tags.size()) != x.size()) throw DimensionError("mutability tags do not match x");
  if (model.predict_label(x) == target) return trivial_state(x, target, 1, StopReason::SearchComplete);

  std::optional<Eigen::VectorXd> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& tree : model.trees()) {
    const auto& nodes = tree.nodes();
    std::vector<std::pair<int, std::vector<Condition>>> stack{{0, {}}};
    while (!stack.empty()) {
      auto [id, path] = std::move(stack.back());
      stack.pop_back();
      const auto& node = nodes[static_cast<std::size_t>(id)];
      if (!node.is_leaf()) {
        auto right = path;
        right.push_back({node.feature, node.threshold, false});
        stack.emplace_back(node.right, std::move(right));
        path.push_back({node.feature, node.threshold, true});
        stack.emplace_back(node.left, std::move(path));
        continue;
      }
      if (argmax_label(node.class_probs) != target) continue;
      Eigen::VectorXd cand = x;
      for (const auto& c : path) cand(c.feature) = c.left ? c.threshold - cfg.epsilon : c.threshold + cfg.epsilon;
      if (!admissible(cand, x, tags) || model.predict_label(cand) != target) continue;
      const double cost = distance(cand, x, cfg.cost, mad);
      if (cost < best_cost) {
        best_cost = cost;
        best = std::move(cand);
      }
    }
  }
  if (!best) return trivial_state(x, target, 1, StopReason::NoCandidate);
  ExplanationState es;
  es.factual = x;
  es.target = target;
  es.counterfactuals = best->transpose();
  es.states = es.counterfactuals;
  es.path = {Eigen::MatrixXd(x.transpose()), es.counterfactuals};
  es.iterations = 1;
  es.reason = StopReason::SearchComplete;
  return es;
}

}  // namespace recourse
