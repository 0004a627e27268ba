#ifndef RECOURSE_EVAL_HPP
#define RECOURSE_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "recourse/dataset.hpp"
#include "recourse/generator.hpp"
#include "recourse/models.hpp"
#include "recourse/search.hpp"

namespace recourse {

inline constexpr int kDefaultNeighbours = 5;

enum class Measure { Validity, DistanceL0, DistanceL1, DistanceL2, DistanceLinf, DistanceMad, Plausibility };

std::string to_string(Measure m);
Measure parse_measure(std::string_view s);
/// Validity plus every distance and plausibility.
std::vector<Measure> all_measures();

struct ValidityResult {
  /// True only when every counterfactual is classified as the target.
  bool valid = false;
  double fraction = 0.0;
};

ValidityResult validity(const ExplanationState& es, const Model& m);

/// Mean Euclidean distance from `cf` to its k nearest rows labelled `target`.
double plausibility(const Eigen::VectorXd& cf, const Dataset& d, int target, int k = kDefaultNeighbours);
/// Averaged over the L counterfactuals.
double plausibility(const ExplanationState& es, const Dataset& d, int k = kDefaultNeighbours);

struct EvaluationRow {
  bool valid = false;
  double validity_fraction = 0.0;
  std::map<Measure, double> values;
  int iterations = 0;
  StopReason reason = StopReason::MaxIter;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;
};

struct EvaluationReport {
  std::vector<Measure> measures;
  std::vector<EvaluationRow> rows;
  std::map<Measure, Aggregate> aggregates;
};

/// Validity is always reported. Distances and plausibility are averaged over L per explanation.
EvaluationReport evaluate(const std::vector<ExplanationState>& explanations, const Model& m, const Dataset& d,
                          const std::vector<Measure>& measures, int k = kDefaultNeighbours);
EvaluationReport evaluate(const ExplanationState& es, const Model& m, const Dataset& d,
                          const std::vector<Measure>& measures, int k = kDefaultNeighbours);

std::string report_csv(const EvaluationReport& r);
nlohmann::json to_json(const EvaluationReport& r);

struct BenchmarkModel {
  std::string id;
  ModelPtr model;
};

struct BenchmarkSpec {
  std::string dataset_id = "data";
  std::vector<BenchmarkModel> models;
  std::vector<Generator> generators;
  int n_samples = 10;
  std::uint64_t seed = 0;
  /// 1-based target label.
  int target = 2;
  int k = kDefaultNeighbours;
  SearchOptions search;
  int threads = 1;
};

struct BenchmarkRow {
  std::string dataset;
  std::string model;
  std::string generator;
  /// Row index of the factual in the data set.
  Eigen::Index sample = 0;
  std::uint64_t seed = 0;
  bool skipped = false;
  std::string note;
  double validity = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double mad = 0.0;
  double plausibility = 0.0;
  int iterations = 0;
  std::string reason;
};

/// Rows whose prediction under `m` differs from `target`, shuffled with `seed`, first n kept.
std::vector<Eigen::Index> draw_factuals(const Dataset& d, const Model& m, int target, int n, std::uint64_t seed);

/// Runs every generator on every drawn factual for every model. Incompatible pairs become
/// skipped rows. Output order is model, generator, sample and does not depend on `threads`.
std::vector<BenchmarkRow> benchmark(const Dataset& d, const BenchmarkSpec& spec);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
nlohmann::json benchmark_json(const std::vector<BenchmarkRow>& rows);

struct TradeoffEntry {
  std::string model;
  std::string generator;
  int runs = 0;
  double validity = 0.0;
  double cost = 0.0;
  double implausibility = 0.0;
};

/// Mean l1 cost and implausibility per (model, generator). Skipped rows are excluded and
/// pairs without a single run are dropped.
std::vector<TradeoffEntry> tradeoff_summary(const std::vector<BenchmarkRow>& rows);
std::string tradeoff_csv(const std::vector<TradeoffEntry>& entries);

}  // namespace recourse

#endif  // RECOURSE_EVAL_HPP
