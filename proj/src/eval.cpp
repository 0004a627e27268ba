#include "recourse/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"
#include "recourse/penalties.hpp"

namespace recourse {

std::string to_string(Measure m) {
  switch (m) {
    case Measure::Validity: return "validity";
    case Measure::DistanceL0: return "distance_l0";
    case Measure::DistanceL1: return "distance_l1";
    case Measure::DistanceL2: return "distance_l2";
    case Measure::DistanceLinf: return "distance_linf";
    case Measure::DistanceMad: return "distance_mad";
    case Measure::Plausibility: return "plausibility";
  }
  return "";
}

std::vector<Measure> all_measures() {
  return {Measure::Validity,     Measure::DistanceL0,  Measure::DistanceL1,  Measure::DistanceL2,
          Measure::DistanceLinf, Measure::DistanceMad, Measure::Plausibility};
}

Measure parse_measure(std::string_view s) {
  for (auto m : all_measures()) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown measure '" + std::string(s) + "'");
}

ValidityResult validity(const ExplanationState& es, const Model& m) {
  if (es.counterfactuals.rows() == 0) return {};
  const auto labels = m.predict_labels(es.counterfactuals.transpose());
  const auto hits = std::count(labels.begin(), labels.end(), es.target);
  const auto L = static_cast<double>(labels.size());
  return {hits == static_cast<long>(labels.size()), static_cast<double>(hits) / L};
}

double plausibility(const Eigen::VectorXd& cf, const Dataset& d, int target, int k) {
  if (k < 1) throw ConfigError("plausibility needs k >= 1");
  if (cf.size() != d.dims()) throw DimensionError("counterfactual does not match the data dimension");
  const auto rows = d.rows_with_label(target);
  if (static_cast<int>(rows.size()) < k) {
    throw ConfigError("plausibility with k = " + std::to_string(k) + " but the target class has only " +
                      std::to_string(rows.size()) + " rows");
  }
  std::vector<double> dist;
  dist.reserve(rows.size());
  for (auto r : rows) dist.push_back((d.X().row(r).transpose() - cf).norm());
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += dist[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(k);
}

double plausibility(const ExplanationState& es, const Dataset& d, int k) {
  double sum = 0.0;
  for (Eigen::Index l = 0; l < es.counterfactuals.rows(); ++l) {
    sum += plausibility(es.counterfactual(l), d, es.target, k);
  }
  return sum / static_cast<double>(es.counterfactuals.rows());
}

namespace {

double mean_distance(const ExplanationState& es, Norm norm, const Eigen::VectorXd* mad) {
  double sum = 0.0;
  for (Eigen::Index l = 0; l < es.counterfactuals.rows(); ++l) sum += distance(es.counterfactual(l), es.factual, norm, mad);
  return sum / static_cast<double>(es.counterfactuals.rows());
}

Eigen::VectorXd mad_of(const Dataset& d) { return d.mad() ? *d.mad() : mad_statistics(d); }

}  // namespace

EvaluationReport evaluate(const std::vector<ExplanationState>& explanations, const Model& m, const Dataset& d,
                          const std::vector<Measure>& measures, int k) {
  EvaluationReport r;
  r.measures.push_back(Measure::Validity);
  for (auto ms : measures) {
    if (std::find(r.measures.begin(), r.measures.end(), ms) == r.measures.end()) r.measures.push_back(ms);
  }
  const bool need_mad = std::find(r.measures.begin(), r.measures.end(), Measure::DistanceMad) != r.measures.end();
  const Eigen::VectorXd mad = need_mad ? mad_of(d) : Eigen::VectorXd();
  for (const auto& es : explanations) {
    if (es.counterfactuals.rows() == 0) throw ConfigError("explanation holds no counterfactuals");
    EvaluationRow row;
    const auto v = validity(es, m);
    row.valid = v.valid;
    row.validity_fraction = v.fraction;
    row.iterations = es.iterations;
    row.reason = es.reason;
    for (auto ms : r.measures) {
      switch (ms) {
        case Measure::Validity: row.values[ms] = v.fraction; break;
        case Measure::DistanceL0: row.values[ms] = mean_distance(es, Norm::L0, nullptr); break;
        case Measure::DistanceL1: row.values[ms] = mean_distance(es, Norm::L1, nullptr); break;
        case Measure::DistanceL2: row.values[ms] = mean_distance(es, Norm::L2, nullptr); break;
        case Measure::DistanceLinf: row.values[ms] = mean_distance(es, Norm::Linf, nullptr); break;
        case Measure::DistanceMad: row.values[ms] = mean_distance(es, Norm::Mad, &mad); break;
        case Measure::Plausibility: row.values[ms] = plausibility(es, d, k); break;
      }
    }
    r.rows.push_back(std::move(row));
  }
  if (!r.rows.empty()) {
    const auto n = static_cast<double>(r.rows.size());
    for (auto ms : r.measures) {
      double sum = 0.0;
      for (const auto& row : r.rows) sum += row.values.at(ms);
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& row : r.rows) ss += (row.values.at(ms) - mean) * (row.values.at(ms) - mean);
      r.aggregates[ms] = {mean, std::sqrt(ss / n)};
    }
  }
  return r;
}

EvaluationReport evaluate(const ExplanationState& es, const Model& m, const Dataset& d,
                          const std::vector<Measure>& measures, int k) {
  return evaluate(std::vector<ExplanationState>{es}, m, d, measures, k);
}

std::string report_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "index,valid";
  for (auto ms : r.measures) os << ',' << to_string(ms);
  os << ",iterations,reason\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    os << i << ',' << (row.valid ? 1 : 0);
    for (auto ms : r.measures) os << ',' << format_double(row.values.at(ms));
    os << ',' << row.iterations << ',' << to_string(row.reason) << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const EvaluationReport& r) {
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j = {{"valid", row.valid},
                        {"validity_fraction", row.validity_fraction},
                        {"iterations", row.iterations},
                        {"converged_reason", to_string(row.reason)}};
    for (const auto& [ms, v] : row.values) j[to_string(ms)] = v;
    rows.push_back(std::move(j));
  }
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [ms, a] : r.aggregates) agg[to_string(ms)] = {{"mean", a.mean}, {"std", a.std}};
  auto names = nlohmann::json::array();
  for (auto ms : r.measures) names.push_back(to_string(ms));
  return {{"measures", std::move(names)}, {"rows", std::move(rows)}, {"aggregates", std::move(agg)}};
}

std::vector<Eigen::Index> draw_factuals(const Dataset& d, const Model& m, int target, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("number of samples must be at least 1");
  const auto labels = m.predict_labels(d.X().transpose());
  std::vector<Eigen::Index> pool;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != target) pool.push_back(static_cast<Eigen::Index>(i));
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(pool[i - 1], pool[pick(rng)]);
  }
  if (static_cast<int>(pool.size()) > n) pool.resize(static_cast<std::size_t>(n));
  return pool;
}

std::vector<BenchmarkRow> benchmark(const Dataset& d, const BenchmarkSpec& spec) {
  if (spec.models.empty() || spec.generators.empty()) throw ConfigError("benchmark needs at least one model and generator");
  struct Cell {
    std::size_t model;
    std::size_t generator;
    Eigen::Index sample;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
    const auto& bm = spec.models[mi];
    if (!bm.model) throw ConfigError("benchmark model '" + bm.id + "' is empty");
    if (spec.target < 1 || spec.target > bm.model->n_classes()) {
      throw ConfigError("target label " + std::to_string(spec.target) + " is outside the classes of model '" + bm.id + "'");
    }
    const auto samples = draw_factuals(d, *bm.model, spec.target, spec.n_samples, spec.seed);
    for (std::size_t gi = 0; gi < spec.generators.size(); ++gi) {
      for (auto s : samples) cells.push_back({mi, gi, s});
    }
  }
  const Eigen::VectorXd mad = mad_of(d);
  std::vector<BenchmarkRow> rows(cells.size());

  auto run_cell = [&](std::size_t i) {
    const auto& c = cells[i];
    const auto& bm = spec.models[c.model];
    const auto& gen = spec.generators[c.generator];
    BenchmarkRow row;
    row.dataset = spec.dataset_id;
    row.model = bm.id;
    row.generator = gen.name;
    row.sample = c.sample;
    row.seed = spec.seed + static_cast<std::uint64_t>(c.sample);
    SearchOptions opts = spec.search;
    opts.seed = row.seed;
    try {
      const auto es = generate_counterfactual(d.X().row(c.sample).transpose(), spec.target, d, *bm.model, gen, opts);
      row.validity = validity(es, *bm.model).fraction;
      row.l0 = mean_distance(es, Norm::L0, nullptr);
      row.l1 = mean_distance(es, Norm::L1, nullptr);
      row.l2 = mean_distance(es, Norm::L2, nullptr);
      row.linf = mean_distance(es, Norm::Linf, nullptr);
      row.mad = mean_distance(es, Norm::Mad, &mad);
      row.plausibility = plausibility(es, d, spec.k);
      row.iterations = es.iterations;
      row.reason = to_string(es.reason);
    } catch (const CapabilityError& e) {
      row.skipped = true;
      row.reason = "skipped";
      row.note = e.what();
    } catch (const ConfigError& e) {
      row.skipped = true;
      row.reason = "skipped";
      row.note = e.what();
    } catch (const Error& e) {
      row.skipped = true;
      row.reason = "error";
      row.note = e.what();
    }
    rows[i] = std::move(row);
  };

  const int threads = std::max(1, spec.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream os;
  os << "dataset,model,generator,sample,seed,validity,l0,l1,l2,linf,mad,plausibility,iterations,reason\n";
  for (const auto& r : rows) {
    os << r.dataset << ',' << r.model << ',' << r.generator << ',' << r.sample << ',' << r.seed << ',';
    if (r.skipped) {
      os << ",,,,,,,,," << r.reason << '\n';
      continue;
    }
    os << format_double(r.validity) << ',' << format_double(r.l0) << ',' << format_double(r.l1) << ','
       << format_double(r.l2) << ',' << format_double(r.linf) << ',' << format_double(r.mad) << ','
       << format_double(r.plausibility) << ',' << r.iterations << ',' << r.reason << '\n';
  }
  return os.str();
}

nlohmann::json benchmark_json(const std::vector<BenchmarkRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"dataset", r.dataset},   {"model", r.model}, {"generator", r.generator},
                        {"sample", r.sample},     {"seed", r.seed},   {"skipped", r.skipped},
                        {"reason", r.reason}};
    if (r.skipped) {
      j["note"] = r.note;
    } else {
      j.update({{"validity", r.validity},
                {"l0", r.l0},
                {"l1", r.l1},
                {"l2", r.l2},
                {"linf", r.linf},
                {"mad", r.mad},
                {"plausibility", r.plausibility},
                {"iterations", r.iterations}});
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<TradeoffEntry> tradeoff_summary(const std::vector<BenchmarkRow>& rows) {
  std::vector<TradeoffEntry> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const TradeoffEntry& e) { return e.model == r.model && e.generator == r.generator; });
    if (it == out.end()) {
      out.push_back({r.model, r.generator});
      it = out.end() - 1;
    }
    if (r.skipped) continue;
    ++it->runs;
    it->validity += r.validity;
    it->cost += r.l1;
    it->implausibility += r.plausibility;
  }
  std::erase_if(out, [](const TradeoffEntry& e) { return e.runs == 0; });
  for (auto& e : out) {
    const auto n = static_cast<double>(e.runs);
    e.validity /= n;
    e.cost /= n;
    e.implausibility /= n;
  }
  return out;
}

std::string tradeoff_csv(const std::vector<TradeoffEntry>& entries) {
  std::ostringstream os;
  os << "model,generator,runs,validity,cost,implausibility\n";
  for (const auto& e : entries) {
    os << e.model << ',' << e.generator << ',' << e.runs << ',' << format_double(e.validity) << ','
       << format_double(e.cost) << ',' << format_double(e.implausibility) << '\n';
  }
  return os.str();
}

}  // namespace recourse
