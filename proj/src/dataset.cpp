#include "recourse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "recourse/errors.hpp"

namespace recourse {

std::string to_string(Mutability tag) {
  switch (tag) {
    case Mutability::Both: return "both";
    case Mutability::Increase: return "increase";
    case Mutability::Decrease: return "decrease";
    case Mutability::None: return "none";
  }
  return "both";
}

Mutability parse_mutability(std::string_view text) {
  std::string s(text);
  if (!s.empty() && s.front() == ':') s.erase(s.begin());
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "both") return Mutability::Both;
  if (s == "increase") return Mutability::Increase;
  if (s == "decrease") return Mutability::Decrease;
  if (s == "none") return Mutability::None;
  throw ConfigError("unknown mutability tag '" + std::string(text) +
                    "' (expected both, increase, decrease or none)");
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  return ((x - mean).array() / scale.array()).matrix();
}

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& z) const {
  return (z.array() * scale.array()).matrix() + mean;
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& X) const {
  return ((X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Eigen::MatrixXd Standardizer::invert_rows(const Eigen::MatrixXd& Z) const {
  return (Z.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose();
}

Dataset::Dataset(Eigen::MatrixXd X, std::vector<int> y, std::vector<std::string> feature_names)
    : X_(std::move(X)), y_(std::move(y)), feature_names_(std::move(feature_names)) {
  if (static_cast<std::size_t>(X_.rows()) != y_.size()) {
    throw DimensionError("dataset has " + std::to_string(X_.rows()) + " rows but " +
                         std::to_string(y_.size()) + " labels");
  }
  for (int label : y_) {
    if (label < 1) throw ConfigError("labels must be 1-based, got " + std::to_string(label));
  }
  if (feature_names_.empty()) {
    for (Eigen::Index j = 0; j < X_.cols(); ++j) feature_names_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(feature_names_.size()) != X_.cols()) {
    throw DimensionError("feature name count does not match column count");
  }
  mutability_.assign(static_cast<std::size_t>(X_.cols()), Mutability::Both);
  for (int c = 1; c <= n_classes(); ++c) label_values_.push_back(static_cast<double>(c));
}

int Dataset::n_classes() const {
  if (y_.empty()) return 0;
  return *std::max_element(y_.begin(), y_.end());
}

int Dataset::internal_label(double original) const {
  for (std::size_t i = 0; i < label_values_.size(); ++i) {
    if (label_values_[i] == original) return static_cast<int>(i) + 1;
  }
  std::ostringstream msg;
  msg << "label " << original << " does not occur in the dataset";
  throw ConfigError(msg.str());
}

double Dataset::original_label(int label) const {
  if (label < 1 || label > static_cast<int>(label_values_.size())) {
    throw IndexError("label " + std::to_string(label) + " out of range");
  }
  return label_values_[static_cast<std::size_t>(label - 1)];
}

std::vector<Eigen::Index> Dataset::rows_with_label(int label) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (y_[i] == label) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

Dataset Dataset::with_mutability(std::vector<Mutability> tags) const {
  if (static_cast<Eigen::Index>(tags.size()) != dims()) {
    throw ConfigError("mutability needs one tag per feature: got " + std::to_string(tags.size()) +
                      " tags for " + std::to_string(dims()) + " features");
  }
  Dataset out = *this;
  out.mutability_ = std::move(tags);
  return out;
}

Dataset Dataset::with_mad(Eigen::VectorXd mad) const {
  if (mad.size() != dims()) throw DimensionError("MAD vector length does not match feature count");
  if ((mad.array() < 0.0).any()) throw ConfigError("MAD values must be non-negative");
  Dataset out = *this;
  out.mad_ = std::move(mad);
  return out;
}

Dataset Dataset::with_standardizer(std::optional<Standardizer> s, Eigen::MatrixXd X) const {
  if (X.rows() != X_.rows() || X.cols() != X_.cols()) {
    throw DimensionError("replacement feature matrix has a different shape");
  }
  if (s && (s->scale.array() <= 0.0).any()) throw ConfigError("standardizer scales must be positive");
  Dataset out = *this;
  out.standardizer_ = std::move(s);
  out.X_ = std::move(X);
  out.mad_.reset();
  return out;
}

Dataset Dataset::with_label_values(std::vector<double> values) const {
  if (static_cast<int>(values.size()) < n_classes()) {
    throw ConfigError("label mapping shorter than the number of classes");
  }
  Dataset out = *this;
  out.label_values_ = std::move(values);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "linearly_separable") return SyntheticKind::LinearlySeparable;
  if (name == "overlapping") return SyntheticKind::Overlapping;
  if (name == "multi_class") return SyntheticKind::MultiClass;
  if (name == "circles") return SyntheticKind::Circles;
  throw ConfigError("unknown synthetic dataset '" + std::string(name) +
                    "' (expected linearly_separable, overlapping, multi_class or circles)");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::LinearlySeparable: return "linearly_separable";
    case SyntheticKind::Overlapping: return "overlapping";
    case SyntheticKind::MultiClass: return "multi_class";
    case SyntheticKind::Circles: return "circles";
  }
  return "";
}

Dataset load_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 4) throw ConfigError("synthetic datasets need at least 4 rows");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int classes = kind == SyntheticKind::MultiClass ? 4 : 2;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
  std::vector<int> y(n);

  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes)) + 1;
    y[i] = label;
    const auto r = static_cast<Eigen::Index>(i);
    switch (kind) {
      case SyntheticKind::LinearlySeparable: {
        // Means 4*sqrt(2) pooled standard deviations apart.
        const double m = label == 1 ? -2.0 : 2.0;
        X(r, 0) = m + normal(rng);
        X(r, 1) = m + normal(rng);
        break;
      }
      case SyntheticKind::Overlapping: {
        const double m = label == 1 ? -0.75 : 0.75;
        X(r, 0) = m + normal(rng);
        X(r, 1) = m + normal(rng);
        break;
      }
      case SyntheticKind::MultiClass: {
        const double mx = (label == 1 || label == 3) ? -2.5 : 2.5;
        const double my = (label == 1 || label == 2) ? -2.5 : 2.5;
        X(r, 0) = mx + normal(rng);
        X(r, 1) = my + normal(rng);
        break;
      }
      case SyntheticKind::Circles: {
        const double radius = (label == 1 ? 1.0 : 2.5) + 0.15 * normal(rng);
        const double angle = 2.0 * std::numbers::pi * uniform(rng);
        X(r, 0) = radius * std::cos(angle);
        X(r, 1) = radius * std::sin(angle);
        break;
      }
    }
  }
  return Dataset(std::move(X), std::move(y));
}

Dataset load_synthetic(std::string_view kind, std::size_t n, std::uint64_t seed) {
  return load_synthetic(parse_synthetic_kind(kind), n, seed);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  s = s.substr(a, b - a);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

Dataset parse_csv(std::string_view text, const std::string& target_column, bool drop_incomplete,
                  CsvReport* report, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(std::string(source) + ": missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_line(line);

  std::optional<std::size_t> target_idx;
  std::vector<std::size_t> feature_idx;
  std::vector<std::string> names;
  CsvReport local;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target_column) {
      target_idx = c;
    } else if (header[c].empty()) {
      local.skipped_columns.push_back("column " + std::to_string(c + 1) + " (row id)");
    } else {
      feature_idx.push_back(c);
      names.push_back(header[c]);
    }
  }
  if (!target_idx) {
    throw SchemaError(std::string(source) + ": target column '" + target_column + "' not found");
  }
  if (feature_idx.empty()) throw SchemaError(std::string(source) + ": no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++local.rows_read;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError(std::string(source) + ": row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()));
    }
    bool incomplete = is_missing(cells[*target_idx]);
    for (auto c : feature_idx) incomplete = incomplete || is_missing(cells[c]);
    if (incomplete) {
      if (drop_incomplete) {
        ++local.rows_dropped;
        continue;
      }
      throw IngestionError(std::string(source) + ": row " + std::to_string(line_no) +
                           " has missing values (enable dropping of incomplete rows)");
    }
    std::vector<double> row;
    row.reserve(feature_idx.size());
    for (std::size_t k = 0; k < feature_idx.size(); ++k) {
      const auto& cell = cells[feature_idx[k]];
      auto v = parse_number(cell);
      if (!v) {
        throw IngestionError(std::string(source) + ": non-numeric value '" + cell + "' at row " +
                             std::to_string(line_no) + ", column '" + names[k] + "'");
      }
      row.push_back(*v);
    }
    auto t = parse_number(cells[*target_idx]);
    if (!t) {
      throw IngestionError(std::string(source) + ": non-numeric label '" + cells[*target_idx] +
                           "' at row " + std::to_string(line_no) + ", column '" + target_column + "'");
    }
    rows.push_back(std::move(row));
    targets.push_back(*t);
  }
  if (rows.empty()) throw IngestionError(std::string(source) + ": no complete data rows");

  std::set<double> distinct(targets.begin(), targets.end());
  std::vector<double> label_values(distinct.begin(), distinct.end());
  std::map<double, int> remap;
  for (std::size_t i = 0; i < label_values.size(); ++i) remap[label_values[i]] = static_cast<int>(i) + 1;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    y[i] = remap[targets[i]];
  }
  if (report) *report = local;
  return Dataset(std::move(X), std::move(y), std::move(names)).with_label_values(std::move(label_values));
}

Dataset load_csv(const std::string& path, const std::string& target_column, bool drop_incomplete,
                 CsvReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), target_column, drop_incomplete, report, path);
}

// ---------------------------------------------------------------------------
// Transforms

Dataset standardize(const Dataset& d) {
  const auto& X = d.X();
  const double n = static_cast<double>(X.rows());
  Eigen::VectorXd mean = X.colwise().mean().transpose();
  Eigen::VectorXd scale(X.cols());
  std::vector<std::string> degenerate;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - mean(j)).square().sum() / n;
    scale(j) = std::sqrt(var);
    if (!(scale(j) > 0.0)) degenerate.push_back(d.feature_names()[static_cast<std::size_t>(j)]);
  }
  if (!degenerate.empty()) {
    std::string msg = "zero-variance feature(s) cannot be standardized:";
    for (const auto& name : degenerate) msg += " " + name;
    throw DegenerateFeatureError(msg);
  }
  Standardizer step{mean, scale};
  Eigen::MatrixXd Z = step.apply_rows(X);

  // Compose with any earlier standardization so reports always map back to source units.
  Standardizer total = step;
  if (d.standardizer()) {
    const auto& prev = *d.standardizer();
    total.mean = prev.mean + (prev.scale.array() * mean.array()).matrix();
    total.scale = (prev.scale.array() * scale.array()).matrix();
  }
  return d.with_standardizer(total, std::move(Z));
}

Dataset destandardize(const Dataset& d) {
  if (!d.standardizer()) return d;
  Eigen::MatrixXd X = d.standardizer()->invert_rows(d.X());
  return d.with_standardizer(std::nullopt, std::move(X));
}

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

Eigen::VectorXd mad_statistics(const Dataset& d, double floor) {
  if (d.rows() < 2) throw ConfigError("MAD statistics need at least two rows");
  Eigen::VectorXd mad(d.dims());
  for (Eigen::Index j = 0; j < d.dims(); ++j) {
    std::vector<double> col(d.X().col(j).data(), d.X().col(j).data() + d.rows());
    const double m = median(col);
    for (auto& v : col) v = std::abs(v - m);
    const double value = median(std::move(col));
    mad(j) = value > 0.0 ? value : floor;
  }
  return mad;
}

Dataset set_mutability(const Dataset& d, std::vector<Mutability> tags) {
  return d.with_mutability(std::move(tags));
}

Eigen::VectorXd select_factual(const Dataset& d, Eigen::Index index) {
  if (index < 1 || index > d.rows()) {
    throw IndexError("factual index " + std::to_string(index) + " outside 1.." + std::to_string(d.rows()));
  }
  return d.X().row(index - 1).transpose();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const Dataset& d) {
  nlohmann::json j;
  j["feature_names"] = d.feature_names();
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < d.rows(); ++i) rows.push_back(to_std(d.X().row(i).transpose()));
  j["X"] = std::move(rows);
  j["y"] = d.y();
  auto tags = nlohmann::json::array();
  for (auto t : d.mutability()) tags.push_back(to_string(t));
  j["mutability"] = std::move(tags);
  if (d.standardizer()) {
    j["standardizer"] = {{"mean", to_std(d.standardizer()->mean)},
                         {"scale", to_std(d.standardizer()->scale)}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["mad"] = d.mad() ? nlohmann::json(to_std(*d.mad())) : nlohmann::json(nullptr);
  j["label_values"] = d.label_values();
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  try {
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& rows = j.at("X");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (row.size() != names.size()) throw DimensionError("dataset row width mismatch");
      for (std::size_t k = 0; k < row.size(); ++k) {
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
      }
    }
    Dataset d(std::move(X), j.at("y").get<std::vector<int>>(), names);
    if (j.contains("mutability")) {
      std::vector<Mutability> tags;
      for (const auto& t : j["mutability"]) tags.push_back(parse_mutability(t.get<std::string>()));
      d = d.with_mutability(std::move(tags));
    }
    if (j.contains("standardizer") && !j["standardizer"].is_null()) {
      Standardizer s{to_eigen(j["standardizer"].at("mean").get<std::vector<double>>()),
                     to_eigen(j["standardizer"].at("scale").get<std::vector<double>>())};
      Eigen::MatrixXd Xs = d.X();
      d = d.with_standardizer(std::move(s), std::move(Xs));
    }
    if (j.contains("mad") && !j["mad"].is_null()) d = d.with_mad(to_eigen(j["mad"].get<std::vector<double>>()));
    if (j.contains("label_values")) d = d.with_label_values(j["label_values"].get<std::vector<double>>());
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed dataset document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Give Me Some Credit stand-in

std::string credit_standin_csv(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> age_dist(21, 90);
  std::poisson_distribution<int> late30(0.35);
  std::poisson_distribution<int> late60(0.12);
  std::poisson_distribution<int> late90(0.15);
  std::poisson_distribution<int> open_lines(8.0);
  std::poisson_distribution<int> real_estate(1.0);
  std::poisson_distribution<int> dependents(0.8);

  std::ostringstream out;
  out << ",SeriousDlqin2yrs,RevolvingUtilizationOfUnsecuredLines,age,"
         "NumberOfTime30-59DaysPastDueNotWorse,DebtRatio,MonthlyIncome,"
         "NumberOfOpenCreditLinesAndLoans,NumberOfTimes90DaysLate,"
         "NumberRealEstateLoansOrLines,NumberOfTime60-89DaysPastDueNotWorse,NumberOfDependents\n";
  out.precision(6);
  for (std::size_t i = 0; i < n; ++i) {
    const double utilization = std::pow(uniform(rng), 1.5) * 1.1;
    const int age = age_dist(rng);
    const int p30 = late30(rng);
    const double debt_ratio = std::abs(0.35 + 0.25 * normal(rng));
    const double income = std::round(std::exp(8.4 + 0.01 * (age - 45) + 0.45 * normal(rng)));
    const int lines = open_lines(rng);
    const int p90 = late90(rng);
    const int estates = real_estate(rng);
    const int p60 = late60(rng);
    const int deps = dependents(rng);
    const double score = -1.0 + 2.5 * utilization + 0.7 * p30 + 1.1 * p90 + 0.8 * p60 -
                         0.035 * (age - 50) - 0.8 * (std::log(income) - 8.4) + 0.8 * (debt_ratio - 0.35);
    const int stress = uniform(rng) < 1.0 / (1.0 + std::exp(-score)) ? 1 : 0;
    const bool missing_income = uniform(rng) < 0.02;

    out << i + 1 << ',' << stress << ',' << utilization << ',' << age << ',' << p30 << ',' << debt_ratio
        << ',';
    if (missing_income) {
      out << "NA";
    } else {
      out << income;
    }
    out << ',' << lines << ',' << p90 << ',' << estates << ',' << p60 << ',' << deps << '\n';
  }
  return out.str();
}

}  // namespace recourse
