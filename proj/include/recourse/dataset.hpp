#ifndef RECOURSE_DATASET_HPP
#define RECOURSE_DATASET_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace recourse {

/// Direction in which a feature may be perturbed by a counterfactual search.
enum class Mutability { Both, Increase, Decrease, None };

std::string to_string(Mutability tag);
Mutability parse_mutability(std::string_view text);

/// Per-feature affine map between original units and model space: z = (x - mean) / scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  /// Row-wise versions for n x D matrices.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd invert_rows(const Eigen::MatrixXd& Z) const;
};

/// Tabular classification data. Labels are 1-based (1..C) whatever the source encoding;
/// `label_values()` keeps the original value behind each internal label.
///
/// A Dataset is an immutable value: every transformation returns a new one.
class Dataset {
public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd X, std::vector<int> y, std::vector<std::string> feature_names = {});

  const Eigen::MatrixXd& X() const { return X_; }
  const std::vector<int>& y() const { return y_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<Mutability>& mutability() const { return mutability_; }
  const std::optional<Standardizer>& standardizer() const { return standardizer_; }
  const std::optional<Eigen::VectorXd>& mad() const { return mad_; }
  /// Original label value for internal label i+1.
  const std::vector<double>& label_values() const { return label_values_; }

  Eigen::Index rows() const { return X_.rows(); }
  Eigen::Index dims() const { return X_.cols(); }
  int n_classes() const;

  /// Internal label for an original label value.
  int internal_label(double original) const;
  double original_label(int label) const;

  /// Indices (0-based) of rows carrying `label`.
  std::vector<Eigen::Index> rows_with_label(int label) const;

  Dataset with_mutability(std::vector<Mutability> tags) const;
  Dataset with_mad(Eigen::VectorXd mad) const;
  Dataset with_standardizer(std::optional<Standardizer> s, Eigen::MatrixXd X) const;
  Dataset with_label_values(std::vector<double> values) const;

private:
  Eigen::MatrixXd X_;
  std::vector<int> y_;
  std::vector<std::string> feature_names_;
  std::vector<Mutability> mutability_;
  std::optional<Standardizer> standardizer_;
  std::optional<Eigen::VectorXd> mad_;
  std::vector<double> label_values_;
};

enum class SyntheticKind { LinearlySeparable, Overlapping, MultiClass, Circles };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string to_string(SyntheticKind kind);

/// Seeded synthetic 2-D datasets. Rows alternate between classes.
Dataset load_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed);
Dataset load_synthetic(std::string_view kind, std::size_t n, std::uint64_t seed);

struct CsvReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::string> skipped_columns;
};

/// Reads a numeric CSV with a header row. Columns with an empty header are treated as
/// row ids and skipped. Empty cells and "NA" count as missing.
Dataset load_csv(const std::string& path, const std::string& target_column, bool drop_incomplete,
                 CsvReport* report = nullptr);

/// Same as load_csv but parses from memory; `source` names the input in error messages.
Dataset parse_csv(std::string_view text, const std::string& target_column, bool drop_incomplete,
                  CsvReport* report = nullptr, std::string_view source = "<memory>");

/// Centers and scales every column to mean 0, population std 1. The composed transform back to
/// the original units is stored on the result.
Dataset standardize(const Dataset& d);

/// Maps the data back to original units and clears the standardizer.
Dataset destandardize(const Dataset& d);

inline constexpr double kMadFloor = 1e-6;

/// Median absolute deviation per feature, zero values replaced by `floor`.
Eigen::VectorXd mad_statistics(const Dataset& d, double floor = kMadFloor);

Dataset set_mutability(const Dataset& d, std::vector<Mutability> tags);

/// Copy of row `index` (1-based).
Eigen::VectorXd select_factual(const Dataset& d, Eigen::Index index);

nlohmann::json to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j);

/// Writes a CSV with the Give Me Some Credit column layout filled with synthetic borrowers.
/// Used as a stand-in when the Kaggle file is not available locally.
std::string credit_standin_csv(std::size_t n, std::uint64_t seed);

inline constexpr std::string_view kCreditTargetColumn = "SeriousDlqin2yrs";

}  // namespace recourse

#endif  // RECOURSE_DATASET_HPP
