#ifndef RECOURSE_JSON_UTIL_HPP
#define RECOURSE_JSON_UTIL_HPP

#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace recourse {

// Matrices are stored row-major as arrays of row arrays.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Writes `contents` to `path` through a sibling temporary file and a rename, so readers never
/// observe a partially written file.
void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

}  // namespace recourse

#endif  // RECOURSE_JSON_UTIL_HPP
