#ifndef RECOURSE_PLOT_HPP
#define RECOURSE_PLOT_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "recourse/dataset.hpp"
#include "recourse/models.hpp"
#include "recourse/search.hpp"

namespace recourse {

inline constexpr int kDefaultGrid = 100;

/// Target-class probability over an R x R lattice. p(i, j) is evaluated at (x1[j], x2[i]).
struct ProbabilityGrid {
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;
  Eigen::MatrixXd p;
  int target = 0;
};

/// Lattice spans the data bounds padded by 10% on each side. Only 2-D data is supported.
ProbabilityGrid probability_grid(const Model& m, const Dataset& d, int target, int resolution = kDefaultGrid);

/// `x1,x2,p_target` with one row per lattice point.
std::string grid_csv(const ProbabilityGrid& g);

/// Shaded probability cells, data points coloured by class and one path polyline per counterfactual.
std::string render_svg(const ProbabilityGrid& g, const Dataset& d, const std::vector<ExplanationState>& explanations);

}  // namespace recourse

#endif  // RECOURSE_PLOT_HPP
