#ifndef RECOURSE_PENALTIES_HPP
#define RECOURSE_PENALTIES_HPP

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "recourse/dataset.hpp"
#include "recourse/losses.hpp"
#include "recourse/models.hpp"

namespace recourse {

enum class Norm { L0, L1, L2, Linf, Mad };

std::string to_string(Norm n);
Norm parse_norm(std::string_view s);

/// |delta| above this counts as a changed feature for l0.
inline constexpr double kL0Threshold = 1e-8;

/// Distance between counterfactual and factual. Mad is sum |delta_k| / mad_k and needs `mad`.
double distance(const Eigen::VectorXd& cf, const Eigen::VectorXd& x, Norm norm, const Eigen::VectorXd* mad = nullptr);

/// Subgradient with respect to `cf`; zero where delta is exactly zero. L0 has none.
Eigen::VectorXd distance_gradient(const Eigen::VectorXd& cf, const Eigen::VectorXd& x, Norm norm,
                                  const Eigen::VectorXd* mad = nullptr);

inline constexpr double kDiversityRidge = 1e-8;

/// -log det(K + ridge I) with K_ij = 1 / (1 + ||c_i - c_j||) over the rows of `cfs`.
/// Smaller values mean a more diverse set.
double ddp_diversity(const Eigen::MatrixXd& cfs);
Eigen::MatrixXd ddp_diversity_gradient(const Eigen::MatrixXd& cfs);

/// ||cf - centroid||^2 / 2.
double gravitational(const Eigen::VectorXd& cf, const Eigen::VectorXd& centroid);
Eigen::VectorXd gravitational_gradient(const Eigen::VectorXd& cf, const Eigen::VectorXd& centroid);

/// Mean of the training rows labelled `label`.
Eigen::VectorXd class_centroid(const Dataset& d, int label);

/// Classification loss at the counterfactual treated as a target-class training point.
double claproar(const Model& m, const Eigen::VectorXd& cf, int target, LossId loss);
Eigen::VectorXd claproar_gradient(const Model& m, const Eigen::VectorXd& cf, int target, LossId loss);

}  // namespace recourse

#endif  // RECOURSE_PENALTIES_HPP
