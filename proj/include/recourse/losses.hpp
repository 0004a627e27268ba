#ifndef RECOURSE_LOSSES_HPP
#define RECOURSE_LOSSES_HPP

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace recourse {

enum class Likelihood { Binary, Multiclass };

// Classification losses, always evaluated on raw logits.
enum class LossId { LogitBinaryCrossentropy, LogitCrossentropy, Hinge };

std::string to_string(Likelihood l);
Likelihood parse_likelihood(std::string_view s);
std::string to_string(LossId id);
LossId parse_loss(std::string_view s);

/// Cross-entropy for the model's likelihood.
LossId default_loss(Likelihood l);

/// Column-wise softmax with max subtraction.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

/// Binary models carry one logit row z and report (1 - sigmoid(z), sigmoid(z)).
Eigen::MatrixXd probs_from_logits(const Eigen::MatrixXd& logits, Likelihood l);

double sigmoid(double z);
/// log(1 + exp(z)) without overflow.
double softplus(double z);

/// Loss of a single logit vector against a 1-based target label.
double logit_loss(const Eigen::VectorXd& logits, int target, LossId id, Likelihood l);

/// d loss / d logits.
Eigen::VectorXd logit_loss_gradient(const Eigen::VectorXd& logits, int target, LossId id, Likelihood l);

}  // namespace recourse

#endif  // RECOURSE_LOSSES_HPP
