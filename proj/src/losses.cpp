#include "recourse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "recourse/errors.hpp"

namespace recourse {

std::string to_string(Likelihood l) { return l == Likelihood::Binary ? "binary" : "multiclass"; }

Likelihood parse_likelihood(std::string_view s) {
  if (s == "binary") return Likelihood::Binary;
  if (s == "multiclass") return Likelihood::Multiclass;
  throw ConfigError("unknown likelihood '" + std::string(s) + "'");
}

std::string to_string(LossId id) {
  switch (id) {
    case LossId::LogitBinaryCrossentropy: return "logit_binary_crossentropy";
    case LossId::LogitCrossentropy: return "logit_crossentropy";
    case LossId::Hinge: return "hinge";
  }
  return "";
}

LossId parse_loss(std::string_view s) {
  if (s == "logit_binary_crossentropy" || s == "logitbinarycrossentropy") return LossId::LogitBinaryCrossentropy;
  if (s == "logit_crossentropy" || s == "logitcrossentropy") return LossId::LogitCrossentropy;
  if (s == "hinge") return LossId::Hinge;
  throw ConfigError("unknown loss '" + std::string(s) +
                    "' (expected logit_binary_crossentropy, logit_crossentropy or hinge)");
}

LossId default_loss(Likelihood l) {
  return l == Likelihood::Binary ? LossId::LogitBinaryCrossentropy : LossId::LogitCrossentropy;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

Eigen::MatrixXd probs_from_logits(const Eigen::MatrixXd& logits, Likelihood l) {
  if (l == Likelihood::Multiclass) return softmax_columns(logits);
  if (logits.rows() != 1) throw DimensionError("binary likelihood expects a single logit row");
  Eigen::MatrixXd out(2, logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double p = sigmoid(logits(0, c));
    out(1, c) = p;
    out(0, c) = sigmoid(-logits(0, c));
  }
  return out;
}

namespace {

void check_target(const Eigen::VectorXd& z, int target, Likelihood l) {
  const int classes = l == Likelihood::Binary ? 2 : static_cast<int>(z.size());
  if (l == Likelihood::Binary && z.size() != 1) throw DimensionError("binary likelihood expects one logit");
  if (target < 1 || target > classes) {
    throw ConfigError("target label " + std::to_string(target) + " outside 1.." + std::to_string(classes));
  }
}

double logsumexp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

}  // namespace

double logit_loss(const Eigen::VectorXd& z, int target, LossId id, Likelihood l) {
  check_target(z, target, l);
  if (l == Likelihood::Binary) {
    const double y = target == 2 ? 1.0 : 0.0;
    const double s = target == 2 ? 1.0 : -1.0;
    switch (id) {
      case LossId::LogitBinaryCrossentropy:
      case LossId::LogitCrossentropy:
        return softplus(z(0)) - y * z(0);
      case LossId::Hinge:
        return std::max(0.0, 1.0 - s * z(0));
    }
  }
  const auto t = static_cast<Eigen::Index>(target - 1);
  switch (id) {
    case LossId::LogitBinaryCrossentropy:
      throw ConfigError("logit_binary_crossentropy needs a binary model; use logit_crossentropy");
    case LossId::LogitCrossentropy:
      return logsumexp(z) - z(t);
    case LossId::Hinge: {
      double rival = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (j != t) rival = std::max(rival, z(j));
      }
      return std::max(0.0, 1.0 - (z(t) - rival));
    }
  }
  return 0.0;
}

Eigen::VectorXd logit_loss_gradient(const Eigen::VectorXd& z, int target, LossId id, Likelihood l) {
  check_target(z, target, l);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  if (l == Likelihood::Binary) {
    const double y = target == 2 ? 1.0 : 0.0;
    const double s = target == 2 ? 1.0 : -1.0;
    if (id == LossId::Hinge) {
      g(0) = 1.0 - s * z(0) > 0.0 ? -s : 0.0;
    } else {
      g(0) = sigmoid(z(0)) - y;
    }
    return g;
  }
  const auto t = static_cast<Eigen::Index>(target - 1);
  switch (id) {
    case LossId::LogitBinaryCrossentropy:
      throw ConfigError("logit_binary_crossentropy needs a binary model; use logit_crossentropy");
    case LossId::LogitCrossentropy: {
      const double m = z.maxCoeff();
      g = (z.array() - m).exp().matrix();
      g /= g.sum();
      g(t) -= 1.0;
      return g;
    }
    case LossId::Hinge: {
      Eigen::Index rival = t == 0 ? 1 : 0;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (j != t && z(j) > z(rival)) rival = j;
      }
      if (1.0 - (z(t) - z(rival)) > 0.0) {
        g(t) = -1.0;
        g(rival) = 1.0;
      }
      return g;
    }
  }
  return g;
}

}  // namespace recourse
