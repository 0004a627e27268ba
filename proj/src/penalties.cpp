#include "recourse/penalties.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "recourse/errors.hpp"

namespace recourse {

std::string to_string(Norm n) {
  switch (n) {
    case Norm::L0: return "l0";
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
    case Norm::Mad: return "mad";
  }
  return "";
}

Norm parse_norm(std::string_view s) {
  if (s == "l0") return Norm::L0;
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::Linf;
  if (s == "mad") return Norm::Mad;
  throw ConfigError("unknown norm '" + std::string(s) + "' (expected l0, l1, l2, linf or mad)");
}

namespace {

void check_pair(const Eigen::VectorXd& cf, const Eigen::VectorXd& x) {
  if (cf.size() != x.size()) throw DimensionError("counterfactual and factual differ in dimension");
}

const Eigen::VectorXd& require_mad(const Eigen::VectorXd* mad, Eigen::Index dims) {
  if (mad == nullptr) throw ConfigError("MAD distance needs per-feature MAD statistics of the dataset");
  if (mad->size() != dims) throw DimensionError("MAD statistics have the wrong dimension");
  return *mad;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double distance(const Eigen::VectorXd& cf, const Eigen::VectorXd& x, Norm norm, const Eigen::VectorXd* mad) {
  check_pair(cf, x);
  const Eigen::VectorXd delta = cf - x;
  switch (norm) {
    case Norm::L0: return static_cast<double>((delta.array().abs() > kL0Threshold).count());
    case Norm::L1: return delta.lpNorm<1>();
    case Norm::L2: return delta.norm();
    case Norm::Linf: return delta.size() == 0 ? 0.0 : delta.lpNorm<Eigen::Infinity>();
    case Norm::Mad: {
      const auto& m = require_mad(mad, cf.size());
      return (delta.array().abs() / m.array()).sum();
    }
  }
  return 0.0;
}

Eigen::VectorXd distance_gradient(const Eigen::VectorXd& cf, const Eigen::VectorXd& x, Norm norm,
                                  const Eigen::VectorXd* mad) {
  check_pair(cf, x);
  const Eigen::VectorXd delta = cf - x;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(delta.size());
  switch (norm) {
    case Norm::L0:
      throw CapabilityError("l0 distance is an evaluation measure and has no gradient");
    case Norm::L1:
      for (Eigen::Index k = 0; k < delta.size(); ++k) g(k) = sign(delta(k));
      return g;
    case Norm::L2: {
      const double n = delta.norm();
      return n > 0.0 ? Eigen::VectorXd(delta / n) : g;
    }
    case Norm::Linf: {
      if (delta.size() == 0) return g;
      Eigen::Index k = 0;
      delta.cwiseAbs().maxCoeff(&k);
      g(k) = sign(delta(k));
      return g;
    }
    case Norm::Mad: {
      const auto& m = require_mad(mad, cf.size());
      for (Eigen::Index k = 0; k < delta.size(); ++k) g(k) = sign(delta(k)) / m(k);
      return g;
    }
  }
  return g;
}

namespace {

Eigen::MatrixXd diversity_kernel(const Eigen::MatrixXd& cfs, Eigen::MatrixXd* dist) {
  const Eigen::Index L = cfs.rows();
  Eigen::MatrixXd K(L, L);
  if (dist) dist->resize(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      const double d = i == j ? 0.0 : (cfs.row(i) - cfs.row(j)).norm();
      K(i, j) = 1.0 / (1.0 + d);
      if (dist) (*dist)(i, j) = d;
    }
  }
  K.diagonal().array() += kDiversityRidge;
  return K;
}

}  // namespace

double ddp_diversity(const Eigen::MatrixXd& cfs) {
  if (cfs.rows() < 1) throw ConfigError("diversity needs at least one counterfactual");
  const Eigen::MatrixXd K = diversity_kernel(cfs, nullptr);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    return -2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  return -std::log(std::abs(lu.determinant()));
}

Eigen::MatrixXd ddp_diversity_gradient(const Eigen::MatrixXd& cfs) {
  if (cfs.rows() < 1) throw ConfigError("diversity needs at least one counterfactual");
  Eigen::MatrixXd dist;
  const Eigen::MatrixXd K = diversity_kernel(cfs, &dist);
  const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();
  const Eigen::Index L = cfs.rows();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L, cfs.cols());
  // d(-log det K) = -tr(K^-1 dK); each off-diagonal entry appears twice.
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      if (i == j || dist(i, j) <= 0.0) continue;
      const double d = dist(i, j);
      const double dk_dd = -1.0 / ((1.0 + d) * (1.0 + d));
      G.row(i) -= 2.0 * Kinv(i, j) * dk_dd * (cfs.row(i) - cfs.row(j)) / d;
    }
  }
  return G;
}

double gravitational(const Eigen::VectorXd& cf, const Eigen::VectorXd& centroid) {
  check_pair(cf, centroid);
  return 0.5 * (cf - centroid).squaredNorm();
}

Eigen::VectorXd gravitational_gradient(const Eigen::VectorXd& cf, const Eigen::VectorXd& centroid) {
  check_pair(cf, centroid);
  return cf - centroid;
}

Eigen::VectorXd class_centroid(const Dataset& d, int label) {
  const auto rows = d.rows_with_label(label);
  if (rows.empty()) {
    throw ConfigError("no training rows with label " + std::to_string(label) + " to anchor the gravitational penalty");
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d.dims());
  for (auto r : rows) c += d.X().row(r).transpose();
  return c / static_cast<double>(rows.size());
}

double claproar(const Model& m, const Eigen::VectorXd& cf, int target, LossId loss) {
  if (!m.differentiable()) throw CapabilityError("classifier-preservation penalty needs a differentiable model");
  return m.loss(cf, target, loss);
}

Eigen::VectorXd claproar_gradient(const Model& m, const Eigen::VectorXd& cf, int target, LossId loss) {
  if (!m.differentiable()) throw CapabilityError("classifier-preservation penalty needs a differentiable model");
  return m.input_gradient(cf, target, loss);
}

}  // namespace recourse
