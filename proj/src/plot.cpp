#include "recourse/plot.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "recourse/errors.hpp"
#include "recourse/json_util.hpp"

namespace recourse {

namespace {

constexpr double kSize = 600.0;
constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

void require_2d(Eigen::Index dims) {
  if (dims != 2) {
    throw DimensionError("plotting supports 2-D data only; this data set has " + std::to_string(dims) + " features");
  }
}

}  // namespace

ProbabilityGrid probability_grid(const Model& m, const Dataset& d, int target, int resolution) {
  require_2d(d.dims());
  if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
  if (target < 1 || target > m.n_classes()) throw ConfigError("target label outside the model's classes");
  ProbabilityGrid g;
  g.target = target;
  const Eigen::VectorXd lo = d.X().colwise().minCoeff();
  const Eigen::VectorXd hi = d.X().colwise().maxCoeff();
  const Eigen::VectorXd pad = 0.1 * (hi - lo);
  g.x1 = Eigen::VectorXd::LinSpaced(resolution, lo(0) - pad(0), hi(0) + pad(0));
  g.x2 = Eigen::VectorXd::LinSpaced(resolution, lo(1) - pad(1), hi(1) + pad(1));
  Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) pts.col(i * resolution + j) << g.x1(j), g.x2(i);
  }
  const Eigen::MatrixXd P = m.probs(pts);
  g.p.resize(resolution, resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) g.p(i, j) = P(target - 1, i * resolution + j);
  }
  return g;
}

std::string grid_csv(const ProbabilityGrid& g) {
  std::ostringstream os;
  os << "x1,x2,p_target\n";
  for (Eigen::Index i = 0; i < g.x2.size(); ++i) {
    for (Eigen::Index j = 0; j < g.x1.size(); ++j) {
      os << format_double(g.x1(j)) << ',' << format_double(g.x2(i)) << ',' << format_double(g.p(i, j)) << '\n';
    }
  }
  return os.str();
}

std::string render_svg(const ProbabilityGrid& g, const Dataset& d, const std::vector<ExplanationState>& explanations) {
  require_2d(d.dims());
  const double x0 = g.x1(0), x1 = g.x1(g.x1.size() - 1);
  const double y0 = g.x2(0), y1 = g.x2(g.x2.size() - 1);
  auto sx = [&](double v) { return (v - x0) / (x1 - x0) * kSize; };
  auto sy = [&](double v) { return kSize - (v - y0) / (y1 - y0) * kSize; };
  auto num = [](double v) { return format_double(std::round(v * 100.0) / 100.0); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
     << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  os << "<g id=\"grid\" shape-rendering=\"crispEdges\">\n";
  const double cw = kSize / static_cast<double>(g.x1.size());
  const double ch = kSize / static_cast<double>(g.x2.size());
  for (Eigen::Index i = 0; i < g.x2.size(); ++i) {
    for (Eigen::Index j = 0; j < g.x1.size(); ++j) {
      os << "<rect x=\"" << num(static_cast<double>(j) * cw) << "\" y=\""
         << num(kSize - static_cast<double>(i + 1) * ch) << "\" width=\"" << num(cw + 0.5) << "\" height=\""
         << num(ch + 0.5) << "\" fill=\"#d62728\" fill-opacity=\"" << num(0.6 * g.p(i, j)) << "\"/>\n";
    }
  }
  os << "</g>\n<g id=\"data\">\n";
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const auto colour = kPalette[static_cast<std::size_t>(d.y()[static_cast<std::size_t>(r)] - 1) % kPalette.size()];
    os << "<circle cx=\"" << num(sx(d.X()(r, 0))) << "\" cy=\"" << num(sy(d.X()(r, 1))) << "\" r=\"2.5\" fill=\""
       << colour << "\" fill-opacity=\"0.7\"/>\n";
  }
  os << "</g>\n<g id=\"paths\">\n";
  for (const auto& es : explanations) {
    if (es.path.empty()) continue;
    for (Eigen::Index l = 0; l < es.path.front().rows(); ++l) {
      os << "<polyline class=\"path\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
      for (std::size_t s = 0; s < es.path.size(); ++s) {
        if (s > 0) os << ' ';
        os << num(sx(es.path[s](l, 0))) << ',' << num(sy(es.path[s](l, 1)));
      }
      os << "\"/>\n";
      const auto& last = es.path.back();
      os << "<circle class=\"final\" cx=\"" << num(sx(last(l, 0))) << "\" cy=\"" << num(sy(last(l, 1)))
         << "\" r=\"5\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    os << "<rect class=\"factual\" x=\"" << num(sx(es.factual(0)) - 5) << "\" y=\"" << num(sy(es.factual(1)) - 5)
       << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace recourse
