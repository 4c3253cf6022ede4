#include "stochcm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace stochcm {

Vector ManifoldGraph::evaluate(const Vector& v) const {
  if (v.size() != static_cast<Eigen::Index>(center.size())) {
    throw ValidationError("center vector has the wrong dimension");
  }
  if (samples.empty()) throw ValidationError("graph has no samples");
  const double scale = std::max(1.0, v.norm());
  for (Index i = 0; i < samples.size(); ++i) {
    if ((samples[i] - v).norm() <= 1e-14 * scale) return values[i];
  }
  if (center.size() != 1) {
    throw ValidationError("graph evaluation away from samples needs one center dimension");
  }
  const double x = v(0);
  // Nearest samples below and above x.
  Index lo = samples.size();
  Index hi = samples.size();
  for (Index i = 0; i < samples.size(); ++i) {
    const double s = samples[i](0);
    if (s <= x && (lo == samples.size() || s > samples[lo](0))) lo = i;
    if (s >= x && (hi == samples.size() || s < samples[hi](0))) hi = i;
  }
  if (lo == samples.size() || hi == samples.size()) {
    throw ValidationError("graph evaluated outside its sampled domain");
  }
  const double x0 = samples[lo](0);
  const double x1 = samples[hi](0);
  if (x1 == x0) return values[lo];
  const double w = (x - x0) / (x1 - x0);
  return (1.0 - w) * values[lo] + w * values[hi];
}

double sampled_lipschitz(const ManifoldGraph& graph) {
  double ratio = 0.0;
  for (Index i = 0; i < graph.samples.size(); ++i) {
    for (Index j = i + 1; j < graph.samples.size(); ++j) {
      const double dv = (graph.samples[i] - graph.samples[j]).norm();
      if (dv == 0.0) continue;
      ratio = std::max(ratio, (graph.values[i] - graph.values[j]).norm() / dv);
    }
  }
  return ratio;
}

void write_graph_csv(std::ostream& out, const ManifoldGraph& graph) {
  std::vector<bool> is_center(graph.dim, false);
  for (Index c : graph.center) is_center[c] = true;
  std::vector<Index> other;
  for (Index k = 0; k < graph.dim; ++k) {
    if (!is_center[k]) other.push_back(k);
  }
  for (Index c = 0; c < graph.center.size(); ++c) out << (c ? "," : "") << "v_" << c + 1;
  for (Index j = 0; j < other.size(); ++j) out << ",h_" << j + 1;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < graph.samples.size(); ++i) {
    for (Index c = 0; c < graph.center.size(); ++c) {
      out << (c ? "," : "") << graph.samples[i](static_cast<Eigen::Index>(c));
    }
    for (Index k : other) out << ',' << graph.values[i](static_cast<Eigen::Index>(k));
    out << '\n';
  }
}

}  // namespace stochcm
