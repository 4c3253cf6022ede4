#pragma once

// Sampled graphs v -> h(v) over the center coordinates, and the interface
// through which the attraction and expansion code looks up a graph on the
// time-shifted noise path.

#include "stochcm/core.hpp"

#include <iosfwd>
#include <vector>

namespace stochcm {

/// Sampled center-manifold graph.
///
/// `samples[i]` holds center coordinates (ordered like `center`), `values[i]`
/// the full-length state vector h(v) whose center entries are zero.
struct ManifoldGraph {
  Index dim = 0;
  std::vector<Index> center;
  std::vector<Vector> samples;
  std::vector<Vector> values;

  // Solver metadata copied into the JSON sidecar.
  double eta = 0.0;
  double window = 0.0;
  double tol = 0.0;
  double tail_bound = 0.0;
  double contraction_ratio = 0.0;
  double theoretical_lhs = 0.0;
  double lipschitz_ratio = 0.0;
  double lipschitz_ceiling = 0.0;
  double tangency_norm = 0.0;

  Index center_dim() const noexcept { return center.size(); }

  /// h(v). Exact sample hits are returned as stored; with one center
  /// dimension other points are linearly interpolated between neighbouring
  /// samples. Throws ValidationError outside the sampled domain.
  Vector evaluate(const Vector& v) const;
};

/// Largest |h(v_i) - h(v_j)| / |v_i - v_j| over distinct sample pairs.
double sampled_lipschitz(const ManifoldGraph& graph);

/// CSV with header `v_1..v_c,h_1..h_m`; h runs over the non-center
/// coordinates in ascending order. 17 significant digits.
void write_graph_csv(std::ostream& out, const ManifoldGraph& graph);

/// A graph h(v, theta_t omega) that may depend on the noise path through
/// the frame index of t.
class GraphProvider {
 public:
  virtual ~GraphProvider() = default;
  virtual Index center_dim() const = 0;
  /// Full-length vector with zero center entries.
  virtual Vector evaluate(const Vector& v, Index frame_index) const = 0;
};

/// Time-independent provider backed by a sampled graph.
class FixedGraphProvider : public GraphProvider {
 public:
  explicit FixedGraphProvider(ManifoldGraph graph) : graph_(std::move(graph)) {}
  Index center_dim() const override { return graph_.center_dim(); }
  Vector evaluate(const Vector& v, Index) const override { return graph_.evaluate(v); }
  const ManifoldGraph& graph() const noexcept { return graph_; }

 private:
  ManifoldGraph graph_;
};

}  // namespace stochcm
