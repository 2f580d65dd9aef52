#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tvinfer/inference.hpp"

namespace tvinfer {

/// n x d node series observed at t_i = i / n.
class MultiSeries {
 public:
  MultiSeries(Matrix Y, std::vector<std::string> labels = {});

  const Matrix& Y() const noexcept { return Y_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  Index n() const noexcept { return Y_.rows(); }
  Index d() const noexcept { return Y_.cols(); }

 private:
  Matrix Y_;
  std::vector<std::string> labels_;
};

enum class Symmetrization { or_rule, and_rule };

using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct DynamicGraph {
  std::vector<double> grid;
  std::vector<Adjacency> adjacency;  // symmetric, false diagonal
  std::vector<Matrix> edge_p;        // symmetric; diagonal 1
  std::vector<Matrix> directed_p;    // (k, j): adjusted p of node j in node k's regression
  std::vector<std::string> labels;

  Index edge_count(std::size_t g) const;
};

struct GraphConfig {
  PipelineConfig pipeline;  // error_model defaults to IidEstimated
  Symmetrization rule = Symmetrization::or_rule;
};

/// Node-wise tv regressions; edges from adjusted p-values at level alpha.
DynamicGraph neighborhood_selection(const MultiSeries& series, const std::vector<double>& grid,
                                    const GraphConfig& cfg);

/// Single-threaded reference.
DynamicGraph neighborhood_selection_serial(const MultiSeries& series, const std::vector<double>& grid,
                                           const GraphConfig& cfg);

/// Re-symmetrizes an existing graph's directed p-values under `rule`.
DynamicGraph symmetrize(const DynamicGraph& g, Symmetrization rule, double alpha);

using Edge = std::pair<Index, Index>;  // first < second

struct GraphDiff {
  std::vector<Edge> added;
  std::vector<Edge> removed;
};

std::vector<Edge> edges_at(const DynamicGraph& g, std::size_t index);

/// Edge changes from grid point t1 to t2 (both must be on the grid).
GraphDiff graph_diff(const DynamicGraph& g, double t1, double t2);

}  // namespace tvinfer
