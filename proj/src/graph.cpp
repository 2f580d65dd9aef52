#include "tvinfer/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace tvinfer {

MultiSeries::MultiSeries(Matrix Y, std::vector<std::string> labels) : Y_(std::move(Y)), labels_(std::move(labels)) {
  if (Y_.cols() < 2) throw DataError("multi-series needs at least 2 nodes");
  if (Y_.rows() < 2) throw DataError("multi-series needs at least 2 observations");
  if (!Y_.allFinite()) throw DataError("multi-series contains non-finite entries");
  if (labels_.empty()) {
    for (Index k = 0; k < Y_.cols(); ++k) labels_.push_back("node" + std::to_string(k + 1));
  } else if (static_cast<Index>(labels_.size()) != Y_.cols()) {
    throw DimensionError("one label per node expected");
  }
}

Index DynamicGraph::edge_count(std::size_t g) const {
  return static_cast<Index>(adjacency[g].count() / 2);
}

namespace {

Dataset node_regression(const MultiSeries& series, Index k) {
  const Index d = series.d();
  Matrix X(series.n(), d - 1);
  for (Index j = 0, c = 0; j < d; ++j)
    if (j != k) X.col(c++) = series.Y().col(j);
  return Dataset(std::move(X), series.Y().col(k));
}

DynamicGraph select(const MultiSeries& series, const std::vector<double>& grid, const GraphConfig& cfg,
                    bool parallel) {
  const Index d = series.d();
  if (d < 3) throw ConfigError("neighborhood selection needs at least 3 nodes");
  DynamicGraph out;
  out.grid = grid;
  out.labels = series.labels();
  out.directed_p.assign(grid.size(), Matrix::Ones(d, d));

  for (Index k = 0; k < d; ++k) {
    PipelineConfig pc = cfg.pipeline;
    // Distinct common random numbers per node regression.
    pc.inference.seed = stream_seed(cfg.pipeline.inference.seed, static_cast<std::uint64_t>(k), 0x67726170);
    const Dataset data = node_regression(series, k);
    PathResult path;
    try {
      path = parallel ? infer_path(data, grid, pc, true) : infer_path_serial(data, grid, pc, true);
    } catch (const Error& e) {
      throw Error(e.kind(), "node " + series.labels()[static_cast<std::size_t>(k)] + ": " + e.what());
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Vector& adj = path.fits[g]->adj_p;
      for (Index j = 0, c = 0; j < d; ++j)
        if (j != k) out.directed_p[g](k, j) = adj(c++);
    }
  }
  return symmetrize(out, cfg.rule, cfg.pipeline.inference.alpha);
}

}  // namespace

DynamicGraph symmetrize(const DynamicGraph& g, Symmetrization rule, double alpha) {
  DynamicGraph out = g;
  out.adjacency.clear();
  out.edge_p.clear();
  for (const Matrix& dp : g.directed_p) {
    const Index d = dp.rows();
    Matrix ep = Matrix::Ones(d, d);
    Adjacency adj = Adjacency::Constant(d, d, false);
    for (Index a = 0; a < d; ++a)
      for (Index b = a + 1; b < d; ++b) {
        const double pa = dp(a, b), pb = dp(b, a);
        const double pv = rule == Symmetrization::or_rule ? std::min(pa, pb) : std::max(pa, pb);
        ep(a, b) = ep(b, a) = pv;
        adj(a, b) = adj(b, a) = pv <= alpha;
      }
    out.adjacency.push_back(std::move(adj));
    out.edge_p.push_back(std::move(ep));
  }
  return out;
}

DynamicGraph neighborhood_selection(const MultiSeries& series, const std::vector<double>& grid,
                                    const GraphConfig& cfg) {
  return select(series, grid, cfg, true);
}

DynamicGraph neighborhood_selection_serial(const MultiSeries& series, const std::vector<double>& grid,
                                           const GraphConfig& cfg) {
  return select(series, grid, cfg, false);
}

std::vector<Edge> edges_at(const DynamicGraph& g, std::size_t index) {
  std::vector<Edge> out;
  const Adjacency& a = g.adjacency.at(index);
  for (Index j = 0; j < a.rows(); ++j)
    for (Index k = j + 1; k < a.cols(); ++k)
      if (a(j, k)) out.emplace_back(j, k);
  return out;
}

namespace {

std::size_t grid_index(const DynamicGraph& g, double t) {
  for (std::size_t k = 0; k < g.grid.size(); ++k)
    if (std::abs(g.grid[k] - t) <= 1e-12) return k;
  throw ConfigError("time " + std::to_string(t) + " is not on the graph grid");
}

}  // namespace

GraphDiff graph_diff(const DynamicGraph& g, double t1, double t2) {
  const auto a = edges_at(g, grid_index(g, t1));
  const auto b = edges_at(g, grid_index(g, t2));
  GraphDiff diff;
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(diff.added));
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff.removed));
  return diff;
}

}  // namespace tvinfer
