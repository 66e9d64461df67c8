#pragma once

// Bipartite room assignment. Pair costs combine a confidence term over all
// token slots with an L1 endpoint term over the ground-truth valid prefix,
// minimized over cyclic rotations of that prefix. The assignment itself is
// solved with a Hungarian (shortest augmenting path) solver.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "edgeplan/core.hpp"

namespace edgeplan {

inline constexpr double kDefaultLambdaCls = 0.6;
inline constexpr double kDefaultConfidenceMin = 0.5;

struct PredictedToken {
  double confidence = 0.0;
  DirectedEdge edge;
};

struct PredictedRoom {
  std::vector<PredictedToken> tokens;
};

struct PredictionSet {
  std::vector<PredictedRoom> rooms;
  std::string metadata;

  std::size_t room_capacity() const { return rooms.size(); }
  std::size_t edge_capacity() const { return rooms.empty() ? 0 : rooms.front().tokens.size(); }
};

// Predictions standing in for a floorplan: validity becomes confidence 0/1.
inline PredictionSet as_prediction(const Floorplan& fp) {
  PredictionSet pred;
  pred.metadata = fp.metadata;
  pred.rooms.reserve(fp.rooms.size());
  for (const auto& room : fp.rooms) {
    PredictedRoom pr;
    pr.tokens.reserve(room.tokens.size());
    for (const auto& t : room.tokens) pr.tokens.push_back({t.valid ? 1.0 : 0.0, t.edge});
    pred.rooms.push_back(std::move(pr));
  }
  return pred;
}

// Thresholded view of a prediction: tokens at or above confidence_min become
// valid edges in stored order. Degenerate survivors are dropped so the result
// is a well-formed plan.
inline Floorplan as_floorplan(const PredictionSet& pred, double confidence_min = kDefaultConfidenceMin) {
  const ModelCapacity cap{std::max<std::size_t>(pred.rooms.size(), 1),
                          std::max<std::size_t>(pred.edge_capacity(), 3)};
  std::vector<RoomEdgeSequence> rooms;
  rooms.reserve(pred.rooms.size());
  for (const auto& pr : pred.rooms) {
    std::vector<DirectedEdge> edges;
    for (const auto& t : pr.tokens)
      if (t.confidence >= confidence_min && !t.edge.degenerate()) edges.push_back(t.edge);
    rooms.push_back(make_room(edges, cap));
  }
  return make_floorplan(std::move(rooms), cap);
}

struct CostMatrix {
  std::size_t size = 0;
  std::vector<double> values;  // row-major; row = ground truth, column = prediction

  double at(std::size_t row, std::size_t col) const { return values[row * size + col]; }
  double& at(std::size_t row, std::size_t col) { return values[row * size + col]; }
};

struct PairCost {
  double cost = 0.0;
  std::size_t best_rotation = 0;
  bool reversed = false;
};

namespace detail {

inline double rotation_cost(const std::vector<DirectedEdge>& gt_edges, const PredictedRoom& pred,
                            std::size_t r) {
  double geo = 0.0;
  const std::size_t vc = gt_edges.size();
  for (std::size_t n = 0; n < vc; ++n) {
    const DirectedEdge& g = gt_edges[(n + r) % vc];
    const DirectedEdge& p = pred.tokens[n].edge;
    geo += l1_distance(g.p1, p.p1) + l1_distance(g.p2, p.p2);
  }
  return geo;
}

}  // namespace detail

// Minimum matching cost over all rotations of the ground-truth valid prefix.
// Mock ground-truth rooms cost zero. When scan_reversed is set the reversed
// traversal's rotations are scanned as well.
inline PairCost pair_cost(const RoomEdgeSequence& gt, const PredictedRoom& pred, double lambda_cls,
                          bool scan_reversed = false) {
  if (gt.tokens.size() != pred.tokens.size())
    throw Error(Errc::length_mismatch, "ground truth has " + std::to_string(gt.tokens.size()) +
                                           " tokens, prediction " + std::to_string(pred.tokens.size()));
  if (gt.mock()) return {0.0, 0, false};

  double cls = 0.0;
  for (std::size_t n = 0; n < gt.tokens.size(); ++n)
    cls += std::abs((gt.tokens[n].valid ? 1.0 : 0.0) - pred.tokens[n].confidence);

  const auto forward = valid_edges(gt);
  PairCost best{std::numeric_limits<double>::infinity(), 0, false};
  for (std::size_t r = 0; r < forward.size(); ++r) {
    const double c = detail::rotation_cost(forward, pred, r);
    if (c < best.cost) best = {c, r, false};
  }
  if (scan_reversed) {
    const auto backward = valid_edges(reverse_valid(gt));
    for (std::size_t r = 0; r < backward.size(); ++r) {
      const double c = detail::rotation_cost(backward, pred, r);
      if (c < best.cost) best = {c, r, true};
    }
  }
  best.cost = lambda_cls * cls + best.cost;
  return best;
}

inline CostMatrix build_cost_matrix(const Floorplan& gt, const PredictionSet& pred, double lambda_cls,
                                    bool scan_reversed = false) {
  if (gt.rooms.size() != pred.rooms.size() || gt.edge_capacity() != pred.edge_capacity())
    throw Error(Errc::capacity_mismatch, "ground truth and prediction capacities differ");
  const std::size_t m = gt.rooms.size();
  CostMatrix costs;
  costs.size = m;
  costs.values.assign(m * m, 0.0);
  for (std::size_t row = 0; row < m; ++row) {
    if (gt.rooms[row].mock()) continue;  // mock rows stay all-zero
    for (std::size_t col = 0; col < m; ++col)
      costs.at(row, col) = pair_cost(gt.rooms[row], pred.rooms[col], lambda_cls, scan_reversed).cost;
  }
  return costs;
}

struct MatchResult {
  std::vector<std::size_t> assignment;     // ground-truth row -> prediction column
  std::vector<double> per_pair_cost;
  std::vector<std::size_t> best_rotation;
  std::vector<std::uint8_t> pair_reversed;
  double total_cost = 0.0;
};

// Minimum-cost perfect assignment via shortest augmenting paths with
// potentials. Rows are processed in ascending order and column scans break
// ties toward the lowest index, so the result is deterministic.
inline MatchResult hungarian(const CostMatrix& costs) {
  const std::size_t n = costs.size;
  if (n == 0) return {};
  if (costs.values.size() != n * n)
    throw Error(Errc::dimension_mismatch, "cost matrix storage does not match its size");
  for (double v : costs.values)
    if (!std::isfinite(v)) throw Error(Errc::invalid_config, "cost matrix entries must be finite");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1, 0.0);
  std::vector<std::size_t> col_match(n + 1, 0), path(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    col_match[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = costs.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          path[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_match[j0] != 0);
    do {
      const std::size_t j1 = path[j0];
      col_match[j0] = col_match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  MatchResult result;
  result.assignment.assign(n, 0);
  result.per_pair_cost.assign(n, 0.0);
  result.best_rotation.assign(n, 0);
  result.pair_reversed.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.assignment[col_match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) {
    result.per_pair_cost[i] = costs.at(i, result.assignment[i]);
    result.total_cost += result.per_pair_cost[i];
  }
  return result;
}

// Full pipeline: cost matrix, assignment, then per-pair rotation alignment
// for downstream loss evaluation.
inline MatchResult match_floorplans(const Floorplan& gt, const PredictionSet& pred, double lambda_cls,
                                    bool scan_reversed = false) {
  MatchResult result = hungarian(build_cost_matrix(gt, pred, lambda_cls, scan_reversed));
  for (std::size_t m = 0; m < result.assignment.size(); ++m) {
    const PairCost pc =
        pair_cost(gt.rooms[m], pred.rooms[result.assignment[m]], lambda_cls, scan_reversed);
    result.best_rotation[m] = pc.best_rotation;
    result.pair_reversed[m] = pc.reversed ? 1 : 0;
  }
  return result;
}

}  // namespace edgeplan
