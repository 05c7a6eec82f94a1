#include "ocpose/matcher.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "ocpose/errors.hpp"
#include "ocpose/similarity.hpp"

namespace ocpose {

namespace {

constexpr double kUnmatchedCost = 1.0;

// Shortest-augmenting-path Hungarian method with potentials on a square
// cost table. Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const std::vector<double>& a, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      assert(j1 != 0);
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Cheapest way for detection i to leave the non-crowd GTs alone: the best
// crowd when it beats the dummy GT, otherwise the dummy GT.
MatchPair unmatched_pair(const CostMatrix& costs, std::size_t det) {
  MatchPair best{det, kDummy, kUnmatchedCost, true};
  for (std::size_t c = costs.non_crowd(); c < costs.columns(); ++c) {
    if (costs.at(det, c) < best.cost) best = {det, c, costs.at(det, c), true};
  }
  return best;
}

void finalize(MatchPlan& plan, const CostMatrix& costs, const MatchOptions& options) {
  std::sort(plan.pairs.begin(), plan.pairs.end(), [](const MatchPair& a, const MatchPair& b) {
    return a.detection != b.detection ? a.detection < b.detection : a.column < b.column;
  });
  plan.total_cost = 0.0;
  plan.pi_one_cost = 0.0;
  plan.pi_one_size = 0;
  plan.false_positives = plan.false_negatives = plan.crowd_matches = 0;
  for (MatchPair& pair : plan.pairs) {
    const bool crowd = !pair.dummy_gt() && costs.is_crowd_column(pair.column);
    pair.in_pi_one = !(crowd && options.exclude_crowd_matches);
    plan.total_cost += pair.cost;
    if (pair.in_pi_one) {
      plan.pi_one_cost += pair.cost;
      ++plan.pi_one_size;
    }
    if (pair.dummy_gt()) ++plan.false_positives;
    if (pair.dummy_detection()) ++plan.false_negatives;
    if (crowd) ++plan.crowd_matches;
  }
}

}  // namespace

CostMatrix::CostMatrix(std::size_t detections, std::size_t non_crowd, std::size_t crowd,
                       std::vector<double> values)
    : detections_(detections), non_crowd_(non_crowd), crowd_(crowd), values_(std::move(values)) {
  if (values_.size() != detections_ * columns()) {
    throw ConfigError("cost matrix has " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(detections_ * columns()));
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("cost matrix entries must lie in [0, 1]");
  }
  gt_index_.resize(columns());
  for (std::size_t j = 0; j < columns(); ++j) gt_index_[j] = j;
}

CostMatrix CostMatrix::head(std::size_t rows) const {
  rows = std::min(rows, detections_);
  CostMatrix m;
  m.detections_ = rows;
  m.non_crowd_ = non_crowd_;
  m.crowd_ = crowd_;
  m.values_.assign(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(rows * columns()));
  m.gt_index_ = gt_index_;
  return m;
}

CostMatrix build_cost_matrix(const Scene& scene, const SigmaTable& sigmas) {
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < scene.gts.size(); ++g) {
    if (!scene.gts[g].is_crowd()) order.push_back(g);
  }
  const std::size_t non_crowd = order.size();
  for (std::size_t g = 0; g < scene.gts.size(); ++g) {
    if (scene.gts[g].is_crowd()) order.push_back(g);
  }
  std::vector<double> values;
  values.reserve(scene.detections.size() * order.size());
  for (const DetectionPose& det : scene.detections) {
    for (std::size_t g : order) values.push_back(pair_cost(det, scene.gts[g], sigmas));
  }
  CostMatrix m(scene.detections.size(), non_crowd, order.size() - non_crowd, std::move(values));
  m.set_gt_index(std::move(order));
  return m;
}

double MatchPlan::ocpose() const {
  return pi_one_size == 0 ? 0.0 : pi_one_cost / static_cast<double>(pi_one_size);
}

MatchPlan solve_transport(const CostMatrix& costs, const MatchOptions& options) {
  const std::size_t dets = costs.detections();
  const std::size_t gts = costs.non_crowd();
  MatchPlan plan;
  if (dets == 0 && gts == 0) return plan;

  // Square table: rows are detections then dummy detections (one per
  // non-crowd GT); columns are non-crowd GTs then "unmatched" slots (one
  // per detection). A detection's slot cost is its best crowd or the
  // dummy GT; a crowd never runs out of capacity, so this is exact.
  const std::size_t n = dets + gts;
  std::vector<MatchPair> fallback(dets);
  for (std::size_t i = 0; i < dets; ++i) fallback[i] = unmatched_pair(costs, i);
  std::vector<double> table(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double v = 0.0;
      if (r < dets) {
        v = c < gts ? costs.at(r, c) : fallback[r].cost;
      } else {
        v = c < gts ? kUnmatchedCost : 0.0;
      }
      table[r * n + c] = v;
    }
  }
  const std::vector<std::size_t> assignment = hungarian(table, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = assignment[r];
    if (r < dets) {
      plan.pairs.push_back(c < gts ? MatchPair{r, c, costs.at(r, c), true} : fallback[r]);
    } else if (c < gts) {
      plan.pairs.push_back({kDummy, c, kUnmatchedCost, true});
    }
  }
  finalize(plan, costs, options);
  return plan;
}

MatchPlan brute_force_oracle(const CostMatrix& costs, const MatchOptions& options) {
  constexpr std::size_t kLimit = 6;
  const std::size_t dets = costs.detections();
  const std::size_t cols = costs.columns();
  if (dets > kLimit || cols > kLimit) {
    throw UsageError("brute-force oracle is limited to 6 detections and 6 GT columns");
  }
  const std::size_t gts = costs.non_crowd();
  // choice[i] in [0, cols] where cols means the dummy GT.
  std::vector<std::size_t> choice(dets, 0), best_choice;
  std::vector<char> taken(gts, 0);
  double best = std::numeric_limits<double>::infinity();

  auto evaluate = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < dets; ++i) total += choice[i] == cols ? kUnmatchedCost : costs.at(i, choice[i]);
    for (std::size_t j = 0; j < gts; ++j) {
      if (!taken[j]) total += kUnmatchedCost;
    }
    // Enumeration order is lexicographic in `choice`, so strict
    // improvement keeps the smallest plan among ties.
    if (total < best) {
      best = total;
      best_choice = choice;
    }
  };

  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i == dets) {
      evaluate();
      return;
    }
    for (std::size_t c = 0; c <= cols; ++c) {
      if (c < gts) {
        if (taken[c]) continue;
        taken[c] = 1;
        choice[i] = c;
        self(self, i + 1);
        taken[c] = 0;
      } else {
        choice[i] = c;
        self(self, i + 1);
      }
    }
  };
  recurse(recurse, 0);

  MatchPlan plan;
  if (dets == 0 && gts == 0) return plan;
  std::vector<char> used(gts, 0);
  for (std::size_t i = 0; i < dets; ++i) {
    const std::size_t c = best_choice[i];
    if (c == cols) {
      plan.pairs.push_back({i, kDummy, kUnmatchedCost, true});
    } else {
      plan.pairs.push_back({i, c, costs.at(i, c), true});
      if (c < gts) used[c] = 1;
    }
  }
  for (std::size_t j = 0; j < gts; ++j) {
    if (!used[j]) plan.pairs.push_back({kDummy, j, kUnmatchedCost, true});
  }
  finalize(plan, costs, options);
  return plan;
}

OcposeAggregate ocpose_score(std::span<const MatchPlan> plans) {
  OcposeAggregate agg;
  double mean_sum = 0.0;
  for (const MatchPlan& plan : plans) {
    agg.pi_one_cost += plan.pi_one_cost;
    agg.pi_one_size += plan.pi_one_size;
    if (plan.pi_one_size > 0) {
      mean_sum += plan.ocpose();
      ++agg.images_counted;
    }
  }
  agg.per_image_mean = agg.images_counted ? mean_sum / static_cast<double>(agg.images_counted) : 0.0;
  agg.pooled = agg.pi_one_size ? agg.pi_one_cost / static_cast<double>(agg.pi_one_size) : 0.0;
  return agg;
}

}  // namespace ocpose
