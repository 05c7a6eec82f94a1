#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ocpose/types.hpp"

namespace ocpose {

/// Detection x GT cost table, C(i, j) = 1 - OKS.
///
/// Columns hold the non-crowd GTs (poses and instance masks) first, in
/// scene order, followed by the crowd masks. `gt_index` maps each column
/// back to its position in Scene::gts.
class CostMatrix {
 public:
  CostMatrix() = default;
  // Raw construction, mostly for tests and the oracle. `values` is
  // row-major with non_crowd + crowd columns per row.
  CostMatrix(std::size_t detections, std::size_t non_crowd, std::size_t crowd,
             std::vector<double> values);

  std::size_t detections() const { return detections_; }
  std::size_t non_crowd() const { return non_crowd_; }
  std::size_t crowd() const { return crowd_; }
  std::size_t columns() const { return non_crowd_ + crowd_; }
  bool is_crowd_column(std::size_t col) const { return col >= non_crowd_; }

  double at(std::size_t det, std::size_t col) const { return values_[det * columns() + col]; }
  std::span<const double> row(std::size_t det) const {
    return std::span<const double>(values_).subspan(det * columns(), columns());
  }

  // The first `rows` detections only.
  CostMatrix head(std::size_t rows) const;

  const std::vector<std::size_t>& gt_index() const { return gt_index_; }
  void set_gt_index(std::vector<std::size_t> index) { gt_index_ = std::move(index); }

 private:
  std::size_t detections_ = 0;
  std::size_t non_crowd_ = 0;
  std::size_t crowd_ = 0;
  std::vector<double> values_;
  std::vector<std::size_t> gt_index_;
};

CostMatrix build_cost_matrix(const Scene& scene, const SigmaTable& sigmas);

// Marks the dummy detection (as `detection`) or the dummy GT (as `column`).
inline constexpr std::size_t kDummy = std::numeric_limits<std::size_t>::max();

struct MatchPair {
  std::size_t detection = kDummy;
  std::size_t column = kDummy;
  double cost = 0.0;
  bool in_pi_one = true;

  bool dummy_detection() const { return detection == kDummy; }
  bool dummy_gt() const { return column == kDummy; }
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchOptions {
  // Keep detection-to-crowd pairs out of the averaged set, mimicking
  // ignore-region handling. Does not change the optimization.
  bool exclude_crowd_matches = false;
};

/// Optimal transport plan for one image.
///
/// Only unit pairs that can carry cost are listed: detection to GT, to
/// crowd, or to the dummy GT, and the dummy detection to each unmatched
/// non-crowd GT. The zero-cost filler flows from the dummy detection into
/// crowd and dummy-GT capacity are implied and never counted.
struct MatchPlan {
  std::vector<MatchPair> pairs;
  double total_cost = 0.0;     // transported cost of the whole plan
  double pi_one_cost = 0.0;    // sum of costs over counted pairs
  std::size_t pi_one_size = 0;  // number of counted pairs
  std::size_t false_positives = 0;  // detections sent to the dummy GT
  std::size_t false_negatives = 0;  // non-crowd GTs fed by the dummy detection
  std::size_t crowd_matches = 0;

  // pi_one_cost / pi_one_size, with 0/0 = 0.
  double ocpose() const;
};

/// Exact minimum-cost plan.
///
/// Every detection is sent to exactly one of: a non-crowd GT (each taken
/// at most once) at C(i, j), a crowd mask (any number of detections) at
/// C(i, c), or the dummy GT at cost 1. Every non-crowd GT left without a
/// detection is fed by the dummy detection at cost 1.
MatchPlan solve_transport(const CostMatrix& costs, const MatchOptions& options = {});

// Exhaustive enumeration of the same plans. Refuses (UsageError) above 6
// detections or 6 GT columns.
MatchPlan brute_force_oracle(const CostMatrix& costs, const MatchOptions& options = {});

struct OcposeAggregate {
  double per_image_mean = 0.0;  // mean over images with a non-empty counted set
  double pooled = 0.0;          // all counted costs over all counted pairs
  std::size_t images_counted = 0;
  std::size_t pi_one_size = 0;
  double pi_one_cost = 0.0;
};

OcposeAggregate ocpose_score(std::span<const MatchPlan> plans);

}  // namespace ocpose
