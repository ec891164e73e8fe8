#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lumiscore/photometry.h"

namespace lumiscore {

/// Half-open sample range [start, end) of a curve.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentationParams {
  double min_segment = 0.5;   ///< seconds
  double penalty_beta = 4.0;
  /// Cut times in seconds; when present, automatic segmentation is skipped.
  std::optional<std::vector<double>> manual_boundaries;
  /// Noise scale for the merge penalty. Estimated from the curve when absent.
  std::optional<double> noise_sigma;
};

/// MAD-of-differences noise estimate: median|y[i+1]-y[i]| / (0.6745 * sqrt 2).
double estimate_noise(std::span<const double> values);
double estimate_noise(const BrightnessCurve& curve);

/// Samples per initial block, ceil(min_segment * rate).
std::size_t block_length(double min_segment, double rate);

/// Residual sum of squares of the least-squares line through `values`
/// (abscissa = sample index).
double line_sse(std::span<const double> values);

/// Penalized bottom-up merging of piecewise-linear blocks followed by a local
/// boundary refinement. The result covers [0, n) with sorted, disjoint segments.
std::vector<Segment> segment(const BrightnessCurve& curve, const SegmentationParams& params);

/// Cuts exactly at round(t * rate) for each time; no automatic analysis.
std::vector<Segment> apply_manual_boundaries(const BrightnessCurve& curve, std::span<const double> times);

/// Manual cuts when configured, automatic segmentation otherwise.
std::vector<Segment> divide(const BrightnessCurve& curve, const SegmentationParams& params);

}  // namespace lumiscore
