#pragma once

#include <span>
#include <vector>

#include "lumiscore/photometry.h"

namespace lumiscore {

/// Analysis scale: the rate curves are resampled to and the smoothing span.
struct PrepParams {
  double analysis_rate = 50.0;   ///< Hz
  double smooth_window = 0.25;   ///< seconds
  double roughness_saturation = 0.05;  ///< residual RMS that counts as fully granular
};

/// Linear interpolation onto a `rate` grid covering [t0, t0 + (n-1)/rate_in].
/// Resampling to the input rate returns the input values exactly.
BrightnessCurve resample(const BrightnessCurve& curve, double rate);

/// Odd moving-average length for a window in seconds: max(1, round(window*rate)),
/// bumped to the next odd number when even.
std::size_t smoothing_length(double window, double rate);

/// Centered moving average of `length` samples (odd); the window shrinks
/// symmetrically at the edges.
std::vector<double> moving_average(std::span<const double> values, std::size_t length);

BrightnessCurve smooth(const BrightnessCurve& curve, double window);

/// min(1, RMS(raw - smoothed) / saturation) over two equally long slices.
double roughness(std::span<const double> raw, std::span<const double> smoothed, double saturation = 0.05);

/// Whole-curve roughness against its own moving average.
double roughness(const BrightnessCurve& curve, double window, double saturation = 0.05);

}  // namespace lumiscore
