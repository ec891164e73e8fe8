#include "lumiscore/curve_prep.h"

#include <algorithm>
#include <cmath>

#include "lumiscore/error.h"

namespace lumiscore {

BrightnessCurve resample(const BrightnessCurve& curve, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(Errc::NonPositiveRate, "resample rate must be positive");
  validate(curve);
  const auto& y = curve.values;
  const std::size_t n = y.size();
  const double rate_in = curve.sample_rate;

  // Output samples j/rate for j/rate <= (n-1)/rate_in; the epsilon keeps an
  // exact multiple from being lost to rounding.
  const double last = static_cast<double>(n - 1) * rate / rate_in;
  const auto count = static_cast<std::size_t>(std::floor(last + 1e-9)) + 1;

  BrightnessCurve out;
  out.channel = curve.channel;
  out.sample_rate = rate;
  out.t0 = curve.t0;
  out.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double x = static_cast<double>(j) * rate_in / rate;
    auto i = static_cast<std::size_t>(std::floor(x));
    if (i >= n - 1) {
      out.values[j] = y[n - 1];
      continue;
    }
    const double f = x - static_cast<double>(i);
    out.values[j] = std::clamp((1.0 - f) * y[i] + f * y[i + 1], 0.0, 1.0);
  }
  return out;
}

std::size_t smoothing_length(double window, double rate) {
  if (!(window >= 0.0)) throw Error(Errc::InvalidArgument, "smoothing window must be >= 0");
  auto w = static_cast<std::size_t>(std::max(1.0, std::round(window * rate)));
  if (w % 2 == 0) ++w;
  return w;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t length) {
  const std::size_t n = values.size();
  std::vector<double> out(values.begin(), values.end());
  const std::size_t half = length / 2;
  if (half == 0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    // Deviations from the centre sample: a constant run averages to itself exactly.
    double acc = 0.0;
    for (std::size_t k = i - h; k <= i + h; ++k) acc += values[k] - values[i];
    out[i] = values[i] + acc / static_cast<double>(2 * h + 1);
  }
  return out;
}

BrightnessCurve smooth(const BrightnessCurve& curve, double window) {
  validate(curve);
  BrightnessCurve out = curve;
  if (window == 0.0) return out;
  out.values = moving_average(curve.values, smoothing_length(window, curve.sample_rate));
  for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double roughness(std::span<const double> raw, std::span<const double> smoothed, double saturation) {
  if (raw.size() != smoothed.size() || raw.empty()) {
    throw Error(Errc::InvalidArgument, "roughness needs two equally long, non-empty slices");
  }
  if (!(saturation > 0.0)) throw Error(Errc::InvalidArgument, "roughness saturation must be positive");
  double ss = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double r = raw[i] - smoothed[i];
    ss += r * r;
  }
  const double rms = std::sqrt(ss / static_cast<double>(raw.size()));
  return std::min(1.0, rms / saturation);
}

double roughness(const BrightnessCurve& curve, double window, double saturation) {
  const auto smoothed = smooth(curve, window);
  return roughness(curve.values, smoothed.values, saturation);
}

}  // namespace lumiscore
