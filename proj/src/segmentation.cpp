#include "lumiscore/segmentation.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

constexpr double kMadToSigma = 0.6745;
constexpr double kSigmaFloor = 1e-4;

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

class Merger {
 public:
  explicit Merger(std::span<const double> y) : y_(y) {}

  double sse(std::size_t start, std::size_t end) const { return line_sse(y_.subspan(start, end - start)); }

  double merge_cost(const Segment& left, const Segment& right, double left_sse, double right_sse) const {
    return sse(left.start, right.end) - left_sse - right_sse;
  }

 private:
  std::span<const double> y_;
};

// Line SSE over any range in O(1) from prefix sums of the shifted samples.
class PrefixSse {
 public:
  explicit PrefixSse(std::span<const double> y) : sy_(y.size() + 1), sty_(y.size() + 1), syy_(y.size() + 1) {
    const long double shift = y.empty() ? 0.0L : y[0];
    for (std::size_t i = 0; i < y.size(); ++i) {
      const long double v = y[i] - shift;
      sy_[i + 1] = sy_[i] + v;
      sty_[i + 1] = sty_[i] + static_cast<long double>(i) * v;
      syy_[i + 1] = syy_[i] + v * v;
    }
  }

  double operator()(std::size_t a, std::size_t b) const {
    const std::size_t m = b - a;
    if (m < 3) return 0.0;
    const auto lm = static_cast<long double>(m);
    const long double ybar = (sy_[b] - sy_[a]) / lm;
    const long double tbar = 0.5L * static_cast<long double>(a + b - 1);
    const long double cty = (sty_[b] - sty_[a]) - lm * tbar * ybar;
    const long double ctt = lm * (lm * lm - 1.0L) / 12.0L;
    const long double cyy = (syy_[b] - syy_[a]) - lm * ybar * ybar;
    return static_cast<double>(std::max(0.0L, cyy - cty * cty / ctt));
  }

 private:
  std::vector<long double> sy_, sty_, syy_;
};

// Moves each interior boundary within +-radius samples to the position that
// minimizes the two-line fit cost, keeping both sides at least `min_len` long.
void refine(std::span<const double> y, std::vector<Segment>& segs, std::size_t radius, std::size_t min_len) {
  for (std::size_t j = 0; j + 1 < segs.size(); ++j) {
    const std::size_t s0 = segs[j].start;
    const std::size_t e1 = segs[j + 1].end;
    const std::size_t b = segs[j].end;
    const std::size_t lo = std::max(s0 + min_len, b > radius ? b - radius : 0);
    const std::size_t hi = std::min(e1 - min_len, b + radius);
    if (lo > hi) continue;
    std::size_t best = b;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = lo; c <= hi; ++c) {
      const double cost = line_sse(y.subspan(s0, c - s0)) + line_sse(y.subspan(c, e1 - c));
      const auto dist = [b](std::size_t p) { return p > b ? p - b : b - p; };
      if (cost < best_cost || (cost == best_cost && dist(c) < dist(best))) {
        best = c;
        best_cost = cost;
      }
    }
    segs[j].end = best;
    segs[j + 1].start = best;
  }
}

}  // namespace

double estimate_noise(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::CurveTooShort, "noise estimate needs at least 2 samples");
  std::vector<double> diffs(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) diffs[i] = std::abs(values[i + 1] - values[i]);
  return median(std::move(diffs)) / (kMadToSigma * std::sqrt(2.0));
}

double estimate_noise(const BrightnessCurve& curve) { return estimate_noise(curve.values); }

std::size_t block_length(double min_segment, double rate) {
  if (!(min_segment > 0.0)) throw Error(Errc::InvalidArgument, "min_segment must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(min_segment * rate - 1e-9)));
}

double line_sse(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 3) return 0.0;
  const double tbar = 0.5 * static_cast<double>(m - 1);
  double ybar = 0.0;
  for (double v : values) ybar += v;
  ybar /= static_cast<double>(m);
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = static_cast<double>(i) - tbar;
    const double dy = values[i] - ybar;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  return std::max(0.0, syy - sty * sty / stt);
}

std::vector<Segment> segment(const BrightnessCurve& curve, const SegmentationParams& params) {
  validate(curve);
  if (!(params.penalty_beta > 0.0)) throw Error(Errc::InvalidArgument, "penalty_beta must be positive");
  const std::size_t n = curve.size();
  const std::size_t block = block_length(params.min_segment, curve.sample_rate);
  if (n < 2 * block) {
    throw Error(Errc::CurveTooShort, "curve of " + std::to_string(n) + " samples is shorter than two minimum segments (" +
                                         std::to_string(2 * block) + ")");
  }
  const std::span<const double> y(curve.values);

  const double sigma = std::max(params.noise_sigma.value_or(estimate_noise(y)), kSigmaFloor);
  const double lambda = params.penalty_beta * sigma * sigma * std::log(static_cast<double>(n));

  std::vector<Segment> segs;
  for (std::size_t s = 0; s + block <= n; s += block) segs.push_back({s, s + block});
  segs.back().end = n;

  Merger merger(y);
  std::vector<double> sse;
  auto merge_phase = [&] {
    sse.assign(segs.size(), 0.0);
    for (std::size_t i = 0; i < segs.size(); ++i) sse[i] = merger.sse(segs[i].start, segs[i].end);
    std::vector<double> delta(segs.size() - 1);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) delta[i] = merger.merge_cost(segs[i], segs[i + 1], sse[i], sse[i + 1]);

    while (!delta.empty()) {
      // leftmost minimum
      const auto it = std::min_element(delta.begin(), delta.end());
      if (*it > lambda) break;
      const auto i = static_cast<std::size_t>(it - delta.begin());
      segs[i].end = segs[i + 1].end;
      sse[i] = merger.sse(segs[i].start, segs[i].end);
      segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i + 1));
      sse.erase(sse.begin() + static_cast<std::ptrdiff_t>(i + 1));
      delta.erase(delta.begin() + static_cast<std::ptrdiff_t>(i));
      if (i > 0) delta[i - 1] = merger.merge_cost(segs[i - 1], segs[i], sse[i - 1], sse[i]);
      if (i + 1 < segs.size()) delta[i] = merger.merge_cost(segs[i], segs[i + 1], sse[i], sse[i + 1]);
    }
  };

  // A change of slope inside one block leaves that block stranded between two
  // boundaries. Dissolving it replaces both boundaries with one cut inside it.
  const PrefixSse prefix(y);
  for (;;) {
    merge_phase();
    if (segs.size() < 3) break;
    double best_gain = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0, best_cut = 0;
    for (std::size_t j = 1; j + 1 < segs.size(); ++j) {
      const double before = sse[j - 1] + sse[j] + sse[j + 1];
      for (std::size_t c = segs[j].start; c <= segs[j].end; ++c) {
        const double gain = prefix(segs[j - 1].start, c) + prefix(c, segs[j + 1].end) - before;
        if (gain < best_gain) {
          best_gain = gain;
          best_j = j;
          best_cut = c;
        }
      }
    }
    if (best_gain > lambda) break;
    segs[best_j - 1].end = best_cut;
    segs[best_j + 1].start = best_cut;
    segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(best_j));
  }

  refine(y, segs, block, block);
  return segs;
}

std::vector<Segment> apply_manual_boundaries(const BrightnessCurve& curve, std::span<const double> times) {
  validate(curve);
  const std::size_t n = curve.size();
  const double duration = curve.duration();
  std::vector<std::size_t> cuts{0};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (i > 0 && !(t > times[i - 1])) {
      throw Error(Errc::UnsortedBoundaries, "manual boundary " + std::to_string(t) + " s does not follow " +
                                                std::to_string(times[i - 1]) + " s");
    }
    if (!(t > 0.0 && t < duration)) {
      throw Error(Errc::BoundaryOutOfRange, "manual boundary " + std::to_string(t) + " s outside (0, " +
                                                std::to_string(duration) + ")");
    }
    cuts.push_back(static_cast<std::size_t>(std::llround(t * curve.sample_rate)));
  }
  cuts.push_back(n);
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] < cuts[i] + 2) {
      throw Error(Errc::SegmentBelowMinimum, "manual boundaries leave a section shorter than 2 samples near " +
                                                 std::to_string(static_cast<double>(cuts[i]) / curve.sample_rate) + " s");
    }
    segs.push_back({cuts[i], cuts[i + 1]});
  }
  return segs;
}

std::vector<Segment> divide(const BrightnessCurve& curve, const SegmentationParams& params) {
  if (params.manual_boundaries) return apply_manual_boundaries(curve, *params.manual_boundaries);
  return segment(curve, params);
}

}  // namespace lumiscore
