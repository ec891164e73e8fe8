#pragma once

#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "lumiscore/media.h"

namespace lumiscore {

/// Per-frame scalar measurements. Declaration order is also the fixed
/// column order of exported curves.
enum class CurveChannel { Luma, Red, Green, Blue, ContrastRms, ContrastSpread };

std::string_view channel_name(CurveChannel channel) noexcept;  ///< "luma", "red", ...
std::optional<CurveChannel> channel_from_name(std::string_view name) noexcept;

enum class ContrastMethod { Rms, Spread };

/// Uniformly sampled unit-interval time series.
struct BrightnessCurve {
  CurveChannel channel = CurveChannel::Luma;
  double sample_rate = 1.0;  ///< Hz
  double t0 = 0.0;           ///< seconds
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  /// Span covered by the samples, size() / sample_rate.
  double duration() const noexcept { return static_cast<double>(values.size()) / sample_rate; }
};

/// Throws Errc::InvalidArgument unless rate > 0, values non-empty and in [0,1].
void validate(const BrightnessCurve& curve);

struct CurveSet {
  StreamInfo source;
  std::map<CurveChannel, BrightnessCurve> curves;

  const BrightnessCurve& at(CurveChannel channel) const;
};

// Per-frame measurements. Luma uses Rec.601 weights for RGB24, value/255 for
// GRAY8 and the limited-range mapping clamp((Y-16)/219, 0, 1) for Y4M planes.
double frame_luma_mean(const Frame& frame);
double frame_channel_mean(const Frame& frame, CurveChannel channel);
double frame_contrast(const Frame& frame, ContrastMethod method);

/// Single measurement dispatch used by extract_curves.
double measure(const Frame& frame, CurveChannel channel);

struct ExtractOptions {
  unsigned threads = 1;     ///< 0 picks std::thread::hardware_concurrency()
  std::size_t batch = 64;   ///< frames decoded ahead and measured together
};

/// One sample per frame per requested channel, in frame order. The result is
/// bitwise independent of the thread count.
CurveSet extract_curves(FrameSource& source, const std::set<CurveChannel>& channels,
                        const ExtractOptions& options = {});

}  // namespace lumiscore
