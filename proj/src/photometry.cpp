#include "lumiscore/photometry.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

// Per-pixel luma is handled as an integer code over a fixed scale so that
// sums are exact and a uniform field has exactly zero variance.
constexpr std::uint32_t kRgbScale = 255000;  // 299 R + 587 G + 114 B
constexpr std::uint32_t kGrayScale = 255;
constexpr std::uint32_t kY4mScale = 219;

bool is_y4m(PixelFormat f) {
  return f == PixelFormat::Y4m420 || f == PixelFormat::Y4m444 || f == PixelFormat::Y4mMono;
}

std::uint32_t luma_scale(PixelFormat f) {
  if (f == PixelFormat::Rgb24) return kRgbScale;
  if (f == PixelFormat::Gray8) return kGrayScale;
  return kY4mScale;
}

void check_payload(const Frame& frame) {
  if (frame.data.size() != bytes_per_frame(frame.format, frame.width, frame.height) || frame.pixel_count() == 0) {
    throw Error(Errc::InvalidArgument, "frame payload does not match its dimensions");
  }
}

// Sum of luma codes over the frame.
std::uint64_t luma_code_sum(const Frame& frame) {
  const std::uint8_t* p = frame.data.data();
  const std::size_t n = frame.pixel_count();
  if (frame.format == PixelFormat::Rgb24) {
    std::uint64_t r = 0, g = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i, p += 3) {
      r += p[0];
      g += p[1];
      b += p[2];
    }
    return 299 * r + 587 * g + 114 * b;
  }
  if (frame.format == PixelFormat::Gray8) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  // Y plane leads every Y4M layout; chroma is ignored.
  std::uint64_t hist[256] = {};
  for (std::size_t i = 0; i < n; ++i) ++hist[p[i]];
  std::uint64_t s = 0;
  for (unsigned v = 17; v < 256; ++v) s += hist[v] * (std::min(v, 235u) - 16);
  return s;
}

void luma_codes(const Frame& frame, std::vector<std::uint32_t>& out) {
  const std::uint8_t* p = frame.data.data();
  const std::size_t n = frame.pixel_count();
  out.resize(n);
  if (frame.format == PixelFormat::Rgb24) {
    for (std::size_t i = 0; i < n; ++i, p += 3) out[i] = 299u * p[0] + 587u * p[1] + 114u * p[2];
  } else if (frame.format == PixelFormat::Gray8) {
    for (std::size_t i = 0; i < n; ++i) out[i] = p[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp<std::uint32_t>(p[i], 16, 235) - 16;
  }
}

std::size_t nearest_rank(unsigned percent, std::size_t n) {
  // ceil(percent/100 * n), at least 1, as a 0-based index
  std::size_t rank = (percent * n + 99) / 100;
  return std::max<std::size_t>(rank, 1) - 1;
}

}  // namespace

std::string_view channel_name(CurveChannel channel) noexcept {
  switch (channel) {
    case CurveChannel::Luma: return "luma";
    case CurveChannel::Red: return "red";
    case CurveChannel::Green: return "green";
    case CurveChannel::Blue: return "blue";
    case CurveChannel::ContrastRms: return "contrast_rms";
    case CurveChannel::ContrastSpread: return "contrast_spread";
  }
  return "unknown";
}

std::optional<CurveChannel> channel_from_name(std::string_view name) noexcept {
  for (auto c : {CurveChannel::Luma, CurveChannel::Red, CurveChannel::Green, CurveChannel::Blue,
                 CurveChannel::ContrastRms, CurveChannel::ContrastSpread}) {
    if (channel_name(c) == name) return c;
  }
  return std::nullopt;
}

void validate(const BrightnessCurve& curve) {
  if (!(curve.sample_rate > 0.0) || !std::isfinite(curve.sample_rate)) {
    throw Error(Errc::InvalidArgument, "curve sample rate must be positive");
  }
  if (curve.values.empty()) throw Error(Errc::InvalidArgument, "curve has no samples");
  for (double v : curve.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::InvalidArgument, "curve value outside [0,1]");
  }
}

const BrightnessCurve& CurveSet::at(CurveChannel channel) const {
  auto it = curves.find(channel);
  if (it == curves.end()) {
    throw Error(Errc::ChannelUnavailable, "curve set has no " + std::string(channel_name(channel)) + " curve");
  }
  return it->second;
}

double frame_luma_mean(const Frame& frame) {
  check_payload(frame);
  const double denom = static_cast<double>(luma_scale(frame.format)) * static_cast<double>(frame.pixel_count());
  return static_cast<double>(luma_code_sum(frame)) / denom;
}

double frame_channel_mean(const Frame& frame, CurveChannel channel) {
  if (frame.format != PixelFormat::Rgb24) {
    throw Error(Errc::ChannelUnavailable, std::string(channel_name(channel)) + " needs an RGB24 source, got " +
                                              std::string(pixel_format_name(frame.format)));
  }
  std::size_t offset;
  switch (channel) {
    case CurveChannel::Red: offset = 0; break;
    case CurveChannel::Green: offset = 1; break;
    case CurveChannel::Blue: offset = 2; break;
    default: throw Error(Errc::InvalidArgument, "frame_channel_mean takes red, green or blue");
  }
  check_payload(frame);
  const std::size_t n = frame.pixel_count();
  const std::uint8_t* p = frame.data.data() + offset;
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n; ++i, p += 3) s += *p;
  return static_cast<double>(s) / (255.0 * static_cast<double>(n));
}

double frame_contrast(const Frame& frame, ContrastMethod method) {
  check_payload(frame);
  std::vector<std::uint32_t> codes;
  luma_codes(frame, codes);
  const double scale = luma_scale(frame.format);
  const std::size_t n = codes.size();

  if (method == ContrastMethod::Rms) {
    unsigned __int128 sum = 0, sum_sq = 0;
    for (auto c : codes) {
      sum += c;
      sum_sq += static_cast<std::uint64_t>(c) * c;
    }
    // n^2 * variance, exact in integers
    const unsigned __int128 scaled_var = sum_sq * n - sum * sum;
    const double sd = std::sqrt(static_cast<long double>(scaled_var)) / static_cast<double>(n);
    return std::min(1.0, sd / scale);
  }

  const std::size_t lo = nearest_rank(5, n);
  const std::size_t hi = nearest_rank(95, n);
  std::nth_element(codes.begin(), codes.begin() + static_cast<std::ptrdiff_t>(hi), codes.end());
  const auto hi_value = codes[hi];
  std::nth_element(codes.begin(), codes.begin() + static_cast<std::ptrdiff_t>(lo),
                   codes.begin() + static_cast<std::ptrdiff_t>(hi));
  const auto lo_value = codes[lo];
  return static_cast<double>(hi_value - lo_value) / scale;
}

double measure(const Frame& frame, CurveChannel channel) {
  switch (channel) {
    case CurveChannel::Luma: return frame_luma_mean(frame);
    case CurveChannel::Red:
    case CurveChannel::Green:
    case CurveChannel::Blue: return frame_channel_mean(frame, channel);
    case CurveChannel::ContrastRms: return frame_contrast(frame, ContrastMethod::Rms);
    case CurveChannel::ContrastSpread: return frame_contrast(frame, ContrastMethod::Spread);
  }
  return 0.0;
}

CurveSet extract_curves(FrameSource& source, const std::set<CurveChannel>& channels, const ExtractOptions& options) {
  if (channels.empty()) throw Error(Errc::InvalidArgument, "extract_curves needs at least one channel");
  const auto& info = source.info();
  for (auto c : channels) {
    if ((c == CurveChannel::Red || c == CurveChannel::Green || c == CurveChannel::Blue) &&
        info.format != PixelFormat::Rgb24) {
      throw Error(Errc::ChannelUnavailable, std::string(channel_name(c)) + " needs an RGB24 source, got " +
                                                std::string(pixel_format_name(info.format)));
    }
  }

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  const std::size_t batch = std::max<std::size_t>(1, options.batch);
  const std::vector<CurveChannel> order(channels.begin(), channels.end());
  std::vector<std::vector<double>> columns(order.size());

  std::vector<Frame> frames;
  std::vector<double> results;
  frames.reserve(batch);
  for (;;) {
    frames.clear();
    while (frames.size() < batch) {
      auto frame = source.next_frame();
      if (!frame) break;
      frames.push_back(std::move(*frame));
    }
    if (frames.empty()) break;

    // results[i * channels + c]; each slot is written by exactly one worker.
    results.assign(frames.size() * order.size(), 0.0);
    auto work = [&](std::size_t worker, std::size_t stride) {
      for (std::size_t i = worker; i < frames.size(); i += stride) {
        for (std::size_t c = 0; c < order.size(); ++c) results[i * order.size() + c] = measure(frames[i], order[c]);
      }
    };
    const std::size_t workers = std::min<std::size_t>(threads, frames.size());
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              work(w, workers);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      for (std::size_t c = 0; c < order.size(); ++c) columns[c].push_back(results[i * order.size() + c]);
    }
  }

  if (columns.front().empty()) throw Error(Errc::EmptyStream, "source produced no frames");

  CurveSet set;
  set.source = info;
  set.source.frame_count = source.frames_emitted();
  for (std::size_t c = 0; c < order.size(); ++c) {
    BrightnessCurve curve;
    curve.channel = order[c];
    curve.sample_rate = info.fps.value();
    curve.t0 = 0.0;
    curve.values = std::move(columns[c]);
    set.curves.emplace(order[c], std::move(curve));
  }
  return set;
}

}  // namespace lumiscore
