#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lumiscore {

enum class PixelFormat {
  Rgb24,   ///< interleaved R,G,B, 3 bytes per pixel
  Gray8,   ///< one full-range byte per pixel
  Y4m444,  ///< planar Y,Cb,Cr, full-resolution chroma
  Y4m420,  ///< planar Y,Cb,Cr, chroma subsampled 2x2
  Y4mMono, ///< Y plane only (Y4M "Cmono")
};

std::string_view pixel_format_name(PixelFormat format) noexcept;

struct Rational {
  std::uint32_t num = 1;
  std::uint32_t den = 1;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct StreamInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Rational fps;
  PixelFormat format = PixelFormat::Rgb24;
  std::optional<std::uint64_t> frame_count;

  friend bool operator==(const StreamInfo&, const StreamInfo&) = default;
};

/// Exact payload size of one frame. Y4M 4:2:0 chroma planes round up on odd
/// dimensions.
std::size_t bytes_per_frame(PixelFormat format, std::uint32_t width, std::uint32_t height);

/// Throws Errc::InvalidArgument when dimensions or fps are zero.
void validate(const StreamInfo& info);

struct Frame {
  std::uint64_t index = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  PixelFormat format = PixelFormat::Rgb24;
  std::vector<std::uint8_t> data;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

struct Y4mHeader {
  StreamInfo info;
  std::size_t length = 0;  ///< bytes consumed, including the terminating newline
};

/// Parses the stream header line that starts at byte 0 of a Y4M stream.
Y4mHeader parse_y4m_header(std::span<const std::uint8_t> bytes);

/// Decodes one binary PPM (P6) or PGM (P5) image with maxval 255.
Frame read_ppm(std::span<const std::uint8_t> bytes, std::uint64_t index = 0);

/// Serializes an Rgb24 or Gray8 frame as P6/P5 with a minimal header.
std::vector<std::uint8_t> write_ppm(const Frame& frame);

/// Sequential, single-consumer frame iterator.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual const StreamInfo& info() const = 0;

  /// Next frame, or nullopt at clean end of stream. Indices are 0,1,2,...
  virtual std::optional<Frame> next_frame() = 0;

  std::uint64_t frames_emitted() const noexcept { return emitted_; }

 protected:
  std::uint64_t emitted_ = 0;
};

/// Y4M reader over an arbitrary byte stream. The header is parsed eagerly.
std::unique_ptr<FrameSource> open_y4m(std::unique_ptr<std::istream> in);

/// Headerless concatenated frames of a fixed layout (Rgb24 in practice).
std::unique_ptr<FrameSource> open_raw(std::unique_ptr<std::istream> in, StreamInfo info);

/// Parses a raw-video sidecar descriptor. Exactly the keys "width",
/// "height", "fps_num", "fps_den" are accepted.
StreamInfo parse_raw_sidecar(std::string_view json_text);

/// PPM/PGM files in the given order; all must share dimensions and format.
std::unique_ptr<FrameSource> open_image_sequence(std::vector<std::filesystem::path> files, Rational fps);

/// Frames already in memory; mostly for tests and synthetic input.
std::unique_ptr<FrameSource> open_memory(StreamInfo info, std::vector<Frame> frames);

struct SourceOptions {
  Rational sequence_fps{24, 1};  ///< frame rate assumed for PPM/PGM input
};

/// Opens a file or directory by inspection:
///   directory           -> *.ppm / *.pgm files in lexicographic order
///   *.ppm / *.pgm       -> single-image sequence
///   YUV4MPEG2 signature -> Y4M
///   anything else       -> raw RGB24, descriptor at "<path>.json"
std::unique_ptr<FrameSource> open_source(const std::filesystem::path& path, const SourceOptions& options = {});

}  // namespace lumiscore
