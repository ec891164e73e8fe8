#include "lumiscore/media.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

constexpr std::size_t kMaxHeaderLine = 4096;
constexpr std::string_view kY4mMagic = "YUV4MPEG2";

bool parse_u32(std::string_view text, std::uint32_t& out) {
  if (text.empty()) return false;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_ratio(std::string_view text, std::uint32_t& num, std::uint32_t& den) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return false;
  return parse_u32(text.substr(0, colon), num) && parse_u32(text.substr(colon + 1), den);
}

PixelFormat colorspace_format(std::string_view tag) {
  if (tag == "420" || tag == "420jpeg" || tag == "420mpeg2") return PixelFormat::Y4m420;
  if (tag == "444") return PixelFormat::Y4m444;
  if (tag == "mono") return PixelFormat::Y4mMono;
  throw Error(Errc::UnsupportedColorspace, "Y4M colorspace C" + std::string(tag));
}

// Reads bytes up to and including '\n'. Returns false on EOF before any byte.
// `complete` reports whether the newline was seen.
bool read_line(std::istream& in, std::string& line, bool& complete) {
  line.clear();
  complete = false;
  char c;
  while (in.get(c)) {
    if (c == '\n') {
      complete = true;
      return true;
    }
    line.push_back(c);
    if (line.size() > kMaxHeaderLine) return true;
  }
  return !line.empty();
}

bool is_ppm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Netpbm header tokenizer: whitespace and '#' comments between fields.
class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t next_number(const char* field) {
    skip_space_and_comments();
    std::uint64_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::MalformedHeader, std::string("PPM ") + field + " out of range");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(Errc::MalformedHeader, std::string("PPM ") + field + " missing");
    return static_cast<std::uint32_t>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !is_ppm_space(bytes_[pos_])) {
      throw Error(Errc::MalformedHeader, "PPM header not terminated by whitespace");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_ppm_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

class Y4mSource final : public FrameSource {
 public:
  explicit Y4mSource(std::unique_ptr<std::istream> in) : in_(std::move(in)) {
    std::string line;
    bool complete = false;
    if (!read_line(*in_, line, complete)) {
      throw Error(Errc::MissingSignature, "empty Y4M stream");
    }
    if (!complete) {
      if (line.rfind(kY4mMagic, 0) != 0) throw Error(Errc::MissingSignature, "no YUV4MPEG2 signature");
      throw Error(Errc::MalformedHeader, "Y4M header line not terminated");
    }
    line.push_back('\n');
    auto header = parse_y4m_header(
        std::span(reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
    info_ = header.info;
    frame_bytes_ = bytes_per_frame(info_.format, info_.width, info_.height);
  }

  const StreamInfo& info() const override { return info_; }

  std::optional<Frame> next_frame() override {
    std::string line;
    bool complete = false;
    if (!read_line(*in_, line, complete)) return std::nullopt;
    const bool marker = line.rfind("FRAME", 0) == 0 && (line.size() == 5 || line[5] == ' ');
    if (!complete) {
      if (std::string_view("FRAME").starts_with(line) || marker) {
        throw Error(Errc::TruncatedFrame, "stream ends inside FRAME line of frame " + std::to_string(emitted_));
      }
      throw Error(Errc::BadFrameMarker, "expected FRAME before frame " + std::to_string(emitted_));
    }
    if (!marker) {
      throw Error(Errc::BadFrameMarker, "expected FRAME before frame " + std::to_string(emitted_));
    }
    Frame frame;
    frame.index = emitted_;
    frame.width = info_.width;
    frame.height = info_.height;
    frame.format = info_.format;
    frame.data.resize(frame_bytes_);
    in_->read(reinterpret_cast<char*>(frame.data.data()), static_cast<std::streamsize>(frame_bytes_));
    if (static_cast<std::size_t>(in_->gcount()) != frame_bytes_) {
      throw Error(Errc::TruncatedFrame, "frame " + std::to_string(emitted_) + " has " +
                                            std::to_string(in_->gcount()) + " of " +
                                            std::to_string(frame_bytes_) + " bytes");
    }
    ++emitted_;
    return frame;
  }

 private:
  std::unique_ptr<std::istream> in_;
  StreamInfo info_;
  std::size_t frame_bytes_ = 0;
};

class RawSource final : public FrameSource {
 public:
  RawSource(std::unique_ptr<std::istream> in, StreamInfo info)
      : in_(std::move(in)), info_(info), frame_bytes_(bytes_per_frame(info.format, info.width, info.height)) {
    validate(info_);
  }

  const StreamInfo& info() const override { return info_; }

  std::optional<Frame> next_frame() override {
    if (in_->peek() == std::char_traits<char>::eof()) return std::nullopt;
    Frame frame;
    frame.index = emitted_;
    frame.width = info_.width;
    frame.height = info_.height;
    frame.format = info_.format;
    frame.data.resize(frame_bytes_);
    in_->read(reinterpret_cast<char*>(frame.data.data()), static_cast<std::streamsize>(frame_bytes_));
    if (static_cast<std::size_t>(in_->gcount()) != frame_bytes_) {
      throw Error(Errc::TruncatedFrame, "raw frame " + std::to_string(emitted_) + " has " +
                                            std::to_string(in_->gcount()) + " of " +
                                            std::to_string(frame_bytes_) + " bytes");
    }
    ++emitted_;
    return frame;
  }

 private:
  std::unique_ptr<std::istream> in_;
  StreamInfo info_;
  std::size_t frame_bytes_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

class SequenceSource final : public FrameSource {
 public:
  SequenceSource(std::vector<std::filesystem::path> files, Rational fps) : files_(std::move(files)) {
    if (files_.empty()) throw Error(Errc::EmptyStream, "image sequence has no files");
    // Dimensions come from the first image; later frames must agree.
    first_ = load(0);
    info_.width = first_->width;
    info_.height = first_->height;
    info_.format = first_->format;
    info_.fps = fps;
    info_.frame_count = files_.size();
    validate(info_);
  }

  const StreamInfo& info() const override { return info_; }

  std::optional<Frame> next_frame() override {
    if (emitted_ >= files_.size()) return std::nullopt;
    Frame frame = first_ ? std::move(*first_) : load(emitted_);
    first_.reset();
    if (frame.width != info_.width || frame.height != info_.height || frame.format != info_.format) {
      throw Error(Errc::FrameMismatch, files_[emitted_].string() + " differs in size or format from " +
                                           files_.front().string());
    }
    ++emitted_;
    return frame;
  }

 private:
  Frame load(std::size_t i) const {
    try {
      return read_ppm(read_file(files_[i]), i);
    } catch (const Error& e) {
      throw Error(e.code(), files_[i].string() + ": " + e.what());
    }
  }

  std::vector<std::filesystem::path> files_;
  std::optional<Frame> first_;
  StreamInfo info_;
};

class MemorySource final : public FrameSource {
 public:
  MemorySource(StreamInfo info, std::vector<Frame> frames) : info_(info), frames_(std::move(frames)) {
    validate(info_);
    const auto expected = bytes_per_frame(info_.format, info_.width, info_.height);
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      auto& f = frames_[i];
      if (f.width != info_.width || f.height != info_.height || f.format != info_.format ||
          f.data.size() != expected) {
        throw Error(Errc::FrameMismatch, "in-memory frame " + std::to_string(i) + " does not match stream info");
      }
      f.index = i;
    }
    info_.frame_count = frames_.size();
  }

  const StreamInfo& info() const override { return info_; }

  std::optional<Frame> next_frame() override {
    if (emitted_ >= frames_.size()) return std::nullopt;
    return frames_[emitted_++];
  }

 private:
  StreamInfo info_;
  std::vector<Frame> frames_;
};

bool has_extension(const std::filesystem::path& p, std::string_view ext) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace

std::string_view pixel_format_name(PixelFormat format) noexcept {
  switch (format) {
    case PixelFormat::Rgb24: return "RGB24";
    case PixelFormat::Gray8: return "GRAY8";
    case PixelFormat::Y4m444: return "Y4M_444";
    case PixelFormat::Y4m420: return "Y4M_420";
    case PixelFormat::Y4mMono: return "Y4M_MONO";
  }
  return "UNKNOWN";
}

std::size_t bytes_per_frame(PixelFormat format, std::uint32_t width, std::uint32_t height) {
  const std::size_t w = width;
  const std::size_t h = height;
  switch (format) {
    case PixelFormat::Rgb24:
    case PixelFormat::Y4m444: return 3 * w * h;
    case PixelFormat::Gray8:
    case PixelFormat::Y4mMono: return w * h;
    case PixelFormat::Y4m420: return w * h + 2 * ((w + 1) / 2) * ((h + 1) / 2);
  }
  return 0;
}

void validate(const StreamInfo& info) {
  if (info.width < 1 || info.height < 1) throw Error(Errc::InvalidArgument, "frame dimensions must be >= 1");
  if (info.fps.num < 1 || info.fps.den < 1) throw Error(Errc::InvalidArgument, "fps terms must be >= 1");
}

Y4mHeader parse_y4m_header(std::span<const std::uint8_t> bytes) {
  const auto* chars = reinterpret_cast<const char*>(bytes.data());
  std::string_view all(chars, bytes.size());
  if (!all.starts_with(kY4mMagic)) throw Error(Errc::MissingSignature, "no YUV4MPEG2 signature");
  auto newline = all.find('\n');
  if (newline == std::string_view::npos) throw Error(Errc::MalformedHeader, "Y4M header line not terminated");
  std::string_view line = all.substr(0, newline);
  if (line.size() > kY4mMagic.size() && line[kY4mMagic.size()] != ' ') {
    throw Error(Errc::MissingSignature, "no YUV4MPEG2 signature");
  }

  Y4mHeader header;
  header.length = newline + 1;
  header.info.format = PixelFormat::Y4m420;
  bool have_w = false, have_h = false, have_f = false;

  std::size_t pos = kY4mMagic.size();
  while (pos < line.size()) {
    if (line[pos] == ' ') {
      ++pos;
      continue;
    }
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view token = line.substr(pos, end - pos);
    std::string_view value = token.substr(1);
    pos = end;
    switch (token[0]) {
      case 'W':
        if (!parse_u32(value, header.info.width) || header.info.width == 0) {
          throw Error(Errc::MalformedHeader, "bad width token " + std::string(token));
        }
        have_w = true;
        break;
      case 'H':
        if (!parse_u32(value, header.info.height) || header.info.height == 0) {
          throw Error(Errc::MalformedHeader, "bad height token " + std::string(token));
        }
        have_h = true;
        break;
      case 'F':
        if (!parse_ratio(value, header.info.fps.num, header.info.fps.den) || header.info.fps.num == 0 ||
            header.info.fps.den == 0) {
          throw Error(Errc::MalformedHeader, "bad frame-rate token " + std::string(token));
        }
        have_f = true;
        break;
      case 'C':
        header.info.format = colorspace_format(value);
        break;
      default:
        // I (interlacing), A (aspect), X (extensions) and unknown tags are ignored.
        break;
    }
  }
  if (!have_w) throw Error(Errc::MissingRequiredToken, "Y4M header lacks W");
  if (!have_h) throw Error(Errc::MissingRequiredToken, "Y4M header lacks H");
  if (!have_f) throw Error(Errc::MissingRequiredToken, "Y4M header lacks F");
  return header;
}

Frame read_ppm(std::span<const std::uint8_t> bytes, std::uint64_t index) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw Error(Errc::UnsupportedMagic, "expected binary P6 or P5 image");
  }
  const bool color = bytes[1] == '6';
  PpmHeaderReader reader(bytes);
  Frame frame;
  frame.index = index;
  frame.width = reader.next_number("width");
  frame.height = reader.next_number("height");
  const auto maxval = reader.next_number("maxval");
  if (frame.width == 0 || frame.height == 0) throw Error(Errc::MalformedHeader, "PPM dimensions must be >= 1");
  if (maxval != 255) throw Error(Errc::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " (only 255)");
  frame.format = color ? PixelFormat::Rgb24 : PixelFormat::Gray8;
  const auto offset = reader.raster_offset();
  const auto need = bytes_per_frame(frame.format, frame.width, frame.height);
  if (bytes.size() < offset || bytes.size() - offset < need) {
    throw Error(Errc::TruncatedPixelData, "PPM raster has " + std::to_string(bytes.size() - std::min(offset, bytes.size())) +
                                              " of " + std::to_string(need) + " bytes");
  }
  frame.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));
  return frame;
}

std::vector<std::uint8_t> write_ppm(const Frame& frame) {
  char magic;
  if (frame.format == PixelFormat::Rgb24) {
    magic = '6';
  } else if (frame.format == PixelFormat::Gray8) {
    magic = '5';
  } else {
    throw Error(Errc::InvalidArgument, "write_ppm needs an RGB24 or GRAY8 frame");
  }
  std::string header = "P" + std::string(1, magic) + "\n" + std::to_string(frame.width) + " " +
                       std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.data.begin(), frame.data.end());
  return out;
}

std::unique_ptr<FrameSource> open_y4m(std::unique_ptr<std::istream> in) {
  return std::make_unique<Y4mSource>(std::move(in));
}

std::unique_ptr<FrameSource> open_raw(std::unique_ptr<std::istream> in, StreamInfo info) {
  return std::make_unique<RawSource>(std::move(in), info);
}

StreamInfo parse_raw_sidecar(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadSidecar, std::string("sidecar is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::BadSidecar, "sidecar must be a JSON object");
  static constexpr std::string_view kKeys[] = {"width", "height", "fps_num", "fps_den"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error(Errc::BadSidecar, "unknown sidecar key \"" + key + "\"");
    }
  }
  auto field = [&](std::string_view key) -> std::uint32_t {
    auto it = doc.find(std::string(key));
    if (it == doc.end()) throw Error(Errc::BadSidecar, "sidecar lacks \"" + std::string(key) + "\"");
    if (!it->is_number_unsigned() || it->get<std::uint64_t>() < 1 ||
        it->get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::BadSidecar, "sidecar \"" + std::string(key) + "\" must be a positive integer");
    }
    return it->get<std::uint32_t>();
  };
  StreamInfo info;
  info.width = field("width");
  info.height = field("height");
  info.fps = {field("fps_num"), field("fps_den")};
  info.format = PixelFormat::Rgb24;
  return info;
}

std::unique_ptr<FrameSource> open_image_sequence(std::vector<std::filesystem::path> files, Rational fps) {
  return std::make_unique<SequenceSource>(std::move(files), fps);
}

std::unique_ptr<FrameSource> open_memory(StreamInfo info, std::vector<Frame> frames) {
  return std::make_unique<MemorySource>(info, std::move(frames));
}

std::unique_ptr<FrameSource> open_source(const std::filesystem::path& path, const SourceOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && (has_extension(entry.path(), ".ppm") || has_extension(entry.path(), ".pgm"))) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (files.empty()) throw Error(Errc::EmptyStream, "no .ppm/.pgm files in " + path.string());
    return open_image_sequence(std::move(files), options.sequence_fps);
  }
  if (!fs::is_regular_file(path, ec)) throw Error(Errc::Io, "cannot open " + path.string());
  if (has_extension(path, ".ppm") || has_extension(path, ".pgm")) {
    return open_image_sequence({path}, options.sequence_fps);
  }

  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw Error(Errc::Io, "cannot open " + path.string());
  char probe[kY4mMagic.size()] = {};
  in->read(probe, sizeof probe);
  const bool is_y4m = static_cast<std::size_t>(in->gcount()) == sizeof probe &&
                      std::string_view(probe, sizeof probe) == kY4mMagic;
  in->clear();
  in->seekg(0);
  if (is_y4m || has_extension(path, ".y4m")) return open_y4m(std::move(in));

  auto sidecar = path;
  sidecar += ".json";
  std::ifstream side(sidecar);
  if (!side) throw Error(Errc::BadSidecar, "raw input needs descriptor " + sidecar.string());
  std::stringstream text;
  text << side.rdbuf();
  StreamInfo info;
  try {
    info = parse_raw_sidecar(text.str());
  } catch (const Error& e) {
    throw Error(e.code(), sidecar.string() + ": " + e.what());
  }
  const auto size = fs::file_size(path, ec);
  const auto frame_bytes = bytes_per_frame(info.format, info.width, info.height);
  if (!ec && size % frame_bytes == 0) info.frame_count = size / frame_bytes;
  return open_raw(std::move(in), info);
}

}  // namespace lumiscore
