#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lumiscore {

/// Closed set of failure kinds raised by the library. Each maps to a CLI
/// exit status through is_config_error().
enum class Errc {
  // media ingest
  MissingSignature,
  MissingRequiredToken,
  UnsupportedColorspace,
  MalformedHeader,
  TruncatedFrame,
  BadFrameMarker,
  UnsupportedMagic,
  UnsupportedMaxval,
  TruncatedPixelData,
  FrameMismatch,
  BadSidecar,
  Io,
  // photometry
  ChannelUnavailable,
  EmptyStream,
  // curve prep / segmentation / fitting
  NonPositiveRate,
  CurveTooShort,
  UnsortedBoundaries,
  BoundaryOutOfRange,
  SegmentBelowMinimum,
  TooFewSamples,
  NotADecay,
  // serialization
  ValueTooLarge,
  MalformedMidi,
  MalformedCsv,
  MalformedReport,
  // configuration and preconditions
  Config,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Config errors carry the dotted key path that failed validation.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(Errc::Config, key_path + ": " + what), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

inline bool is_config_error(Errc code) noexcept {
  return code == Errc::Config || code == Errc::UnsortedBoundaries ||
         code == Errc::BoundaryOutOfRange || code == Errc::SegmentBelowMinimum;
}

}  // namespace lumiscore
