#include "lumiscore/error.h"

namespace lumiscore {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingSignature: return "MissingSignature";
    case Errc::MissingRequiredToken: return "MissingRequiredToken";
    case Errc::UnsupportedColorspace: return "UnsupportedColorspace";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::TruncatedFrame: return "TruncatedFrame";
    case Errc::BadFrameMarker: return "BadFrameMarker";
    case Errc::UnsupportedMagic: return "UnsupportedMagic";
    case Errc::UnsupportedMaxval: return "UnsupportedMaxval";
    case Errc::TruncatedPixelData: return "TruncatedPixelData";
    case Errc::FrameMismatch: return "FrameMismatch";
    case Errc::BadSidecar: return "BadSidecar";
    case Errc::Io: return "IoError";
    case Errc::ChannelUnavailable: return "ChannelUnavailable";
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::CurveTooShort: return "CurveTooShort";
    case Errc::UnsortedBoundaries: return "UnsortedBoundaries";
    case Errc::BoundaryOutOfRange: return "BoundaryOutOfRange";
    case Errc::SegmentBelowMinimum: return "SegmentBelowMinimum";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NotADecay: return "NotADecay";
    case Errc::ValueTooLarge: return "ValueTooLarge";
    case Errc::MalformedMidi: return "MalformedMidi";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::MalformedReport: return "MalformedReport";
    case Errc::Config: return "ConfigError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace lumiscore
