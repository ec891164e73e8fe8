#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lumiscore/composition.h"

namespace lumiscore::midi {

/// Big-endian 7-bit groups with the continuation bit on all but the last
/// byte. Values >= 0x10000000 throw Errc::ValueTooLarge.
std::vector<std::uint8_t> encode_vlq(std::uint32_t value);

/// round(t * tempo/60 * ppq), halves rounded up.
std::uint32_t ticks(double seconds, double tempo_bpm, int ppq);

/// One channel-voice message at an absolute tick.
struct Event {
  std::uint32_t tick = 0;
  std::uint8_t status = 0;
  std::uint8_t data1 = 0;
  std::uint8_t data2 = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Track-1 events exactly as write_smf emits them: notes quantized to ticks
/// (at least one tick long, same-pitch overlaps trimmed at the next onset),
/// sorted by (tick, note-off < control < note-on, pitch).
std::vector<Event> score_events(const Score& score);

/// Format-1 SMF: a tempo track and one event track, no running status.
std::vector<std::uint8_t> write_smf(const Score& score);

struct File {
  std::uint16_t format = 0;
  std::uint16_t tracks = 0;
  std::uint16_t division = 0;
  std::uint32_t tempo_us = 0;  ///< microseconds per quarter note
  std::vector<Event> events;   ///< track 1, absolute ticks
  std::uint32_t end_tick = 0;  ///< tick of track 1's end-of-track
};

/// Companion reader; accepts only the layout write_smf produces.
File read_smf(std::span<const std::uint8_t> bytes);

}  // namespace lumiscore::midi
