#include "lumiscore/midi.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "lumiscore/error.h"

namespace lumiscore::midi {

namespace {

constexpr std::uint8_t kNoteOff = 0x80;
constexpr std::uint8_t kNoteOn = 0x90;
constexpr std::uint8_t kControl = 0xB0;

int event_class(std::uint8_t status) {
  switch (status & 0xF0) {
    case kNoteOff: return 0;
    case kControl: return 1;
    default: return 2;
  }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* tag, const std::vector<std::uint8_t>& body) {
  out.insert(out.end(), tag, tag + 4);
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  const auto bytes = encode_vlq(v);
  out.insert(out.end(), bytes.begin(), bytes.end());
}

std::uint32_t tempo_us(double tempo_bpm) {
  const double us = std::floor(60e6 / tempo_bpm + 0.5);
  if (!(us >= 1.0 && us <= 0xFFFFFF)) throw Error(Errc::InvalidArgument, "tempo outside the SMF tempo range");
  return static_cast<std::uint32_t>(us);
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) throw Error(Errc::MalformedMidi, "unexpected end of data");
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }

  std::uint16_t u16() {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }

  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const auto b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw Error(Errc::MalformedMidi, "variable-length quantity longer than 4 bytes");
  }

  void expect(std::initializer_list<std::uint8_t> expected, const char* what) {
    for (auto e : expected) {
      if (u8() != e) throw Error(Errc::MalformedMidi, std::string("expected ") + what);
    }
  }

  Cursor chunk(const char* tag) {
    for (int i = 0; i < 4; ++i) {
      if (u8() != static_cast<std::uint8_t>(tag[i])) throw Error(Errc::MalformedMidi, std::string("expected ") + tag);
    }
    const auto length = u32();
    if (bytes_.size() - pos_ < length) throw Error(Errc::MalformedMidi, std::string(tag) + " chunk truncated");
    Cursor inner(bytes_.subspan(pos_, length));
    pos_ += length;
    return inner;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_vlq(std::uint32_t value) {
  if (value > 0x0FFFFFFF) throw Error(Errc::ValueTooLarge, "VLQ value " + std::to_string(value) + " exceeds 28 bits");
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(value & 0x7F)};
  while (value >>= 7) out.push_back(static_cast<std::uint8_t>(0x80 | (value & 0x7F)));
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint32_t ticks(double seconds, double tempo_bpm, int ppq) {
  if (!(seconds >= 0.0)) throw Error(Errc::InvalidArgument, "event time must be >= 0");
  const double t = std::floor(seconds * tempo_bpm / 60.0 * static_cast<double>(ppq) + 0.5);
  if (t > 0x0FFFFFFF) throw Error(Errc::ValueTooLarge, "event time beyond the representable tick range");
  return static_cast<std::uint32_t>(t);
}

std::vector<Event> score_events(const Score& score) {
  struct Span {
    std::uint32_t on, off;
    std::uint8_t velocity;
  };
  std::map<std::pair<int, int>, std::vector<Span>> voices;
  for (const auto& n : score.notes) {
    if (n.pitch < 0 || n.pitch > 127 || n.velocity < 1 || n.velocity > 127 || n.channel < 0 || n.channel > 15) {
      throw Error(Errc::InvalidArgument, "note outside MIDI ranges");
    }
    const auto on = ticks(n.onset, score.tempo_bpm, score.ppq);
    const auto off = std::max(on + 1, ticks(n.onset + n.duration, score.tempo_bpm, score.ppq));
    voices[{n.channel, n.pitch}].push_back({on, off, static_cast<std::uint8_t>(n.velocity)});
  }

  std::vector<Event> events;
  for (auto& [key, spans] : voices) {
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
      return std::tie(a.on, a.off, a.velocity) < std::tie(b.on, b.off, b.velocity);
    });
    std::vector<Span> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && merged.back().on == s.on) {
        merged.back().off = std::max(merged.back().off, s.off);
        merged.back().velocity = std::max(merged.back().velocity, s.velocity);
        continue;
      }
      if (!merged.empty() && merged.back().off > s.on) merged.back().off = s.on;
      merged.push_back(s);
    }
    const auto ch = static_cast<std::uint8_t>(key.first);
    const auto pitch = static_cast<std::uint8_t>(key.second);
    for (const auto& s : merged) {
      events.push_back({s.on, static_cast<std::uint8_t>(kNoteOn | ch), pitch, s.velocity});
      events.push_back({s.off, static_cast<std::uint8_t>(kNoteOff | ch), pitch, 0});
    }
  }
  for (const auto& c : score.controls) {
    if (c.controller < 0 || c.controller > 127 || c.value < 0 || c.value > 127 || c.channel < 0 || c.channel > 15) {
      throw Error(Errc::InvalidArgument, "control event outside MIDI ranges");
    }
    events.push_back({ticks(c.time, score.tempo_bpm, score.ppq), static_cast<std::uint8_t>(kControl | c.channel),
                      static_cast<std::uint8_t>(c.controller), static_cast<std::uint8_t>(c.value)});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::make_tuple(a.tick, event_class(a.status), a.data1, a.status, a.data2) <
           std::make_tuple(b.tick, event_class(b.status), b.data1, b.status, b.data2);
  });
  return events;
}

std::vector<std::uint8_t> write_smf(const Score& score) {
  if (score.ppq < 1 || score.ppq > 0x7FFF) throw Error(Errc::InvalidArgument, "ppq must be in 1..32767");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> header;
  put_u16(header, 1);
  put_u16(header, 2);
  put_u16(header, static_cast<std::uint16_t>(score.ppq));
  put_chunk(out, "MThd", header);

  const auto us = tempo_us(score.tempo_bpm);
  std::vector<std::uint8_t> tempo_track{0x00, 0xFF, 0x51, 0x03, static_cast<std::uint8_t>(us >> 16),
                                        static_cast<std::uint8_t>(us >> 8), static_cast<std::uint8_t>(us),
                                        0x00, 0xFF, 0x2F, 0x00};
  put_chunk(out, "MTrk", tempo_track);

  std::vector<std::uint8_t> track;
  std::uint32_t last = 0;
  for (const auto& e : score_events(score)) {
    put_vlq(track, e.tick - last);
    last = e.tick;
    track.push_back(e.status);
    track.push_back(e.data1);
    track.push_back(e.data2);
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});
  put_chunk(out, "MTrk", track);
  return out;
}

File read_smf(std::span<const std::uint8_t> bytes) {
  Cursor file(bytes);
  File smf;
  auto header = file.chunk("MThd");
  smf.format = header.u16();
  smf.tracks = header.u16();
  smf.division = header.u16();
  if (!header.done()) throw Error(Errc::MalformedMidi, "MThd length is not 6");
  if (smf.format != 1 || smf.tracks != 2) throw Error(Errc::MalformedMidi, "expected format 1 with 2 tracks");
  if (smf.division == 0 || (smf.division & 0x8000)) throw Error(Errc::MalformedMidi, "expected a PPQ division");

  auto tempo = file.chunk("MTrk");
  tempo.expect({0x00, 0xFF, 0x51, 0x03}, "tempo meta event");
  smf.tempo_us = (static_cast<std::uint32_t>(tempo.u8()) << 16);
  smf.tempo_us |= (static_cast<std::uint32_t>(tempo.u8()) << 8);
  smf.tempo_us |= tempo.u8();
  tempo.expect({0x00, 0xFF, 0x2F, 0x00}, "end of tempo track");
  if (!tempo.done()) throw Error(Errc::MalformedMidi, "data after end of tempo track");

  auto track = file.chunk("MTrk");
  std::uint32_t tick = 0;
  for (;;) {
    tick += track.vlq();
    const auto status = track.u8();
    if (status == 0xFF) {
      track.expect({0x2F, 0x00}, "end-of-track meta event");
      smf.end_tick = tick;
      break;
    }
    const auto kind = status & 0xF0;
    if (kind != kNoteOff && kind != kNoteOn && kind != kControl) {
      throw Error(Errc::MalformedMidi, "unsupported status byte " + std::to_string(status));
    }
    const auto d1 = track.u8();
    const auto d2 = track.u8();
    if ((d1 | d2) & 0x80) throw Error(Errc::MalformedMidi, "data byte with the high bit set");
    smf.events.push_back({tick, status, d1, d2});
  }
  if (!track.done()) throw Error(Errc::MalformedMidi, "data after end of track");
  if (!file.done()) throw Error(Errc::MalformedMidi, "trailing bytes after the last track");
  return smf;
}

}  // namespace lumiscore::midi
