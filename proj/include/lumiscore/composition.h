#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lumiscore/gesture.h"
#include "lumiscore/photometry.h"
#include "lumiscore/prng.h"

namespace lumiscore {

struct HarmonyConfig {
  std::vector<int> scale{0, 2, 3, 5, 7, 8, 10};  ///< pitch classes, strictly increasing
  int root_pc = 0;
  int register_low = 36;
  int register_high = 84;
  double tempo_bpm = 60.0;
  int ppq = 480;
  int channel = 0;
};

struct TextureConfig {
  double lambda_max = 40.0;  ///< peak grain rate, events per second
  double grain_ms = 60.0;
};

/// Throws Errc::InvalidArgument when a field is outside its documented range.
void validate(const HarmonyConfig& harmony);
void validate(const TextureConfig& texture);

struct MusicalEvent {
  double onset = 0.0;     ///< seconds
  double duration = 0.0;  ///< seconds, > 0
  int pitch = 60;
  int velocity = 64;
  int channel = 0;
  friend bool operator==(const MusicalEvent&, const MusicalEvent&) = default;
};

inline constexpr int kExpressionController = 11;

struct ControlEvent {
  double time = 0.0;
  int controller = kExpressionController;
  int value = 0;
  int channel = 0;
  friend bool operator==(const ControlEvent&, const ControlEvent&) = default;
};

struct Score {
  std::vector<MusicalEvent> notes;  ///< sorted by (onset, pitch)
  std::vector<ControlEvent> controls;
  double tempo_bpm = 60.0;
  int ppq = 480;
  double duration = 0.0;  ///< seconds, equals the analysed curve's duration
  friend bool operator==(const Score&, const Score&) = default;
};

int register_center(double mean_brightness, int low, int high);
int velocity_at(double brightness);

/// Three-note chord on scale degrees {0, 2, 4} above the motif's root, each
/// tone voiced in the octave nearest `center` (ties resolve downward).
std::vector<int> chord_for(int motif_id, int center, const HarmonyConfig& harmony);

/// Level-crossing onsets of a decaying exponential: t_k = body_offset + tau k ln(1/rho),
/// kept while t_k < segment_duration, at most 32. Seconds from the segment start.
std::vector<double> arpeggio_times(const ExpFit& fit, double segment_duration, double rho = 0.8,
                                   double body_offset = 0.0);

/// Linear interpolation of the curve at absolute time t, clamped to its ends.
double value_at(const BrightnessCurve& curve, double t);

/// Events for one gesture. Only GranularTexture draws from `rng`.
std::vector<MusicalEvent> render_gesture(const Gesture& gesture, const BrightnessCurve& curve,
                                         const HarmonyConfig& harmony, const TextureConfig& texture,
                                         SplitMix64& rng);

/// Controller 11 sampled at `rate`, emitted only on change (always at t=0).
std::vector<ControlEvent> expression_track(const BrightnessCurve& curve, double rate = 20.0, int channel = 0);

/// Renders all gestures in temporal order with one generator seeded by `seed`.
Score compose(std::span<const Gesture> gestures, const BrightnessCurve& curve, const HarmonyConfig& harmony,
              const TextureConfig& texture, std::uint64_t seed);

}  // namespace lumiscore
