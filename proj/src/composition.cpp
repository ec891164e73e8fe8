#include "lumiscore/composition.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

constexpr double kGrainGrid = 0.010;     // seconds between granular draws
constexpr double kArpeggioRho = 0.8;
constexpr std::size_t kMaxArpeggio = 32;
constexpr double kDetachedNote = 0.2;   // seconds

int mod12(int v) { return ((v % 12) + 12) % 12; }

int scale_pc(const HarmonyConfig& h, std::size_t degree) {
  return mod12(h.scale[degree % h.scale.size()] + h.root_pc);
}

// Octave of `pc` nearest to `center`; a tritone tie goes to the lower one.
int voice_near(int pc, int center) {
  const int up = center + mod12(pc - center);
  const int down = up - 12;
  return (up - center) < (center - down) ? up : down;
}

int fold_into(int pitch, int lo, int hi) {
  while (pitch < lo) pitch += 12;
  while (pitch > hi) pitch -= 12;
  return std::clamp(pitch, 0, 127);
}

bool in_scale(int pitch, const HarmonyConfig& h) {
  const int pc = mod12(pitch);
  for (int s : h.scale) {
    if (mod12(s + h.root_pc) == pc) return true;
  }
  return false;
}

int next_scale_tone_below(int pitch, const HarmonyConfig& h) {
  for (int p = pitch - 1; p > pitch - 13; --p) {
    if (in_scale(p, h)) return p;
  }
  return pitch - 12;
}

struct Context {
  const Gesture& g;
  const BrightnessCurve& curve;
  const HarmonyConfig& harmony;
  double seg_start;
  double seg_end;
  double attack;  // transient onset when present, else segment start
  int center;
  std::vector<int> chord;
  std::vector<MusicalEvent> out;

  void note(double onset, double duration, int pitch, double brightness) {
    if (!(duration > 0.0)) return;
    out.push_back({onset, duration, pitch, velocity_at(brightness), harmony.channel});
  }

  void chord_at(double onset, double duration) {
    const double b = value_at(curve, onset);
    for (int p : chord) note(onset, duration, p, b);
  }
};

}  // namespace

void validate(const HarmonyConfig& h) {
  if (h.scale.empty()) throw Error(Errc::InvalidArgument, "scale must not be empty");
  for (std::size_t i = 0; i < h.scale.size(); ++i) {
    if (h.scale[i] < 0 || h.scale[i] > 11 || (i > 0 && h.scale[i] <= h.scale[i - 1])) {
      throw Error(Errc::InvalidArgument, "scale must be strictly increasing pitch classes 0-11");
    }
  }
  if (h.root_pc < 0 || h.root_pc > 11) throw Error(Errc::InvalidArgument, "root_pc must be 0-11");
  if (h.register_low < 0 || h.register_high > 127 || h.register_low >= h.register_high) {
    throw Error(Errc::InvalidArgument, "register must satisfy 0 <= low < high <= 127");
  }
  if (!(h.tempo_bpm > 0.0)) throw Error(Errc::InvalidArgument, "tempo must be positive");
  if (h.ppq < 24 || h.ppq > 0x7FFF) throw Error(Errc::InvalidArgument, "ppq must be in 24..32767");
  if (h.channel < 0 || h.channel > 15) throw Error(Errc::InvalidArgument, "channel must be 0-15");
}

void validate(const TextureConfig& t) {
  if (!(t.lambda_max >= 0.0)) throw Error(Errc::InvalidArgument, "lambda_max must be >= 0");
  if (!(t.grain_ms > 0.0)) throw Error(Errc::InvalidArgument, "grain_ms must be positive");
}

int register_center(double mean_brightness, int low, int high) {
  return low + static_cast<int>(std::lround(std::clamp(mean_brightness, 0.0, 1.0) * (high - low)));
}

int velocity_at(double brightness) {
  return std::clamp(static_cast<int>(std::lround(20.0 + 100.0 * brightness)), 1, 127);
}

std::vector<int> chord_for(int motif_id, int center, const HarmonyConfig& harmony) {
  if (motif_id < 0) throw Error(Errc::InvalidArgument, "motif id must be >= 0");
  const auto root = static_cast<std::size_t>(motif_id) % harmony.scale.size();
  // Root nearest the center, upper tones stacked closely above it.
  std::vector<int> chord{voice_near(scale_pc(harmony, root), center)};
  for (std::size_t step : {2u, 4u}) {
    const int pc = scale_pc(harmony, root + step);
    chord.push_back(chord.back() + 1 + mod12(pc - chord.back() - 1));
  }
  while (chord.back() > 127) {
    for (int& p : chord) p -= 12;
  }
  while (chord.front() < 0) {
    for (int& p : chord) p += 12;
  }
  return chord;
}

std::vector<double> arpeggio_times(const ExpFit& fit, double segment_duration, double rho, double body_offset) {
  if (fit.degenerate || !(fit.scale > 0.0) || !(fit.tau > 0.0)) {
    throw Error(Errc::NotADecay, "arpeggio timing needs a decaying exponential fit");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw Error(Errc::InvalidArgument, "rho must lie in (0,1)");
  const double spacing = fit.tau * std::log(1.0 / rho);
  std::vector<double> times;
  for (std::size_t k = 1; k <= kMaxArpeggio; ++k) {
    const double t = body_offset + spacing * static_cast<double>(k);
    if (!(t < segment_duration)) break;
    times.push_back(t);
  }
  return times;
}

double value_at(const BrightnessCurve& curve, double t) {
  const auto& y = curve.values;
  if (y.empty()) return 0.0;
  const double x = (t - curve.t0) * curve.sample_rate;
  if (!(x > 0.0)) return y.front();
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i >= y.size() - 1) return y.back();
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * y[i] + f * y[i + 1];
}

std::vector<MusicalEvent> render_gesture(const Gesture& g, const BrightnessCurve& curve, const HarmonyConfig& harmony,
                                         const TextureConfig& texture, SplitMix64& rng) {
  const double rate = curve.sample_rate;
  const int motif = g.motif_id.value_or(0);
  Context ctx{g,
              curve,
              harmony,
              curve.t0 + static_cast<double>(g.segment.start) / rate,
              curve.t0 + static_cast<double>(g.segment.end) / rate,
              0.0,
              register_center(g.mean_brightness, harmony.register_low, harmony.register_high),
              {},
              {}};
  ctx.attack = g.transient ? ctx.seg_start + static_cast<double>(g.transient->onset) / rate : ctx.seg_start;
  ctx.chord = chord_for(motif, ctx.center, harmony);
  const int root = ctx.chord.empty() ? ctx.center : voice_near(scale_pc(harmony, static_cast<std::size_t>(motif)), ctx.center);
  const double seg_duration = ctx.seg_end - ctx.seg_start;

  switch (g.archetype) {
    case Archetype::ChordResonance:
    case Archetype::ChordHeld:
    case Archetype::CrescendoHeld:
    case Archetype::DiminuendoHeld:
      ctx.chord_at(ctx.attack, ctx.seg_end - ctx.attack);
      break;

    case Archetype::ChordArpeggio: {
      ctx.chord_at(ctx.attack, std::min(1.0, 0.25 * seg_duration));
      const auto* expo = std::get_if<ExpFit>(&g.fit);
      if (!expo || expo->degenerate || !(expo->scale > 0.0)) break;
      const double body = static_cast<double>(g.body_offset) / rate;
      const auto offsets = arpeggio_times(*expo, seg_duration, kArpeggioRho, body);
      const double gap = expo->tau * std::log(1.0 / kArpeggioRho);
      // Descend through the chord, then continue down the scale; wrap to the
      // top when leaving the register.
      std::vector<int> line(ctx.chord.rbegin(), ctx.chord.rend());
      int pitch = line.empty() ? ctx.center : line.back();
      while (line.size() < offsets.size()) {
        pitch = next_scale_tone_below(pitch, harmony);
        if (pitch < harmony.register_low - 12) break;
        line.push_back(pitch);
      }
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const double onset = ctx.seg_start + offsets[k];
        const double next = k + 1 < offsets.size() ? ctx.seg_start + offsets[k + 1] : onset + gap;
        const double duration = std::min(0.8 * (next - onset), ctx.seg_end - onset);
        ctx.note(onset, duration, line[k % line.size()], value_at(curve, onset));
      }
      break;
    }

    case Archetype::TremoloScratch: {
      const double period = 0.120 - 0.085 * std::clamp(g.granularity, 0.0, 1.0);
      for (std::size_t k = 0;; ++k) {
        const double onset = ctx.attack + period * static_cast<double>(k);
        if (!(onset < ctx.seg_end)) break;
        ctx.note(onset, 0.6 * period, root, value_at(curve, onset));
      }
      break;
    }

    case Archetype::ArpeggioDetached: {
      std::vector<double> starts;
      std::vector<double> levels;
      if (const auto* stairs = std::get_if<StairFit>(&g.fit)) {
        const double body = ctx.seg_start + static_cast<double>(g.body_offset) / rate;
        starts.push_back(body);
        for (double s : stairs->step_times) starts.push_back(body + s);
        levels = stairs->levels;
      } else {
        starts.push_back(ctx.seg_start);
        levels.push_back(value_at(curve, ctx.seg_start));
      }
      starts.front() = ctx.attack;
      for (std::size_t k = 0; k < starts.size(); ++k) {
        const int piece_center = register_center(levels[k], harmony.register_low, harmony.register_high);
        const int pitch = voice_near(scale_pc(harmony, static_cast<std::size_t>(motif) + k), piece_center);
        ctx.note(starts[k], kDetachedNote, pitch, levels[k]);
      }
      break;
    }

    case Archetype::GranularTexture: {
      if (g.transient) ctx.note(ctx.attack, texture.grain_ms / 1000.0, root, value_at(curve, ctx.attack));
      std::vector<int> pool;
      for (int p = ctx.center - 12; p <= ctx.center + 12; ++p) {
        if (p >= 0 && p <= 127 && in_scale(p, harmony)) pool.push_back(p);
      }
      const double steps = std::ceil(seg_duration / kGrainGrid - 1e-9);
      for (std::size_t i = 0; static_cast<double>(i) < steps; ++i) {
        const double t = ctx.seg_start + static_cast<double>(i) * kGrainGrid;
        const double y = value_at(curve, t);
        const double u = rng.unit();
        if (!(u < texture.lambda_max * g.granularity * y * kGrainGrid)) continue;
        const double v = rng.unit();
        const auto pick = std::min(pool.size() - 1, static_cast<std::size_t>(v * static_cast<double>(pool.size())));
        ctx.note(t, texture.grain_ms / 1000.0, pool[pick], y);
      }
      break;
    }
  }

  for (auto& e : ctx.out) e.pitch = fold_into(e.pitch, harmony.register_low - 12, harmony.register_high + 12);
  return std::move(ctx.out);
}

std::vector<ControlEvent> expression_track(const BrightnessCurve& curve, double rate, int channel) {
  if (!(rate > 0.0)) throw Error(Errc::NonPositiveRate, "expression rate must be positive");
  std::vector<ControlEvent> out;
  const double duration = curve.duration();
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / rate;
    if (!(t < duration)) break;
    const int value = std::clamp(static_cast<int>(std::lround(value_at(curve, curve.t0 + t) * 127.0)), 0, 127);
    if (out.empty() || out.back().value != value) out.push_back({curve.t0 + t, kExpressionController, value, channel});
  }
  return out;
}

Score compose(std::span<const Gesture> gestures, const BrightnessCurve& curve, const HarmonyConfig& harmony,
              const TextureConfig& texture, std::uint64_t seed) {
  validate(harmony);
  validate(texture);
  SplitMix64 rng(seed);

  std::vector<const Gesture*> order;
  for (const auto& g : gestures) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(),
                   [](const Gesture* a, const Gesture* b) { return a->segment.start < b->segment.start; });

  Score score;
  score.tempo_bpm = harmony.tempo_bpm;
  score.ppq = harmony.ppq;
  score.duration = curve.duration();
  for (const auto* g : order) {
    auto events = render_gesture(*g, curve, harmony, texture, rng);
    score.notes.insert(score.notes.end(), events.begin(), events.end());
  }
  std::sort(score.notes.begin(), score.notes.end(), [](const MusicalEvent& a, const MusicalEvent& b) {
    return std::tie(a.onset, a.pitch, a.duration, a.velocity, a.channel) <
           std::tie(b.onset, b.pitch, b.duration, b.velocity, b.channel);
  });
  score.controls = expression_track(curve, 20.0, harmony.channel);
  return score;
}

}  // namespace lumiscore
