#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lumiscore/segmentation.h"

namespace lumiscore {

/// Envelope shape of a segment.
enum class ShapeKind { LinearRise, LinearDecay, ExponentialRise, ExponentialDecay, Plateau, Staircase, Chaotic };
inline constexpr std::size_t kShapeKindCount = 7;

/// Composition rule attached to a gesture. The first six are the six
/// shape/gesture pairings; the last two are fallbacks for unmatched shapes.
enum class Archetype {
  ChordResonance,    ///< marked transient + linear fade-out: chord and its resonance
  ChordArpeggio,     ///< marked transient + exponential fade-out: chord then arpeggios
  TremoloScratch,    ///< granular linear fade-in: tremolos / scratch
  ChordHeld,         ///< transient + plateau: chord and held notes
  ArpeggioDetached,  ///< exponential fade-in in steps: arpeggios and detached notes
  GranularTexture,   ///< chaotic, undefined curve: granular texture
  CrescendoHeld,
  DiminuendoHeld,
};

std::string_view shape_name(ShapeKind kind) noexcept;
std::string_view archetype_name(Archetype archetype) noexcept;
std::optional<ShapeKind> shape_from_name(std::string_view name) noexcept;
std::optional<Archetype> archetype_from_name(std::string_view name) noexcept;

struct TransientInfo {
  std::size_t onset = 0;  ///< sample offset from the segment start
  double amplitude = 0.0;
  friend bool operator==(const TransientInfo&, const TransientInfo&) = default;
};

/// y = intercept + slope * t, t in seconds from the body start.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;  ///< per second
  double sse = 0.0;
  friend bool operator==(const LinearFit&, const LinearFit&) = default;
};

/// y = offset + scale * exp(-t / tau). A rising envelope has scale < 0.
struct ExpFit {
  double offset = 0.0;
  double scale = 0.0;
  double tau = 0.0;  ///< seconds
  double sse = 0.0;
  /// The exponential column could not be separated from the constant one;
  /// offset/sse then come from the linear fit and scale is 0.
  bool degenerate = false;
  friend bool operator==(const ExpFit&, const ExpFit&) = default;
};

/// Optimal piecewise-constant fit.
struct StairFit {
  std::vector<double> levels;      ///< piece means, one per piece
  std::vector<double> step_times;  ///< interior boundaries, seconds from the body start
  double sse = 0.0;
  friend bool operator==(const StairFit&, const StairFit&) = default;

  std::size_t pieces() const noexcept { return levels.size(); }
};

using ShapeFit = std::variant<LinearFit, ExpFit, StairFit>;

struct ClassifyParams {
  double flat = 0.03;
  double transient = 0.15;
  double transient_window = 0.2;  ///< seconds
  double granular = 0.4;
  double chaotic_rough = 0.6;
  double fit_rrmse = 0.35;
  std::size_t tau_count = 64;     ///< log-spaced over [T/50, 5T]
  std::size_t staircase_max_pieces = 6;
  double roughness_saturation = 0.05;
};

/// Throws Errc::InvalidArgument when a threshold leaves (0,1) or a grid is empty.
void validate(const ClassifyParams& params);

struct Gesture {
  Segment segment;
  ShapeKind kind = ShapeKind::Plateau;
  std::optional<TransientInfo> transient;
  double granularity = 0.0;
  ShapeFit fit;
  std::size_t body_offset = 0;  ///< samples from the segment start where `fit` begins
  double mean_brightness = 0.0;
  double fit_rrmse = 0.0;
  std::optional<int> motif_id;
  Archetype archetype = Archetype::DiminuendoHeld;
};

std::optional<TransientInfo> detect_transient(std::span<const double> smoothed, double rate, const ClassifyParams& params);

LinearFit fit_linear(std::span<const double> samples, double rate);

/// Grid search over tau with a closed-form (offset, scale) solve per grid
/// point; ties go to the smallest tau.
ExpFit fit_exponential(std::span<const double> samples, double rate, std::span<const double> tau_grid);

/// `count` log-spaced values over [duration/50, 5*duration], ascending.
std::vector<double> tau_grid(double duration, std::size_t count);

/// Exact dynamic-programming staircase for 2..max_pieces pieces; the piece
/// count is chosen by BIC. With `require_monotone` only piece counts whose
/// levels are monotone compete; when none is, the 2-piece fit is returned.
StairFit fit_staircase(std::span<const double> samples, double rate, std::size_t max_pieces,
                       bool require_monotone = false);

/// n ln(sse/n + 1e-12) + k ln n
double bic(double sse, std::size_t n, std::size_t params);

/// The lookup from attributes to composition rule.
Archetype archetype_for(ShapeKind kind, bool has_transient, double granularity, const ShapeFit& fit,
                        const ClassifyParams& params);

/// Classifies one segment from its smoothed and unsmoothed samples. The
/// returned gesture's segment is [0, n); callers offset it.
Gesture classify(std::span<const double> smoothed, std::span<const double> raw, double rate, const ClassifyParams& params);

/// Shape feature vector used for motif matching.
std::vector<double> motif_features(const Gesture& gesture, double rate);

/// Greedy online clustering in temporal order; a gesture joins the earliest
/// motif of the same kind whose first member lies within `epsilon`.
void assign_motifs(std::vector<Gesture>& gestures, double rate, double epsilon = 0.25);

}  // namespace lumiscore
