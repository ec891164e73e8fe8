#include "lumiscore/gesture.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "lumiscore/curve_prep.h"
#include "lumiscore/error.h"

namespace lumiscore {

namespace {

constexpr std::array<ShapeKind, kShapeKindCount> kKinds = {
    ShapeKind::LinearRise, ShapeKind::LinearDecay, ShapeKind::ExponentialRise, ShapeKind::ExponentialDecay,
    ShapeKind::Plateau,    ShapeKind::Staircase,   ShapeKind::Chaotic};

constexpr std::array<Archetype, 8> kArchetypes = {
    Archetype::ChordResonance, Archetype::ChordArpeggio,    Archetype::TremoloScratch, Archetype::ChordHeld,
    Archetype::ArpeggioDetached, Archetype::GranularTexture, Archetype::CrescendoHeld,  Archetype::DiminuendoHeld};

bool is_rise(ShapeKind k) { return k == ShapeKind::LinearRise || k == ShapeKind::ExponentialRise; }

bool monotone(const std::vector<double>& levels) {
  const bool up = std::is_sorted(levels.begin(), levels.end());
  const bool down = std::is_sorted(levels.begin(), levels.end(), std::greater<>());
  return up || down;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Candidate {
  ShapeFit fit;
  ShapeKind kind;
  double sse;
  double score;
};

}  // namespace

std::string_view shape_name(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::LinearRise: return "LinearRise";
    case ShapeKind::LinearDecay: return "LinearDecay";
    case ShapeKind::ExponentialRise: return "ExponentialRise";
    case ShapeKind::ExponentialDecay: return "ExponentialDecay";
    case ShapeKind::Plateau: return "Plateau";
    case ShapeKind::Staircase: return "Staircase";
    case ShapeKind::Chaotic: return "Chaotic";
  }
  return "Unknown";
}

std::string_view archetype_name(Archetype archetype) noexcept {
  switch (archetype) {
    case Archetype::ChordResonance: return "ChordResonance";
    case Archetype::ChordArpeggio: return "ChordArpeggio";
    case Archetype::TremoloScratch: return "TremoloScratch";
    case Archetype::ChordHeld: return "ChordHeld";
    case Archetype::ArpeggioDetached: return "ArpeggioDetached";
    case Archetype::GranularTexture: return "GranularTexture";
    case Archetype::CrescendoHeld: return "CrescendoHeld";
    case Archetype::DiminuendoHeld: return "DiminuendoHeld";
  }
  return "Unknown";
}

std::optional<ShapeKind> shape_from_name(std::string_view name) noexcept {
  for (auto k : kKinds) {
    if (shape_name(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<Archetype> archetype_from_name(std::string_view name) noexcept {
  for (auto a : kArchetypes) {
    if (archetype_name(a) == name) return a;
  }
  return std::nullopt;
}

void validate(const ClassifyParams& p) {
  for (double t : {p.flat, p.transient, p.granular, p.chaotic_rough, p.fit_rrmse}) {
    if (!(t > 0.0 && t < 1.0)) throw Error(Errc::InvalidArgument, "classification thresholds must lie in (0,1)");
  }
  if (!(p.transient_window > 0.0)) throw Error(Errc::InvalidArgument, "transient window must be positive");
  if (p.tau_count == 0 || p.staircase_max_pieces < 2) throw Error(Errc::InvalidArgument, "empty fitting grid");
  if (!(p.roughness_saturation > 0.0)) throw Error(Errc::InvalidArgument, "roughness saturation must be positive");
}

std::optional<TransientInfo> detect_transient(std::span<const double> smoothed, double rate, const ClassifyParams& params) {
  if (smoothed.size() < 2) throw Error(Errc::TooFewSamples, "transient detection needs 2 samples");
  const auto window = static_cast<std::size_t>(std::floor(params.transient_window * rate + 1e-9)) + 1;
  const auto head = smoothed.first(std::min(smoothed.size(), std::max<std::size_t>(window, 2)));
  const auto peak = std::max_element(head.begin(), head.end());
  const double rise = *peak - head.front();
  if (rise < params.transient) return std::nullopt;
  return TransientInfo{static_cast<std::size_t>(peak - head.begin()), rise};
}

LinearFit fit_linear(std::span<const double> samples, double rate) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(Errc::TooFewSamples, "linear fit needs 2 samples");
  const double tbar = 0.5 * static_cast<double>(n - 1) / rate;
  const double ybar = mean(samples);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) / rate - tbar;
    stt += dt * dt;
    sty += dt * (samples[i] - ybar);
  }
  LinearFit fit;
  fit.slope = sty / stt;
  fit.intercept = ybar - fit.slope * tbar;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = samples[i] - (fit.intercept + fit.slope * static_cast<double>(i) / rate);
    fit.sse += r * r;
  }
  return fit;
}

std::vector<double> tau_grid(double duration, std::size_t count) {
  if (!(duration > 0.0) || count == 0) throw Error(Errc::InvalidArgument, "tau grid needs a positive span");
  const double lo = std::log(duration / 50.0);
  const double hi = std::log(duration * 5.0);
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = std::exp(lo + f * (hi - lo));
  }
  return grid;
}

ExpFit fit_exponential(std::span<const double> samples, double rate, std::span<const double> taus) {
  const std::size_t n = samples.size();
  if (n < 3) throw Error(Errc::TooFewSamples, "exponential fit needs 3 samples");
  if (taus.empty()) throw Error(Errc::InvalidArgument, "tau grid is empty");

  auto degenerate = [&] {
    const auto line = fit_linear(samples, rate);
    ExpFit fit;
    fit.offset = line.intercept;
    fit.sse = line.sse;
    fit.degenerate = true;
    return fit;
  };
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return degenerate();

  std::vector<double> grid(taus.begin(), taus.end());
  std::sort(grid.begin(), grid.end());
  const double ybar = mean(samples);
  std::vector<double> e(n);

  ExpFit best;
  bool found = false;
  for (double tau : grid) {
    if (!(tau > 0.0)) continue;
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-static_cast<double>(i) / rate / tau);
    const double ebar = mean(e);
    double see = 0.0, sey = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double de = e[i] - ebar;
      see += de * de;
      sey += de * (samples[i] - ybar);
    }
    if (!(see > 1e-12 * static_cast<double>(n))) continue;
    const double d = sey / see;
    const double c = ybar - d * ebar;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = samples[i] - (c + d * e[i]);
      sse += r * r;
    }
    if (!found || sse < best.sse) {
      best = ExpFit{c, d, tau, sse, false};
      found = true;
    }
  }
  if (!found) return degenerate();
  return best;
}

StairFit fit_staircase(std::span<const double> samples, double rate, std::size_t max_pieces, bool require_monotone) {
  const std::size_t n = samples.size();
  if (max_pieces < 2 || n < 2 * max_pieces) {
    throw Error(Errc::TooFewSamples, "staircase fit with " + std::to_string(max_pieces) + " pieces needs " +
                                         std::to_string(2 * max_pieces) + " samples");
  }
  // Centered prefix sums keep the SSE of flat pieces close to zero.
  const double centre = mean(samples);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = samples[i] - centre;
    s1[i + 1] = s1[i] + v;
    s2[i + 1] = s2[i] + v * v;
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    const double s = s1[j] - s1[i];
    return std::max(0.0, s2[j] - s2[i] - s * s / static_cast<double>(j - i));
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[m][j]: optimal cost of samples [0, j) in m pieces; cut[m][j] the last piece start.
  std::vector<std::vector<double>> best(max_pieces + 1, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::size_t>> cut(max_pieces + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) best[1][j] = cost(0, j);
  for (std::size_t m = 2; m <= max_pieces; ++m) {
    for (std::size_t j = m; j <= n; ++j) {
      double bj = kInf;
      std::size_t arg = m - 1;
      for (std::size_t i = m - 1; i < j; ++i) {
        const double c = best[m - 1][i] + cost(i, j);
        if (c < bj) {
          bj = c;
          arg = i;
        }
      }
      best[m][j] = bj;
      cut[m][j] = arg;
    }
  }

  auto reconstruct = [&](std::size_t pieces) {
    std::vector<std::size_t> bounds(pieces + 1);
    bounds[pieces] = n;
    for (std::size_t m = pieces; m >= 1; --m) bounds[m - 1] = m == 1 ? 0 : cut[m][bounds[m]];
    StairFit fit;
    for (std::size_t p = 0; p < pieces; ++p) {
      const auto piece = samples.subspan(bounds[p], bounds[p + 1] - bounds[p]);
      const double level = mean(piece);
      fit.levels.push_back(level);
      for (double v : piece) fit.sse += (v - level) * (v - level);
      if (p > 0) fit.step_times.push_back(static_cast<double>(bounds[p]) / rate);
    }
    return fit;
  };

  std::optional<StairFit> chosen;
  double chosen_score = kInf;
  for (std::size_t m = 2; m <= max_pieces; ++m) {
    const double score = bic(best[m][n], n, 2 * m - 1);
    if (!(score < chosen_score)) continue;
    auto fit = reconstruct(m);
    if (require_monotone && !monotone(fit.levels)) continue;
    chosen_score = score;
    chosen = std::move(fit);
  }
  return chosen ? *chosen : reconstruct(2);
}

double bic(double sse, std::size_t n, std::size_t params) {
  const double dn = static_cast<double>(n);
  return dn * std::log(sse / dn + 1e-12) + static_cast<double>(params) * std::log(dn);
}

Archetype archetype_for(ShapeKind kind, bool has_transient, double granularity, const ShapeFit& fit,
                        const ClassifyParams& params) {
  if (has_transient && kind == ShapeKind::LinearDecay) return Archetype::ChordResonance;
  if (has_transient && kind == ShapeKind::ExponentialDecay) return Archetype::ChordArpeggio;
  if (has_transient && kind == ShapeKind::Plateau) return Archetype::ChordHeld;
  if (kind == ShapeKind::Staircase) {
    const auto* stairs = std::get_if<StairFit>(&fit);
    if (stairs && !stairs->levels.empty() && stairs->levels.back() > stairs->levels.front()) {
      return Archetype::ArpeggioDetached;
    }
    return Archetype::DiminuendoHeld;
  }
  if (is_rise(kind) && granularity >= params.granular) return Archetype::TremoloScratch;
  if (kind == ShapeKind::Chaotic) return Archetype::GranularTexture;
  if (is_rise(kind)) return Archetype::CrescendoHeld;
  return Archetype::DiminuendoHeld;
}

Gesture classify(std::span<const double> smoothed, std::span<const double> raw, double rate, const ClassifyParams& params) {
  const std::size_t n = smoothed.size();
  if (n < 2) throw Error(Errc::TooFewSamples, "segment needs at least 2 samples");
  if (raw.size() != n) throw Error(Errc::InvalidArgument, "smoothed and raw slices differ in length");

  Gesture g;
  g.segment = {0, n};
  g.mean_brightness = mean(raw);
  g.granularity = roughness(raw, smoothed, params.roughness_saturation);
  g.transient = detect_transient(smoothed, rate, params);

  // Fits start after the transient peak, as long as enough samples remain.
  g.body_offset = g.transient && n - (g.transient->onset + 1) >= 3 ? g.transient->onset + 1 : 0;
  const auto smooth_body = smoothed.subspan(g.body_offset);
  const auto raw_body = raw.subspan(g.body_offset);
  const std::size_t m = raw_body.size();
  const auto [lo, hi] = std::minmax_element(smooth_body.begin(), smooth_body.end());
  const double range = *hi - *lo;

  const auto line = fit_linear(raw_body, rate);
  if (range < params.flat) {
    g.kind = ShapeKind::Plateau;
    g.fit = line;
    g.fit_rrmse = std::sqrt(line.sse / static_cast<double>(m)) / std::max(range, 0.05);
  } else {
    std::vector<Candidate> candidates;
    candidates.push_back({line, line.slope > 0.0 ? ShapeKind::LinearRise : ShapeKind::LinearDecay, line.sse,
                          bic(line.sse, m, 2)});
    if (m >= 3) {
      const auto grid = tau_grid(static_cast<double>(m) / rate, params.tau_count);
      const auto expo = fit_exponential(raw_body, rate, grid);
      if (!expo.degenerate) {
        candidates.push_back({expo, expo.scale < 0.0 ? ShapeKind::ExponentialRise : ShapeKind::ExponentialDecay,
                              expo.sse, bic(expo.sse, m, 3)});
      }
    }
    const std::size_t max_pieces = std::min(params.staircase_max_pieces, m / 2);
    if (max_pieces >= 2) {
      auto stairs = fit_staircase(raw_body, rate, max_pieces, true);
      // A non-monotone staircase is not a step envelope; the next-best model wins.
      if (monotone(stairs.levels)) {
        const double sse = stairs.sse;
        const std::size_t k = 2 * stairs.pieces() - 1;
        candidates.push_back({std::move(stairs), ShapeKind::Staircase, sse, bic(sse, m, k)});
      }
    }
    // Stable: on equal scores the simpler model listed first wins.
    const auto winner = std::min_element(candidates.begin(), candidates.end(),
                                         [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
    g.kind = winner->kind;
    g.fit = winner->fit;
    g.fit_rrmse = std::sqrt(winner->sse / static_cast<double>(m)) / std::max(range, 0.05);
    if (g.fit_rrmse > params.fit_rrmse) g.kind = ShapeKind::Chaotic;
  }

  // Granular override: the residual alone could produce the observed range.
  const double noise_span = 2.0 * g.granularity * params.roughness_saturation * std::sqrt(12.0);
  if (!g.transient && g.granularity > params.chaotic_rough && range < noise_span) g.kind = ShapeKind::Chaotic;

  g.archetype = archetype_for(g.kind, g.transient.has_value(), g.granularity, g.fit, params);
  return g;
}

std::vector<double> motif_features(const Gesture& g, double rate) {
  const double duration = static_cast<double>(g.segment.length()) / rate;
  std::vector<double> f(kShapeKindCount + 5, 0.0);
  f[static_cast<std::size_t>(g.kind)] = 1.0;
  if (const auto* line = std::get_if<LinearFit>(&g.fit)) {
    const double s = line->slope;
    f[kShapeKindCount] = (s > 0.0 ? 1.0 : s < 0.0 ? -1.0 : 0.0) * std::min(1.0, std::abs(s) * duration);
  }
  if (const auto* expo = std::get_if<ExpFit>(&g.fit); expo && !expo->degenerate) {
    f[kShapeKindCount + 1] = std::min(1.0, expo->tau / duration);
  }
  f[kShapeKindCount + 2] = g.granularity;
  f[kShapeKindCount + 3] = g.transient ? g.transient->amplitude : 0.0;
  f[kShapeKindCount + 4] = std::log(duration) / std::log(60.0);
  return f;
}

void assign_motifs(std::vector<Gesture>& gestures, double rate, double epsilon) {
  struct Motif {
    ShapeKind kind;
    std::vector<double> representative;
  };
  std::vector<Motif> motifs;
  for (auto& g : gestures) {
    const auto features = motif_features(g, rate);
    g.motif_id.reset();
    for (std::size_t id = 0; id < motifs.size(); ++id) {
      if (motifs[id].kind != g.kind) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < features.size(); ++k) {
        const double d = features[k] - motifs[id].representative[k];
        d2 += d * d;
      }
      if (std::sqrt(d2) <= epsilon) {
        g.motif_id = static_cast<int>(id);
        break;
      }
    }
    if (!g.motif_id) {
      g.motif_id = static_cast<int>(motifs.size());
      motifs.push_back({g.kind, features});
    }
  }
}

}  // namespace lumiscore
