// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "lumiscore/cli.h"
#include "lumiscore/composition.h"
#include "lumiscore/curve_prep.h"
#include "lumiscore/error.h"
#include "lumiscore/gesture.h"
#include "lumiscore/media.h"
#include "lumiscore/midi.h"
#include "lumiscore/photometry.h"
#include "lumiscore/pipeline.h"
#include "lumiscore/segmentation.h"
#include "synth.h"

namespace fs = std::filesystem;
using namespace lumiscore;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Naive per-pixel oracle with long double accumulation.
long double oracle_luma(const Frame& f) {
  long double sum = 0.0L;
  const std::size_t n = f.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    switch (f.format) {
      case PixelFormat::Rgb24:
        sum += (0.299L * f.data[3 * i] + 0.587L * f.data[3 * i + 1] + 0.114L * f.data[3 * i + 2]) / 255.0L;
        break;
      case PixelFormat::Gray8: sum += f.data[i] / 255.0L; break;
      default: sum += (std::clamp<int>(f.data[i], 16, 235) - 16) / 219.0L; break;
    }
  }
  return sum / static_cast<long double>(n);
}

// 1. Photometry exactness.
Outcome photometry_exactness() {
  const auto start = Clock::now();
  SplitMix64 rng(1);
  double worst = 0.0;
  const PixelFormat formats[] = {PixelFormat::Rgb24, PixelFormat::Gray8, PixelFormat::Y4m420};
  for (auto format : formats) {
    for (int k = 0; k < 50; ++k) {
      const auto w = static_cast<std::uint32_t>(1 + rng.next() % 320);
      const auto h = static_cast<std::uint32_t>(1 + rng.next() % 240);
      const auto frame = synth::random_frame(format, w, h, rng);
      worst = std::max(worst, static_cast<double>(std::abs(frame_luma_mean(frame) - oracle_luma(frame))));
    }
  }
  const bool extremes = frame_luma_mean(synth::rgb_frame(64, 48, 0, 0, 0)) == 0.0 &&
                        frame_luma_mean(synth::rgb_frame(64, 48, 255, 255, 255)) == 1.0 &&
                        frame_luma_mean(synth::solid_frame(PixelFormat::Gray8, 64, 48, 0)) == 0.0 &&
                        frame_luma_mean(synth::solid_frame(PixelFormat::Gray8, 64, 48, 255)) == 1.0 &&
                        frame_luma_mean(synth::solid_frame(PixelFormat::Y4m420, 64, 48, 16)) == 0.0 &&
                        frame_luma_mean(synth::solid_frame(PixelFormat::Y4m420, 64, 48, 235)) == 1.0;
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && extremes && elapsed < 1.0,
          fmt::format("max |err| {:.2e} over 3x50 frames, black/white exact: {}, {:.3f} s", worst, extremes, elapsed)};
}

// 2. Cut alignment on 3-shot constant footage.
Outcome cut_alignment() {
  SplitMix64 rng(2);
  int films = 0, exact = 0;
  for (; films < 20; ++films) {
    const std::uint32_t w = 96, h = 72;
    std::vector<int> levels;
    while (levels.size() < 3) {
      const int y = 30 + static_cast<int>(rng.next() % 180);
      if (levels.empty() || std::abs(y - levels.back()) >= 11) levels.push_back(y);
    }
    std::vector<std::size_t> lengths{12 + rng.next() % 40, 12 + rng.next() % 40, 12 + rng.next() % 40};
    std::vector<Frame> frames;
    std::vector<std::size_t> cuts;
    for (std::size_t s = 0; s < 3; ++s) {
      if (s > 0) cuts.push_back(frames.size());
      for (std::size_t k = 0; k < lengths[s]; ++k) {
        // Checkerboard detail with zero mean around the shot level.
        auto f = synth::solid_frame(PixelFormat::Y4m420, w, h, 0);
        for (std::uint32_t y = 0; y < h; ++y) {
          for (std::uint32_t x = 0; x < w; ++x) {
            const bool odd = ((x / 4) + (y / 4) + k) % 2 == 1;
            f.data[y * w + x] = static_cast<std::uint8_t>(levels[s] + (odd ? 9 : -9));
          }
        }
        frames.push_back(std::move(f));
      }
    }
    auto source = open_y4m(std::make_unique<std::istringstream>(synth::y4m_file(w, h, "25:1", "420jpeg", frames)));
    const auto curves = extract_curves(*source, {CurveChannel::Luma});
    const auto& luma = curves.at(CurveChannel::Luma).values;
    std::vector<std::size_t> found;
    for (std::size_t i = 1; i < luma.size(); ++i) {
      if (std::abs(luma[i] - luma[i - 1]) > 0.01) found.push_back(i);
    }
    exact += found == cuts;
  }
  return {exact == films, fmt::format("{}/{} films: cut-frame set recovered exactly", exact, films)};
}

// 3. Fit recovery.
Outcome fit_recovery() {
  const auto start = Clock::now();
  SplitMix64 rng(3);
  const double rate = 50.0;
  int exp_clean = 0, exp_noisy = 0, lin_clean = 0, lin_noisy = 0;
  const int trials = 100;
  for (int k = 0; k < trials; ++k) {
    const double T = 2.0 + 2.0 * rng.unit();
    const auto n = static_cast<std::size_t>(std::llround(T * rate));
    const double tau = T * (0.1 + 0.3 * rng.unit());
    const double offset = 0.05 + 0.15 * rng.unit();
    const double scale = (rng.unit() < 0.5 ? 1.0 : -1.0) * (0.5 + 0.3 * rng.unit());
    const double base = scale < 0 ? offset - scale : offset;
    const double slope = (rng.unit() < 0.5 ? 1.0 : -1.0) * (0.1 + 0.15 * rng.unit());
    const double intercept = slope > 0 ? 0.2 : 0.8;
    std::vector<double> ex(n), exn(n), li(n), lin(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      ex[i] = base + scale * std::exp(-t / tau);
      li[i] = intercept + slope * t;
      exn[i] = ex[i] + 0.02 * synth::gaussian(rng);
      lin[i] = li[i] + 0.02 * synth::gaussian(rng);
    }
    const auto grid = tau_grid(static_cast<double>(n) / rate, 64);
    exp_clean += std::abs(fit_exponential(ex, rate, grid).tau / tau - 1.0) <= 0.05;
    exp_noisy += std::abs(fit_exponential(exn, rate, grid).tau / tau - 1.0) <= 0.10;
    lin_clean += std::abs(fit_linear(li, rate).slope / slope - 1.0) <= 0.02;
    lin_noisy += std::abs(fit_linear(lin, rate).slope / slope - 1.0) <= 0.10;
  }
  const double elapsed = seconds_since(start);
  const bool pass = exp_clean >= 95 && lin_clean >= 95 && exp_noisy >= 95 && lin_noisy >= 95 && elapsed < 5.0;
  return {pass, fmt::format("tau 5%: {}/100, slope 2%: {}/100, noisy tau 10%: {}/100, noisy slope 10%: {}/100, "
                            "{:.2f} s",
                            exp_clean, lin_clean, exp_noisy, lin_noisy, elapsed)};
}

// 4. Segmentation recovery. Curves go through the analysis front end: the
// moving-average smoother, then segmentation with the noise scale of the
// unsmoothed curve. Segmenting the unsmoothed curve directly is reported too.
struct RecoveryCount {
  int good = 0, missed = 0, spurious = 0;
};

void score_recovery(const synth::PiecewiseCase& pc, const std::vector<Segment>& segs, double rate, RecoveryCount& n) {
  bool ok = true;
  for (double b : pc.breakpoints) {
    const bool matched = std::any_of(segs.begin() + 1, segs.end(), [&](const Segment& s) {
      return std::abs(static_cast<double>(s.start) / rate - b) <= 0.2 + 1e-9;
    });
    if (!matched) {
      ok = false;
      ++n.missed;
    }
  }
  if (segs.size() > pc.breakpoints.size() + 2) {
    ok = false;
    ++n.spurious;
  }
  n.good += ok;
}

Outcome segmentation_recovery() {
  const auto start = Clock::now();
  SplitMix64 rng(4);
  RecoveryCount front_end, direct;
  const int cases = 50;
  const double rate = 50.0;
  for (int k = 0; k < cases; ++k) {
    const double duration = 8.0 + 6.0 * rng.unit();
    const auto pc = synth::random_piecewise(rng, duration, rate, 1.0, 0.1, 0.01);
    SegmentationParams params;
    params.noise_sigma = estimate_noise(pc.curve);
    score_recovery(pc, segment(smooth(pc.curve, 0.25), params), rate, front_end);
    score_recovery(pc, segment(pc.curve, {}), rate, direct);
  }
  const double elapsed = seconds_since(start);
  return {front_end.good == cases && elapsed < 10.0,
          fmt::format("{}/{} curves recovered ({} boundaries missed, {} over-segmented), {:.2f} s; "
                      "unsmoothed input: {}/{}",
                      front_end.good, cases, front_end.missed, front_end.spurious, elapsed, direct.good, cases)};
}

struct SuiteGesture {
  Gesture gesture;
  BrightnessCurve smoothed;
};

SuiteGesture classify_case(const synth::GestureCase& c) {
  const auto raw = synth::make_curve(c.values, c.rate);
  auto smoothed = smooth(raw, 0.25);
  const std::span<const double> s(smoothed.values), r(raw.values);
  const auto n = c.end - c.start;
  auto g = classify(s.subspan(c.start, n), r.subspan(c.start, n), c.rate, ClassifyParams{});
  g.segment = {c.start, c.end};
  return {std::move(g), std::move(smoothed)};
}

const Archetype kCells[] = {Archetype::ChordResonance, Archetype::ChordArpeggio,    Archetype::TremoloScratch,
                            Archetype::ChordHeld,      Archetype::ArpeggioDetached, Archetype::GranularTexture};

// 5. Archetype suite.
Outcome archetype_suite(std::vector<SuiteGesture>& transient_gestures) {
  bool pass = true;
  std::string detail;
  for (auto cell : kCells) {
    SplitMix64 rng(500 + static_cast<std::uint64_t>(cell));
    int correct = 0;
    std::map<std::string, int> confusions;
    for (int k = 0; k < 100; ++k) {
      auto result = classify_case(synth::make_gesture(cell, rng));
      if (result.gesture.archetype == cell) {
        ++correct;
      } else {
        ++confusions[std::string(archetype_name(result.gesture.archetype))];
      }
      if (result.gesture.transient) transient_gestures.push_back(std::move(result));
    }
    pass = pass && correct >= 95;
    detail += fmt::format("{}{} {}/100", detail.empty() ? "" : ", ", archetype_name(cell), correct);
    for (const auto& [name, count] : confusions) detail += fmt::format(" [{}x{}]", count, name);
  }
  return {pass, detail};
}

// 6. Synchrony of first note onset with the detected transient.
Outcome synchrony(const std::vector<SuiteGesture>& gestures) {
  int ok = 0;
  double worst = 0.0;
  for (const auto& sg : gestures) {
    SplitMix64 rng(6);
    const auto events = render_gesture(sg.gesture, sg.smoothed, HarmonyConfig{}, TextureConfig{}, rng);
    const double rate = sg.smoothed.sample_rate;
    const double t_transient = static_cast<double>(sg.gesture.segment.start + sg.gesture.transient->onset) / rate;
    double first = events.empty() ? 1e9 : events.front().onset;
    for (const auto& e : events) first = std::min(first, e.onset);
    const double err = std::abs(first - t_transient);
    worst = std::max(worst, err);
    ok += err <= 1.0 / 50.0 + 1e-12;
  }
  const auto total = static_cast<int>(gestures.size());
  return {total > 0 && ok == total,
          fmt::format("{}/{} transient gestures, worst offset {:.4f} s", ok, total, worst)};
}

const char* kArtifacts[] = {"curves.csv", "analysis.json", "score.mid", "plot.svg"};

int run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

struct FilmRuns {
  double pipeline_seconds = 0.0;
  bool ran = false;
  Outcome determinism;
  std::vector<fs::path> midi_files;
};

// 7. Determinism across runs, thread counts and staged execution.
FilmRuns film_runs(const fs::path& dir) {
  FilmRuns r;
  const auto film = dir / "film.y4m";
  synth::write_film(film, synth::FilmScript{}, 640, 480, 24);
  const auto config = dir / "config.json";
  std::ofstream(config) << R"({"seed": 42})";

  const auto t0 = Clock::now();
  const int a = run({"pipeline", "--input", film.string(), "--config", config.string(), "--out-dir",
                     (dir / "run1").string(), "--threads", "1"});
  r.pipeline_seconds = seconds_since(t0);
  const int b = run({"pipeline", "--input", film.string(), "--config", config.string(), "--out-dir",
                     (dir / "run2").string(), "--threads", "1"});
  const int c = run({"pipeline", "--input", film.string(), "--config", config.string(), "--out-dir",
                     (dir / "run3").string(), "--threads", "4"});
  const auto staged = dir / "staged";
  fs::create_directories(staged);
  const int d = run({"extract", "--input", film.string(), "--out", (staged / "curves.csv").string()}) |
                run({"analyze", "--curves", (staged / "curves.csv").string(), "--config", config.string(), "--out",
                     (staged / "analysis.json").string()}) |
                run({"compose", "--analysis", (staged / "analysis.json").string(), "--config", config.string(),
                     "--out", (staged / "score.mid").string()}) |
                run({"plot", "--curves", (staged / "curves.csv").string(), "--analysis",
                     (staged / "analysis.json").string(), "--out", (staged / "plot.svg").string()});
  r.ran = a == 0;
  if (a | b | c | d) {
    r.determinism = {false, fmt::format("exit codes {} {} {} {}", a, b, c, d)};
    return r;
  }
  int identical = 0;
  std::string differing;
  for (const char* name : kArtifacts) {
    const auto ref = slurp(dir / "run1" / name);
    const bool same = !ref.empty() && ref == slurp(dir / "run2" / name) && ref == slurp(dir / "run3" / name) &&
                      ref == slurp(staged / name);
    identical += same;
    if (!same) differing += std::string(" ") + name;
  }
  r.midi_files = {dir / "run1" / "score.mid"};
  const auto analysis = nlohmann::json::parse(slurp(dir / "run1" / "analysis.json"));
  r.determinism = {identical == 4,
                   fmt::format("{}/4 artifacts byte-identical over 2 runs, 1 vs 4 threads and staged run{}; "
                               "{} segments",
                               identical, differing.empty() ? "" : " (differs:" + differing + ")",
                               analysis["segments"].size())};
  return r;
}

// 8. MIDI validity.
Outcome midi_validity(const std::vector<fs::path>& files, const std::vector<SuiteGesture>& gestures) {
  const bool vlq = midi::encode_vlq(0) == std::vector<std::uint8_t>{0x00} &&
                   midi::encode_vlq(128) == std::vector<std::uint8_t>{0x81, 0x00} &&
                   midi::encode_vlq(0x0FFFFFFF) == std::vector<std::uint8_t>{0xFF, 0xFF, 0xFF, 0x7F};
  std::vector<Score> scores;
  SplitMix64 rng(8);
  for (std::size_t i = 0; i < gestures.size(); i += 7) {
    SplitMix64 local(rng.next());
    Score s;
    s.notes = render_gesture(gestures[i].gesture, gestures[i].smoothed, {}, {}, local);
    s.controls = expression_track(gestures[i].smoothed);
    s.duration = gestures[i].smoothed.duration();
    scores.push_back(std::move(s));
  }
  for (auto cell : kCells) {
    SplitMix64 gen(800 + static_cast<std::uint64_t>(cell));
    auto sg = classify_case(synth::make_gesture(cell, gen));
    std::vector<Gesture> one{sg.gesture};
    scores.push_back(compose(one, sg.smoothed, {}, {}, 42));
  }

  int checked = 0, good = 0;
  auto check = [&](const std::vector<std::uint8_t>& bytes, const std::vector<midi::Event>* expected) {
    ++checked;
    try {
      const auto file = midi::read_smf(bytes);
      if (expected && file.events != *expected) return;
      std::map<std::pair<int, int>, int> open;
      for (const auto& e : file.events) {
        const int kind = e.status & 0xF0;
        const std::pair<int, int> key{e.status & 0x0F, e.data1};
        if (kind == 0x90) {
          if (open[key]++ != 0) return;  // re-trigger while sounding
        } else if (kind == 0x80) {
          if (open[key]-- != 1) return;
        }
      }
      for (const auto& [_, count] : open) {
        if (count != 0) return;
      }
      if (midi::write_smf(Score{}) .size() != 14 + 8 + 11 + 8 + 4) return;
      ++good;
    } catch (const Error&) {
    }
  };
  for (const auto& s : scores) {
    const auto events = midi::score_events(s);
    check(midi::write_smf(s), &events);
  }
  for (const auto& f : files) {
    const auto text = slurp(f);
    check(std::vector<std::uint8_t>(text.begin(), text.end()), nullptr);
  }
  return {vlq && checked > 0 && good == checked,
          fmt::format("VLQ vectors {}, {}/{} files round-trip with balanced notes", vlq ? "ok" : "WRONG", good,
                      checked)};
}

// 9. Performance.
Outcome performance(const FilmRuns& runs) {
  SplitMix64 rng(9);
  std::vector<Frame> frames;
  for (int k = 0; k < 60; ++k) frames.push_back(synth::random_frame(PixelFormat::Rgb24, 640, 480, rng));
  double best = 0.0;
  volatile double sink = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = Clock::now();
    for (const auto& f : frames) sink = sink + frame_luma_mean(f);
    best = std::max(best, 60.0 * 640 * 480 / 1e6 / seconds_since(t0));
  }
  const bool pipeline_ok = runs.ran && runs.pipeline_seconds < 10.0;
  return {best >= 50.0 && pipeline_ok,
          fmt::format("RGB24 luma {:.0f} Mpx/s single-threaded; 90 s 640x480@24 pipeline {:.2f} s", best,
                      runs.pipeline_seconds)};
}

// 10. Monotone dynamics.
Outcome monotone_dynamics() {
  std::vector<int> expression, velocity;
  for (double b : {0.1, 0.5, 0.9}) {
    const auto curve = synth::make_curve(std::vector<double>(250, b), 50.0);
    CurveSet set;
    set.source.fps = {50, 1};
    set.curves.emplace(CurveChannel::Luma, curve);
    const PipelineConfig cfg;
    const auto analysis = analyze(set, cfg);
    const auto score = compose(analysis.gestures, analysis.curve, cfg.harmony, cfg.texture, cfg.seed);
    int vmax = 0, vmin = 128;
    for (const auto& n : score.notes) {
      vmax = std::max(vmax, n.velocity);
      vmin = std::min(vmin, n.velocity);
    }
    if (score.notes.empty()) vmin = vmax = velocity_at(b);
    if (vmin != vmax) return {false, fmt::format("constant b={} gave mixed velocities", b)};
    velocity.push_back(vmax);
    int cmax = -1;
    for (const auto& c : score.controls) cmax = std::max(cmax, c.value);
    expression.push_back(cmax);
  }
  const bool pass = expression[0] < expression[1] && expression[1] < expression[2] && velocity[0] < velocity[1] &&
                    velocity[1] < velocity[2];
  return {pass, fmt::format("CC11 {} < {} < {}, velocity {} < {} < {}", expression[0], expression[1], expression[2],
                            velocity[0], velocity[1], velocity[2])};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  const auto dir = fs::temp_directory_path() / fmt::format("lumiscore-acceptance-{}", ::getpid());
  fs::create_directories(dir);

  report(1, "photometry exactness", photometry_exactness());
  report(2, "cut alignment", cut_alignment());
  report(3, "fit recovery", fit_recovery());
  report(4, "segmentation recovery", segmentation_recovery());
  std::vector<SuiteGesture> transients;
  report(5, "archetype suite", archetype_suite(transients));
  report(6, "synchrony", synchrony(transients));
  FilmRuns runs;
  try {
    runs = film_runs(dir);
  } catch (const std::exception& e) {
    runs.determinism = {false, e.what()};
  }
  report(7, "determinism", runs.determinism);
  report(8, "midi validity", midi_validity(runs.midi_files, transients));
  report(9, "performance", performance(runs));
  report(10, "monotone dynamics", monotone_dynamics());

  std::error_code ec;
  fs::remove_all(dir, ec);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
