#include <doctest.h>

#include <filesystem>

#include "lumiscore/error.h"
#include "lumiscore/pipeline.h"
#include "synth.h"

using namespace lumiscore;
namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

struct Run {
  ExtractArtifacts extracted;
  std::string analysis;
  std::vector<std::uint8_t> midi;
  std::string svg;
};

// First 20 s of the scripted film at 64x48, 24 fps.
Run run_small_film(const PipelineConfig& cfg, unsigned threads) {
  const auto path = fs::temp_directory_path() / ("lumiscore_pipeline_" + std::to_string(threads) + ".y4m");
  synth::FilmScript script;
  script.duration = 20.0;
  synth::write_film(path, script, 64, 48, 24);
  auto source = open_source(path);
  Run r;
  r.extracted = stage_extract(*source, {CurveChannel::Luma, CurveChannel::ContrastRms}, threads);
  r.analysis = stage_analyze(r.extracted.csv, r.extracted.source_json, cfg);
  r.midi = stage_compose(r.analysis, cfg);
  r.svg = stage_plot(r.extracted.csv, r.extracted.source_json, r.analysis);
  fs::remove(path);
  return r;
}

}  // namespace

TEST_CASE("small film end to end") {
  PipelineConfig cfg;
  cfg.seed = 42;
  const auto a = run_small_film(cfg, 1);
  const auto b = run_small_film(cfg, 3);
  CHECK(a.extracted.csv == b.extracted.csv);
  CHECK(a.analysis == b.analysis);
  CHECK(a.midi == b.midi);
  CHECK(a.svg == b.svg);

  const auto doc = nlohmann::json::parse(a.analysis);
  CHECK(doc["version"] == kReportVersion);
  CHECK(dump_canonical(doc) == a.analysis);
  const auto parsed = analysis_from_json(doc);
  CHECK(parsed.gestures.size() >= 4);
  CHECK(parsed.source.fps == Rational{24, 1});
  CHECK(parsed.gestures.front().segment.start == 0);
  CHECK(parsed.gestures.back().segment.end == parsed.curve.size());
  CHECK(dump_canonical(analysis_to_json(parsed, cfg)) == a.analysis);

  // Reference run pinned.
  CHECK(fnv1a(a.extracted.csv) == 3494098523259771467ull);
  CHECK(fnv1a(a.analysis) == 15229918735125907166ull);
  CHECK(fnv1a(a.midi) == 5978674575835656827ull);
  CHECK(fnv1a(a.svg) == 9069880527672080982ull);
}

TEST_CASE("overrides") {
  const auto curves = [] {
    CurveSet set;
    set.source = {4, 4, {50, 1}, PixelFormat::Gray8, 500};
    std::vector<double> v(500, 0.2);
    std::fill(v.begin() + 250, v.end(), 0.8);
    set.curves[CurveChannel::Luma] = synth::make_curve(v, 50.0);
    return set;
  }();
  PipelineConfig cfg;
  const auto plain = analyze(curves, cfg);
  REQUIRE(plain.gestures.size() >= 2);
  const auto forced =
      plain.classified[1] == Archetype::ArpeggioDetached ? Archetype::ChordHeld : Archetype::ArpeggioDetached;
  cfg.overrides.push_back({1, forced});
  const auto a = analyze(curves, cfg);
  CHECK(a.gestures[1].archetype == forced);
  CHECK(a.classified == plain.classified);
  CHECK(a.gestures[0].archetype == a.classified[0]);

  cfg.overrides = {{a.gestures.size(), Archetype::ChordHeld}};
  try {
    analyze(curves, cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key_path() == "overrides[0].segment_index");
  }

  cfg.overrides.clear();
  cfg.manual_boundaries_s = std::vector<double>{2.0, 6.0};
  const auto manual = analyze(curves, cfg);
  REQUIRE(manual.gestures.size() == 3);
  CHECK(manual.gestures[1].segment == Segment{100, 300});
}

TEST_CASE("analysis_from_json rejects gaps") {
  CurveSet set;
  set.source = {4, 4, {50, 1}, PixelFormat::Gray8, 300};
  set.curves[CurveChannel::Luma] = synth::make_curve(std::vector<double>(300, 0.5), 50.0);
  auto doc = analysis_to_json(analyze(set, {}), {});
  REQUIRE(doc["segments"].size() == 1);
  doc["segments"][0]["end_idx"] = 200;
  CHECK_THROWS_AS(analysis_from_json(doc), Error);
}
