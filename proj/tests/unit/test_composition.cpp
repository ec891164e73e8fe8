#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lumiscore/composition.h"
#include "synth.h"

using namespace lumiscore;

namespace {

Gesture gesture_on(std::size_t start, std::size_t end, Archetype archetype) {
  Gesture g;
  g.segment = {start, end};
  g.archetype = archetype;
  g.kind = ShapeKind::Plateau;
  g.fit = LinearFit{0.5, 0.0, 0.0};
  g.motif_id = 0;
  g.mean_brightness = 0.5;
  return g;
}

BrightnessCurve flat_curve(double level, double seconds) {
  return synth::make_curve(std::vector<double>(static_cast<std::size_t>(seconds * 50.0), level), 50.0);
}

}  // namespace

TEST_CASE("register_center and velocity_at") {
  CHECK(register_center(0.0, 36, 84) == 36);
  CHECK(register_center(1.0, 36, 84) == 84);
  CHECK(register_center(0.5, 36, 84) == 60);
  CHECK(velocity_at(0.0) == 20);
  CHECK(velocity_at(1.0) == 120);
  CHECK(velocity_at(0.5) == 70);
}

TEST_CASE("chord_for") {
  const HarmonyConfig h;
  CHECK(chord_for(0, 60, h) == std::vector<int>{60, 63, 67});
  CHECK(chord_for(0, 60, h) == chord_for(0, 60, h));
  CHECK(chord_for(1, 60, h) != chord_for(0, 60, h));
  // motif 1 roots on scale[1] = 2: degrees 2, 5, 8 voiced near 60
  CHECK(chord_for(1, 60, h) == std::vector<int>{62, 65, 68});
  HarmonyConfig shifted;
  shifted.root_pc = 2;
  CHECK(chord_for(0, 60, shifted) == std::vector<int>{62, 65, 69});
}

TEST_CASE("arpeggio_times") {
  ExpFit halving{0.0, 1.0, 1.0 / std::numbers::ln2, 0.0, false};
  const auto t = arpeggio_times(halving, 4.5, 0.5);
  REQUIRE(t.size() == 4);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(t[k] == doctest::Approx(static_cast<double>(k + 1)));

  ExpFit slow{0.0, 1.0, 2.0, 0.0, false};
  const auto u = arpeggio_times(slow, 3.0, 0.8);
  REQUIRE(u.size() >= 2);
  for (std::size_t k = 1; k < u.size(); ++k) CHECK(u[k] - u[k - 1] == doctest::Approx(2.0 * std::log(1.25)));

  ExpFit quick{0.0, 1.0, 0.45 / std::log(1.25), 0.0, false};
  CHECK(arpeggio_times(quick, 0.3, 0.8).empty());

  CHECK(arpeggio_times(ExpFit{0.0, 1.0, 0.01, 0.0, false}, 10.0, 0.8).size() == 32);
  CHECK_THROWS(arpeggio_times(ExpFit{0.5, -0.3, 1.0, 0.0, false}, 4.0));
}

TEST_CASE("ChordHeld sustains from the transient to the segment end") {
  auto g = gesture_on(500, 700, Archetype::ChordHeld);
  g.transient = TransientInfo{5, 0.6};
  const auto curve = flat_curve(0.5, 16.0);
  SplitMix64 rng(1);
  const auto before = rng.state();
  const auto notes = render_gesture(g, curve, {}, {}, rng);
  CHECK(rng.state() == before);
  REQUIRE(notes.size() == 3);
  for (const auto& n : notes) {
    CHECK(n.onset == doctest::Approx(10.1));
    CHECK(n.duration == doctest::Approx(3.9));
    CHECK(n.velocity == 70);
  }
}

TEST_CASE("GranularTexture") {
  const auto curve = flat_curve(0.6, 6.0);
  auto g = gesture_on(50, 250, Archetype::GranularTexture);
  g.kind = ShapeKind::Chaotic;
  g.granularity = 0.0;
  SplitMix64 rng(9);
  CHECK(render_gesture(g, curve, {}, {}, rng).empty());

  g.granularity = 0.8;
  SplitMix64 a(42), b(42);
  const auto first = render_gesture(g, curve, {}, {}, a);
  CHECK(first == render_gesture(g, curve, {}, {}, b));
  // Reference run pinned: onset in hundredths of a second, pitch.
  const std::vector<std::pair<int, int>> golden{
      {101, 55}, {103, 70}, {114, 60}, {115, 65}, {117, 62}, {119, 55}, {130, 53}, {132, 60}, {133, 55}, {137, 51},
      {141, 51}, {143, 68}, {147, 53}, {150, 55}, {158, 68}, {161, 68}, {164, 65}, {175, 60}, {177, 65}, {182, 67},
      {185, 53}, {189, 63}, {201, 51}, {202, 48}, {204, 60}, {208, 72}, {212, 60}, {218, 60}, {232, 56}, {239, 56},
      {241, 63}, {244, 70}, {245, 72}, {251, 70}, {255, 53}, {258, 62}, {270, 67}, {277, 48}, {279, 51}, {285, 63},
      {293, 58}, {295, 56}, {308, 48}, {314, 68}, {318, 68}, {319, 62}, {320, 56}, {333, 63}, {345, 67}, {346, 56},
      {349, 70}, {352, 63}, {359, 51}, {361, 48}, {372, 56}, {377, 58}, {383, 56}, {389, 58}, {391, 58}, {392, 56},
      {395, 58}, {403, 55}, {404, 67}, {405, 72}, {419, 68}, {423, 65}, {425, 63}, {429, 62}, {430, 70}, {437, 50},
      {438, 56}, {449, 67}, {457, 48}, {479, 62}, {480, 58}, {482, 48}, {485, 70}};
  REQUIRE(first.size() == golden.size());
  for (std::size_t i = 0; i < golden.size(); ++i) {
    CHECK(std::lround(first[i].onset * 100.0) == golden[i].first);
    CHECK(first[i].pitch == golden[i].second);
  }
  for (const auto& n : first) {
    CHECK(n.duration == doctest::Approx(0.06));
    CHECK(n.velocity == velocity_at(0.6));
    CHECK(std::abs(n.pitch - register_center(0.5, 36, 84)) <= 12);
  }
}

TEST_CASE("expression_track") {
  const auto flat = expression_track(flat_curve(0.5, 3.0));
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].time == 0.0);
  CHECK(flat[0].value == 64);
  CHECK(flat[0].controller == kExpressionController);

  std::vector<double> ramp(51);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 50.0;
  const auto track = expression_track(synth::make_curve(ramp, 50.0));
  CHECK(track.size() <= 21);
  REQUIRE(track.size() >= 3);
  CHECK(track[0].value == 0);
  CHECK(track[1].value == 6);
  CHECK(track[2].value == 13);
  for (std::size_t i = 1; i < track.size(); ++i) CHECK(track[i].value > track[i - 1].value);

  auto tail = ramp;
  tail.insert(tail.end(), 100, 1.0);
  const auto held = expression_track(synth::make_curve(tail, 50.0));
  CHECK(held.back().value == 127);
  CHECK(held.back().time <= 1.0 + 1e-9);
}

TEST_CASE("compose") {
  const auto curve = flat_curve(0.5, 8.0);
  const auto only_controls = compose({}, curve, {}, {}, 1);
  CHECK(only_controls.notes.empty());
  CHECK(only_controls.controls.size() == 1);
  CHECK(only_controls.duration == doctest::Approx(8.0));

  std::vector<Gesture> gs{gesture_on(0, 200, Archetype::CrescendoHeld), gesture_on(200, 400, Archetype::GranularTexture)};
  gs[1].granularity = 0.9;
  gs[1].kind = ShapeKind::Chaotic;
  const auto a = compose(gs, curve, {}, {}, 1);
  CHECK(a == compose(gs, curve, {}, {}, 1));
  CHECK(a.notes != compose(gs, curve, {}, {}, 2).notes);
  for (std::size_t i = 1; i < a.notes.size(); ++i) {
    const auto& p = a.notes[i - 1];
    const auto& q = a.notes[i];
    CHECK((p.onset < q.onset || (p.onset == q.onset && p.pitch <= q.pitch)));
  }
}
