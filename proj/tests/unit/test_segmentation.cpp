#include <doctest.h>

#include <cmath>
#include <limits>

#include "lumiscore/error.h"
#include "lumiscore/segmentation.h"
#include "synth.h"

using namespace lumiscore;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

void check_tiling(const std::vector<Segment>& segs, std::size_t n) {
  REQUIRE_FALSE(segs.empty());
  CHECK(segs.front().start == 0);
  CHECK(segs.back().end == n);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].start < segs[i].end);
    if (i > 0) CHECK(segs[i].start == segs[i - 1].end);
  }
}

}  // namespace

TEST_CASE("estimate_noise") {
  CHECK(estimate_noise(std::vector<double>(50, 0.3)) == 0.0);
  std::vector<double> alt(100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 0.2 : 0.0;
  CHECK(estimate_noise(alt) == doctest::Approx(0.2 / (0.6745 * std::sqrt(2.0))));

  SplitMix64 rng(21);
  std::vector<double> ramp(2000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.2 + 0.0002 * static_cast<double>(i) + 0.02 * synth::gaussian(rng);
  const double s = estimate_noise(ramp);
  CHECK(s >= 0.015);
  CHECK(s <= 0.025);
}

TEST_CASE("line_sse") {
  CHECK(line_sse(std::vector<double>{0.1, 0.2, 0.3, 0.4}) == doctest::Approx(0.0));
  // Three points (0,0),(1,1),(2,0): best line is 1/3, residuals 1/3,2/3,1/3.
  CHECK(line_sse(std::vector<double>{0.0, 1.0, 0.0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("constant curve is one segment") {
  const auto c = synth::make_curve(std::vector<double>(500, 0.4), 50.0);
  const auto segs = segment(c, {});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{0, 500});
}

TEST_CASE("step is split at the edge") {
  std::vector<double> v(500, 0.0);
  for (std::size_t i = 250; i < 500; ++i) v[i] = 1.0;
  const auto segs = segment(synth::make_curve(v, 50.0), {});
  REQUIRE(segs.size() == 2);
  CHECK(segs[1].start >= 245);
  CHECK(segs[1].start <= 255);
}

TEST_CASE("triangle apex") {
  std::vector<double> v(500);
  for (std::size_t i = 0; i < 500; ++i) {
    const double t = static_cast<double>(i) / 50.0;
    v[i] = t < 5.0 ? t / 5.0 : (10.0 - t) / 5.0;
  }
  const auto segs = segment(synth::make_curve(v, 50.0), {});
  REQUIRE(segs.size() == 2);
  CHECK(std::abs(static_cast<double>(segs[1].start) / 50.0 - 5.0) <= 0.2);
}

TEST_CASE("too short") {
  const auto c = synth::make_curve(std::vector<double>(30, 0.4), 50.0);
  CHECK(code_of([&] { segment(c, {}); }) == Errc::CurveTooShort);
}

TEST_CASE("manual boundaries") {
  const auto c = synth::make_curve(std::vector<double>(500, 0.4), 50.0);
  const std::vector<double> half{5.0};
  const auto segs = apply_manual_boundaries(c, half);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == Segment{0, 250});
  CHECK(segs[1] == Segment{250, 500});
  CHECK(apply_manual_boundaries(c, std::vector<double>{}) == std::vector<Segment>{{0, 500}});

  CHECK(code_of([&] { apply_manual_boundaries(c, std::vector<double>{5.0, 4.0}); }) == Errc::UnsortedBoundaries);
  CHECK(code_of([&] { apply_manual_boundaries(c, std::vector<double>{12.0}); }) == Errc::BoundaryOutOfRange);
  CHECK(code_of([&] { apply_manual_boundaries(c, std::vector<double>{0.0}); }) == Errc::BoundaryOutOfRange);
  CHECK(code_of([&] { apply_manual_boundaries(c, std::vector<double>{5.0, 5.01}); }) == Errc::SegmentBelowMinimum);

  SegmentationParams p;
  p.manual_boundaries = half;
  CHECK(divide(c, p) == segs);
}

TEST_CASE("properties over random curves") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pc = synth::random_piecewise(rng, 10.0, 50.0, 1.0, 0.1, 0.01 * (trial % 3));
    SegmentationParams p;
    p.min_segment = 0.3 + 0.1 * (trial % 4);
    const auto a = segment(pc.curve, p);
    check_tiling(a, pc.curve.size());
    const auto minimum = block_length(p.min_segment, 50.0);
    for (const auto& s : a) CHECK(s.length() >= minimum);
    CHECK(segment(pc.curve, p) == a);

    auto prev = std::numeric_limits<std::size_t>::max();
    for (double beta : {0.5, 2.0, 4.0, 16.0, 64.0, 1e4}) {
      p.penalty_beta = beta;
      const auto count = segment(pc.curve, p).size();
      CHECK(count <= prev);
      prev = count;
    }
  }
}

TEST_CASE("symmetric input is deterministic") {
  std::vector<double> v(400);
  for (std::size_t i = 0; i < 400; ++i) v[i] = (i / 100) % 2 ? 0.7 : 0.3;
  const auto c = synth::make_curve(v, 50.0);
  const auto a = segment(c, {});
  CHECK(a == segment(c, {}));
  CHECK(a.size() == 4);
}
