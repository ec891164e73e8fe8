#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lumiscore/composition.h"
#include "lumiscore/config.h"
#include "lumiscore/gesture.h"
#include "lumiscore/photometry.h"

namespace lumiscore {

inline constexpr std::string_view kReportVersion = "lumiscore-analysis/1";

/// Everything the composition stage needs, plus what the report records.
struct Analysis {
  StreamInfo source;
  std::vector<CurveChannel> channels;
  BrightnessCurve curve;  ///< smoothed luma at the analysis rate
  double noise_sigma = 0.0;
  std::vector<Gesture> gestures;
  std::vector<Archetype> classified;  ///< archetypes before overrides
};

/// Resample, smooth, segment, classify, cluster motifs, apply overrides.
Analysis analyze(const CurveSet& curves, const PipelineConfig& config);

/// Replaces archetypes named by config overrides. Throws ConfigError for an
/// index past the last segment.
void apply_overrides(std::vector<Gesture>& gestures, const std::vector<ArchetypeOverride>& overrides);

nlohmann::json analysis_to_json(const Analysis& analysis, const PipelineConfig& config);
Analysis analysis_from_json(const nlohmann::json& doc);

/// Sorted keys, two-space indent, shortest round-trip doubles, trailing LF.
std::string dump_canonical(const nlohmann::json& doc);

/// Stages over in-memory artifacts. The CLI and the single-shot pipeline both
/// go through these, so staged and single-shot runs produce identical bytes.
struct ExtractArtifacts {
  std::string csv;
  std::string source_json;
};
ExtractArtifacts stage_extract(FrameSource& source, const std::set<CurveChannel>& channels, unsigned threads);
std::string stage_analyze(std::string_view csv, const std::optional<std::string>& source_json,
                          const PipelineConfig& config);
std::vector<std::uint8_t> stage_compose(std::string_view analysis_json, const PipelineConfig& config);
std::string stage_plot(std::string_view csv, const std::optional<std::string>& source_json,
                       const std::optional<std::string>& analysis_json);

}  // namespace lumiscore
