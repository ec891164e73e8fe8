#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lumiscore/composition.h"
#include "lumiscore/gesture.h"

namespace lumiscore {

struct ArchetypeOverride {
  std::size_t segment_index = 0;
  Archetype archetype = Archetype::DiminuendoHeld;
};

/// Fully resolved run configuration. An empty JSON object yields these defaults.
struct PipelineConfig {
  double rate_hz = 50.0;
  double smooth_window_s = 0.25;
  double min_segment_s = 0.5;
  double penalty_beta = 4.0;
  double motif_epsilon = 0.25;
  ClassifyParams classify;  ///< thresholds and roughness saturation
  std::optional<std::vector<double>> manual_boundaries_s;
  std::vector<ArchetypeOverride> overrides;
  HarmonyConfig harmony;
  TextureConfig texture;
  std::uint64_t seed = 0;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the dotted key path.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig parse_config(const nlohmann::json& doc);

/// Canonical echo of every knob, accepted back by parse_config.
nlohmann::json config_to_json(const PipelineConfig& config);

}  // namespace lumiscore
