#include "lumiscore/config.h"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

using nlohmann::json;

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ConfigError(join(path, key), "unknown key");
  }
}

// Reads a real in [lo, hi] (open ends when the flags say so).
void read_real(const json& obj, const std::string& path, const char* key, double& out, double lo, double hi,
               bool lo_open = false, bool hi_open = false) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const auto where = join(path, key);
  if (!it->is_number()) throw ConfigError(where, "must be a number");
  const double v = it->get<double>();
  const bool ok = std::isfinite(v) && (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok) {
    throw ConfigError(where, "value " + it->dump() + " outside " + (lo_open ? "(" : "[") + std::to_string(lo) + ", " +
                                 std::to_string(hi) + (hi_open ? ")" : "]"));
  }
  out = v;
}

void read_int(const json& obj, const std::string& path, const char* key, int& out, int lo, int hi) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const auto where = join(path, key);
  if (!it->is_number_integer()) throw ConfigError(where, "must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < lo || v > hi) {
    throw ConfigError(where, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  out = static_cast<int>(v);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

void read_analysis(const json& a, PipelineConfig& cfg) {
  const std::string path = "analysis";
  only_keys(a, path, {"rate_hz", "smooth_window_s", "min_segment_s", "penalty_beta", "roughness_saturation",
                      "motif_epsilon", "thresholds"});
  read_real(a, path, "rate_hz", cfg.rate_hz, 0.0, 10000.0, true);
  read_real(a, path, "smooth_window_s", cfg.smooth_window_s, 0.0, 60.0);
  read_real(a, path, "min_segment_s", cfg.min_segment_s, 0.0, 3600.0, true);
  read_real(a, path, "penalty_beta", cfg.penalty_beta, 0.0, kInf, true, true);
  read_real(a, path, "roughness_saturation", cfg.classify.roughness_saturation, 0.0, 1.0, true);
  read_real(a, path, "motif_epsilon", cfg.motif_epsilon, 0.0, kInf, false, true);
  if (auto it = a.find("thresholds"); it != a.end()) {
    const std::string tpath = "analysis.thresholds";
    only_keys(*it, tpath, {"flat", "transient", "transient_window_s", "granular", "chaotic_rough", "fit_rrmse"});
    auto& c = cfg.classify;
    read_real(*it, tpath, "flat", c.flat, 0.0, 1.0, true, true);
    read_real(*it, tpath, "transient", c.transient, 0.0, 1.0, true, true);
    read_real(*it, tpath, "transient_window_s", c.transient_window, 0.0, 60.0, true);
    read_real(*it, tpath, "granular", c.granular, 0.0, 1.0, true, true);
    read_real(*it, tpath, "chaotic_rough", c.chaotic_rough, 0.0, 1.0, true, true);
    read_real(*it, tpath, "fit_rrmse", c.fit_rrmse, 0.0, 1.0, true, true);
  }
}

void read_harmony(const json& h, HarmonyConfig& harmony) {
  const std::string path = "harmony";
  only_keys(h, path, {"scale", "root_pc", "register", "tempo_bpm", "ppq", "channel"});
  if (auto it = h.find("scale"); it != h.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("harmony.scale", "must be a non-empty array");
    std::vector<int> scale;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& v = (*it)[i];
      const auto where = "harmony.scale[" + std::to_string(i) + "]";
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 11) {
        throw ConfigError(where, "must be an integer pitch class 0-11");
      }
      scale.push_back(v.get<int>());
      if (i > 0 && scale[i] <= scale[i - 1]) throw ConfigError(where, "scale must be strictly increasing");
    }
    harmony.scale = std::move(scale);
  }
  read_int(h, path, "root_pc", harmony.root_pc, 0, 11);
  if (auto it = h.find("register"); it != h.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer()) {
      throw ConfigError("harmony.register", "must be [low, high] note numbers");
    }
    const auto lo = (*it)[0].get<std::int64_t>();
    const auto hi = (*it)[1].get<std::int64_t>();
    if (lo < 0 || hi > 127 || lo >= hi) throw ConfigError("harmony.register", "needs 0 <= low < high <= 127");
    harmony.register_low = static_cast<int>(lo);
    harmony.register_high = static_cast<int>(hi);
  }
  read_real(h, path, "tempo_bpm", harmony.tempo_bpm, 4.0, 1000.0);
  read_int(h, path, "ppq", harmony.ppq, 24, 0x7FFF);
  read_int(h, path, "channel", harmony.channel, 0, 15);
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

PipelineConfig parse_config(const json& doc) {
  PipelineConfig cfg;
  only_keys(doc, "", {"analysis", "manual_boundaries_s", "overrides", "harmony", "texture", "seed"});

  if (auto it = doc.find("analysis"); it != doc.end()) read_analysis(*it, cfg);

  if (auto it = doc.find("manual_boundaries_s"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ConfigError("manual_boundaries_s", "must be an array of seconds or null");
    std::vector<double> times;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto where = "manual_boundaries_s[" + std::to_string(i) + "]";
      const auto& v = (*it)[i];
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(where, "must be a positive number of seconds");
      times.push_back(v.get<double>());
      if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError(where, "boundaries must be strictly increasing");
    }
    cfg.manual_boundaries_s = std::move(times);
  }

  if (auto it = doc.find("overrides"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("overrides", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto where = "overrides[" + std::to_string(i) + "]";
      const auto& o = (*it)[i];
      only_keys(o, where, {"segment_index", "archetype"});
      if (!o.contains("segment_index") || !o["segment_index"].is_number_unsigned()) {
        throw ConfigError(where + ".segment_index", "must be a non-negative integer");
      }
      if (!o.contains("archetype") || !o["archetype"].is_string()) {
        throw ConfigError(where + ".archetype", "must be an archetype name");
      }
      auto archetype = archetype_from_name(o["archetype"].get<std::string>());
      if (!archetype) throw ConfigError(where + ".archetype", "unknown archetype " + o["archetype"].dump());
      cfg.overrides.push_back({o["segment_index"].get<std::size_t>(), *archetype});
    }
  }

  if (auto it = doc.find("harmony"); it != doc.end()) read_harmony(*it, cfg.harmony);

  if (auto it = doc.find("texture"); it != doc.end()) {
    only_keys(*it, "texture", {"lambda_max", "grain_ms"});
    read_real(*it, "texture", "lambda_max", cfg.texture.lambda_max, 0.0, 100.0);
    read_real(*it, "texture", "grain_ms", cfg.texture.grain_ms, 0.0, 10000.0, true);
  }

  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw ConfigError("seed", "must be an unsigned 64-bit integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  return cfg;
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  json j;
  const auto& c = cfg.classify;
  j["analysis"] = {
      {"rate_hz", cfg.rate_hz},
      {"smooth_window_s", cfg.smooth_window_s},
      {"min_segment_s", cfg.min_segment_s},
      {"penalty_beta", cfg.penalty_beta},
      {"roughness_saturation", c.roughness_saturation},
      {"motif_epsilon", cfg.motif_epsilon},
      {"thresholds",
       {{"flat", c.flat},
        {"transient", c.transient},
        {"transient_window_s", c.transient_window},
        {"granular", c.granular},
        {"chaotic_rough", c.chaotic_rough},
        {"fit_rrmse", c.fit_rrmse}}},
  };
  j["manual_boundaries_s"] = cfg.manual_boundaries_s ? json(*cfg.manual_boundaries_s) : json(nullptr);
  j["overrides"] = json::array();
  for (const auto& o : cfg.overrides) {
    j["overrides"].push_back({{"segment_index", o.segment_index}, {"archetype", archetype_name(o.archetype)}});
  }
  const auto& h = cfg.harmony;
  j["harmony"] = {{"scale", h.scale},
                  {"root_pc", h.root_pc},
                  {"register", {h.register_low, h.register_high}},
                  {"tempo_bpm", h.tempo_bpm},
                  {"ppq", h.ppq},
                  {"channel", h.channel}};
  j["texture"] = {{"lambda_max", cfg.texture.lambda_max}, {"grain_ms", cfg.texture.grain_ms}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace lumiscore
