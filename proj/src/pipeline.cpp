#include "lumiscore/pipeline.h"

#include <string>

#include "lumiscore/curve_prep.h"
#include "lumiscore/error.h"
#include "lumiscore/midi.h"
#include "lumiscore/report.h"
#include "lumiscore/segmentation.h"

namespace lumiscore {

namespace {

using nlohmann::json;

json fit_to_json(const ShapeFit& fit) {
  if (const auto* lin = std::get_if<LinearFit>(&fit)) {
    return {{"model", "linear"}, {"intercept", lin->intercept}, {"slope_per_s", lin->slope}, {"sse", lin->sse}};
  }
  if (const auto* ex = std::get_if<ExpFit>(&fit)) {
    return {{"model", "exponential"}, {"offset", ex->offset}, {"scale", ex->scale},
            {"tau_s", ex->tau},       {"sse", ex->sse},       {"degenerate", ex->degenerate}};
  }
  const auto& st = std::get<StairFit>(fit);
  return {{"model", "staircase"}, {"levels", st.levels}, {"step_times_s", st.step_times}, {"sse", st.sse}};
}

ShapeFit fit_from_json(const json& j) {
  const auto model = j.at("model").get<std::string>();
  if (model == "linear") {
    return LinearFit{j.at("intercept").get<double>(), j.at("slope_per_s").get<double>(), j.at("sse").get<double>()};
  }
  if (model == "exponential") {
    return ExpFit{j.at("offset").get<double>(), j.at("scale").get<double>(), j.at("tau_s").get<double>(),
                  j.at("sse").get<double>(), j.at("degenerate").get<bool>()};
  }
  if (model == "staircase") {
    return StairFit{j.at("levels").get<std::vector<double>>(), j.at("step_times_s").get<std::vector<double>>(),
                    j.at("sse").get<double>()};
  }
  throw Error(Errc::MalformedReport, "unknown fit model '" + model + "'");
}

std::optional<StreamInfo> parse_source(const std::optional<std::string>& source_json) {
  if (!source_json) return std::nullopt;
  json doc;
  try {
    doc = json::parse(*source_json);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedReport, std::string("source descriptor is not JSON: ") + e.what());
  }
  return source_from_json(doc);
}

json parse_report(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedReport, std::string("analysis is not JSON: ") + e.what());
  }
}

}  // namespace

Analysis analyze(const CurveSet& curves, const PipelineConfig& config) {
  validate(config.classify);
  const auto& luma = curves.at(CurveChannel::Luma);
  validate(luma);

  Analysis result;
  result.source = curves.source;
  for (const auto& [channel, _] : curves.curves) result.channels.push_back(channel);

  const auto raw = resample(luma, config.rate_hz);
  result.curve = smooth(raw, config.smooth_window_s);
  const double rate = result.curve.sample_rate;

  SegmentationParams seg_params;
  seg_params.min_segment = config.min_segment_s;
  seg_params.penalty_beta = config.penalty_beta;
  seg_params.manual_boundaries = config.manual_boundaries_s;
  if (luma.size() >= 2) seg_params.noise_sigma = estimate_noise(luma);
  result.noise_sigma = seg_params.noise_sigma.value_or(0.0);

  const std::span<const double> smoothed(result.curve.values);
  const std::span<const double> unsmoothed(raw.values);
  for (const auto& seg : divide(result.curve, seg_params)) {
    auto g = classify(smoothed.subspan(seg.start, seg.length()), unsmoothed.subspan(seg.start, seg.length()), rate,
                      config.classify);
    g.segment = seg;
    result.gestures.push_back(std::move(g));
  }
  assign_motifs(result.gestures, rate, config.motif_epsilon);
  for (const auto& g : result.gestures) result.classified.push_back(g.archetype);
  apply_overrides(result.gestures, config.overrides);
  return result;
}

void apply_overrides(std::vector<Gesture>& gestures, const std::vector<ArchetypeOverride>& overrides) {
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const auto& o = overrides[i];
    if (o.segment_index >= gestures.size()) {
      throw ConfigError("overrides[" + std::to_string(i) + "].segment_index",
                        "segment " + std::to_string(o.segment_index) + " does not exist (" +
                            std::to_string(gestures.size()) + " segments)");
    }
    gestures[o.segment_index].archetype = o.archetype;
  }
}

json analysis_to_json(const Analysis& analysis, const PipelineConfig& config) {
  const double rate = analysis.curve.sample_rate;
  json doc;
  doc["version"] = kReportVersion;
  doc["source"] = source_to_json(analysis.source);
  doc["rate_hz"] = rate;
  doc["duration_s"] = analysis.curve.duration();
  doc["noise_sigma"] = analysis.noise_sigma;
  doc["channels"] = json::array();
  for (auto c : analysis.channels) doc["channels"].push_back(channel_name(c));
  doc["curve"] = analysis.curve.values;
  doc["segments"] = json::array();
  for (std::size_t i = 0; i < analysis.gestures.size(); ++i) {
    const auto& g = analysis.gestures[i];
    json s;
    s["index"] = i;
    s["start_idx"] = g.segment.start;
    s["end_idx"] = g.segment.end;
    s["start_s"] = static_cast<double>(g.segment.start) / rate;
    s["end_s"] = static_cast<double>(g.segment.end) / rate;
    s["kind"] = shape_name(g.kind);
    s["archetype"] = archetype_name(g.archetype);
    s["classified_archetype"] = archetype_name(analysis.classified.at(i));
    s["overridden"] = g.archetype != analysis.classified.at(i);
    if (g.transient) {
      s["transient"] = {{"onset_idx", g.transient->onset},
                        {"t_s", static_cast<double>(g.segment.start + g.transient->onset) / rate},
                        {"amplitude", g.transient->amplitude}};
    } else {
      s["transient"] = nullptr;
    }
    s["granularity"] = g.granularity;
    s["fit"] = fit_to_json(g.fit);
    s["body_offset_idx"] = g.body_offset;
    s["mean_brightness"] = g.mean_brightness;
    s["fit_rrmse"] = g.fit_rrmse;
    s["motif_id"] = g.motif_id ? json(*g.motif_id) : json(nullptr);
    doc["segments"].push_back(std::move(s));
  }
  doc["config"] = config_to_json(config);
  return doc;
}

Analysis analysis_from_json(const json& doc) {
  Analysis a;
  try {
    if (doc.at("version").get<std::string>() != kReportVersion) {
      throw Error(Errc::MalformedReport, "unsupported report version " + doc.at("version").dump());
    }
    a.source = source_from_json(doc.at("source"));
    for (const auto& name : doc.at("channels")) {
      auto c = channel_from_name(name.get<std::string>());
      if (!c) throw Error(Errc::MalformedReport, "unknown channel " + name.dump());
      a.channels.push_back(*c);
    }
    a.curve.channel = CurveChannel::Luma;
    a.curve.sample_rate = doc.at("rate_hz").get<double>();
    a.curve.values = doc.at("curve").get<std::vector<double>>();
    validate(a.curve);
    a.noise_sigma = doc.at("noise_sigma").get<double>();
    std::size_t expected_start = 0;
    for (const auto& s : doc.at("segments")) {
      Gesture g;
      g.segment = {s.at("start_idx").get<std::size_t>(), s.at("end_idx").get<std::size_t>()};
      if (g.segment.start != expected_start || g.segment.end <= g.segment.start || g.segment.end > a.curve.size()) {
        throw Error(Errc::MalformedReport, "segments must tile the curve in order");
      }
      expected_start = g.segment.end;
      auto kind = shape_from_name(s.at("kind").get<std::string>());
      auto archetype = archetype_from_name(s.at("archetype").get<std::string>());
      auto classified = archetype_from_name(s.at("classified_archetype").get<std::string>());
      if (!kind || !archetype || !classified) throw Error(Errc::MalformedReport, "unknown shape or archetype name");
      g.kind = *kind;
      g.archetype = *archetype;
      a.classified.push_back(*classified);
      if (const auto& t = s.at("transient"); !t.is_null()) {
        g.transient = TransientInfo{t.at("onset_idx").get<std::size_t>(), t.at("amplitude").get<double>()};
      }
      g.granularity = s.at("granularity").get<double>();
      g.fit = fit_from_json(s.at("fit"));
      g.body_offset = s.at("body_offset_idx").get<std::size_t>();
      g.mean_brightness = s.at("mean_brightness").get<double>();
      g.fit_rrmse = s.at("fit_rrmse").get<double>();
      if (const auto& m = s.at("motif_id"); !m.is_null()) g.motif_id = m.get<int>();
      a.gestures.push_back(std::move(g));
    }
    if (expected_start != a.curve.size()) throw Error(Errc::MalformedReport, "segments do not cover the curve");
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedReport, e.what());
  }
  return a;
}

std::string dump_canonical(const json& doc) { return doc.dump(2) + "\n"; }

ExtractArtifacts stage_extract(FrameSource& source, const std::set<CurveChannel>& channels, unsigned threads) {
  ExtractOptions options;
  options.threads = threads;
  const auto curves = extract_curves(source, channels, options);
  return {write_csv(curves), dump_canonical(source_to_json(curves.source))};
}

std::string stage_analyze(std::string_view csv, const std::optional<std::string>& source_json,
                          const PipelineConfig& config) {
  const auto curves = curves_from_csv(read_csv(csv), parse_source(source_json));
  return dump_canonical(analysis_to_json(analyze(curves, config), config));
}

std::vector<std::uint8_t> stage_compose(std::string_view analysis_json, const PipelineConfig& config) {
  auto analysis = analysis_from_json(parse_report(analysis_json));
  apply_overrides(analysis.gestures, config.overrides);
  const auto score = compose(analysis.gestures, analysis.curve, config.harmony, config.texture, config.seed);
  return midi::write_smf(score);
}

std::string stage_plot(std::string_view csv, const std::optional<std::string>& source_json,
                       const std::optional<std::string>& analysis_json) {
  const auto curves = curves_from_csv(read_csv(csv), parse_source(source_json));
  const auto& curve = curves.curves.count(CurveChannel::Luma) ? curves.at(CurveChannel::Luma)
                                                               : curves.curves.begin()->second;
  std::vector<PlotSegment> segments;
  if (analysis_json) {
    const auto analysis = analysis_from_json(parse_report(*analysis_json));
    const double rate = analysis.curve.sample_rate;
    for (const auto& g : analysis.gestures) {
      segments.push_back({static_cast<double>(g.segment.start) / rate, static_cast<double>(g.segment.end) / rate,
                          std::string(archetype_name(g.archetype))});
    }
  }
  return plot_svg(curve, segments);
}

}  // namespace lumiscore
