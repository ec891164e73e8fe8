#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lumiscore/photometry.h"

namespace lumiscore {

/// "time_s,<channel>,..." then one row per frame, every number with exactly
/// six decimals, LF line ends. Columns follow CurveChannel order.
std::string write_csv(const CurveSet& curves);

struct CsvTable {
  std::vector<CurveChannel> channels;
  std::vector<double> times;
  std::vector<std::vector<double>> columns;  ///< parallel to `channels`
};

/// Parses what write_csv emits. Throws Errc::MalformedCsv with the line number.
CsvTable read_csv(std::string_view text);

/// Frame rate behind a time column. Tries n/1 and n/1001 rates that reproduce
/// every printed time, else falls back to a micro-hertz approximation.
Rational infer_rate(std::span<const double> times);

/// Rebuilds curves from a table. Without `source` the frame rate comes from
/// infer_rate and dimensions stay zero.
CurveSet curves_from_csv(const CsvTable& table, const std::optional<StreamInfo>& source);

/// Source descriptor written next to exported curves.
nlohmann::json source_to_json(const StreamInfo& info);
StreamInfo source_from_json(const nlohmann::json& doc);

struct PlotSegment {
  double start = 0.0;  ///< seconds
  double end = 0.0;
  std::string label;
};

/// 1200x300 SVG: the curve as one polyline, a dashed line at every interior
/// boundary and one centred label per segment.
std::string plot_svg(const BrightnessCurve& curve, std::span<const PlotSegment> segments = {});

}  // namespace lumiscore
