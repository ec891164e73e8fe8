#include "lumiscore/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "lumiscore/error.h"

namespace lumiscore {

namespace {

constexpr double kPlotWidth = 1200.0;
constexpr double kPlotHeight = 300.0;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return fields;
    start = pos + 1;
  }
}

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw Error(Errc::MalformedCsv, fmt::format("line {}: {}", line, what));
}

double parse_number(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    csv_error(line, fmt::format("'{}' is not a number", field));
  }
  return v;
}

std::string coord(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool reproduces(std::span<const double> times, Rational fps) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = static_cast<double>(i) * fps.den / fps.num;
    if (std::abs(t - times[i]) > 5.0000001e-7) return false;
  }
  return true;
}

}  // namespace

std::string write_csv(const CurveSet& curves) {
  if (curves.curves.empty()) throw Error(Errc::InvalidArgument, "no curves to export");
  const auto n = curves.curves.begin()->second.size();
  std::string out = "time_s";
  for (const auto& [channel, curve] : curves.curves) {
    if (curve.size() != n) throw Error(Errc::InvalidArgument, "curves differ in length");
    out += ',';
    out += channel_name(channel);
  }
  out += '\n';
  const auto fps = curves.source.fps;
  const double rate = curves.curves.begin()->second.sample_rate;
  const bool exact = fps.num > 0 && fps.den > 0 && fps.value() == rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = exact ? static_cast<double>(i) * fps.den / fps.num : static_cast<double>(i) / rate;
    fmt::format_to(std::back_inserter(out), "{:.6f}", t);
    for (const auto& [_, curve] : curves.curves) fmt::format_to(std::back_inserter(out), ",{:.6f}", curve.values[i]);
    out += '\n';
  }
  return out;
}

CsvTable read_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    if (eol == std::string_view::npos) csv_error(line_no + 1, "missing final newline");
    const auto line = text.substr(0, eol);
    text.remove_prefix(eol + 1);
    ++line_no;
    const auto fields = split(line, ',');
    if (header) {
      if (fields.size() < 2 || fields[0] != "time_s") csv_error(line_no, "header must start with time_s and name a channel");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto channel = channel_from_name(fields[i]);
        if (!channel) csv_error(line_no, fmt::format("unknown channel '{}'", fields[i]));
        if (!table.channels.empty() && *channel <= table.channels.back()) {
          csv_error(line_no, "channels must be unique and in canonical order");
        }
        table.channels.push_back(*channel);
      }
      table.columns.resize(table.channels.size());
      header = false;
      continue;
    }
    if (fields.size() != table.channels.size() + 1) {
      csv_error(line_no, fmt::format("expected {} fields, found {}", table.channels.size() + 1, fields.size()));
    }
    const double t = parse_number(fields[0], line_no);
    if (!table.times.empty() && !(t > table.times.back())) csv_error(line_no, "time must increase");
    table.times.push_back(t);
    for (std::size_t c = 0; c < table.channels.size(); ++c) {
      const double v = parse_number(fields[c + 1], line_no);
      if (v < 0.0 || v > 1.0) csv_error(line_no, "value outside [0, 1]");
      table.columns[c].push_back(v);
    }
  }
  if (header) throw Error(Errc::MalformedCsv, "empty file");
  if (table.times.empty()) throw Error(Errc::MalformedCsv, "no data rows");
  return table;
}

Rational infer_rate(std::span<const double> times) {
  if (times.size() < 2) throw Error(Errc::MalformedCsv, "a single row does not determine the frame rate");
  const double approx = static_cast<double>(times.size() - 1) / times.back();
  for (std::uint32_t den : {1u, 1001u}) {
    const double num = std::round(approx * den);
    if (num < 1.0 || num > 4.0e9) continue;
    const Rational fps{static_cast<std::uint32_t>(num), den};
    if (reproduces(times, fps)) return fps;
  }
  return {static_cast<std::uint32_t>(std::llround(approx * 1e6)), 1000000u};
}

CurveSet curves_from_csv(const CsvTable& table, const std::optional<StreamInfo>& source) {
  CurveSet set;
  if (source) {
    set.source = *source;
  } else {
    set.source.fps = infer_rate(table.times);
    set.source.frame_count = table.times.size();
  }
  for (std::size_t c = 0; c < table.channels.size(); ++c) {
    BrightnessCurve curve;
    curve.channel = table.channels[c];
    curve.sample_rate = set.source.fps.value();
    curve.values = table.columns[c];
    set.curves.emplace(curve.channel, std::move(curve));
  }
  return set;
}

nlohmann::json source_to_json(const StreamInfo& info) {
  nlohmann::json j;
  j["width"] = info.width;
  j["height"] = info.height;
  j["fps"] = {info.fps.num, info.fps.den};
  j["pixel_format"] = info.width > 0 ? nlohmann::json(pixel_format_name(info.format)) : nlohmann::json(nullptr);
  j["frame_count"] = info.frame_count ? nlohmann::json(*info.frame_count) : nlohmann::json(nullptr);
  return j;
}

StreamInfo source_from_json(const nlohmann::json& doc) {
  StreamInfo info;
  try {
    info.width = doc.at("width").get<std::uint32_t>();
    info.height = doc.at("height").get<std::uint32_t>();
    const auto& fps = doc.at("fps");
    if (!fps.is_array() || fps.size() != 2) throw Error(Errc::MalformedReport, "fps must be [num, den]");
    info.fps = {fps[0].get<std::uint32_t>(), fps[1].get<std::uint32_t>()};
    if (info.fps.num == 0 || info.fps.den == 0) throw Error(Errc::MalformedReport, "fps must be positive");
    const auto& format = doc.at("pixel_format");
    if (!format.is_null()) {
      bool found = false;
      for (auto f : {PixelFormat::Rgb24, PixelFormat::Gray8, PixelFormat::Y4m444, PixelFormat::Y4m420, PixelFormat::Y4mMono}) {
        if (pixel_format_name(f) == format.get<std::string>()) {
          info.format = f;
          found = true;
        }
      }
      if (!found) throw Error(Errc::MalformedReport, "unknown pixel format " + format.dump());
    }
    const auto& count = doc.at("frame_count");
    if (!count.is_null()) info.frame_count = count.get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedReport, std::string("source descriptor: ") + e.what());
  }
  return info;
}

std::string plot_svg(const BrightnessCurve& curve, std::span<const PlotSegment> segments) {
  if (curve.values.empty()) throw Error(Errc::InvalidArgument, "cannot plot an empty curve");
  const double span = curve.duration();
  auto x_of = [&](double t) { return std::clamp(t / span * kPlotWidth, 0.0, kPlotWidth); };

  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"1200\" height=\"300\" "
      "viewBox=\"0 0 1200 300\">\n"
      "<rect x=\"0\" y=\"0\" width=\"1200\" height=\"300\" fill=\"white\"/>\n"
      "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) out += ' ';
    const double y = kPlotHeight * (1.0 - std::clamp(curve.values[i], 0.0, 1.0));
    out += coord(x_of(static_cast<double>(i) / curve.sample_rate));
    out += ',';
    out += coord(y);
  }
  out += "\"/>\n";
  for (std::size_t s = 1; s < segments.size(); ++s) {
    const auto x = coord(x_of(segments[s].start));
    fmt::format_to(std::back_inserter(out),
                   "<line x1=\"{0}\" y1=\"0\" x2=\"{0}\" y2=\"300\" stroke=\"gray\" stroke-width=\"1\" "
                   "stroke-dasharray=\"4 4\"/>\n",
                   x);
  }
  for (const auto& s : segments) {
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{}\" y=\"14\" font-family=\"sans-serif\" font-size=\"10\" "
                   "text-anchor=\"middle\">{}</text>\n",
                   coord((x_of(s.start) + x_of(s.end)) / 2.0), escape_xml(s.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace lumiscore
