#include "lumiscore/cli.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "lumiscore/config.h"
#include "lumiscore/error.h"
#include "lumiscore/media.h"
#include "lumiscore/pipeline.h"

namespace lumiscore {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::optional<std::string> read_optional(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  return read_file(path);
}

template <typename Bytes>
void write_file(const fs::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw Error(Errc::Io, "write failed for " + path.string());
}

fs::path source_sidecar(const fs::path& csv) { return fs::path(csv.string() + ".source.json"); }

std::set<CurveChannel> parse_channels(const std::string& list) {
  std::set<CurveChannel> channels;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = std::min(list.find(',', start), list.size());
    const auto name = list.substr(start, comma - start);
    auto channel = channel_from_name(name);
    if (!channel) throw UsageError("--channels: unknown channel '" + name + "'");
    channels.insert(*channel);
    start = comma + 1;
  }
  return channels;
}

Rational parse_fps(const std::string& text) {
  auto parse_u32 = [&](std::string_view s) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
      throw UsageError("--fps: expected N or N/D with positive integers, got '" + text + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return {parse_u32(text), 1};
  return {parse_u32(std::string_view(text).substr(0, slash)), parse_u32(std::string_view(text).substr(slash + 1))};
}

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw ConfigError("<file>", "cannot read config " + path);
  }
  return parse_config(std::string_view(text));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brightness-curve analysis and MIDI composition for moving images", "lumiscore"};
  app.require_subcommand(1);

  std::string input, curves_path, analysis_path, config_path, out_path, out_dir;
  std::string channels_arg = "luma";
  std::string fps_arg = "24";
  unsigned threads = 0;

  auto* extract = app.add_subcommand("extract", "Measure per-frame curves into a CSV file");
  extract->add_option("--input", input, "Y4M file, raw RGB24 file with .json sidecar, PPM/PGM file or directory")->required();
  extract->add_option("--channels", channels_arg, "Comma list of luma,red,green,blue,contrast_rms,contrast_spread");
  extract->add_option("--out", out_path, "Output CSV")->required();
  extract->add_option("--threads", threads, "Measurement threads, 0 = all cores");
  extract->add_option("--fps", fps_arg, "Frame rate for PPM/PGM input, N or N/D");

  auto* analyze_cmd = app.add_subcommand("analyze", "Segment and classify the luma curve");
  analyze_cmd->add_option("--curves", curves_path, "CSV from extract")->required();
  analyze_cmd->add_option("--config", config_path, "JSON config; defaults when omitted");
  analyze_cmd->add_option("--out", out_path, "Output analysis JSON")->required();

  auto* compose_cmd = app.add_subcommand("compose", "Render an analysis to a Standard MIDI File");
  compose_cmd->add_option("--analysis", analysis_path, "JSON from analyze")->required();
  compose_cmd->add_option("--config", config_path, "JSON config; defaults when omitted");
  compose_cmd->add_option("--out", out_path, "Output .mid")->required();

  auto* plot = app.add_subcommand("plot", "Draw the curve and segment labels as SVG");
  plot->add_option("--curves", curves_path, "CSV from extract")->required();
  plot->add_option("--analysis", analysis_path, "JSON from analyze");
  plot->add_option("--out", out_path, "Output SVG")->required();

  auto* pipeline = app.add_subcommand("pipeline", "extract, analyze, compose and plot in one run");
  pipeline->add_option("--input", input, "Video input, as for extract")->required();
  pipeline->add_option("--config", config_path, "JSON config; defaults when omitted");
  pipeline->add_option("--out-dir", out_dir, "Directory for curves.csv, analysis.json, score.mid, plot.svg")->required();
  pipeline->add_option("--channels", channels_arg, "Channels exported to curves.csv (luma is always included)");
  pipeline->add_option("--threads", threads, "Measurement threads, 0 = all cores");
  pipeline->add_option("--fps", fps_arg, "Frame rate for PPM/PGM input, N or N/D");

  std::vector<const char*> argv{"lumiscore"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "lumiscore: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  std::string context;  // file or stage named in diagnostics
  try {
    if (sub == extract) {
      const auto channels = parse_channels(channels_arg);
      context = input;
      auto source = open_source(input, {parse_fps(fps_arg)});
      const auto artifacts = stage_extract(*source, channels, threads);
      context = out_path;
      write_file(out_path, artifacts.csv);
      write_file(source_sidecar(out_path), artifacts.source_json);
    } else if (sub == analyze_cmd) {
      context = config_path;
      const auto config = load_config(config_path);
      context = curves_path;
      const auto csv = read_file(curves_path);
      const auto report = stage_analyze(csv, read_optional(source_sidecar(curves_path)), config);
      context = out_path;
      write_file(out_path, report);
    } else if (sub == compose_cmd) {
      context = config_path;
      const auto config = load_config(config_path);
      context = analysis_path;
      const auto midi = stage_compose(read_file(analysis_path), config);
      context = out_path;
      write_file(out_path, midi);
    } else if (sub == plot) {
      context = curves_path;
      const auto csv = read_file(curves_path);
      std::optional<std::string> analysis;
      if (!analysis_path.empty()) analysis = read_file(analysis_path);
      context = curves_path + (analysis_path.empty() ? "" : " + " + analysis_path);
      const auto svg = stage_plot(csv, read_optional(source_sidecar(curves_path)), analysis);
      context = out_path;
      write_file(out_path, svg);
    } else if (sub == pipeline) {
      context = config_path;
      const auto config = load_config(config_path);
      auto channels = parse_channels(channels_arg);
      channels.insert(CurveChannel::Luma);
      const fs::path dir(out_dir);
      context = out_dir;
      fs::create_directories(dir);

      context = input;
      auto source = open_source(input, {parse_fps(fps_arg)});
      const auto artifacts = stage_extract(*source, channels, threads);
      write_file(dir / "curves.csv", artifacts.csv);
      write_file(source_sidecar(dir / "curves.csv"), artifacts.source_json);

      context = (dir / "curves.csv").string();
      const auto report = stage_analyze(artifacts.csv, artifacts.source_json, config);
      write_file(dir / "analysis.json", report);

      context = (dir / "analysis.json").string();
      write_file(dir / "score.mid", stage_compose(report, config));
      write_file(dir / "plot.svg", stage_plot(artifacts.csv, artifacts.source_json, report));
    }
  } catch (const UsageError& e) {
    err << "lumiscore " << sub->get_name() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "lumiscore " << sub->get_name() << ": config " << (config_path.empty() ? "<defaults>" : config_path) << ": "
        << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "lumiscore " << sub->get_name() << ": " << context << ": " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "lumiscore " << sub->get_name() << ": " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace lumiscore
