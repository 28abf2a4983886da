// vpd_detect: per-block vehicle presence and queue length from a frame stream.
//
//   vpd_detect --config lanes.cfg --input frames.raw [--snapshot-out m.snap]
//   vpd_detect --config lanes.cfg --pgm-dir frames/ --source-fps 5
//   vpd_detect --fisher vehicle.csv road.csv
//
// Exit status: 0 ok, 1 configuration error, 2 stream error, 3 output/state error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vpd/detector.hpp"
#include "vpd/features.hpp"
#include "vpd/frame_io.hpp"
#include "vpd/lane_geometry.hpp"
#include "vpd/report.hpp"
#include "vpd/snapshot.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kStreamError = 2, kOutputError = 3 };

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<vpd::FeatureVector> read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFailure("cannot open " + path);
  std::vector<vpd::FeatureVector> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    try {
      rows.push_back(vpd::parse_feature_vector(line));
    } catch (const std::exception& e) {
      throw ConfigFailure(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

int run_fisher(const std::string& a_path, const std::string& b_path) {
  const auto a = read_feature_csv(a_path);
  const auto b = read_feature_csv(b_path);
  struct Row {
    std::size_t slot;
    double score;
  };
  std::vector<Row> rows;
  for (std::size_t j = 0; j < vpd::kFeatureDim; ++j) {
    std::vector<double> xa, xb;
    for (const auto& f : a) xa.push_back(f[j]);
    for (const auto& f : b) xb.push_back(f[j]);
    double score = 0.0;
    try {
      score = vpd::fisher_score(xa, xb);
    } catch (const vpd::DegenerateInputError&) {
      score = 0.0;  // constant and identical: no separation
    }
    rows.push_back({j, score});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.score > y.score; });
  std::printf("%-4s %-6s %-30s %s\n", "rank", "symbol", "meaning", "J");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& info = vpd::kFeatureInfo[rows[r].slot];
    std::printf("%-4zu %-6.*s %-30.*s %.6g\n", r + 1, static_cast<int>(info.symbol.size()), info.symbol.data(),
                static_cast<int>(info.meaning.size()), info.meaning.data(), rows[r].score);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicle presence detection over lane blocks"};

  std::string config_path;
  std::string input_path;
  std::string pgm_dir;
  std::string output_path;
  std::string snapshot_in;
  std::string snapshot_out;
  std::string dump_path;
  std::vector<std::string> fisher;
  std::string policy = "always";
  double source_fps = 25.0;
  double target_fps = 5.0;
  std::int64_t start_frame = 0;
  std::int64_t max_frames = -1;
  vpd::DetectorConfig cfg;

  app.add_option("-c,--config", config_path, "Lane configuration file")->envname("VPD_LANE_CONFIG");
  auto* input_opt = app.add_option("-i,--input", input_path, "Raw 8-bit Y-plane stream ('-' for stdin)");
  auto* dir_opt = app.add_option("--pgm-dir", pgm_dir, "Directory of PGM/PPM frames, read in lexical order");
  input_opt->excludes(dir_opt);
  app.add_option("-o,--output", output_path, "Report output file (default stdout)");
  app.add_option("--width", cfg.frame_width, "Frame width")->capture_default_str();
  app.add_option("--height", cfg.frame_height, "Frame height")->capture_default_str();
  app.add_option("--source-fps", source_fps, "Input frame rate")->capture_default_str();
  app.add_option("--target-fps", target_fps, "Processing frame rate")->capture_default_str();
  app.add_option("--init-samples", cfg.init_samples, "Block samples buffered before training")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "Forgetting factor of the online update")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for K-means initialization")->capture_default_str();
  app.add_option("--update-policy", policy, "always | confident")->check(CLI::IsMember({"always", "confident"}));
  app.add_option("--update-margin", cfg.update_margin, "|f(x)| needed to update under 'confident'");
  app.add_flag("--per-lane-models", cfg.per_lane_models, "Train one model per lane");
  app.add_option("--snapshot-in", snapshot_in, "Load trained models and skip initialization");
  app.add_option("--snapshot-out", snapshot_out, "Write the models at end of run");
  app.add_option("--start-frame", start_frame, "Skip this many input frames (continue a split run)");
  app.add_option("--max-frames", max_frames, "Stop after this input frame count");
  app.add_option("--dump-features", dump_path, "Write every block's feature vector as CSV");
  app.add_option("--fisher", fisher, "Rank features by Fisher score for two feature CSVs")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  cfg.update_policy = policy == "confident" ? vpd::UpdatePolicy::confident : vpd::UpdatePolicy::always;

  if (!fisher.empty()) {
    try {
      return run_fisher(fisher[0], fisher[1]);
    } catch (const std::exception& e) {
      std::cerr << "vpd_detect: " << e.what() << '\n';
      return kConfigError;
    }
  }

  std::unique_ptr<vpd::Detector> detector;
  try {
    if (config_path.empty()) throw ConfigFailure("no lane configuration (--config or VPD_LANE_CONFIG)");
    if (input_path.empty() == pgm_dir.empty()) throw ConfigFailure("give exactly one of --input or --pgm-dir");
    if (start_frame < 0) throw ConfigFailure("--start-frame must be >= 0");
    auto lanes = vpd::parse_lane_config(read_file(config_path), cfg.frame_width, cfg.frame_height);
    detector = std::make_unique<vpd::Detector>(std::move(lanes), cfg);
    if (!snapshot_in.empty()) {
      std::ifstream in(snapshot_in);
      if (!in) throw ConfigFailure("cannot open " + snapshot_in);
      detector->load_models(vpd::read_snapshot<vpd::kFeatureDim>(in));
    }
  } catch (const vpd::ParseError& e) {
    std::cerr << "vpd_detect: " << config_path << ":" << e.line() << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "vpd_detect: " << e.what() << '\n';
    return kConfigError;
  }

  std::ofstream out_file;
  if (!output_path.empty()) {
    out_file.open(output_path);
    if (!out_file) {
      std::cerr << "vpd_detect: cannot open " << output_path << '\n';
      return kOutputError;
    }
  }
  std::ostream& out = output_path.empty() ? std::cout : out_file;
  std::ofstream dump;
  if (!dump_path.empty()) {
    dump.open(dump_path);
    if (!dump) {
      std::cerr << "vpd_detect: cannot open " << dump_path << '\n';
      return kOutputError;
    }
  }

  try {
    std::ifstream raw_file;
    std::unique_ptr<vpd::FrameSource> source;
    if (!pgm_dir.empty()) {
      source = std::make_unique<vpd::PnmDirectoryReader>(pgm_dir, cfg.frame_width, cfg.frame_height, source_fps);
    } else if (input_path == "-") {
      source = std::make_unique<vpd::RawFrameReader>(std::cin, cfg.frame_width, cfg.frame_height, source_fps);
    } else {
      raw_file.open(input_path, std::ios::binary);
      if (!raw_file) throw vpd::StreamError(0, "cannot open " + input_path);
      source = std::make_unique<vpd::RawFrameReader>(raw_file, cfg.frame_width, cfg.frame_height, source_fps);
    }
    vpd::Downsampler sampler(source_fps, target_fps);
    vpd::ReportWriter writer(out);
    std::int64_t read = 0;
    while (max_frames < 0 || read < max_frames) {
      auto frame = source->next();
      if (!frame) break;
      ++read;
      if (frame->sequence < start_frame) continue;
      if (!sampler.keep(*frame)) continue;
      const auto obs = detector->observe(*frame);
      if (dump.is_open()) {
        for (const auto& lane : detector->last_features()) {
          for (const auto& f : lane) dump << vpd::format_feature_vector(f) << '\n';
        }
        if (!dump) throw vpd::ReportError("failed to write " + dump_path);
      }
      if (detector->phase() == vpd::Phase::ready && !obs.empty()) {
        writer.write(vpd::make_report(*detector, frame->timestamp_ms, obs));
      }
    }
  } catch (const vpd::StreamError& e) {
    std::cerr << "vpd_detect: frame " << e.sequence() << ": " << e.what() << '\n';
    return kStreamError;
  } catch (const std::exception& e) {
    std::cerr << "vpd_detect: " << e.what() << '\n';
    return kOutputError;
  }

  if (!snapshot_out.empty()) {
    if (detector->phase() != vpd::Phase::ready) {
      std::cerr << "vpd_detect: stream ended before the model was trained; no snapshot written\n";
      return kOutputError;
    }
    std::ofstream snap(snapshot_out);
    vpd::write_snapshot(snap, detector->models());
    snap.flush();
    if (!snap) {
      std::cerr << "vpd_detect: failed to write " << snapshot_out << '\n';
      return kOutputError;
    }
  }
  if (detector->init_failures() > 0) {
    std::cerr << "vpd_detect: " << detector->init_failures() << " failed initialization attempt(s)\n";
  }
  return kOk;
}
