// vpd_synth: renders the synthetic two-lane scene as a raw stream (or PGM
// files) together with its lane configuration and ground-truth reports.
//
//   vpd_synth --frames 700 --raw scene.raw --config lanes.cfg --truth truth.txt

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "vpd/frame_io.hpp"
#include "vpd/lane_geometry.hpp"
#include "vpd/report.hpp"
#include "vpd/synthetic_scene.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic traffic scene generator"};
  vpd::SceneOptions opt;
  std::int64_t frames = 100;
  std::string raw_path;
  std::string pgm_dir;
  std::string config_path;
  std::string truth_path;
  app.add_option("-n,--frames", frames, "Number of frames")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opt.seed, "Scene seed")->capture_default_str();
  app.add_option("--fps", opt.fps, "Frame rate used for ground-truth timestamps")->capture_default_str();
  app.add_option("--raw", raw_path, "Raw 8-bit Y-plane output ('-' for stdout)");
  app.add_option("--pgm-dir", pgm_dir, "Write one PGM file per frame into this directory");
  app.add_option("--config", config_path, "Write the lane configuration here");
  app.add_option("--truth", truth_path, "Write ground-truth report lines here");
  CLI11_PARSE(app, argc, argv);

  const vpd::SyntheticScene scene(opt);
  if (!config_path.empty()) {
    std::ofstream cfg(config_path);
    cfg << vpd::format_lane_config(scene.lanes());
    if (!cfg) {
      std::cerr << "vpd_synth: failed to write " << config_path << '\n';
      return 3;
    }
  }

  std::ofstream raw_file;
  std::ostream* raw = nullptr;
  if (raw_path == "-") {
    raw = &std::cout;
  } else if (!raw_path.empty()) {
    raw_file.open(raw_path, std::ios::binary);
    raw = &raw_file;
  }
  if (!pgm_dir.empty()) std::filesystem::create_directories(pgm_dir);
  std::ofstream truth;
  if (!truth_path.empty()) truth.open(truth_path);

  for (std::int64_t seq = 0; seq < frames; ++seq) {
    const auto sf = scene.render(seq);
    if (raw) {
      const auto& px = sf.frame.image.pixels;
      raw->write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    }
    if (!pgm_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06lld.pgm", static_cast<long long>(seq));
      std::ofstream f(std::filesystem::path(pgm_dir) / name, std::ios::binary);
      vpd::write_pgm(f, sf.frame.image);
    }
    if (truth.is_open()) {
      vpd::TrafficStatusReport rep;
      rep.timestamp_ms = sf.frame.timestamp_ms;
      for (std::size_t l = 0; l < scene.lanes().size(); ++l) {
        rep.lanes.push_back({scene.lanes()[l].lane_id, sf.occupancy[l], vpd::queue_length(sf.occupancy[l])});
      }
      truth << vpd::format_report(rep) << '\n';
    }
  }
  if ((raw && !raw->flush()) || (truth.is_open() && !truth.flush())) {
    std::cerr << "vpd_synth: write failed\n";
    return 3;
  }
  return 0;
}
