#pragma once

// Scripted synthetic traffic scene with known per-block ground truth.
//
// Two lanes of six blocks on a 352x288 frame. Road surface is flat gray with
// small Gaussian noise; a "vehicle" fills its block with uniform random
// texture. Each lane's queue grows and shrinks on a triangle wave, and
// blocks beyond the first gap are occupied at random. Every frame is a pure
// function of (seed, sequence number).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vpd/frame_io.hpp"
#include "vpd/lane_geometry.hpp"

namespace vpd {

struct SceneOptions {
  int width = 352;
  int height = 288;
  std::uint64_t seed = 1;
  double fps = 5.0;
  double road_level = 100.0;
  double road_sigma = 2.0;
  // Slow sinusoidal change of the road gray level (lighting).
  double lighting_amplitude = 10.0;
  double lighting_period = 3000.0;
  int texture_center = 128;
  int texture_half_range = 80;  // uniform texture, sigma ~ 46 gray levels
  int queue_period = 36;
  double stray_vehicle_rate = 0.25;
};

struct SceneFrame {
  Frame frame;
  std::vector<std::vector<bool>> occupancy;  // [lane][block], block 0 at the stop line
};

class SyntheticScene {
public:
  explicit SyntheticScene(SceneOptions options = {}) : options_(options), lanes_(default_lanes()) {
    for (const auto& lane : lanes_) blocks_.push_back(rasterize_blocks(lane, options_.width, options_.height));
  }

  static std::vector<LaneLayout> default_lanes() {
    return {
        {"north", {{{30, 280}, {160, 280}, {150, 20}, {85, 20}}}, 6, StopLineEnd::front},
        {"south", {{{190, 280}, {322, 280}, {265, 20}, {200, 20}}}, 6, StopLineEnd::front},
    };
  }

  const std::vector<LaneLayout>& lanes() const noexcept { return lanes_; }
  const std::vector<std::vector<BlockRect>>& blocks() const noexcept { return blocks_; }
  const SceneOptions& options() const noexcept { return options_; }

  std::vector<std::vector<bool>> occupancy(std::int64_t sequence) const {
    std::mt19937_64 rng(stream_seed(sequence, 0x5157));
    std::vector<std::vector<bool>> occ;
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      const std::size_t n = blocks_[l].size();
      const std::int64_t period = options_.queue_period;
      const std::int64_t phase = (sequence + static_cast<std::int64_t>(l) * period / 3) % period;
      const double tri = 1.0 - std::abs(2.0 * static_cast<double>(phase) / static_cast<double>(period) - 1.0);
      const auto queue = static_cast<std::size_t>(std::lround(tri * static_cast<double>(n)));
      std::vector<bool> lane(n, false);
      for (std::size_t b = 0; b < n; ++b) {
        if (b < queue) {
          lane[b] = true;
        } else if (b > queue) {
          lane[b] = static_cast<double>(rng() >> 11) * 0x1.0p-53 < options_.stray_vehicle_rate;
        }
      }
      occ.push_back(std::move(lane));
    }
    return occ;
  }

  SceneFrame render(std::int64_t sequence) const {
    SceneFrame out;
    out.occupancy = occupancy(sequence);
    out.frame.sequence = sequence;
    out.frame.timestamp_ms = frame_timestamp_ms(sequence, options_.fps);
    auto& img = out.frame.image;
    img = GrayImage(options_.width, options_.height);

    std::mt19937_64 rng(stream_seed(sequence, 0xF4A3));
    std::normal_distribution<double> noise(0.0, options_.road_sigma);
    const double level = options_.road_level +
                         options_.lighting_amplitude *
                             std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(sequence) / options_.lighting_period);
    for (auto& px : img.pixels) px = clamp_gray(std::lround(level + noise(rng)));

    std::uniform_int_distribution<int> texture(options_.texture_center - options_.texture_half_range,
                                               options_.texture_center + options_.texture_half_range);
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      for (std::size_t b = 0; b < blocks_[l].size(); ++b) {
        if (!out.occupancy[l][b]) continue;
        const auto& r = blocks_[l][b];
        for (int y = r.y; y < r.y + r.height; ++y) {
          for (int x = r.x; x < r.x + r.width; ++x) img.at(x, y) = clamp_gray(texture(rng));
        }
      }
    }
    return out;
  }

private:
  static std::uint8_t clamp_gray(long v) { return static_cast<std::uint8_t>(std::clamp<long>(v, 0, 255)); }

  std::uint64_t stream_seed(std::int64_t sequence, std::uint64_t salt) const {
    std::uint64_t z = options_.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(sequence) * 0xBF58476D1CE4E5B9ull + salt;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  SceneOptions options_;
  std::vector<LaneLayout> lanes_;
  std::vector<std::vector<BlockRect>> blocks_;
};

}  // namespace vpd
