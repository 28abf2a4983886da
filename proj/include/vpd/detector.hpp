#pragma once

// Per-block vehicle presence detection over a frame stream.
//
// The detector starts in the collecting phase, buffering block features.
// Once a model group has init_samples of them it clusters them (K-means),
// fits the mixture (batch EM), names the components and turns ready. From
// then on every frame is classified with the pre-frame model and the block
// features are fed back through online EM, serially in lane/block order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vpd/classifier.hpp"
#include "vpd/errors.hpp"
#include "vpd/features.hpp"
#include "vpd/frame_io.hpp"
#include "vpd/gmm.hpp"
#include "vpd/kmeans.hpp"
#include "vpd/lane_geometry.hpp"

namespace vpd {

using Model = GmmModel<kFeatureDim>;

enum class Phase { collecting, ready };

enum class UpdatePolicy {
  always,     // every classified block feeds online EM
  confident,  // only blocks with |f(x)| >= update_margin
};

struct DetectorConfig {
  int frame_width = 352;
  int frame_height = 288;
  FeatureParams features{};
  std::size_t init_samples = 2000;
  double lambda = 0.05;
  std::uint64_t seed = 0;
  UpdatePolicy update_policy = UpdatePolicy::always;
  double update_margin = 0.0;
  bool per_lane_models = false;
  KmeansOptions kmeans{};
  EmOptions em{};
  int init_attempts = 3;
};

struct BlockObservation {
  std::string lane_id;
  std::size_t block_index = 0;
  FeatureVector features{};
  ClassDecision decision{};
  std::int64_t timestamp_ms = 0;
};

class Detector {
public:
  Detector(std::vector<LaneLayout> lanes, DetectorConfig config) : lanes_(std::move(lanes)), config_(config) {
    if (lanes_.empty()) throw std::invalid_argument("detector needs at least one lane");
    if (config_.init_samples == 0) throw std::invalid_argument("init sample count must be positive");
    if (!(config_.lambda > 0.0 && config_.lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    for (const auto& lane : lanes_) blocks_.push_back(rasterize_blocks(lane, config_.frame_width, config_.frame_height));
    groups_.resize(config_.per_lane_models ? lanes_.size() : 1);
  }

  Phase phase() const noexcept { return phase_; }
  const std::vector<LaneLayout>& lanes() const noexcept { return lanes_; }
  const std::vector<std::vector<BlockRect>>& blocks() const noexcept { return blocks_; }
  const DetectorConfig& config() const noexcept { return config_; }
  std::size_t model_count() const noexcept { return groups_.size(); }
  std::size_t buffered_samples(std::size_t group = 0) const { return groups_.at(group).buffer.size(); }
  // Failed initialization attempts (collapse, ambiguous tagging, tiny cluster).
  std::size_t init_failures() const noexcept { return init_failures_; }

  const Model& model(std::size_t group = 0) const {
    const auto& g = groups_.at(group);
    if (!g.ready) throw StateError("model group " + std::to_string(group) + " is not trained yet");
    return g.model;
  }

  std::vector<Model> models() const {
    std::vector<Model> out;
    for (std::size_t k = 0; k < groups_.size(); ++k) out.push_back(model(k));
    return out;
  }

  // Installs previously learned models and skips the collecting phase.
  void load_models(const std::vector<Model>& models) {
    if (models.size() != groups_.size()) {
      throw StateError("snapshot holds " + std::to_string(models.size()) + " model(s), detector needs " +
                       std::to_string(groups_.size()));
    }
    for (std::size_t k = 0; k < models.size(); ++k) {
      tagged_indices(models[k]);
      groups_[k].model = models[k];
      groups_[k].ready = true;
      groups_[k].buffer.clear();
    }
    phase_ = Phase::ready;
  }

  // Features of every block of a frame, indexed [lane][block].
  std::vector<std::vector<FeatureVector>> extract(const Frame& frame) const {
    if (frame.image.width != config_.frame_width || frame.image.height != config_.frame_height) {
      throw StreamError(frame.sequence, "frame size does not match configuration");
    }
    const PatchView view = frame.image.view();
    std::vector<std::vector<FeatureVector>> out(lanes_.size());
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      out[l].reserve(blocks_[l].size());
      for (const auto& b : blocks_[l]) out[l].push_back(extract_features(view.sub(b.x, b.y, b.width, b.height), config_.features));
    }
    return out;
  }

  // Processes one frame. Returns one observation per block once ready, or
  // nothing while collecting (including the frame that completes training).
  std::vector<BlockObservation> observe(const Frame& frame) {
    last_features_ = extract(frame);
    if (phase_ == Phase::collecting) {
      collect(last_features_);
      return {};
    }

    std::vector<BlockObservation> observations;
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      const Model& m = groups_[group_of(l)].model;
      for (std::size_t b = 0; b < blocks_[l].size(); ++b) {
        BlockObservation obs;
        obs.lane_id = lanes_[l].lane_id;
        obs.block_index = b;
        obs.features = last_features_[l][b];
        obs.decision = classify(obs.features, m);
        obs.timestamp_ms = frame.timestamp_ms;
        observations.push_back(std::move(obs));
      }
    }
    std::size_t k = 0;
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      Model& m = groups_[group_of(l)].model;
      for (std::size_t b = 0; b < blocks_[l].size(); ++b, ++k) {
        const auto& obs = observations[k];
        if (config_.update_policy == UpdatePolicy::confident &&
            std::abs(obs.decision.discriminant) < config_.update_margin) {
          continue;
        }
        m = online_update(m, obs.features, config_.lambda);
      }
    }
    return observations;
  }

  const std::vector<std::vector<FeatureVector>>& last_features() const noexcept { return last_features_; }

private:
  struct Group {
    std::vector<FeatureVector> buffer;
    Model model;
    bool ready = false;
  };

  std::size_t group_of(std::size_t lane) const noexcept { return config_.per_lane_models ? lane : 0; }

  void collect(const std::vector<std::vector<FeatureVector>>& features) {
    for (std::size_t l = 0; l < lanes_.size(); ++l) {
      auto& g = groups_[group_of(l)];
      if (g.ready) continue;
      for (const auto& f : features[l]) {
        if (g.buffer.size() < config_.init_samples) g.buffer.push_back(f);
      }
    }
    bool all_ready = true;
    for (std::size_t k = 0; k < groups_.size(); ++k) {
      auto& g = groups_[k];
      if (!g.ready && g.buffer.size() >= config_.init_samples) train(k);
      all_ready = all_ready && g.ready;
    }
    if (all_ready) phase_ = Phase::ready;
  }

  void train(std::size_t group) {
    auto& g = groups_[group];
    const std::span<const FeatureVector> samples(g.buffer);
    for (int attempt = 0; attempt < config_.init_attempts; ++attempt) {
      KmeansOptions km = config_.kmeans;
      km.seed = config_.seed + 0x9E3779B97F4A7C15ull * group + static_cast<std::uint64_t>(attempt);
      try {
        const auto clusters = kmeans(samples, km);
        auto fit = fit_em(samples, clusters, config_.em);
        g.model = assign_class_tags(fit.model);
        g.ready = true;
        g.buffer.clear();
        g.buffer.shrink_to_fit();
        return;
      } catch (const ComponentCollapseError&) {
      } catch (const AmbiguousTagError&) {
      } catch (const DegenerateInputError&) {
        ++init_failures_;
        break;
      } catch (const std::invalid_argument&) {
        // a k-means cluster too small for EM
      }
      ++init_failures_;
    }
    // Start over on fresh samples.
    g.buffer.clear();
  }

  std::vector<LaneLayout> lanes_;
  DetectorConfig config_;
  std::vector<std::vector<BlockRect>> blocks_;
  std::vector<Group> groups_;
  Phase phase_ = Phase::collecting;
  std::size_t init_failures_ = 0;
  std::vector<std::vector<FeatureVector>> last_features_;
};

}  // namespace vpd
