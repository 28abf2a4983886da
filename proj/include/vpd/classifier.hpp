#pragma once

// Bayes decision between the lane and vehicle components of a tagged model.

#include <cmath>
#include <cstddef>
#include <utility>

#include "vpd/errors.hpp"
#include "vpd/gmm.hpp"

namespace vpd {

enum class BlockLabel { lane, vehicle };

struct ClassDecision {
  BlockLabel label = BlockLabel::lane;
  double discriminant = 0.0;
  double posterior_vehicle = 0.0;
};

struct Posterior {
  double vehicle = 0.0;
  double lane = 0.0;
};

// Indices of the (vehicle, lane) components.
template <std::size_t N>
std::pair<std::size_t, std::size_t> tagged_indices(const GmmModel<N>& model) {
  const auto t0 = model.components[0].tag;
  const auto t1 = model.components[1].tag;
  if (t0 == ClassTag::vehicle && t1 == ClassTag::lane) return {0, 1};
  if (t0 == ClassTag::lane && t1 == ClassTag::vehicle) return {1, 0};
  throw StateError("model components need one vehicle and one lane tag");
}

template <std::size_t N>
Posterior posterior(const Vec<N>& x, const GmmModel<N>& model) {
  const auto [v, l] = tagged_indices(model);
  Responsibility r;
  responsibility(x, model, r);
  return {r[v], r[l]};
}

// log p(vehicle | x) - log p(lane | x) for diagonal covariances.
template <std::size_t N>
double discriminant(const Vec<N>& x, const GmmModel<N>& model) {
  const auto [v, l] = tagged_indices(model);
  const auto& cv = model.components[v];
  const auto& cl = model.components[l];
  double log_det_ratio = 0.0;  // log(|S_l| / |S_v|)
  double maha_l = 0.0;
  double maha_v = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    log_det_ratio += std::log(cl.variance[j]) - std::log(cv.variance[j]);
    const double dl = x[j] - cl.mean[j];
    const double dv = x[j] - cv.mean[j];
    maha_l += dl * dl / cl.variance[j];
    maha_v += dv * dv / cv.variance[j];
  }
  return 0.5 * log_det_ratio + std::log(model.priors[v] / model.priors[l]) + 0.5 * maha_l - 0.5 * maha_v;
}

// Vehicle iff the discriminant is strictly positive; ties go to lane.
template <std::size_t N>
ClassDecision classify(const Vec<N>& x, const GmmModel<N>& model) {
  ClassDecision d;
  d.discriminant = discriminant(x, model);
  d.posterior_vehicle = posterior(x, model).vehicle;
  d.label = d.discriminant > 0.0 ? BlockLabel::vehicle : BlockLabel::lane;
  // The two routes can disagree by an ulp right at the boundary.
  if (d.label == BlockLabel::vehicle && !(d.posterior_vehicle > 0.5)) {
    d.posterior_vehicle = std::nextafter(0.5, 1.0);
  } else if (d.label == BlockLabel::lane && d.posterior_vehicle > 0.5) {
    d.posterior_vehicle = 0.5;
  }
  return d;
}

// Names the anonymous components: the one with the larger mean in slot 0
// (local entropy, high on textured vehicles) becomes the vehicle.
template <std::size_t N>
GmmModel<N> assign_class_tags(GmmModel<N> model) {
  static_assert(N >= 1);
  const double a = model.components[0].mean[0];
  const double b = model.components[1].mean[0];
  if (std::abs(a - b) <= 1e-12) {
    throw AmbiguousTagError("cannot name mixture components: equal mean entropy feature");
  }
  const std::size_t vehicle = a > b ? 0 : 1;
  model.components[vehicle].tag = ClassTag::vehicle;
  model.components[1 - vehicle].tag = ClassTag::lane;
  return model;
}

}  // namespace vpd
