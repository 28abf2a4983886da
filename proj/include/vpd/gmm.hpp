#pragma once

// Two-component Gaussian mixture with diagonal covariances.
//
// Batch fitting runs EM from a K-means seed (priors 0.5, means at the
// centroids, identity covariances). After that the model keeps learning one
// sample at a time; accumulated component mass is capped at 1/lambda so
// every new sample keeps a weight of at least about lambda in the update.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpd/errors.hpp"
#include "vpd/kmeans.hpp"

namespace vpd {

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kCollapseMass = 1e-8;

enum class ClassTag { unassigned, lane, vehicle };

inline const char* to_string(ClassTag tag) {
  switch (tag) {
    case ClassTag::lane: return "lane";
    case ClassTag::vehicle: return "vehicle";
    default: return "unassigned";
  }
}

template <std::size_t N>
struct GaussianComponent {
  Vec<N> mean{};
  Vec<N> variance{};  // diagonal of the covariance
  ClassTag tag = ClassTag::unassigned;
  friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

template <std::size_t N>
struct GmmModel {
  std::array<GaussianComponent<N>, 2> components{};
  std::array<double, 2> priors{0.5, 0.5};
  std::array<double, 2> masses{0.0, 0.0};
  std::uint64_t sample_count = 0;
  friend bool operator==(const GmmModel&, const GmmModel&) = default;
};

using Responsibility = std::array<double, 2>;

template <std::size_t N>
double log_density(const Vec<N>& x, const GaussianComponent<N>& comp) {
  constexpr double log_2pi = 1.8378770664093454835606594728112;  // log(2*pi)
  double log_det = 0.0;
  double mahalanobis = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    const double d = x[j] - comp.mean[j];
    log_det += std::log(comp.variance[j]);
    mahalanobis += d * d / comp.variance[j];
  }
  return -0.5 * static_cast<double>(N) * log_2pi - 0.5 * log_det - 0.5 * mahalanobis;
}

namespace detail {

// Normalized responsibilities from log joint densities; returns the log of
// the mixture density as well.
inline double normalize_log_joint(double a0, double a1, Responsibility& out) {
  const double top = std::max(a0, a1);
  const double e0 = std::exp(a0 - top);
  const double e1 = std::exp(a1 - top);
  const double sum = e0 + e1;
  out = {e0 / sum, e1 / sum};
  return top + std::log(sum);
}

}  // namespace detail

// Membership of one sample under the current model, with its log mixture
// density.
template <std::size_t N>
double responsibility(const Vec<N>& x, const GmmModel<N>& model, Responsibility& out) {
  return detail::normalize_log_joint(std::log(model.priors[0]) + log_density(x, model.components[0]),
                                     std::log(model.priors[1]) + log_density(x, model.components[1]), out);
}

template <std::size_t N>
struct EStepResult {
  std::vector<Responsibility> responsibilities;
  double mean_log_likelihood = 0.0;
};

template <std::size_t N>
EStepResult<N> e_step(std::span<const Vec<N>> points, const GmmModel<N>& model) {
  EStepResult<N> result;
  result.responsibilities.resize(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += responsibility(points[i], model, result.responsibilities[i]);
  result.mean_log_likelihood = points.empty() ? 0.0 : total / static_cast<double>(points.size());
  return result;
}

template <std::size_t N>
double mean_log_likelihood(std::span<const Vec<N>> points, const GmmModel<N>& model) {
  Responsibility unused;
  double total = 0.0;
  for (const auto& x : points) total += responsibility(x, model, unused);
  return total / static_cast<double>(points.size());
}

// Weighted maximum-likelihood parameters for the given memberships.
// Throws ComponentCollapseError if a component's mass falls below 1e-8.
template <std::size_t N>
GmmModel<N> m_step(std::span<const Vec<N>> points, std::span<const Responsibility> resp) {
  if (points.size() != resp.size() || points.empty()) {
    throw std::invalid_argument("m-step needs one responsibility row per point");
  }
  GmmModel<N> model;
  const double m = static_cast<double>(points.size());
  model.sample_count = points.size();
  for (std::size_t c = 0; c < 2; ++c) {
    double mass = 0.0;
    Vec<N> weighted{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      mass += resp[i][c];
      for (std::size_t j = 0; j < N; ++j) weighted[j] += resp[i][c] * points[i][j];
    }
    if (!(mass >= kCollapseMass)) throw ComponentCollapseError(c, mass);
    auto& comp = model.components[c];
    for (std::size_t j = 0; j < N; ++j) comp.mean[j] = weighted[j] / mass;
    Vec<N> spread{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        const double d = points[i][j] - comp.mean[j];
        spread[j] += resp[i][c] * d * d;
      }
    }
    for (std::size_t j = 0; j < N; ++j) comp.variance[j] = std::max(spread[j] / mass, kVarianceFloor);
    model.masses[c] = mass;
    model.priors[c] = mass / m;
  }
  return model;
}

// Model used to start EM: equal priors, K-means centroids, unit variances.
template <std::size_t N>
GmmModel<N> initial_model(const KmeansResult<N>& init) {
  GmmModel<N> model;
  for (std::size_t c = 0; c < 2; ++c) {
    model.components[c].mean = init.centroids[c];
    model.components[c].variance.fill(1.0);
    model.priors[c] = 0.5;
    model.masses[c] = 0.0;
  }
  for (int label : init.labels) model.masses[static_cast<std::size_t>(label)] += 1.0;
  model.sample_count = init.labels.size();
  return model;
}

struct EmOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 200;
  std::size_t min_cluster_size = 10;
};

template <std::size_t N>
struct EmResult {
  GmmModel<N> model;
  // Mean log-likelihood of the initial model, then after every M-step.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  bool converged = false;
};

// Batch EM from a K-means result. Stops once the mean log-likelihood gains
// less than the tolerance in one iteration.
template <std::size_t N>
EmResult<N> fit_em(std::span<const Vec<N>> points, const KmeansResult<N>& init, const EmOptions& options = {}) {
  if (init.labels.size() != points.size()) throw std::invalid_argument("k-means labels do not match points");
  std::array<std::size_t, 2> sizes{};
  for (int label : init.labels) ++sizes[static_cast<std::size_t>(label)];
  if (sizes[0] < options.min_cluster_size || sizes[1] < options.min_cluster_size) {
    throw std::invalid_argument("EM needs at least " + std::to_string(options.min_cluster_size) +
                                " points per k-means cluster");
  }

  EmResult<N> result;
  result.model = initial_model(init);
  auto estep = e_step(points, result.model);
  result.log_likelihood.push_back(estep.mean_log_likelihood);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    GmmModel<N> next = m_step(points, std::span<const Responsibility>(estep.responsibilities));
    auto next_estep = e_step(points, next);
    const double gain = next_estep.mean_log_likelihood - estep.mean_log_likelihood;
    result.model = next;
    result.log_likelihood.push_back(next_estep.mean_log_likelihood);
    result.iterations = it + 1;
    estep = std::move(next_estep);
    if (gain < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

template <std::size_t N>
EmResult<N> fit_em(const std::vector<Vec<N>>& points, const KmeansResult<N>& init, const EmOptions& options = {}) {
  return fit_em(std::span<const Vec<N>>(points), init, options);
}

// One online EM step for a new sample. Memberships come from the current
// parameters. Each component's accumulated mass is capped at 1/lambda before
// the mean and covariance updates; the covariance uses the updated mean.
// Priors are the renormalized masses, which equals the running average of
// memberships while the cap is inactive.
template <std::size_t N>
GmmModel<N> online_update(const GmmModel<N>& model, const Vec<N>& x, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("forgetting factor must lie in (0, 1)");
  Responsibility w;
  responsibility(x, model, w);
  const double cap = 1.0 / lambda;

  GmmModel<N> next = model;
  for (std::size_t c = 0; c < 2; ++c) {
    const double mass = std::min(model.masses[c], cap);
    const double new_mass = mass + w[c];
    if (!(new_mass > 0.0)) continue;
    const auto& comp = model.components[c];
    auto& out = next.components[c];
    for (std::size_t j = 0; j < N; ++j) {
      out.mean[j] = (comp.mean[j] * mass + w[c] * x[j]) / new_mass;
      const double d = x[j] - out.mean[j];
      out.variance[j] = std::max((comp.variance[j] * mass + w[c] * d * d) / new_mass, kVarianceFloor);
    }
    next.masses[c] = new_mass;
  }
  const double total = next.masses[0] + next.masses[1];
  next.priors = {next.masses[0] / total, next.masses[1] / total};
  ++next.sample_count;
  return next;
}

}  // namespace vpd
