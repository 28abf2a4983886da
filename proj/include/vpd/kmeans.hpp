#pragma once

// Two-cluster Lloyd K-means with random restarts, used to seed EM.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vpd/errors.hpp"

namespace vpd {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
double squared_distance(const Vec<N>& a, const Vec<N>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < N; ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

template <std::size_t N>
struct KmeansResult {
  std::array<Vec<N>, 2> centroids{};
  std::vector<int> labels;
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

struct KmeansOptions {
  int restarts = 3;
  std::size_t max_iterations = 100;
  std::uint64_t seed = 0;
};

namespace detail {

template <std::size_t N>
int nearest(const Vec<N>& x, const std::array<Vec<N>, 2>& centroids) {
  // Ties go to the lower index.
  return squared_distance(x, centroids[1]) < squared_distance(x, centroids[0]) ? 1 : 0;
}

template <std::size_t N>
void update_centroids(std::span<const Vec<N>> points, const std::vector<int>& labels,
                      std::array<Vec<N>, 2>& centroids) {
  std::array<Vec<N>, 2> sums{};
  std::array<std::size_t, 2> counts{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (std::size_t j = 0; j < N; ++j) sums[c][j] += points[i][j];
  }
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < N; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
  }
}

template <std::size_t N>
double inertia_of(std::span<const Vec<N>> points, const std::vector<int>& labels,
                  const std::array<Vec<N>, 2>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
  }
  return total;
}

// Assigns every point to its nearest centroid. If a cluster ends up empty,
// the point farthest from its centroid becomes that cluster's centroid and
// the assignment is redone.
template <std::size_t N>
void assign(std::span<const Vec<N>> points, std::array<Vec<N>, 2>& centroids, std::vector<int>& labels) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::array<std::size_t, 2> counts{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      labels[i] = nearest(points[i], centroids);
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    if (counts[0] > 0 && counts[1] > 0) return;
    const std::size_t empty = counts[0] == 0 ? 0 : 1;
    std::size_t farthest = 0;
    double far_dist = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
      if (d > far_dist) {
        far_dist = d;
        farthest = i;
      }
    }
    centroids[empty] = points[farthest];
  }
  // The farthest point differs from the other centroid (inputs are not all
  // identical), so it now owns at least itself.
}

}  // namespace detail

// Best-of-restarts two-cluster K-means under Euclidean distance.
// Each restart seeds with two distinct samples drawn uniformly at random and
// runs Lloyd iterations until the assignment stops changing or the
// iteration cap is hit. Deterministic for a given seed.
template <std::size_t N>
KmeansResult<N> kmeans(std::span<const Vec<N>> points, const KmeansOptions& options = {}) {
  if (points.empty()) throw std::invalid_argument("k-means needs at least one point");
  if (options.restarts < 1) throw std::invalid_argument("k-means needs at least one restart");
  std::size_t distinct_from_first = points.size();
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] != points[0]) {
      distinct_from_first = i;
      break;
    }
  }
  if (distinct_from_first == points.size()) {
    throw DegenerateInputError("k-means needs at least two distinct points");
  }

  const std::size_t n = points.size();
  KmeansResult<N> best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < options.restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);

    const std::size_t first = static_cast<std::size_t>(rng() % n);
    std::size_t second = n;
    for (int tries = 0; tries < 64 && second == n; ++tries) {
      const std::size_t candidate = static_cast<std::size_t>(rng() % n);
      if (points[candidate] != points[first]) second = candidate;
    }
    if (second == n) {
      for (std::size_t k = 1; k < n && second == n; ++k) {
        const std::size_t candidate = (first + k) % n;
        if (points[candidate] != points[first]) second = candidate;
      }
    }

    KmeansResult<N> run;
    run.centroids = {points[first], points[second]};
    run.labels.assign(n, 0);
    std::vector<int> previous;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      detail::assign(points, run.centroids, run.labels);
      run.iterations = it + 1;
      run.inertia_trace.push_back(detail::inertia_of(points, run.labels, run.centroids));
      if (run.labels == previous) break;
      detail::update_centroids(points, run.labels, run.centroids);
      previous = run.labels;
    }
    // After a fixpoint the centroids were computed from these exact labels;
    // after hitting the cap they are refreshed here.
    detail::update_centroids(points, run.labels, run.centroids);
    run.inertia = detail::inertia_of(points, run.labels, run.centroids);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

template <std::size_t N>
KmeansResult<N> kmeans(const std::vector<Vec<N>>& points, const KmeansOptions& options = {}) {
  return kmeans(std::span<const Vec<N>>(points), options);
}

}  // namespace vpd
