#pragma once

// Texture features of a grayscale block patch.
//
// Histogram features (entropy, non-zero bin rate, moments) work on gray
// levels quantized to L' bins; edge fractions use raw 8-bit values against
// the threshold phi. Every feature lands in [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vpd/errors.hpp"

namespace vpd {

inline constexpr int kGrayLevels = 256;
inline constexpr std::size_t kFeatureDim = 8;
inline constexpr int kMinPatchSide = 8;

using FeatureVector = std::array<double, kFeatureDim>;

// Slot order of FeatureVector, most to least discriminative on the
// reference data set.
enum FeatureSlot : std::size_t {
  kMaxLocalEntropy = 0,
  kNonzeroBinRate = 1,
  kSecondMoment = 2,
  kEdgeRightDiagonal = 3,  // h4
  kEdgeLeftDiagonal = 4,   // h3
  kFirstMoment = 5,
  kEdgeVertical = 6,       // h2
  kEdgeHorizontal = 7,     // h1
};

struct FeatureInfo {
  std::string_view symbol;
  std::string_view meaning;
};

inline constexpr std::array<FeatureInfo, kFeatureDim> kFeatureInfo{{
    {"E", "Max local entropy"},
    {"B", "Non-zero histogram bin rate"},
    {"M2", "Second order central moment"},
    {"G(h4)", "Right diagonal edge"},
    {"G(h3)", "Left diagonal edge"},
    {"M1", "First order moment (mean)"},
    {"G(h2)", "Vertical edge"},
    {"G(h1)", "Horizontal edge"},
}};

// Non-owning row-major view of 8-bit gray pixels.
class PatchView {
public:
  PatchView(std::span<const std::uint8_t> pixels, int width, int height, int stride)
      : pixels_(pixels), width_(width), height_(height), stride_(stride) {
    if (width < 0 || height < 0 || stride < width) throw std::invalid_argument("invalid patch geometry");
    if (height > 0 && pixels.size() < static_cast<std::size_t>((height - 1) * stride + width)) {
      throw std::invalid_argument("patch pixel buffer too small");
    }
  }
  PatchView(std::span<const std::uint8_t> pixels, int width, int height)
      : PatchView(pixels, width, height, width) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int stride() const noexcept { return stride_; }
  std::uint8_t operator()(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(stride_) + static_cast<std::size_t>(x)];
  }
  const std::uint8_t* row(int y) const noexcept {
    return pixels_.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(stride_);
  }

  PatchView sub(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
      throw std::out_of_range("sub-patch outside parent");
    }
    const std::size_t offset = static_cast<std::size_t>(y) * static_cast<std::size_t>(stride_) + static_cast<std::size_t>(x);
    return PatchView(pixels_.subspan(offset), w, h, stride_);
  }

private:
  std::span<const std::uint8_t> pixels_;
  int width_;
  int height_;
  int stride_;
};

// Owning grayscale image.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  PatchView view() const { return PatchView(pixels, width, height); }
};

struct Histogram {
  // counts[i] holds quantized level i + 1.
  std::vector<std::uint32_t> counts;
  std::uint64_t total = 0;

  std::size_t levels() const noexcept { return counts.size(); }
  double probability(std::size_t bin) const {
    return static_cast<double>(counts[bin]) / static_cast<double>(total);
  }
};

inline void check_levels(int levels) {
  if (levels <= 0 || levels > kGrayLevels || kGrayLevels % levels != 0) {
    throw std::invalid_argument("quantization levels must divide 256, got " + std::to_string(levels));
  }
}

inline Histogram quantize_histogram(const PatchView& patch, int levels) {
  check_levels(levels);
  const int bin_width = kGrayLevels / levels;
  Histogram hist;
  hist.counts.assign(static_cast<std::size_t>(levels), 0);
  for (int y = 0; y < patch.height(); ++y) {
    const std::uint8_t* row = patch.row(y);
    for (int x = 0; x < patch.width(); ++x) ++hist.counts[row[x] / bin_width];
  }
  hist.total = static_cast<std::uint64_t>(patch.width()) * static_cast<std::uint64_t>(patch.height());
  return hist;
}

// Shannon entropy in bits; empty bins contribute nothing.
inline double entropy(const Histogram& hist) {
  double e = 0.0;
  for (std::size_t i = 0; i < hist.levels(); ++i) {
    if (hist.counts[i] == 0) continue;
    const double p = hist.probability(i);
    e -= p * std::log2(p);
  }
  return e;
}

// Maximum over all fully interior (2*half_w+1) x (2*half_h+1) windows of the
// window histogram entropy.
inline double max_local_entropy(const PatchView& patch, int half_w, int half_h, int levels) {
  check_levels(levels);
  if (half_w < 0 || half_h < 0) throw std::invalid_argument("window half sizes must be non-negative");
  const int win_w = 2 * half_w + 1;
  const int win_h = 2 * half_h + 1;
  if (patch.width() < win_w || patch.height() < win_h) {
    throw std::invalid_argument("patch " + std::to_string(patch.width()) + "x" + std::to_string(patch.height()) +
                                " smaller than " + std::to_string(win_w) + "x" + std::to_string(win_h) + " window");
  }
  const int bin_width = kGrayLevels / levels;
  const int area = win_w * win_h;

  // p * log2(p) for every count a window bin can hold.
  std::vector<double> term(static_cast<std::size_t>(area) + 1, 0.0);
  for (int c = 1; c <= area; ++c) {
    const double p = static_cast<double>(c) / static_cast<double>(area);
    term[static_cast<std::size_t>(c)] = p * std::log2(p);
  }

  // Quantize once.
  const int w = patch.width();
  const int h = patch.height();
  std::vector<std::uint8_t> q(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = patch.row(y);
    for (int x = 0; x < w; ++x) q[static_cast<std::size_t>(y * w + x)] = static_cast<std::uint8_t>(row[x] / bin_width);
  }

  std::vector<int> counts(static_cast<std::size_t>(levels));
  double best = 0.0;
  for (int top = 0; top + win_h <= h; ++top) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int y = top; y < top + win_h; ++y) {
      for (int x = 0; x < win_w; ++x) ++counts[q[static_cast<std::size_t>(y * w + x)]];
    }
    for (int left = 0;; ++left) {
      double e = 0.0;
      for (int c : counts) e -= term[static_cast<std::size_t>(c)];
      best = std::max(best, e);
      if (left + win_w >= w) break;
      for (int y = top; y < top + win_h; ++y) {
        --counts[q[static_cast<std::size_t>(y * w + left)]];
        ++counts[q[static_cast<std::size_t>(y * w + left + win_w)]];
      }
    }
  }
  return best;
}

struct EdgeKernel {
  std::string_view id;
  std::array<std::array<int, 3>, 3> coeff;
};

inline constexpr EdgeKernel kEdgeH1{"h1", {{{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}}}};
inline constexpr EdgeKernel kEdgeH2{"h2", {{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}}};
inline constexpr EdgeKernel kEdgeH3{"h3", {{{0, -1, -1}, {1, 0, -1}, {1, 1, 0}}}};
inline constexpr EdgeKernel kEdgeH4{"h4", {{{-1, -1, 0}, {-1, 0, 1}, {0, 1, 1}}}};

// Fraction of valid 3x3 positions whose absolute kernel response exceeds
// the threshold. Responses are taken only where the kernel fits.
inline double edge_fraction(const PatchView& patch, const EdgeKernel& kernel, int threshold) {
  if (patch.width() < 3 || patch.height() < 3) {
    throw std::invalid_argument("edge fraction needs a patch of at least 3x3");
  }
  const int vw = patch.width() - 2;
  const int vh = patch.height() - 2;
  const auto& k = kernel.coeff;
  long long above = 0;
  for (int y = 0; y < vh; ++y) {
    const std::uint8_t* r0 = patch.row(y);
    const std::uint8_t* r1 = patch.row(y + 1);
    const std::uint8_t* r2 = patch.row(y + 2);
    for (int x = 0; x < vw; ++x) {
      const int response = k[0][0] * r0[x] + k[0][1] * r0[x + 1] + k[0][2] * r0[x + 2] +
                           k[1][0] * r1[x] + k[1][1] * r1[x + 1] + k[1][2] * r1[x + 2] +
                           k[2][0] * r2[x] + k[2][1] * r2[x + 1] + k[2][2] * r2[x + 2];
      if (std::abs(response) > threshold) ++above;
    }
  }
  return static_cast<double>(above) / (static_cast<double>(vw) * static_cast<double>(vh));
}

inline double nonzero_bin_rate(const Histogram& hist) {
  const auto nonzero = std::count_if(hist.counts.begin(), hist.counts.end(), [](std::uint32_t c) { return c > 0; });
  return static_cast<double>(nonzero) / static_cast<double>(hist.levels());
}

// Mean quantized level (1-based) divided by the number of levels.
inline double first_moment(const Histogram& hist) {
  double mean = 0.0;
  for (std::size_t i = 0; i < hist.levels(); ++i) mean += static_cast<double>(i + 1) * hist.probability(i);
  return mean / static_cast<double>(hist.levels());
}

// Variance of the quantized level scaled by its maximum (L'-1)^2/4.
inline double second_moment_normalized(const Histogram& hist) {
  const std::size_t levels = hist.levels();
  if (levels < 2) return 0.0;
  double mean = 0.0;
  double raw2 = 0.0;
  for (std::size_t i = 0; i < levels; ++i) {
    const double level = static_cast<double>(i + 1);
    const double p = hist.probability(i);
    mean += level * p;
    raw2 += level * level * p;
  }
  const double span = static_cast<double>(levels - 1);
  return std::clamp(4.0 * (raw2 - mean * mean) / (span * span), 0.0, 1.0);
}

struct FeatureParams {
  int levels = 32;          // L'
  int half_w = 2;           // w'
  int half_h = 2;           // h'
  int edge_threshold = 30;  // phi
};

inline FeatureVector extract_features(const PatchView& patch, const FeatureParams& params = {}) {
  if (patch.width() < kMinPatchSide || patch.height() < kMinPatchSide) {
    throw std::invalid_argument("feature patch must be at least 8x8, got " + std::to_string(patch.width()) + "x" +
                                std::to_string(patch.height()));
  }
  const Histogram hist = quantize_histogram(patch, params.levels);
  FeatureVector f{};
  f[kMaxLocalEntropy] = max_local_entropy(patch, params.half_w, params.half_h, params.levels) /
                        std::log2(static_cast<double>(params.levels));
  f[kNonzeroBinRate] = nonzero_bin_rate(hist);
  f[kSecondMoment] = second_moment_normalized(hist);
  f[kEdgeRightDiagonal] = edge_fraction(patch, kEdgeH4, params.edge_threshold);
  f[kEdgeLeftDiagonal] = edge_fraction(patch, kEdgeH3, params.edge_threshold);
  f[kFirstMoment] = first_moment(hist);
  f[kEdgeVertical] = edge_fraction(patch, kEdgeH2, params.edge_threshold);
  f[kEdgeHorizontal] = edge_fraction(patch, kEdgeH1, params.edge_threshold);
  return f;
}

// 8 comma-separated decimals with enough digits to round-trip exactly.
inline std::string format_feature_vector(const FeatureVector& f) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

inline FeatureVector parse_feature_vector(std::string_view line) {
  FeatureVector f{};
  std::size_t slot = 0;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    std::string field(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (slot >= f.size()) throw std::invalid_argument("feature vector has more than 8 fields");
    char* end = nullptr;
    const char* begin = field.c_str();
    while (*begin == ' ' || *begin == '\t') ++begin;
    f[slot] = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == begin || *end != '\0') throw std::invalid_argument("bad feature field '" + field + "'");
    ++slot;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (slot != f.size()) throw std::invalid_argument("feature vector needs 8 fields, got " + std::to_string(slot));
  return f;
}

// Fisher's criterion (mu_a - mu_b)^2 / (var_a + var_b) with population
// variances. Two constant but different classes give +infinity.
inline double fisher_score(std::span<const double> class_a, std::span<const double> class_b) {
  if (class_a.size() < 2 || class_b.size() < 2) {
    throw std::invalid_argument("fisher score needs at least 2 samples per class");
  }
  auto moments = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, var / static_cast<double>(v.size())};
  };
  const auto [mean_a, var_a] = moments(class_a);
  const auto [mean_b, var_b] = moments(class_b);
  const double spread = var_a + var_b;
  const double gap = (mean_a - mean_b) * (mean_a - mean_b);
  if (spread == 0.0) {
    if (gap == 0.0) throw DegenerateInputError("fisher score undefined: both classes constant and equal");
    return std::numeric_limits<double>::infinity();
  }
  return gap / spread;
}

}  // namespace vpd
