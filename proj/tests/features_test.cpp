#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vpd/features.hpp"

using namespace vpd;

namespace {

Histogram hist_from(std::vector<std::uint32_t> counts) {
  Histogram h;
  h.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  h.counts = std::move(counts);
  return h;
}

std::vector<std::uint32_t> bins32() { return std::vector<std::uint32_t>(32, 0); }

}  // namespace

TEST(QuantizeHistogram, ConstantPatchesFillOneEndBin) {
  GrayImage zero(10, 10, 0);
  auto h = quantize_histogram(zero.view(), 32);
  EXPECT_EQ(h.counts[0], 100u);
  EXPECT_EQ(h.total, 100u);

  GrayImage full(10, 10, 255);
  h = quantize_histogram(full.view(), 32);
  EXPECT_EQ(h.counts[31], 100u);
}

TEST(QuantizeHistogram, CyclingPatchIsUniform) {
  GrayImage img(16, 16);
  for (int i = 0; i < 256; ++i) img.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  const auto h = quantize_histogram(img.view(), 32);
  for (auto c : h.counts) EXPECT_EQ(c, 8u);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_DOUBLE_EQ(h.probability(i), 1.0 / 32.0);
}

TEST(QuantizeHistogram, RejectsLevelsNotDividing256) {
  GrayImage img(8, 8);
  EXPECT_THROW(quantize_histogram(img.view(), 30), std::invalid_argument);
  EXPECT_THROW(quantize_histogram(img.view(), 0), std::invalid_argument);
}

TEST(Entropy, KnownValues) {
  EXPECT_DOUBLE_EQ(entropy(hist_from(std::vector<std::uint32_t>(32, 8))), 5.0);
  auto one = bins32();
  one[4] = 50;
  EXPECT_EQ(entropy(hist_from(one)), 0.0);
  auto two = bins32();
  two[0] = 7;
  two[9] = 7;
  EXPECT_DOUBLE_EQ(entropy(hist_from(two)), 1.0);
}

TEST(Entropy, BoundedByLogOfNonzeroBins) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    auto img = testing_util::varied_patch(rng, 12, 9);
    const auto h = quantize_histogram(img.view(), 32);
    const auto nz = std::count_if(h.counts.begin(), h.counts.end(), [](auto c) { return c > 0; });
    EXPECT_LE(entropy(h), std::log2(static_cast<double>(nz)) + 1e-12);
  }
}

TEST(MaxLocalEntropy, ConstantPatchIsZero) {
  GrayImage img(20, 20, 77);
  EXPECT_EQ(max_local_entropy(img.view(), 2, 2, 32), 0.0);
}

TEST(MaxLocalEntropy, TwentyFiveDistinctLevelsInOneWindow) {
  GrayImage img(20, 20, 0);
  for (int i = 0; i < 25; ++i) img.at(6 + i % 5, 9 + i / 5) = static_cast<std::uint8_t>(8 * (i + 1));
  EXPECT_NEAR(max_local_entropy(img.view(), 2, 2, 32), std::log2(25.0), 1e-12);
  EXPECT_NEAR(max_local_entropy(img.view(), 2, 2, 32), 4.6439, 1e-4);
}

TEST(MaxLocalEntropy, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto img = testing_util::random_patch(rng, 32, 32);
    EXPECT_EQ(max_local_entropy(img.view(), 2, 2, 32), oracle::max_local_entropy(img, 2, 2, 32));
    EXPECT_EQ(max_local_entropy(img.view(), 1, 3, 32), oracle::max_local_entropy(img, 1, 3, 32));
  }
}

TEST(MaxLocalEntropy, WorksOnStridedSubPatch) {
  std::mt19937_64 rng(5);
  const auto img = testing_util::random_patch(rng, 40, 30);
  GrayImage copy(17, 13);
  for (int y = 0; y < 13; ++y) {
    for (int x = 0; x < 17; ++x) copy.at(x, y) = img.at(x + 9, y + 4);
  }
  EXPECT_EQ(max_local_entropy(img.view().sub(9, 4, 17, 13), 2, 2, 32), oracle::max_local_entropy(copy, 2, 2, 32));
}

TEST(MaxLocalEntropy, BoundedByWindowAndLevels) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto img = testing_util::varied_patch(rng, 24, 24);
    EXPECT_LE(max_local_entropy(img.view(), 2, 2, 32), std::log2(25.0) + 1e-12);
    EXPECT_LE(max_local_entropy(img.view(), 3, 3, 32), std::log2(32.0) + 1e-12);
  }
}

TEST(MaxLocalEntropy, PatchSmallerThanWindowThrows) {
  GrayImage img(4, 10);
  EXPECT_THROW(max_local_entropy(img.view(), 2, 2, 32), std::invalid_argument);
}

TEST(EdgeFraction, ConstantPatchHasNoEdges) {
  GrayImage img(12, 12, 200);
  for (const auto* k : {&kEdgeH1, &kEdgeH2, &kEdgeH3, &kEdgeH4}) EXPECT_EQ(edge_fraction(img.view(), *k, 30), 0.0);
}

TEST(EdgeFraction, VerticalStep) {
  GrayImage img(16, 10, 0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 8; x < 16; ++x) img.at(x, y) = 255;
  }
  const double h2 = edge_fraction(img.view(), kEdgeH2, 30);
  EXPECT_EQ(h2, oracle::edge_fraction(img, kEdgeH2.coeff, 30));
  // Windows centred on columns 7 and 8 straddle the step: 2 of 14 columns.
  EXPECT_DOUBLE_EQ(h2, 2.0 / 14.0);
  EXPECT_EQ(edge_fraction(img.view(), kEdgeH1, 30), 0.0);
}

TEST(EdgeFraction, MatchesConvolutionOracle) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const auto img = testing_util::varied_patch(rng, 19, 23);
    for (const auto* k : {&kEdgeH1, &kEdgeH2, &kEdgeH3, &kEdgeH4}) {
      EXPECT_EQ(edge_fraction(img.view(), *k, 30), oracle::edge_fraction(img, k->coeff, 30)) << k->id;
    }
  }
}

TEST(EdgeFraction, InvariantUnderBrightnessShift) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    auto img = testing_util::varied_patch(rng, 16, 16);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(p / 2);
    auto shifted = img;
    for (auto& p : shifted.pixels) p = static_cast<std::uint8_t>(p + 100);
    for (const auto* k : {&kEdgeH1, &kEdgeH2, &kEdgeH3, &kEdgeH4}) {
      EXPECT_EQ(edge_fraction(img.view(), *k, 30), edge_fraction(shifted.view(), *k, 30));
    }
  }
}

TEST(EdgeFraction, KernelsSumToZero) {
  for (const auto* k : {&kEdgeH1, &kEdgeH2, &kEdgeH3, &kEdgeH4}) {
    int sum = 0;
    for (const auto& row : k->coeff) sum += std::accumulate(row.begin(), row.end(), 0);
    EXPECT_EQ(sum, 0) << k->id;
  }
}

TEST(EdgeFraction, TooSmallPatchThrows) {
  GrayImage img(2, 5);
  EXPECT_THROW(edge_fraction(img.view(), kEdgeH1, 30), std::invalid_argument);
}

TEST(NonzeroBinRate, KnownValues) {
  GrayImage flat(8, 8, 90);
  EXPECT_DOUBLE_EQ(nonzero_bin_rate(quantize_histogram(flat.view(), 32)), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(nonzero_bin_rate(hist_from(std::vector<std::uint32_t>(32, 3))), 1.0);
  auto eight = bins32();
  for (std::size_t i = 0; i < 8; ++i) eight[i * 4] = 2;
  EXPECT_DOUBLE_EQ(nonzero_bin_rate(hist_from(eight)), 0.25);
}

TEST(Moments, FirstMoment) {
  auto top = bins32();
  top[31] = 10;
  EXPECT_DOUBLE_EQ(first_moment(hist_from(top)), 1.0);
  auto bottom = bins32();
  bottom[0] = 10;
  EXPECT_DOUBLE_EQ(first_moment(hist_from(bottom)), 0.03125);
  auto half = bins32();
  half[0] = 5;
  half[31] = 5;
  EXPECT_DOUBLE_EQ(first_moment(hist_from(half)), 0.515625);
}

TEST(Moments, SecondMomentNormalized) {
  auto single = bins32();
  single[12] = 9;
  EXPECT_EQ(second_moment_normalized(hist_from(single)), 0.0);
  auto extremes = bins32();
  extremes[0] = 5;
  extremes[31] = 5;
  EXPECT_DOUBLE_EQ(second_moment_normalized(hist_from(extremes)), 1.0);
  auto skew = bins32();
  skew[0] = 1;
  skew[31] = 3;
  EXPECT_DOUBLE_EQ(second_moment_normalized(hist_from(skew)), 0.75);
}

TEST(Moments, InvariantUnderPixelPermutation) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 30; ++t) {
    auto img = testing_util::varied_patch(rng, 10, 10);
    auto shuffled = img;
    std::shuffle(shuffled.pixels.begin(), shuffled.pixels.end(), rng);
    const auto a = quantize_histogram(img.view(), 32);
    const auto b = quantize_histogram(shuffled.view(), 32);
    EXPECT_EQ(first_moment(a), first_moment(b));
    EXPECT_EQ(second_moment_normalized(a), second_moment_normalized(b));
  }
}

TEST(ExtractFeatures, ConstantPatch) {
  for (int v : {0, 7, 8, 100, 255}) {
    GrayImage img(12, 10, static_cast<std::uint8_t>(v));
    const auto f = extract_features(img.view());
    const FeatureVector expected{0.0, 1.0 / 32.0, 0.0, 0.0, 0.0, (v / 8 + 1) / 32.0, 0.0, 0.0};
    for (std::size_t i = 0; i < kFeatureDim; ++i) EXPECT_DOUBLE_EQ(f[i], expected[i]) << "slot " << i << " v " << v;
  }
}

TEST(ExtractFeatures, EqualsIndividualFeatures) {
  std::mt19937_64 rng(23);
  const auto img = testing_util::random_patch(rng, 32, 32);
  const auto f = extract_features(img.view());
  const auto h = quantize_histogram(img.view(), 32);
  EXPECT_EQ(f[0], max_local_entropy(img.view(), 2, 2, 32) / 5.0);
  EXPECT_EQ(f[1], nonzero_bin_rate(h));
  EXPECT_EQ(f[2], second_moment_normalized(h));
  EXPECT_EQ(f[3], edge_fraction(img.view(), kEdgeH4, 30));
  EXPECT_EQ(f[4], edge_fraction(img.view(), kEdgeH3, 30));
  EXPECT_EQ(f[5], first_moment(h));
  EXPECT_EQ(f[6], edge_fraction(img.view(), kEdgeH2, 30));
  EXPECT_EQ(f[7], edge_fraction(img.view(), kEdgeH1, 30));
}

TEST(ExtractFeatures, RangeAndSizeChecks) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 200; ++t) {
    const auto img = testing_util::varied_patch(rng, 8 + t % 30, 8 + t % 17);
    for (double v : extract_features(img.view())) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  GrayImage small(7, 20);
  EXPECT_THROW(extract_features(small.view()), std::invalid_argument);
}

TEST(FeatureVectorText, RoundTripsExactly) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    FeatureVector f;
    for (auto& v : f) v = u(rng);
    EXPECT_EQ(parse_feature_vector(format_feature_vector(f)), f);
  }
  EXPECT_THROW(parse_feature_vector("1,2,3"), std::invalid_argument);
  EXPECT_THROW(parse_feature_vector("1,2,3,4,5,6,7,x"), std::invalid_argument);
  EXPECT_THROW(parse_feature_vector("1,2,3,4,5,6,7,8,9"), std::invalid_argument);
}

TEST(FisherScore, HandValues) {
  const std::vector<double> a{0, 2};
  const std::vector<double> b{10, 12};
  EXPECT_DOUBLE_EQ(fisher_score(a, b), 50.0);
  EXPECT_EQ(fisher_score(a, a), 0.0);
}

TEST(FisherScore, DegenerateInputs) {
  const std::vector<double> c1{3, 3, 3};
  const std::vector<double> c2{5, 5};
  EXPECT_THROW(fisher_score(c1, c1), DegenerateInputError);
  EXPECT_TRUE(std::isinf(fisher_score(c1, c2)));
  const std::vector<double> one{1};
  EXPECT_THROW(fisher_score(one, c1), std::invalid_argument);
}

TEST(FisherScore, SymmetricAndShiftInvariant) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(20), b(30);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng) + 1.5;
    EXPECT_EQ(fisher_score(a, b), fisher_score(b, a));
    auto as = a, bs = b;
    for (auto& v : as) v += 7.25;
    for (auto& v : bs) v += 7.25;
    EXPECT_NEAR(fisher_score(as, bs), fisher_score(a, b), 1e-9 * (1.0 + fisher_score(a, b)));
  }
}
