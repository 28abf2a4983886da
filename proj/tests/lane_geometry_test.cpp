#include <gtest/gtest.h>

#include <random>
#include <string>

#include "vpd/lane_geometry.hpp"

using namespace vpd;

namespace {

const char* kTwoLanes = R"(# two approach lanes
lane left
quad 30,280 160,280 150,20 85,20
blocks 6
stopline front

lane right   # inline comment
quad 190,280 322,280 265,20 200,20
blocks 4
stopline rear
)";

LaneLayout lane_with(Quad quad, std::size_t blocks, StopLineEnd end = StopLineEnd::front) {
  return {"t", quad, blocks, end};
}

}  // namespace

TEST(ParseLaneConfig, TwoLanes) {
  const auto lanes = parse_lane_config(kTwoLanes, 352, 288);
  ASSERT_EQ(lanes.size(), 2u);
  EXPECT_EQ(lanes[0].lane_id, "left");
  EXPECT_EQ(lanes[0].quad[0], (Point{30, 280}));
  EXPECT_EQ(lanes[0].quad[3], (Point{85, 20}));
  EXPECT_EQ(lanes[0].block_count, 6u);
  EXPECT_EQ(lanes[0].stop_line_end, StopLineEnd::front);
  EXPECT_EQ(lanes[1].lane_id, "right");
  EXPECT_EQ(lanes[1].block_count, 4u);
  EXPECT_EQ(lanes[1].stop_line_end, StopLineEnd::rear);
}

TEST(ParseLaneConfig, FormatRoundTrip) {
  const auto lanes = parse_lane_config(kTwoLanes, 352, 288);
  EXPECT_EQ(parse_lane_config(format_lane_config(lanes), 352, 288), lanes);
}

TEST(ParseLaneConfig, OutOfFramePointIsValidationError) {
  const std::string text = "lane a\nquad 400,100 420,100 420,200 400,200\nblocks 2\nstopline front\n";
  try {
    parse_lane_config(text, 352, 288);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.lane_id(), "a");
  }
}

TEST(ParseLaneConfig, ZeroBlocksIsValidationError) {
  EXPECT_THROW(parse_lane_config("lane a\nquad 10,10 50,10 50,90 10,90\nblocks 0\nstopline front\n", 352, 288),
               ValidationError);
}

TEST(ParseLaneConfig, SyntaxErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_lane_config(text, 352, 288);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("lane a\nquad 1,2 3,4 5\nblocks 1\nstopline front\n"), 2u);
  EXPECT_EQ(line_of("# c\n\nblocks 3\n"), 3u);
  EXPECT_EQ(line_of("lane a\nquad 10,10 50,10 50,90 10,90\nblocks x\n"), 3u);
  EXPECT_EQ(line_of("lane a\nquad 10,10 50,10 50,90 10,90\nblocks 2\nstopline middle\n"), 4u);
  EXPECT_EQ(line_of("lane a\nquad 10,10 50,10 50,90 10,90\nblocks 2\n"), 1u);
  EXPECT_EQ(line_of("lane a\nquad 10,10 50,10 50,90 10,90\nblocks 2\nstopline front\ncolor red\n"), 5u);
  EXPECT_EQ(line_of("lane a\nquad 10,10 50,10 50,90 10,90\nblocks 2\nstopline front\nlane a\n"), 5u);
  EXPECT_EQ(line_of("lane a:b\n"), 1u);
}

TEST(ValidateLane, RejectsSelfIntersectingQuad) {
  const auto bowtie = lane_with({{{10, 10}, {90, 90}, {90, 10}, {10, 90}}}, 2);
  EXPECT_THROW(validate_lane(bowtie, 352, 288), ValidationError);
  const auto dart = lane_with({{{10, 10}, {90, 10}, {50, 30}, {50, 90}}}, 2);
  EXPECT_THROW(validate_lane(dart, 352, 288), ValidationError);
}

TEST(RasterizeBlocks, AxisAlignedRectangle) {
  const auto blocks = rasterize_blocks(lane_with({{{60, 100}, {120, 100}, {120, 220}, {60, 220}}}, 3), 352, 288);
  ASSERT_EQ(blocks.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(blocks[i], (BlockRect{60, 100 + 40 * static_cast<int>(i), 60, 40, i}));
  }
}

TEST(RasterizeBlocks, RearStopLineReversesIndices) {
  const auto blocks =
      rasterize_blocks(lane_with({{{60, 100}, {120, 100}, {120, 220}, {60, 220}}}, 3, StopLineEnd::rear), 352, 288);
  EXPECT_EQ(blocks[0].y, 180);
  EXPECT_EQ(blocks[2].y, 100);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(blocks[i].index, i);
}

TEST(RasterizeBlocks, TrapezoidFrontWiderThanRear) {
  const auto blocks = rasterize_blocks(lane_with({{{50, 200}, {150, 200}, {125, 100}, {75, 100}}}, 2), 352, 288);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_GT(blocks[0].width, blocks[1].width);
}

TEST(RasterizeBlocks, TooShortSlicesFail) {
  try {
    rasterize_blocks(lane_with({{{50, 100}, {150, 100}, {150, 120}, {50, 120}}}, 4), 352, 288);
    FAIL() << "expected RasterizationError";
  } catch (const RasterizationError& e) {
    EXPECT_EQ(e.block_index(), 0u);
  }
}

TEST(RasterizeBlocks, RandomTrapezoidProperties) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const double front_y = 200 + 80 * u(rng);
    const double rear_y = 10 + 100 * u(rng);
    const double cx = 100 + 150 * u(rng);
    const double front_half = 30 + 60 * u(rng);
    const double rear_half = 10 + front_half * 0.8 * u(rng);
    const double skew = -40 + 80 * u(rng);
    LaneLayout lane{"p",
                    {{{cx - front_half, front_y}, {cx + front_half, front_y}, {cx + skew + rear_half, rear_y},
                      {cx + skew - rear_half, rear_y}}},
                    static_cast<std::size_t>(1 + t % 7),
                    StopLineEnd::front};
    std::vector<BlockRect> blocks;
    try {
      blocks = rasterize_blocks(lane, 352, 288);
    } catch (const ValidationError&) {
      continue;
    } catch (const RasterizationError&) {
      continue;
    }
    ++checked;
    ASSERT_EQ(blocks.size(), lane.block_count);
    double minx = 1e9, maxx = -1e9, miny = 1e9, maxy = -1e9;
    for (const auto& p : lane.quad) {
      minx = std::min(minx, p.x);
      maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y);
      maxy = std::max(maxy, p.y);
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      EXPECT_EQ(b.index, i);
      EXPECT_GE(b.width, kMinBlockSide);
      EXPECT_GE(b.height, kMinBlockSide);
      EXPECT_GE(b.x, minx);
      EXPECT_LE(b.x + b.width, maxx + 1e-9);
      EXPECT_GE(b.y, miny);
      EXPECT_LE(b.y + b.height, maxy + 1e-9);
      // Front is at the bottom here, so blocks climb the image.
      if (i > 0) {
        EXPECT_LE(b.y + b.height, blocks[i - 1].y);
      }
      if (i > 0 && skew == 0.0) {
        EXPECT_LE(b.width, blocks[i - 1].width);
      }
    }
    double slice_total = 0.0;
    for (const auto& s : lane_slices(lane)) {
      slice_total += std::hypot((s[2].x + s[3].x) / 2 - (s[0].x + s[1].x) / 2, (s[2].y + s[3].y) / 2 - (s[0].y + s[1].y) / 2);
    }
    EXPECT_NEAR(slice_total, lane_axis_length(lane), static_cast<double>(lane.block_count));
    EXPECT_EQ(rasterize_blocks(lane, 352, 288), blocks);
  }
  EXPECT_GT(checked, 100);
}

TEST(RasterizeBlocks, SymmetricTrapezoidWidthsNonIncreasing) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto blocks = rasterize_blocks(lane_with({{{40, 280}, {200, 280}, {150, 20}, {90, 20}}}, n), 352, 288);
    for (std::size_t i = 1; i < n; ++i) EXPECT_LE(blocks[i].width, blocks[i - 1].width) << n;
  }
}
