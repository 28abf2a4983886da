#pragma once

// Lane outlines and their rasterization into rectangular detection blocks.
//
// A lane is declared as a convex quadrilateral (usually a trapezoid, since
// perspective narrows the lane away from the camera). Its two side edges are
// cut into block_count equal steps; each resulting slice contributes the
// largest axis-aligned rectangle with integer corners that fits inside it.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vpd/errors.hpp"

namespace vpd {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class StopLineEnd { front, rear };

inline constexpr int kMinBlockSide = 8;

struct LaneLayout {
  std::string lane_id;
  // front-left, front-right, rear-right, rear-left
  std::array<Point, 4> quad{};
  std::size_t block_count = 1;
  StopLineEnd stop_line_end = StopLineEnd::front;
  friend bool operator==(const LaneLayout&, const LaneLayout&) = default;
};

// Pixel rectangle [x, x+width) x [y, y+height). index 0 abuts the stop line.
struct BlockRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  std::size_t index = 0;
  friend bool operator==(const BlockRect&, const BlockRect&) = default;
};

using Quad = std::array<Point, 4>;

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline Point lerp(const Point& a, const Point& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

inline Point midpoint(const Point& a, const Point& b) { return lerp(a, b, 0.5); }

inline double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Horizontal chord [left, right] of a convex polygon at height y.
inline std::optional<std::pair<double, double>> chord(const Quad& poly, double y) {
  double left = std::numeric_limits<double>::infinity();
  double right = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const double lo = std::min(a.y, b.y);
    const double hi = std::max(a.y, b.y);
    if (y < lo || y > hi) continue;
    if (a.y == b.y) {
      left = std::min({left, a.x, b.x});
      right = std::max({right, a.x, b.x});
    } else {
      const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      left = std::min(left, x);
      right = std::max(right, x);
    }
  }
  if (left > right) return std::nullopt;
  return std::make_pair(left, right);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline bool valid_lane_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

}  // namespace detail

// Throws ValidationError if the lane violates a LaneLayout invariant for a
// frame of the given size.
inline void validate_lane(const LaneLayout& lane, int frame_w, int frame_h) {
  if (!detail::valid_lane_id(lane.lane_id)) {
    throw ValidationError(lane.lane_id, "lane id must be non-empty and use [A-Za-z0-9_.-]");
  }
  if (lane.block_count < 1) throw ValidationError(lane.lane_id, "block count must be at least 1");
  for (const Point& p : lane.quad) {
    if (!(p.x >= 0.0 && p.x < frame_w && p.y >= 0.0 && p.y < frame_h)) {
      std::ostringstream os;
      os << "quad point (" << p.x << ", " << p.y << ") outside " << frame_w << "x" << frame_h << " frame";
      throw ValidationError(lane.lane_id, os.str());
    }
  }
  // Same-sign turns at all four corners: convex, hence simple.
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double c = detail::cross(lane.quad[i], lane.quad[(i + 1) % 4], lane.quad[(i + 2) % 4]);
    const int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw ValidationError(lane.lane_id, "quad must be a convex, non-self-intersecting quadrilateral");
    }
    sign = s;
  }
}

// Parses the lane configuration format:
//
//   # comment
//   lane <id>
//   quad x1,y1 x2,y2 x3,y3 x4,y4     (front-left front-right rear-right rear-left)
//   blocks <n>
//   stopline front|rear
//
// Every lane needs all four keys. Blank lines and text after '#' are ignored.
inline std::vector<LaneLayout> parse_lane_config(std::string_view text, int frame_w, int frame_h) {
  struct Pending {
    LaneLayout lane;
    std::size_t line = 0;
    bool has_quad = false;
    bool has_blocks = false;
    bool has_stopline = false;
  };
  std::vector<LaneLayout> lanes;
  std::optional<Pending> current;

  auto finish = [&]() {
    if (!current) return;
    const char* missing = !current->has_quad ? "quad" : !current->has_blocks ? "blocks"
                        : !current->has_stopline ? "stopline" : nullptr;
    if (missing) {
      throw ParseError(current->line, "lane '" + current->lane.lane_id + "' is missing '" + missing + "'");
    }
    lanes.push_back(current->lane);
    current.reset();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto tokens = detail::split_ws(line);
    const std::string_view key = tokens.front();
    if (key == "lane") {
      if (tokens.size() != 2) throw ParseError(line_no, "expected 'lane <id>'");
      finish();
      current.emplace();
      current->lane.lane_id = std::string(tokens[1]);
      current->line = line_no;
      if (!detail::valid_lane_id(tokens[1])) {
        throw ParseError(line_no, "lane id '" + std::string(tokens[1]) + "' must use [A-Za-z0-9_.-]");
      }
      for (const auto& other : lanes) {
        if (other.lane_id == current->lane.lane_id) {
          throw ParseError(line_no, "duplicate lane id '" + other.lane_id + "'");
        }
      }
      continue;
    }
    if (!current) throw ParseError(line_no, "'" + std::string(key) + "' outside of a lane record");

    if (key == "quad") {
      if (current->has_quad) throw ParseError(line_no, "duplicate 'quad'");
      if (tokens.size() != 5) throw ParseError(line_no, "expected 'quad x1,y1 x2,y2 x3,y3 x4,y4'");
      for (std::size_t i = 0; i < 4; ++i) {
        const auto tok = tokens[i + 1];
        const auto comma = tok.find(',');
        if (comma == std::string_view::npos) throw ParseError(line_no, "point '" + std::string(tok) + "' is not x,y");
        const auto x = detail::parse_number<double>(tok.substr(0, comma));
        const auto y = detail::parse_number<double>(tok.substr(comma + 1));
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
          throw ParseError(line_no, "point '" + std::string(tok) + "' is not numeric");
        }
        current->lane.quad[i] = {*x, *y};
      }
      current->has_quad = true;
    } else if (key == "blocks") {
      if (current->has_blocks) throw ParseError(line_no, "duplicate 'blocks'");
      if (tokens.size() != 2) throw ParseError(line_no, "expected 'blocks <n>'");
      const auto n = detail::parse_number<long long>(tokens[1]);
      if (!n) throw ParseError(line_no, "block count '" + std::string(tokens[1]) + "' is not an integer");
      if (*n < 1) throw ValidationError(current->lane.lane_id, "block count must be at least 1");
      current->lane.block_count = static_cast<std::size_t>(*n);
      current->has_blocks = true;
    } else if (key == "stopline") {
      if (current->has_stopline) throw ParseError(line_no, "duplicate 'stopline'");
      if (tokens.size() != 2 || (tokens[1] != "front" && tokens[1] != "rear")) {
        throw ParseError(line_no, "expected 'stopline front|rear'");
      }
      current->lane.stop_line_end = tokens[1] == "front" ? StopLineEnd::front : StopLineEnd::rear;
      current->has_stopline = true;
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  finish();

  for (const auto& lane : lanes) validate_lane(lane, frame_w, frame_h);
  return lanes;
}

inline std::string format_lane_config(const std::vector<LaneLayout>& lanes) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& lane : lanes) {
    os << "lane " << lane.lane_id << "\nquad";
    for (const auto& p : lane.quad) os << ' ' << p.x << ',' << p.y;
    os << "\nblocks " << lane.block_count << "\nstopline "
       << (lane.stop_line_end == StopLineEnd::front ? "front" : "rear") << "\n\n";
  }
  return os.str();
}

// Slice k spans parameter [k/n, (k+1)/n] along both side edges, front to rear.
inline std::vector<Quad> lane_slices(const LaneLayout& lane) {
  const auto& q = lane.quad;
  const auto n = lane.block_count;
  std::vector<Quad> slices;
  slices.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) / static_cast<double>(n);
    const double t1 = static_cast<double>(k + 1) / static_cast<double>(n);
    slices.push_back({detail::lerp(q[0], q[3], t0), detail::lerp(q[1], q[2], t0),
                      detail::lerp(q[1], q[2], t1), detail::lerp(q[0], q[3], t1)});
  }
  return slices;
}

// Distance between the midpoints of the front and rear edges.
inline double lane_axis_length(const LaneLayout& lane) {
  return detail::distance(detail::midpoint(lane.quad[0], lane.quad[1]), detail::midpoint(lane.quad[3], lane.quad[2]));
}

// Largest axis-aligned rectangle with integer corners inside a convex
// polygon, subject to the minimum side length. For a convex polygon the
// chords at the top and bottom rows bound every chord in between.
inline std::optional<BlockRect> largest_inscribed_rect(const Quad& poly, int min_side = kMinBlockSide) {
  constexpr double eps = 1e-9;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row_first = static_cast<int>(std::ceil(ymin - eps));
  const int row_last = static_cast<int>(std::floor(ymax + eps));
  if (row_last < row_first) return std::nullopt;

  std::vector<std::optional<std::pair<double, double>>> chords;
  chords.reserve(static_cast<std::size_t>(row_last - row_first + 1));
  for (int y = row_first; y <= row_last; ++y) {
    // Clamp so rows on a vertex just outside by rounding still intersect.
    chords.push_back(detail::chord(poly, std::clamp(static_cast<double>(y), ymin, ymax)));
  }

  std::optional<BlockRect> best;
  long long best_area = 0;
  for (int top = row_first; top <= row_last; ++top) {
    const auto& c0 = chords[static_cast<std::size_t>(top - row_first)];
    if (!c0) continue;
    for (int bottom = top + min_side; bottom <= row_last; ++bottom) {
      const auto& c1 = chords[static_cast<std::size_t>(bottom - row_first)];
      if (!c1) continue;
      const double left = std::max(c0->first, c1->first);
      const double right = std::min(c0->second, c1->second);
      const int xl = static_cast<int>(std::ceil(left - eps));
      const int xr = static_cast<int>(std::floor(right + eps));
      const int width = xr - xl;
      if (width < min_side) continue;
      const long long area = static_cast<long long>(width) * (bottom - top);
      if (area > best_area) {
        best_area = area;
        best = BlockRect{xl, top, width, bottom - top, 0};
      }
    }
  }
  return best;
}

// Splits a lane into block_count rectangles ordered from the stop line.
// Throws RasterizationError if some slice cannot hold an 8x8 block.
inline std::vector<BlockRect> rasterize_blocks(const LaneLayout& lane, int frame_w, int frame_h) {
  validate_lane(lane, frame_w, frame_h);
  const auto slices = lane_slices(lane);
  const std::size_t n = slices.size();
  std::vector<BlockRect> blocks(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t index = lane.stop_line_end == StopLineEnd::front ? k : n - 1 - k;
    auto rect = largest_inscribed_rect(slices[k]);
    if (!rect) {
      throw RasterizationError(lane.lane_id, index,
                               "slice cannot hold a " + std::to_string(kMinBlockSide) + "x" +
                                   std::to_string(kMinBlockSide) + " block");
    }
    rect->index = index;
    if (rect->x < 0 || rect->y < 0 || rect->x + rect->width > frame_w || rect->y + rect->height > frame_h) {
      throw RasterizationError(lane.lane_id, index, "block leaves the frame");
    }
    blocks[index] = *rect;
  }
  return blocks;
}

}  // namespace vpd
