#pragma once

// Grayscale frame sources and frame-rate downsampling.
//
// Two input forms: a raw stream of 8-bit luma planes (one byte per pixel,
// row-major, no headers) and a directory of PGM/PPM files read in lexical
// filename order. Color PPM input is reduced to luma on load.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "vpd/errors.hpp"
#include "vpd/features.hpp"

namespace vpd {

struct Frame {
  GrayImage image;
  std::int64_t timestamp_ms = 0;
  std::int64_t sequence = 0;
};

inline std::int64_t frame_timestamp_ms(std::int64_t sequence, double fps) {
  return static_cast<std::int64_t>(static_cast<double>(sequence) * 1000.0 / fps);
}

class FrameSource {
public:
  virtual ~FrameSource() = default;
  // Next frame, or nullopt at a clean end of stream.
  virtual std::optional<Frame> next() = 0;
};

class RawFrameReader : public FrameSource {
public:
  RawFrameReader(std::istream& in, int width, int height, double fps, std::int64_t first_sequence = 0)
      : in_(in), width_(width), height_(height), fps_(fps), sequence_(first_sequence) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("frame size must be positive");
    if (!(fps > 0.0)) throw std::invalid_argument("frame rate must be positive");
  }

  std::optional<Frame> next() override {
    Frame frame;
    frame.image = GrayImage(width_, height_);
    auto& buf = frame.image.pixels;
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0 && in_.eof()) return std::nullopt;
    if (got != buf.size()) {
      throw StreamError(sequence_, "truncated frame payload: " + std::to_string(got) + " of " +
                                       std::to_string(buf.size()) + " bytes");
    }
    frame.sequence = sequence_;
    frame.timestamp_ms = frame_timestamp_ms(sequence_, fps_);
    ++sequence_;
    return frame;
  }

private:
  std::istream& in_;
  int width_;
  int height_;
  double fps_;
  std::int64_t sequence_;
};

namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace detail

// Reads a binary (P5) or ASCII (P2) graymap, or a binary color pixmap (P6)
// reduced to luma. Only maxval <= 255 is accepted.
inline GrayImage read_pnm(std::istream& in) {
  const std::string magic = detail::pnm_token(in);
  if (magic != "P5" && magic != "P2" && magic != "P6") throw std::runtime_error("not a P2/P5/P6 image");
  const int width = std::stoi(detail::pnm_token(in));
  const int height = std::stoi(detail::pnm_token(in));
  const int maxval = std::stoi(detail::pnm_token(in));
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported PNM header");
  GrayImage img(width, height);
  const auto count = img.pixels.size();
  auto scale = [maxval](int v) { return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval); };
  if (magic == "P2") {
    for (auto& px : img.pixels) {
      const auto token = detail::pnm_token(in);
      if (token.empty()) throw std::runtime_error("truncated P2 payload");
      px = scale(std::clamp(std::stoi(token), 0, maxval));
    }
  } else if (magic == "P5") {
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) throw std::runtime_error("truncated P5 payload");
    if (maxval != 255) for (auto& px : img.pixels) px = scale(std::min<int>(px, maxval));
  } else {
    std::vector<std::uint8_t> rgb(count * 3);
    in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (static_cast<std::size_t>(in.gcount()) != rgb.size()) throw std::runtime_error("truncated P6 payload");
    for (std::size_t i = 0; i < count; ++i) {
      const int luma = (299 * rgb[3 * i] + 587 * rgb[3 * i + 1] + 114 * rgb[3 * i + 2] + 500) / 1000;
      img.pixels[i] = scale(std::min(luma, maxval));
    }
  }
  return img;
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

class PnmDirectoryReader : public FrameSource {
public:
  PnmDirectoryReader(const std::filesystem::path& dir, int width, int height, double fps,
                     std::int64_t first_sequence = 0)
      : width_(width), height_(height), fps_(fps), sequence_(first_sequence) {
    if (!std::filesystem::is_directory(dir)) throw StreamError(first_sequence, "not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files_.push_back(entry.path());
    }
    std::sort(files_.begin(), files_.end());
  }

  std::optional<Frame> next() override {
    if (index_ >= files_.size()) return std::nullopt;
    const auto& path = files_[index_++];
    Frame frame;
    try {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open");
      frame.image = read_pnm(in);
    } catch (const std::exception& e) {
      throw StreamError(sequence_, path.filename().string() + ": " + e.what());
    }
    if (frame.image.width != width_ || frame.image.height != height_) {
      throw StreamError(sequence_, path.filename().string() + ": expected " + std::to_string(width_) + "x" +
                                       std::to_string(height_) + " frame");
    }
    frame.sequence = sequence_;
    frame.timestamp_ms = frame_timestamp_ms(sequence_, fps_);
    ++sequence_;
    return frame;
  }

  std::size_t size() const noexcept { return files_.size(); }

private:
  std::vector<std::filesystem::path> files_;
  std::size_t index_ = 0;
  int width_;
  int height_;
  double fps_;
  std::int64_t sequence_;
};

// Keeps every floor(source/target)-th frame, phase fixed at sequence 0.
class Downsampler {
public:
  Downsampler(double source_fps, double target_fps) {
    if (!(target_fps > 0.0) || source_fps < target_fps) {
      throw std::invalid_argument("need source fps >= target fps > 0");
    }
    ratio_ = static_cast<std::int64_t>(source_fps / target_fps);
  }

  std::int64_t ratio() const noexcept { return ratio_; }

  bool keep(const Frame& frame) {
    if (last_ && frame.sequence <= *last_) {
      throw StreamError(frame.sequence, "sequence number not increasing (previous " + std::to_string(*last_) + ")");
    }
    last_ = frame.sequence;
    return frame.sequence % ratio_ == 0;
  }

private:
  std::int64_t ratio_ = 1;
  std::optional<std::int64_t> last_;
};

// Pulls frames from a source and yields only the ones the downsampler keeps.
class DownsampledSource : public FrameSource {
public:
  DownsampledSource(FrameSource& source, double source_fps, double target_fps)
      : source_(source), sampler_(source_fps, target_fps) {}

  std::optional<Frame> next() override {
    while (auto frame = source_.next()) {
      if (sampler_.keep(*frame)) return frame;
    }
    return std::nullopt;
  }

private:
  FrameSource& source_;
  Downsampler sampler_;
};

}  // namespace vpd
