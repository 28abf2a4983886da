#pragma once

// Per-frame traffic status: occupancy bitmap and queue length per lane.
//
// Text form, one line per frame:
//   <timestamp_ms> <lane_id>:<bitmap>:<queue> [<lane_id>:<bitmap>:<queue> ...]
// The bitmap lists blocks from the stop line outward, '1' = vehicle.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vpd/detector.hpp"

namespace vpd {

// Length of the run of occupied blocks starting at the stop line; the first
// empty block ends the queue.
inline std::size_t queue_length(const std::vector<bool>& occupancy) {
  std::size_t n = 0;
  while (n < occupancy.size() && occupancy[n]) ++n;
  return n;
}

struct LaneStatus {
  std::string lane_id;
  std::vector<bool> occupancy;
  std::size_t queue_length = 0;
  friend bool operator==(const LaneStatus&, const LaneStatus&) = default;
};

struct TrafficStatusReport {
  std::int64_t timestamp_ms = 0;
  std::vector<LaneStatus> lanes;
  friend bool operator==(const TrafficStatusReport&, const TrafficStatusReport&) = default;
};

class ReportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Groups one frame's observations by lane, in the detector's lane order.
inline TrafficStatusReport make_report(const Detector& detector, std::int64_t timestamp_ms,
                                       const std::vector<BlockObservation>& observations) {
  if (detector.phase() != Phase::ready) throw StateError("reports need a trained detector");
  TrafficStatusReport report;
  report.timestamp_ms = timestamp_ms;
  for (std::size_t l = 0; l < detector.lanes().size(); ++l) {
    LaneStatus status;
    status.lane_id = detector.lanes()[l].lane_id;
    status.occupancy.assign(detector.blocks()[l].size(), false);
    report.lanes.push_back(std::move(status));
  }
  for (const auto& obs : observations) {
    for (std::size_t l = 0; l < detector.lanes().size(); ++l) {
      if (report.lanes[l].lane_id != obs.lane_id) continue;
      report.lanes[l].occupancy.at(obs.block_index) = obs.decision.label == BlockLabel::vehicle;
    }
  }
  for (auto& lane : report.lanes) lane.queue_length = queue_length(lane.occupancy);
  return report;
}

inline std::string format_report(const TrafficStatusReport& report) {
  std::string line = std::to_string(report.timestamp_ms);
  for (const auto& lane : report.lanes) {
    line += ' ';
    line += lane.lane_id;
    line += ':';
    for (bool b : lane.occupancy) line += b ? '1' : '0';
    line += ':';
    line += std::to_string(lane.queue_length);
  }
  return line;
}

inline TrafficStatusReport parse_report(std::string_view line) {
  std::istringstream in{std::string(line)};
  TrafficStatusReport report;
  std::string token;
  if (!(in >> token)) throw ReportError("empty report line");
  try {
    std::size_t used = 0;
    report.timestamp_ms = std::stoll(token, &used);
    if (used != token.size()) throw ReportError("bad timestamp '" + token + "'");
  } catch (const std::logic_error&) {
    throw ReportError("bad timestamp '" + token + "'");
  }
  while (in >> token) {
    const auto first = token.find(':');
    const auto second = token.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) throw ReportError("bad lane field '" + token + "'");
    LaneStatus lane;
    lane.lane_id = token.substr(0, first);
    for (char c : token.substr(first + 1, second - first - 1)) {
      if (c != '0' && c != '1') throw ReportError("bad occupancy in '" + token + "'");
      lane.occupancy.push_back(c == '1');
    }
    const auto queue = token.substr(second + 1);
    if (queue.empty() || queue.find_first_not_of("0123456789") != std::string::npos) {
      throw ReportError("bad queue length in '" + token + "'");
    }
    lane.queue_length = std::stoul(queue);
    if (lane.queue_length > lane.occupancy.size()) throw ReportError("queue longer than lane in '" + token + "'");
    report.lanes.push_back(std::move(lane));
  }
  return report;
}

// Writes one line per report and flushes it. Throws ReportError if the sink
// fails.
class ReportWriter {
public:
  explicit ReportWriter(std::ostream& out) : out_(out) {}

  void write(const TrafficStatusReport& report) {
    out_ << format_report(report) << '\n';
    out_.flush();
    if (!out_) throw ReportError("failed to write report");
    ++written_;
  }

  std::size_t written() const noexcept { return written_; }

private:
  std::ostream& out_;
  std::size_t written_ = 0;
};

}  // namespace vpd
