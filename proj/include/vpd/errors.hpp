#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vpd {

// Malformed lane configuration text.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Well-formed configuration that violates a lane invariant.
class ValidationError : public std::runtime_error {
public:
  ValidationError(std::string lane_id, const std::string& what)
      : std::runtime_error("lane '" + lane_id + "': " + what), lane_id_(std::move(lane_id)) {}
  const std::string& lane_id() const noexcept { return lane_id_; }

private:
  std::string lane_id_;
};

class RasterizationError : public std::runtime_error {
public:
  RasterizationError(std::string lane_id, std::size_t block_index, const std::string& what)
      : std::runtime_error("lane '" + lane_id + "' block " + std::to_string(block_index) + ": " + what),
        lane_id_(std::move(lane_id)),
        block_index_(block_index) {}
  const std::string& lane_id() const noexcept { return lane_id_; }
  std::size_t block_index() const noexcept { return block_index_; }

private:
  std::string lane_id_;
  std::size_t block_index_;
};

// Input for which the requested statistic is meaningless (e.g. all points identical).
class DegenerateInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A mixture component lost (almost) all of its responsibility mass.
class ComponentCollapseError : public std::runtime_error {
public:
  ComponentCollapseError(std::size_t component, double mass)
      : std::runtime_error("mixture component " + std::to_string(component) +
                           " collapsed (mass " + std::to_string(mass) + ")"),
        component_(component) {}
  std::size_t component() const noexcept { return component_; }

private:
  std::size_t component_;
};

// The two mixture components cannot be told apart for class naming.
class AmbiguousTagError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class StreamError : public std::runtime_error {
public:
  StreamError(std::int64_t sequence, const std::string& what)
      : std::runtime_error("frame " + std::to_string(sequence) + ": " + what), sequence_(sequence) {}
  std::int64_t sequence() const noexcept { return sequence_; }

private:
  std::int64_t sequence_;
};

}  // namespace vpd
