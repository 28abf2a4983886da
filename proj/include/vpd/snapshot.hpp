#pragma once

// Text snapshot of learned mixture models. Doubles are written with 17
// significant digits, so a write/read cycle restores every value bit for bit.
//
//   vpd-gmm-snapshot 1
//   dimension 8
//   models 1
//   model 0
//   samples 2000
//   component 0 vehicle
//   prior 0.4
//   mass 800
//   mean v1 ... v8
//   variance v1 ... v8
//   component 1 lane
//   ...

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpd/gmm.hpp"

namespace vpd {

inline constexpr int kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_exact(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || *end != '\0') throw SnapshotError("bad number '" + token + "' in snapshot");
  return v;
}

inline ClassTag parse_tag(const std::string& s) {
  if (s == "lane") return ClassTag::lane;
  if (s == "vehicle") return ClassTag::vehicle;
  if (s == "unassigned") return ClassTag::unassigned;
  throw SnapshotError("bad class tag '" + s + "' in snapshot");
}

class SnapshotReader {
public:
  explicit SnapshotReader(std::istream& in) : in_(in) {}

  // Next non-empty line split on whitespace; the first token must equal key.
  std::vector<std::string> expect(const std::string& key, std::size_t values) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (tokens.empty()) continue;
      if (tokens[0] != key || tokens.size() != values + 1) {
        throw SnapshotError("snapshot line " + std::to_string(line_) + ": expected '" + key + "' with " +
                            std::to_string(values) + " value(s)");
      }
      tokens.erase(tokens.begin());
      return tokens;
    }
    throw SnapshotError("snapshot truncated before '" + key + "'");
  }

private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace detail

template <std::size_t N>
void write_snapshot(std::ostream& out, const std::vector<GmmModel<N>>& models) {
  out << "vpd-gmm-snapshot " << kSnapshotVersion << "\n";
  out << "dimension " << N << "\n";
  out << "models " << models.size() << "\n";
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& model = models[k];
    out << "model " << k << "\n";
    out << "samples " << model.sample_count << "\n";
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& comp = model.components[c];
      out << "component " << c << ' ' << to_string(comp.tag) << "\n";
      out << "prior " << detail::exact(model.priors[c]) << "\n";
      out << "mass " << detail::exact(model.masses[c]) << "\n";
      out << "mean";
      for (double v : comp.mean) out << ' ' << detail::exact(v);
      out << "\nvariance";
      for (double v : comp.variance) out << ' ' << detail::exact(v);
      out << "\n";
    }
  }
  if (!out) throw SnapshotError("failed to write snapshot");
}

template <std::size_t N>
std::vector<GmmModel<N>> read_snapshot(std::istream& in) {
  detail::SnapshotReader reader(in);
  const auto version = reader.expect("vpd-gmm-snapshot", 1);
  if (version[0] != std::to_string(kSnapshotVersion)) {
    throw SnapshotError("unsupported snapshot version " + version[0]);
  }
  if (reader.expect("dimension", 1)[0] != std::to_string(N)) throw SnapshotError("snapshot dimension mismatch");
  const auto count = std::stoul(reader.expect("models", 1)[0]);
  std::vector<GmmModel<N>> models(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (reader.expect("model", 1)[0] != std::to_string(k)) throw SnapshotError("snapshot models out of order");
    auto& model = models[k];
    model.sample_count = std::stoull(reader.expect("samples", 1)[0]);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto header = reader.expect("component", 2);
      if (header[0] != std::to_string(c)) throw SnapshotError("snapshot components out of order");
      auto& comp = model.components[c];
      comp.tag = detail::parse_tag(header[1]);
      model.priors[c] = detail::parse_exact(reader.expect("prior", 1)[0]);
      model.masses[c] = detail::parse_exact(reader.expect("mass", 1)[0]);
      const auto mean = reader.expect("mean", N);
      const auto var = reader.expect("variance", N);
      for (std::size_t j = 0; j < N; ++j) {
        comp.mean[j] = detail::parse_exact(mean[j]);
        comp.variance[j] = detail::parse_exact(var[j]);
        if (!(comp.variance[j] > 0.0)) throw SnapshotError("snapshot variance must be positive");
      }
    }
  }
  return models;
}

}  // namespace vpd
