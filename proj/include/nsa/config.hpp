#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsa/potential.hpp"
#include "nsa/types.hpp"

namespace nsa::cli {

struct GridConfig {
  double half_width = 0.0;
  Index points = 0;
};

/// Tuning constants shared by the experiments: C bounds the spectral
/// search disc (|lambda| < C*h), a places the gap line Re z = a*h and is
/// the reference decay rate, delta is the half-width |Im z| <= delta*h
/// of the line sweep.
struct WindowConfig {
  double search_bound = 8.0;
  double reference_a = 2.0;
  double line_half_width = 5.0;
};

/// Projection contours: radius = radius_factor * h around each kept
/// eigenvalue, `nodes` quadrature points.
struct ContourConfig {
  double radius_factor = 0.5;
  int nodes = 32;
};

/// One experiment run, schema-validated: unknown keys anywhere in the
/// config file are rejected before any computation starts.
struct RunConfig {
  std::string experiment;  // model-spectrum | check-potential | eigs |
                           // resolvent-map | semigroup-decay | verify-all
  std::optional<potential::PotentialSpec> spec;
  std::optional<GridConfig> grid;
  std::vector<double> h_values;
  WindowConfig window;
  ContourConfig contour;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

/// Parses and validates a JSON config from text. Throws ConfigError on
/// malformed JSON, unknown keys, wrong types, bad values, or a section
/// missing for the requested experiment.
RunConfig parse_config(const std::string& text);

/// parse_config applied to a file. Throws ConfigError when unreadable.
RunConfig load_config(const std::string& path);

/// The full config with defaults filled in, as canonical JSON: embedded
/// in report.json so every run is self-describing and replayable.
std::string resolved_config_json(const RunConfig& config);

}  // namespace nsa::cli
