#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magspec/counterexample.hpp"
#include "magspec/fields.hpp"
#include "magspec/grid.hpp"

namespace magspec {

/// Reads a whole file; ConfigError when it cannot be opened.
std::string read_text_file(const std::string& path);

/// A field document: either expressions {dim, V, a, B?, derivative_mode, h_fd, gauge_center}
/// or a counterexample {kind, B_values, radii, centers, transition_width}.
/// Optional sections "grid" and "sweep" travel with the field.
struct FieldDocument {
  FieldSpec spec;
  std::optional<CounterexampleFamily> family;
  std::optional<Grid> grid;
  std::string sweep_json;      // raw "sweep" section, empty if absent
  std::string canonical_json;  // field part only, key order preserved
};

FieldDocument parse_field_document(const std::string& json_text);
FieldDocument load_field_document(const std::string& path);

/// {origin, spacing, shape}.
Grid parse_grid_json(const std::string& json_text);
std::string grid_to_json(const Grid& grid);

/// "c1,c2[,c3]:r".
BallRegion parse_ball(const std::string& text, int dim);
/// Dimension implied by the center of "c1,c2[,c3]:r".
int ball_dim(const std::string& text);
Point parse_point(const std::string& text, int dim);
std::vector<double> parse_number_list(const std::string& text);

/// Counterexample document with a grid covering the patches plus one unit of margin.
std::string counterexample_json(const CounterexampleFamily& family, double spacing = 0.1);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

const char* tool_version();

}  // namespace magspec
