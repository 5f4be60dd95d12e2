#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rwpe/environment.hpp"

namespace rwpe {

struct ParseOptions {
  double tolerance = Environment::kDefaultTolerance;
  /// Divide each law by its sum instead of rejecting sums outside tolerance.
  bool renormalize = false;
};

/// Parses the JSON environment document
///   { "dims": [...], "sites": [ { "coord": [...], "jumps": [ { "step": [...],
///     "prob": <number | "p/q"> }, ... ] }, ... ] }
Environment parse_environment(std::string_view text, const ParseOptions& opts = {});

/// Sites and steps in lexicographic order; probabilities as "p/q" when they
/// were parsed from a rational, otherwise with 17 significant digits.
std::string serialize_environment(const Environment& env);

Environment load_environment(const std::filesystem::path& path,
                             const ParseOptions& opts = {});
void save_environment(const Environment& env, const std::filesystem::path& path);

}  // namespace rwpe
