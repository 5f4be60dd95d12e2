#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace rwpe::cli {

enum class OutputFormat { human, structured };

/// Everything that determines a run. Echoed into every report.
struct RunConfig {
  std::string subcommand;
  std::string env_path;
  std::uint64_t seed = 0;
  std::int64_t replicas = 1000;
  std::int64_t steps = 10000;
  std::int64_t k = 5;
  std::int64_t max_denominator = 20;
  std::int64_t max_steps = 10'000'000;
  std::int64_t start = 0;
  double K = 2.0;
  double epsilon = 0.1;
  std::string out_path;
  bool renormalize = false;
  bool covariance = false;
  bool show_chain = false;
  OutputFormat format = OutputFormat::human;
  /// Worker threads for the simulator (0 = all cores). Not part of the echoed
  /// config: results do not depend on it.
  unsigned threads = 0;
};

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitError = 3;

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to run().
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rwpe::cli
