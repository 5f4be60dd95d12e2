#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwpe/environment.hpp"
#include "rwpe/rng.hpp"

namespace rwpe {

/// Precomputed inverse-CDF tables for one environment.
///
/// Direct sampling draws the step at X_k from the lexicographically ordered
/// support of the law at X_k mod M. Two-stage sampling first draws the next
/// torus site from P and then the step from the law conditioned on landing in
/// that class.
class Sampler {
 public:
  explicit Sampler(const Environment& env);

  std::size_t dimension() const noexcept { return d_; }

  /// X_n started from X_0 = 0. When `path` is non-null it receives X_0..X_n.
  IntVec sample_trajectory(std::int64_t n, RngStream& rng,
                           std::vector<IntVec>* path = nullptr) const;
  IntVec sample_two_stage(std::int64_t n, RngStream& rng) const;

  /// Index of a step in the flat step table; exposed for first-passage loops.
  struct StepRef {
    std::size_t next_site;
    std::size_t step;
  };
  StepRef draw(std::size_t site, RngStream& rng) const;
  std::span<const std::int64_t> step(std::size_t flat) const {
    return {steps_.data() + flat * d_, d_};
  }
  std::size_t origin_site() const noexcept { return origin_; }
  std::size_t num_steps() const noexcept { return cdf_.size(); }

 private:
  std::size_t d_;
  std::size_t origin_;
  // Direct tables: site s owns entries [offset_[s], offset_[s+1]).
  std::vector<std::size_t> offset_;
  std::vector<double> cdf_;
  std::vector<std::int64_t> steps_;
  std::vector<std::size_t> next_;
  // Two-stage tables.
  std::vector<std::size_t> row_offset_;
  std::vector<double> row_cdf_;
  std::vector<std::size_t> row_target_;
  std::vector<std::size_t> cond_offset_;  // per row entry, into cond_cdf_
  std::vector<double> cond_cdf_;
  std::vector<std::size_t> cond_step_;  // flat step index
};

struct SimOptions {
  /// Worker threads; 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct TrajectoryStats {
  std::int64_t n_steps = 0;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  std::string generator{RngStream::kGeneratorName};
  Eigen::VectorXd nu_hat;
  Eigen::VectorXd nu_stderr;
  /// Empty unless produced by estimate_covariance.
  Eigen::MatrixXd sigma_hat;
  std::map<std::string, Estimate> extra;
};

/// Replica r uses RngStream(seed, r); results are merged in replica order so
/// the output does not depend on the thread count.
TrajectoryStats estimate_drift(const Environment& env, std::int64_t n,
                               std::int64_t replicas, std::uint64_t seed,
                               const SimOptions& opts = {});

/// Sample covariance of (X_n - n nu) / sqrt(n) across replicas (plus the
/// drift estimate from the same endpoints). Intended for n >= 1e3.
TrajectoryStats estimate_covariance(const Environment& env, std::int64_t n,
                                    std::int64_t replicas, std::uint64_t seed,
                                    const Eigen::VectorXd& nu,
                                    const SimOptions& opts = {});

struct HittingStats {
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  std::string generator{RngStream::kGeneratorName};
  std::int64_t hits_lower = 0;  // lower threshold crossed first
  std::int64_t hits_upper = 0;
  std::int64_t censored = 0;    // neither crossed within max_steps
  /// Fraction of uncensored replicas counted by the estimate, with binomial
  /// standard error.
  double estimate = 0.0;
  double std_error = 0.0;

  double censored_fraction() const {
    return replicas > 0 ? static_cast<double>(censored) / static_cast<double>(replicas) : 0.0;
  }
};

inline constexpr std::int64_t kDefaultMaxSteps = 10'000'000;

/// P(tau_{-k} < tau_k) with tau_{+-k} the first n at which <X_n, g1> reaches
/// +-k <g1, g1>. Half-space crossings stand in for the level sets L_{+-k}.
HittingStats hitting_probability(const Environment& env, const IntVec& g1,
                                 std::int64_t k, std::int64_t replicas,
                                 std::uint64_t seed,
                                 std::int64_t max_steps = kDefaultMaxSteps,
                                 const SimOptions& opts = {});

/// Exact probability that a 1-D nearest-neighbour walk started at `start`
/// reaches +K before -K (birth-death product formula, log-space).
double exit_probability_1d_exact(const Environment& env, std::int64_t K,
                                 std::int64_t start);

/// Monte Carlo counterpart of exit_probability_1d_exact: `estimate` is the
/// fraction of replicas reaching +K first.
HittingStats exit_frequency_1d(const Environment& env, std::int64_t K,
                               std::int64_t start, std::int64_t replicas,
                               std::uint64_t seed,
                               std::int64_t max_steps = kDefaultMaxSteps,
                               const SimOptions& opts = {});

}  // namespace rwpe
