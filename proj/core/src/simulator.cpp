#include "rwpe/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "rwpe/induced_chain.hpp"

namespace rwpe {

namespace {

// First index in [begin, end) with u < cdf[index]; the last entry absorbs
// rounding at the top of the table.
std::size_t search(const std::vector<double>& cdf, std::size_t begin, std::size_t end, double u) {
  for (std::size_t k = begin; k + 1 < end; ++k)
    if (u < cdf[k]) return k;
  return end - 1;
}

unsigned worker_count(const SimOptions& opts, std::int64_t replicas) {
  unsigned n = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  if (static_cast<std::int64_t>(n) > replicas) n = static_cast<unsigned>(std::max<std::int64_t>(replicas, 1));
  return n;
}

// Calls body(r) once for every replica r; results must be written to slot r.
template <class Body>
void for_each_replica(std::int64_t replicas, const SimOptions& opts, Body&& body) {
  const unsigned workers = worker_count(opts, replicas);
  if (workers <= 1) {
    for (std::int64_t r = 0; r < replicas; ++r) body(r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::int64_t r = next++; r < replicas; r = next++) body(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = replicas;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<IntVec> endpoints(const Sampler& sampler, std::int64_t n, std::int64_t replicas,
                              std::uint64_t seed, const SimOptions& opts) {
  std::vector<IntVec> out(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, opts, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    out[static_cast<std::size_t>(r)] = sampler.sample_trajectory(n, rng);
  });
  return out;
}

void fill_drift(TrajectoryStats& stats, const std::vector<IntVec>& ends, std::size_t d) {
  const auto R = static_cast<double>(ends.size());
  const auto n = static_cast<double>(stats.n_steps);
  stats.nu_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  stats.nu_stderr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& x : ends)
    for (std::size_t i = 0; i < d; ++i) stats.nu_hat(static_cast<Eigen::Index>(i)) += static_cast<double>(x[i]) / n;
  stats.nu_hat /= R;
  for (const auto& x : ends)
    for (std::size_t i = 0; i < d; ++i) {
      const double dev = static_cast<double>(x[i]) / n - stats.nu_hat(static_cast<Eigen::Index>(i));
      stats.nu_stderr(static_cast<Eigen::Index>(i)) += dev * dev;
    }
  for (Eigen::Index i = 0; i < stats.nu_stderr.size(); ++i)
    stats.nu_stderr(i) = std::sqrt(stats.nu_stderr(i) / (R - 1.0)) / std::sqrt(R);
}

void check_replica_args(std::int64_t n, std::int64_t replicas) {
  if (n < 1) throw Error(ErrorCode::parameter_domain, "number of steps must be >= 1");
  if (replicas < 2) throw Error(ErrorCode::parameter_domain, "at least two replicas are required");
}

enum class Outcome : std::uint8_t { lower, upper, censored };

HittingStats summarize(const std::vector<Outcome>& outcomes, std::uint64_t seed, bool count_lower) {
  HittingStats s;
  s.replicas = static_cast<std::int64_t>(outcomes.size());
  s.seed = seed;
  for (auto o : outcomes) {
    if (o == Outcome::lower) ++s.hits_lower;
    else if (o == Outcome::upper) ++s.hits_upper;
    else ++s.censored;
  }
  const std::int64_t done = s.hits_lower + s.hits_upper;
  if (done == 0) throw Error(ErrorCode::all_censored, "every replica hit max_steps; increase it");
  const double p = static_cast<double>(count_lower ? s.hits_lower : s.hits_upper) / static_cast<double>(done);
  s.estimate = p;
  s.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(done));
  return s;
}

// Runs a scalar first-passage walk: level starts at `start` and moves by
// increment[step]; stops at level >= upper or level <= lower.
std::vector<Outcome> first_passage(const Sampler& sampler, const std::vector<std::int64_t>& increment,
                                   std::size_t start_site, std::int64_t start, std::int64_t lower,
                                   std::int64_t upper, std::int64_t replicas, std::uint64_t seed,
                                   std::int64_t max_steps, const SimOptions& opts) {
  std::vector<Outcome> outcomes(static_cast<std::size_t>(replicas), Outcome::censored);
  for_each_replica(replicas, opts, [&](std::int64_t r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    std::size_t site = start_site;
    std::int64_t level = start;
    for (std::int64_t t = 0; t < max_steps; ++t) {
      const auto ref = sampler.draw(site, rng);
      level += increment[ref.step];
      site = ref.next_site;
      if (level >= upper) {
        outcomes[static_cast<std::size_t>(r)] = Outcome::upper;
        return;
      }
      if (level <= lower) {
        outcomes[static_cast<std::size_t>(r)] = Outcome::lower;
        return;
      }
    }
  });
  return outcomes;
}

void require_1d_nearest_neighbour(const Environment& env) {
  if (env.dimension() != 1) throw Error(ErrorCode::not_one_dimensional, "environment must be one-dimensional");
  if (!env.nearest_neighbour())
    throw Error(ErrorCode::not_nearest_neighbour, "environment must be nearest-neighbour");
}

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

Sampler::Sampler(const Environment& env) : d_(env.dimension()) {
  const auto& dims = env.dims();
  const std::size_t n = env.num_sites();
  origin_ = dims.index_of(IntVec(d_, 0));

  std::vector<IntVec> site_coords(n);
  offset_.push_back(0);
  for (std::size_t s = 0; s < n; ++s) {
    site_coords[s] = dims.coords(s);
    const auto& law = env.law(s);
    const double total = law.total();
    double acc = 0.0;
    for (const auto& j : law.jumps()) {
      acc += j.prob / total;
      cdf_.push_back(acc);
      steps_.insert(steps_.end(), j.step.begin(), j.step.end());
      IntVec y = site_coords[s];
      for (std::size_t i = 0; i < d_; ++i) y[i] += j.step[i];
      next_.push_back(dims.index_of(y));
    }
    cdf_.back() = 1.0;
    offset_.push_back(cdf_.size());
  }

  // Two-stage tables: row x of P, then per (x, y) the steps landing in y.
  row_offset_.push_back(0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> mass(n, 0.0);
    for (std::size_t k = offset_[s]; k < offset_[s + 1]; ++k)
      mass[next_[k]] += cdf_[k] - (k == offset_[s] ? 0.0 : cdf_[k - 1]);
    const double total = env.law(s).total();
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (mass[y] == 0.0) continue;
      acc += mass[y];
      row_cdf_.push_back(acc);
      row_target_.push_back(y);
      cond_offset_.push_back(cond_cdf_.size());
      double cacc = 0.0;
      for (std::size_t k = offset_[s]; k < offset_[s + 1]; ++k) {
        if (next_[k] != y) continue;
        cacc += env.law(s).jumps()[k - offset_[s]].prob / total / mass[y];
        cond_cdf_.push_back(cacc);
        cond_step_.push_back(k);
      }
      cond_cdf_.back() = 1.0;
    }
    row_cdf_.back() = 1.0;
    row_offset_.push_back(row_cdf_.size());
  }
  cond_offset_.push_back(cond_cdf_.size());
}

Sampler::StepRef Sampler::draw(std::size_t site, RngStream& rng) const {
  const std::size_t k = search(cdf_, offset_[site], offset_[site + 1], rng.uniform());
  return {next_[k], k};
}

IntVec Sampler::sample_trajectory(std::int64_t n, RngStream& rng, std::vector<IntVec>* path) const {
  IntVec x(d_, 0);
  std::size_t site = origin_;
  if (path) {
    path->clear();
    path->push_back(x);
  }
  for (std::int64_t t = 0; t < n; ++t) {
    const auto ref = draw(site, rng);
    const std::int64_t* w = steps_.data() + ref.step * d_;
    for (std::size_t i = 0; i < d_; ++i) x[i] += w[i];
    site = ref.next_site;
    if (path) path->push_back(x);
  }
  return x;
}

IntVec Sampler::sample_two_stage(std::int64_t n, RngStream& rng) const {
  IntVec x(d_, 0);
  std::size_t site = origin_;
  for (std::int64_t t = 0; t < n; ++t) {
    const std::size_t row = search(row_cdf_, row_offset_[site], row_offset_[site + 1], rng.uniform());
    const std::size_t c = search(cond_cdf_, cond_offset_[row], cond_offset_[row + 1], rng.uniform());
    const std::int64_t* w = steps_.data() + cond_step_[c] * d_;
    for (std::size_t i = 0; i < d_; ++i) x[i] += w[i];
    site = row_target_[row];
  }
  return x;
}

TrajectoryStats estimate_drift(const Environment& env, std::int64_t n, std::int64_t replicas,
                               std::uint64_t seed, const SimOptions& opts) {
  check_replica_args(n, replicas);
  const Sampler sampler(env);
  TrajectoryStats stats;
  stats.n_steps = n;
  stats.replicas = replicas;
  stats.seed = seed;
  fill_drift(stats, endpoints(sampler, n, replicas, seed, opts), env.dimension());
  return stats;
}

TrajectoryStats estimate_covariance(const Environment& env, std::int64_t n, std::int64_t replicas,
                                    std::uint64_t seed, const Eigen::VectorXd& nu,
                                    const SimOptions& opts) {
  check_replica_args(n, replicas);
  const std::size_t d = env.dimension();
  if (static_cast<std::size_t>(nu.size()) != d)
    throw Error(ErrorCode::dimension_mismatch, "drift vector has wrong dimension");
  const Sampler sampler(env);
  const auto ends = endpoints(sampler, n, replicas, seed, opts);

  TrajectoryStats stats;
  stats.n_steps = n;
  stats.replicas = replicas;
  stats.seed = seed;
  fill_drift(stats, ends, d);

  const auto D = static_cast<Eigen::Index>(d);
  const double root_n = std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd scaled(static_cast<Eigen::Index>(replicas), D);
  for (std::int64_t r = 0; r < replicas; ++r)
    for (Eigen::Index i = 0; i < D; ++i)
      scaled(r, i) = (static_cast<double>(ends[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]) -
                      static_cast<double>(n) * nu(i)) / root_n;
  const Eigen::RowVectorXd mean = scaled.colwise().mean();
  const Eigen::MatrixXd centered = scaled.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(replicas - 1);
  stats.sigma_hat = 0.5 * (cov + cov.transpose());
  return stats;
}

HittingStats hitting_probability(const Environment& env, const IntVec& g1, std::int64_t k,
                                 std::int64_t replicas, std::uint64_t seed, std::int64_t max_steps,
                                 const SimOptions& opts) {
  const std::size_t d = env.dimension();
  if (g1.size() != d) throw Error(ErrorCode::dimension_mismatch, "g1 has wrong dimension");
  if (std::all_of(g1.begin(), g1.end(), [](std::int64_t c) { return c == 0; }))
    throw Error(ErrorCode::zero_gradient, "level direction g1 is zero");
  if (k < 1) throw Error(ErrorCode::parameter_domain, "level index k must be >= 1");
  if (replicas < 1 || max_steps < 1) throw Error(ErrorCode::parameter_domain, "replicas and max_steps must be positive");

  const Sampler sampler(env);
  std::int64_t norm2 = 0;
  std::int64_t t = 0;
  bool overflow = false;
  for (auto c : g1) {
    std::int64_t sq = 0;
    overflow |= __builtin_mul_overflow(c, c, &sq);
    overflow |= __builtin_add_overflow(norm2, sq, &norm2);
  }
  overflow |= __builtin_mul_overflow(norm2, k, &t);
  if (overflow || t > std::numeric_limits<std::int64_t>::max() / 4)
    throw Error(ErrorCode::overflow, "level threshold k <g1,g1> overflows");

  std::vector<std::int64_t> increment(sampler.num_steps());
  for (std::size_t f = 0; f < increment.size(); ++f) {
    const auto w = sampler.step(f);
    std::int64_t s = 0;
    for (std::size_t i = 0; i < d; ++i) s += w[i] * g1[i];
    increment[f] = s;
  }
  const auto outcomes =
      first_passage(sampler, increment, sampler.origin_site(), 0, -t, t, replicas, seed, max_steps, opts);
  return summarize(outcomes, seed, /*count_lower=*/true);
}

double exit_probability_1d_exact(const Environment& env, std::int64_t K, std::int64_t start) {
  require_1d_nearest_neighbour(env);
  if (K < 1) throw Error(ErrorCode::parameter_domain, "interval half-width K must be >= 1");
  if (start <= -K || start >= K)
    throw Error(ErrorCode::start_out_of_range, "start must lie strictly inside (-K, K)");

  // log w_j for j = -K..K-1, w_j = prod_{i=-K+1}^{j} rho_i, rho_i = p_i(-1)/p_i(+1).
  std::vector<double> log_w(static_cast<std::size_t>(2 * K));
  log_w[0] = 0.0;
  for (std::int64_t j = -K + 1; j <= K - 1; ++j) {
    const auto& law = env.law_at(IntVec{j});
    const double log_rho = std::log(law.prob(IntVec{-1})) - std::log(law.prob(IntVec{1}));
    log_w[static_cast<std::size_t>(j + K)] = log_w[static_cast<std::size_t>(j + K - 1)] + log_rho;
  }
  const std::span<const double> all(log_w);
  return std::exp(log_sum_exp(all.first(static_cast<std::size_t>(start + K))) - log_sum_exp(all));
}

HittingStats exit_frequency_1d(const Environment& env, std::int64_t K, std::int64_t start,
                               std::int64_t replicas, std::uint64_t seed, std::int64_t max_steps,
                               const SimOptions& opts) {
  require_1d_nearest_neighbour(env);
  if (K < 1) throw Error(ErrorCode::parameter_domain, "interval half-width K must be >= 1");
  if (start <= -K || start >= K)
    throw Error(ErrorCode::start_out_of_range, "start must lie strictly inside (-K, K)");
  if (replicas < 1 || max_steps < 1) throw Error(ErrorCode::parameter_domain, "replicas and max_steps must be positive");

  const Sampler sampler(env);
  std::vector<std::int64_t> increment(sampler.num_steps());
  for (std::size_t f = 0; f < increment.size(); ++f) increment[f] = sampler.step(f)[0];
  const auto outcomes = first_passage(sampler, increment, env.dims().index_of(IntVec{start}), start, -K, K,
                                      replicas, seed, max_steps, opts);
  return summarize(outcomes, seed, /*count_lower=*/false);
}

}  // namespace rwpe
