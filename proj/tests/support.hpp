// Test-only generators and independent oracles. Nothing here calls into the
// asymptotics or simulator code paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rwpe/environment.hpp"

namespace rwpe::testing {

inline Environment make_env(std::vector<std::int64_t> dims,
                            const std::vector<std::vector<std::pair<IntVec, double>>>& laws) {
  std::vector<JumpLaw> out;
  for (const auto& law : laws) {
    std::vector<Jump> jumps;
    for (const auto& [step, p] : law) jumps.push_back({step, p, {}});
    out.emplace_back(std::move(jumps));
  }
  return Environment(TorusDims(std::move(dims)), std::move(out));
}

/// 1-D period-2 environment: p_0(+1)=a, p_1(+1)=b.
inline Environment two_site_1d(double a, double b) {
  return make_env({2}, {{{{1}, a}, {{-1}, 1 - a}}, {{{1}, b}, {{-1}, 1 - b}}});
}

/// 1-D nearest-neighbour environment with p_x(+1) = up[x].
inline Environment nn_1d(const std::vector<double>& up) {
  std::vector<std::vector<std::pair<IntVec, double>>> laws;
  for (double a : up) laws.push_back({{{1}, a}, {{-1}, 1 - a}});
  return make_env({static_cast<std::int64_t>(up.size())}, laws);
}

inline Environment srw(std::size_t d) {
  std::vector<std::pair<IntVec, double>> law;
  for (std::size_t i = 0; i < d; ++i)
    for (int s : {1, -1}) law.push_back({unit_step(d, i, s), 0.5 / static_cast<double>(d)});
  return make_env(std::vector<std::int64_t>(d, 1), {law});
}

/// All vectors of {-1,0,1}^d in lexicographic order.
inline std::vector<IntVec> cube_steps(std::size_t d) {
  std::vector<IntVec> out{IntVec{}};
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<IntVec> next;
    for (const auto& v : out)
      for (std::int64_t c : {-1, 0, 1}) {
        auto w = v;
        w.push_back(c);
        next.push_back(w);
      }
    out = std::move(next);
  }
  return out;
}

/// Random environment with supports inside the 3^d cube. When `lazy` is set
/// the zero step always carries mass (aperiodic chain) and all unit steps are
/// present (irreducible chain).
inline Environment random_env(std::mt19937_64& rng, std::size_t d, std::int64_t max_m, bool lazy) {
  std::uniform_int_distribution<std::int64_t> extent(1, max_m);
  std::vector<std::int64_t> dims(d);
  for (auto& m : dims) m = extent(rng);
  const TorusDims torus(dims);
  const auto steps = cube_steps(d);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::bernoulli_distribution keep(0.4);
  std::vector<JumpLaw> laws;
  for (std::size_t s = 0; s < torus.size(); ++s) {
    std::vector<Jump> jumps;
    double total = 0.0;
    for (const auto& w : steps) {
      std::int64_t l1 = 0;
      for (auto c : w) l1 += std::abs(c);
      const bool forced = lazy && l1 <= 1;
      if (forced || keep(rng)) {
        const double p = weight(rng);
        total += p;
        jumps.push_back({w, p, {}});
      }
    }
    if (jumps.empty()) {
      jumps.push_back({steps.front(), 1.0, {}});
      total = 1.0;
    }
    for (auto& j : jumps) j.prob /= total;
    laws.emplace_back(std::move(jumps));
  }
  return Environment(torus, std::move(laws));
}

/// Random tilted-conductance inputs: s in [s_lo, s_hi], |h| in [h_lo, h_hi].
struct TiltedDraw {
  TorusDims dims;
  EdgeWeights s;
  std::vector<double> h;
};

inline TiltedDraw random_tilted(std::mt19937_64& rng, std::size_t d, std::int64_t max_m, double s_lo,
                                double s_hi, double h_lo, double h_hi) {
  std::uniform_int_distribution<std::int64_t> extent(1, max_m);
  std::vector<std::int64_t> dims(d);
  for (auto& m : dims) m = extent(rng);
  TiltedDraw out{TorusDims(dims), {}, {}};
  std::uniform_real_distribution<double> sw(s_lo, s_hi);
  out.s.resize(out.dims.size() * d);
  for (auto& w : out.s) w = sw(rng);
  std::normal_distribution<double> gauss;
  std::vector<double> dir(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& c : dir) {
      c = gauss(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-6);
  const double radius = std::uniform_real_distribution<double>(h_lo, h_hi)(rng);
  for (auto& c : dir) out.h.push_back(c / norm * radius);
  return out;
}

/// Exact first and second moments of X_n started at 0, by propagating
/// per-site mass, E[X; xi_n = s] and E[X X^T; xi_n = s].
struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline std::vector<Moments> exact_moments(const Environment& env, int n_max) {
  const auto& dims = env.dims();
  const std::size_t n = env.num_sites();
  const auto d = static_cast<Eigen::Index>(env.dimension());
  std::vector<double> mass(n, 0.0);
  std::vector<Eigen::VectorXd> m1(n, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::MatrixXd> m2(n, Eigen::MatrixXd::Zero(d, d));
  mass[dims.index_of(IntVec(env.dimension(), 0))] = 1.0;

  std::vector<Moments> out;
  auto record = [&] {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < n; ++s) {
      mean += m1[s];
      second += m2[s];
    }
    out.push_back({mean, second - mean * mean.transpose()});
  };
  record();
  for (int t = 0; t < n_max; ++t) {
    std::vector<double> nm(n, 0.0);
    std::vector<Eigen::VectorXd> n1(n, Eigen::VectorXd::Zero(d));
    std::vector<Eigen::MatrixXd> n2(n, Eigen::MatrixXd::Zero(d, d));
    for (std::size_t s = 0; s < n; ++s) {
      if (mass[s] == 0.0) continue;
      const IntVec x = dims.coords(s);
      for (const auto& j : env.law(s).jumps()) {
        IntVec y = x;
        Eigen::VectorXd w(d);
        for (Eigen::Index i = 0; i < d; ++i) {
          y[static_cast<std::size_t>(i)] += j.step[static_cast<std::size_t>(i)];
          w(i) = static_cast<double>(j.step[static_cast<std::size_t>(i)]);
        }
        const std::size_t to = dims.index_of(y);
        nm[to] += j.prob * mass[s];
        n1[to] += j.prob * (m1[s] + w * mass[s]);
        n2[to] += j.prob * (m2[s] + m1[s] * w.transpose() + w * m1[s].transpose() + w * w.transpose() * mass[s]);
      }
    }
    mass = std::move(nm);
    m1 = std::move(n1);
    m2 = std::move(n2);
    record();
  }
  return out;
}

/// Exit probability through +K before -K from the (2K-1)-state absorbing
/// chain, solved as a dense linear system.
inline double absorbing_chain_exit(const Environment& env, std::int64_t K, std::int64_t start) {
  const auto n = static_cast<Eigen::Index>(2 * K - 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::int64_t x = -K + 1; x <= K - 1; ++x) {
    const auto row = static_cast<Eigen::Index>(x + K - 1);
    const auto& law = env.law_at(IntVec{x});
    const double up = law.prob(IntVec{1});
    const double down = law.prob(IntVec{-1});
    if (x + 1 == K) b(row) += up;
    else A(row, row + 1) -= up;
    if (x - 1 != -K) A(row, row - 1) -= down;
  }
  const Eigen::VectorXd h = A.fullPivLu().solve(b);
  return h(static_cast<Eigen::Index>(start + K - 1));
}

/// Best p/q with q <= max_den by exhaustive search; ties to smaller q.
inline std::pair<std::int64_t, std::int64_t> exhaustive_best_rational(double x, std::int64_t max_den) {
  std::pair<std::int64_t, std::int64_t> best{0, 1};
  double best_err = INFINITY;
  for (std::int64_t q = 1; q <= max_den; ++q) {
    const auto p = static_cast<std::int64_t>(std::llround(x * static_cast<double>(q)));
    for (std::int64_t cand : {p - 1, p, p + 1}) {
      const double err = std::abs(x - static_cast<double>(cand) / static_cast<double>(q));
      if (err < best_err) {
        best_err = err;
        best = {cand, q};
      }
    }
  }
  const auto g = std::gcd(best.first, best.second);
  return {best.first / g, best.second / g};
}

}  // namespace rwpe::testing
