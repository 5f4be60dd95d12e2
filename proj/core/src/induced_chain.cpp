#include "rwpe/induced_chain.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace rwpe {

namespace {

// Site index of x + w for x a torus site.
std::size_t target_site(const TorusDims& dims, const IntVec& x, const IntVec& w) {
  IntVec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + w[i];
  return dims.index_of(y);
}

std::vector<long> bfs_levels(const Eigen::MatrixXd& P, bool transpose) {
  const auto n = P.rows();
  std::vector<long> level(static_cast<std::size_t>(n), -1);
  std::queue<Eigen::Index> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop();
    for (Eigen::Index v = 0; v < n; ++v) {
      const double w = transpose ? P(v, u) : P(u, v);
      if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push(v);
      }
    }
  }
  return level;
}

}  // namespace

Eigen::MatrixXd build_transition_matrix(const Environment& env) {
  const auto& dims = env.dims();
  const auto n = static_cast<Eigen::Index>(env.num_sites());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < env.num_sites(); ++x) {
    const IntVec cx = dims.coords(x);
    const double total = env.law(x).total();
    for (const auto& j : env.law(x).jumps())
      P(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(target_site(dims, cx, j.step))) +=
          j.prob / total;
  }
  return P;
}

JumpMeans jump_means(const Environment& env) {
  const auto& dims = env.dims();
  const std::size_t n = env.num_sites();
  const std::size_t d = env.dimension();
  JumpMeans mu(n, d);
  std::vector<double> mass(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const IntVec cx = dims.coords(x);
    for (const auto& j : env.law(x).jumps()) {
      const std::size_t y = target_site(dims, cx, j.step);
      mass[x * n + y] += j.prob;
      auto m = mu(x, y);
      for (std::size_t i = 0; i < d; ++i) m[i] += j.prob * static_cast<double>(j.step[i]);
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (mass[x * n + y] > 0.0)
        for (auto& c : mu(x, y)) c /= mass[x * n + y];
  return mu;
}

Connectivity irreducibility_and_period(const Eigen::MatrixXd& P) {
  Connectivity out;
  if (P.rows() == 0) return out;
  const auto forward = bfs_levels(P, false);
  const auto backward = bfs_levels(P, true);
  out.irreducible = std::all_of(forward.begin(), forward.end(), [](long l) { return l >= 0; }) &&
                    std::all_of(backward.begin(), backward.end(), [](long l) { return l >= 0; });
  if (!out.irreducible) return out;

  long g = 0;
  for (Eigen::Index u = 0; u < P.rows(); ++u)
    for (Eigen::Index v = 0; v < P.cols(); ++v)
      if (P(u, v) > 0.0) {
        const long diff = forward[static_cast<std::size_t>(u)] + 1 - forward[static_cast<std::size_t>(v)];
        g = std::gcd(g, diff < 0 ? -diff : diff);
      }
  out.period = g;
  return out;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  if (!irreducibility_and_period(P).irreducible)
    throw Error(ErrorCode::not_irreducible, "induced chain is not irreducible");
  const auto n = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  return A.partialPivLu().solve(b);
}

InducedChain InducedChain::build(const Environment& env) {
  InducedChain chain;
  chain.dims = env.dims();
  chain.P = build_transition_matrix(env);
  chain.mu = jump_means(env);
  const auto conn = irreducibility_and_period(chain.P);
  chain.irreducible = conn.irreducible;
  chain.period = conn.period;
  if (chain.irreducible) chain.pi = stationary_distribution(chain.P);
  return chain;
}

}  // namespace rwpe
