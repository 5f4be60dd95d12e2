#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwpe/environment.hpp"

namespace rwpe {

/// Conditional jump means mu_xy = E[X_n - X_{n-1} | xi_{n-1}=x, xi_n=y],
/// zero where the x -> y transition is impossible.
class JumpMeans {
 public:
  JumpMeans() = default;
  JumpMeans(std::size_t sites, std::size_t d)
      : sites_(sites), d_(d), data_(sites * sites * d, 0.0) {}

  std::span<const double> operator()(std::size_t x, std::size_t y) const {
    return {data_.data() + (x * sites_ + y) * d_, d_};
  }
  std::span<double> operator()(std::size_t x, std::size_t y) {
    return {data_.data() + (x * sites_ + y) * d_, d_};
  }
  std::size_t sites() const noexcept { return sites_; }
  std::size_t dimension() const noexcept { return d_; }

 private:
  std::size_t sites_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

struct Connectivity {
  bool irreducible = false;
  /// gcd of cycle lengths through state 0; meaningful only when irreducible.
  long period = 0;
};

/// P_xy = sum of p_x(w) over steps w with x + w ~ y.
Eigen::MatrixXd build_transition_matrix(const Environment& env);

JumpMeans jump_means(const Environment& env);

/// Strong connectivity of the positive-entry digraph, and its period from
/// BFS level differences.
Connectivity irreducibility_and_period(const Eigen::MatrixXd& P);

/// Solves (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
/// Throws not_irreducible.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);

/// The finite chain xi_n = X_n mod M together with its derived objects.
struct InducedChain {
  TorusDims dims;
  Eigen::MatrixXd P;
  Eigen::VectorXd pi;
  JumpMeans mu;
  bool irreducible = false;
  long period = 0;

  /// Builds P, mu and the connectivity data; pi is computed only when the
  /// chain is irreducible (left empty otherwise).
  static InducedChain build(const Environment& env);
};

}  // namespace rwpe
