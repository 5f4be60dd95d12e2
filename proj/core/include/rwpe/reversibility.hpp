#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rwpe/environment.hpp"

namespace rwpe {

struct ReversibilityCheck {
  bool reversible = false;
  /// Largest |log forward product - log backward product| over all unit
  /// plaquettes based at torus sites.
  double max_cycle_defect = 0.0;
};

inline constexpr double kCycleTolerance = 1e-9;

/// Kolmogorov criterion on unit plaquettes x, x+e_i, x+e_i+e_j, x+e_j.
/// Requires a nearest-neighbour environment with positive unit steps.
ReversibilityCheck check_reversible(const Environment& env);

/// Potential on the closed fundamental cell {0..M_1} x ... x {0..M_d}.
class CellGrid {
 public:
  CellGrid() = default;
  explicit CellGrid(const TorusDims& dims);

  std::size_t size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return side_.size(); }
  std::size_t index_of(const IntVec& x) const;
  IntVec coords(std::size_t index) const;
  bool contains(const IntVec& x) const;

 private:
  std::vector<std::int64_t> side_;  // M_i + 1
  std::size_t size_ = 0;
};

struct PotentialField {
  bool reversible = false;
  double max_cycle_defect = 0.0;
  CellGrid cell;
  /// u(x) for every point of `cell`, indexed by cell.index_of; u(0) = 0.
  std::vector<double> u;
  Eigen::VectorXd g;
};

/// u(x) - u(x+e) = log(p_x(e) / p_{x+e}(-e)), u(0) = 0. Throws
/// not_reversible or path_dependence.
PotentialField potential(const Environment& env);

/// g_i = (1/M_i) log prod_{k<M_i} p_{k e_i}(e_i) / p_{(k+1) e_i}(-e_i), with
/// the same product re-checked along every parallel axis line.
Eigen::VectorXd average_negative_gradient(const Environment& env);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Closest fraction to x with denominator <= max_den; ties go to the smaller
/// denominator.
Rational best_rational_approximation(double x, std::int64_t max_den);

struct AppropriateDirection {
  std::vector<Rational> g_rational;
  /// Smallest positive multiple of g_rational lying in the sublattice M.
  IntVec g1;
  double angle_error = 0.0;  // radians
};

/// Rational direction close to g (after scaling g to unit sup-norm) whose
/// multiple g1 returns to the starting torus site.
AppropriateDirection approximate_appropriate_direction(
    const Eigen::VectorXd& g, std::int64_t max_denominator, const TorusDims& dims);

}  // namespace rwpe
