#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwpe/error.hpp"

namespace rwpe {

/// Integer lattice vector in Z^d (positions and jump steps).
using IntVec = std::vector<std::int64_t>;

/// Torus T = Z^d / (M_1 Z x ... x M_d Z).
///
/// Sites are numbered 0..size()-1 in lexicographic coordinate order: the last
/// coordinate varies fastest.
class TorusDims {
 public:
  TorusDims() = default;
  explicit TorusDims(std::vector<std::int64_t> dims);

  std::size_t dimension() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::int64_t operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<std::int64_t>& extents() const noexcept { return dims_; }

  /// Linear index of the canonical representative of x.
  std::size_t index_of(std::span<const std::int64_t> x) const;
  /// Coordinates (each in [0, M_i)) of site `index`.
  IntVec coords(std::size_t index) const;

  friend bool operator==(const TorusDims&, const TorusDims&) = default;

 private:
  std::vector<std::int64_t> dims_;
  std::size_t size_ = 0;
};

/// Reduces x coordinate-wise into [0, M_i). Throws dimension_mismatch.
IntVec canonical_site(std::span<const std::int64_t> x, const TorusDims& dims);

struct Jump {
  IntVec step;
  double prob = 0.0;
  /// Exact source value when the probability was given as "p/q".
  std::optional<std::pair<std::int64_t, std::int64_t>> rational;
};

/// Finite jump distribution, kept sorted lexicographically by step.
class JumpLaw {
 public:
  JumpLaw() = default;
  explicit JumpLaw(std::vector<Jump> jumps);

  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  std::size_t support_size() const noexcept { return jumps_.size(); }
  double total() const;
  /// Probability of `step`, 0 when outside the support.
  double prob(std::span<const std::int64_t> step) const;
  std::vector<double> mean(std::size_t d) const;

  JumpLaw renormalized() const;

 private:
  std::vector<Jump> jumps_;
};

/// Periodic environment: one jump law per torus site. Immutable once built.
class Environment {
 public:
  static constexpr double kDefaultTolerance = 1e-9;

  /// Validates dimensions, positivity and probability sums.
  Environment(TorusDims dims, std::vector<JumpLaw> laws,
              double tolerance = kDefaultTolerance);

  const TorusDims& dims() const noexcept { return dims_; }
  std::size_t dimension() const noexcept { return dims_.dimension(); }
  std::size_t num_sites() const noexcept { return laws_.size(); }
  double tolerance() const noexcept { return tolerance_; }

  const JumpLaw& law(std::size_t site) const { return laws_.at(site); }
  /// Law at an arbitrary lattice point (periodic extension).
  const JumpLaw& law_at(std::span<const std::int64_t> x) const {
    return laws_[dims_.index_of(x)];
  }
  const std::vector<JumpLaw>& laws() const noexcept { return laws_; }

  /// Every law is supported exactly on the 2d unit vectors.
  bool nearest_neighbour() const;
  /// Every law gives positive mass to all 2d unit vectors.
  bool unit_steps_positive() const;

 private:
  TorusDims dims_;
  std::vector<JumpLaw> laws_;
  double tolerance_;
};

/// Unit vector +e_axis (sign = +1) or -e_axis (sign = -1) in Z^d.
IntVec unit_step(std::size_t d, std::size_t axis, int sign);

/// Homogeneous d=2 environment whose drift and potential gradient can be made
/// nearly orthogonal:
///   p(e_1) = K eps, p(-e_1) = eps,
///   p(e_2) = 2/3 (1 - (K+1) eps), p(-e_2) = 1/3 (1 - (K+1) eps).
Environment make_counterexample(double K, double eps);

/// Symmetric weights, one per undirected edge class {x, x+e_i}: entry
/// `site * d + i` for site x in T and axis i.
using EdgeWeights = std::vector<double>;

/// Reversible nearest-neighbour environment from tilted conductances
/// c(x, x+e) = s(x, x+e) exp(<h, x> + <h, x+e>), normalized per site. Its
/// average negative gradient is exactly 2h.
Environment make_tilted_conductance(const TorusDims& dims,
                                    const EdgeWeights& s,
                                    std::span<const double> h);

struct ValidationReport {
  struct SiteDefect {
    std::size_t site;
    double defect;  // |sum - 1|
  };
  std::vector<SiteDefect> sum_defects;  // one entry per site
  double max_sum_defect = 0.0;
  bool sums_within_tolerance = true;
  bool finite_support = true;
  bool nearest_neighbour = false;
  bool strictly_positive = false;

  bool ok() const { return sums_within_tolerance && finite_support; }
};

ValidationReport validate(const Environment& env);

}  // namespace rwpe
