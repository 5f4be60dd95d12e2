#include "rwpe/reversibility.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace rwpe {

namespace {

constexpr double kPathTolerance = 1e-9;

void require_nearest_neighbour(const Environment& env) {
  if (!env.nearest_neighbour())
    throw Error(ErrorCode::not_nearest_neighbour,
                "reversibility analysis needs a nearest-neighbour environment");
  if (!env.unit_steps_positive())
    throw Error(ErrorCode::nonpositive_probability, "every unit step needs positive probability");
}

double log_prob(const Environment& env, const IntVec& x, const IntVec& step) {
  return std::log(env.law_at(x).prob(step));
}

IntVec shifted(IntVec x, std::size_t axis, std::int64_t by) {
  x[axis] += by;
  return x;
}

// log(p_x(e) / p_{x+e}(-e)) for e = sign * e_axis.
double edge_log_ratio(const Environment& env, const IntVec& x, std::size_t axis, int sign) {
  const std::size_t d = env.dimension();
  return log_prob(env, x, unit_step(d, axis, sign)) -
         log_prob(env, shifted(x, axis, sign), unit_step(d, axis, -sign));
}

// (1/M) sum_{k<M} log p_{x+k e}(e) / p_{x+(k+1)e}(-e) along the axis line through x.
double line_gradient(const Environment& env, IntVec x, std::size_t axis) {
  const std::int64_t m = env.dims()[axis];
  double sum = 0.0;
  for (std::int64_t k = 0; k < m; ++k) {
    sum += edge_log_ratio(env, x, axis, +1);
    x[axis] += 1;
  }
  return sum / static_cast<double>(m);
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r))
    throw Error(ErrorCode::overflow,
                "integer scaling of the rational direction overflows; use a smaller max denominator");
  return r;
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  return checked_mul(a / std::gcd(a, b), b);
}

}  // namespace

ReversibilityCheck check_reversible(const Environment& env) {
  require_nearest_neighbour(env);
  const std::size_t d = env.dimension();
  ReversibilityCheck out;
  for (std::size_t site = 0; site < env.num_sites(); ++site) {
    const IntVec x = env.dims().coords(site);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const IntVec xi = shifted(x, i, 1);
        const IntVec xj = shifted(x, j, 1);
        const IntVec xij = shifted(xi, j, 1);
        const double forward = log_prob(env, x, unit_step(d, i, 1)) + log_prob(env, xi, unit_step(d, j, 1)) +
                               log_prob(env, xij, unit_step(d, i, -1)) + log_prob(env, xj, unit_step(d, j, -1));
        const double backward = log_prob(env, x, unit_step(d, j, 1)) + log_prob(env, xj, unit_step(d, i, 1)) +
                                log_prob(env, xij, unit_step(d, j, -1)) + log_prob(env, xi, unit_step(d, i, -1));
        out.max_cycle_defect = std::max(out.max_cycle_defect, std::abs(forward - backward));
      }
  }
  out.reversible = out.max_cycle_defect <= kCycleTolerance;
  return out;
}

CellGrid::CellGrid(const TorusDims& dims) {
  size_ = 1;
  for (std::size_t i = 0; i < dims.dimension(); ++i) {
    side_.push_back(dims[i] + 1);
    size_ *= static_cast<std::size_t>(dims[i] + 1);
  }
}

bool CellGrid::contains(const IntVec& x) const {
  if (x.size() != side_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0 || x[i] >= side_[i]) return false;
  return true;
}

std::size_t CellGrid::index_of(const IntVec& x) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < side_.size(); ++i)
    index = index * static_cast<std::size_t>(side_[i]) + static_cast<std::size_t>(x[i]);
  return index;
}

IntVec CellGrid::coords(std::size_t index) const {
  IntVec c(side_.size());
  for (std::size_t i = side_.size(); i-- > 0;) {
    c[i] = static_cast<std::int64_t>(index % static_cast<std::size_t>(side_[i]));
    index /= static_cast<std::size_t>(side_[i]);
  }
  return c;
}

PotentialField potential(const Environment& env) {
  const auto check = check_reversible(env);
  if (!check.reversible) {
    std::ostringstream os;
    os << "environment is not reversible (max cycle defect " << check.max_cycle_defect << ")";
    throw Error(ErrorCode::not_reversible, os.str());
  }
  const std::size_t d = env.dimension();
  PotentialField field;
  field.reversible = true;
  field.max_cycle_defect = check.max_cycle_defect;
  field.cell = CellGrid(env.dims());
  field.u.assign(field.cell.size(), std::numeric_limits<double>::quiet_NaN());

  // BFS spanning tree from the origin; every other cell edge is re-checked.
  std::vector<bool> seen(field.cell.size(), false);
  std::queue<std::size_t> queue;
  field.u[0] = 0.0;
  seen[0] = true;
  queue.push(0);
  double worst = 0.0;
  while (!queue.empty()) {
    const std::size_t at = queue.front();
    queue.pop();
    const IntVec x = field.cell.coords(at);
    for (std::size_t i = 0; i < d; ++i)
      for (int sign : {1, -1}) {
        const IntVec y = shifted(x, i, sign);
        if (!field.cell.contains(y)) continue;
        const std::size_t to = field.cell.index_of(y);
        const double value = field.u[at] - edge_log_ratio(env, x, i, sign);
        if (!seen[to]) {
          seen[to] = true;
          field.u[to] = value;
          queue.push(to);
        } else {
          worst = std::max(worst, std::abs(field.u[to] - value));
        }
      }
  }
  if (worst > kPathTolerance) {
    std::ostringstream os;
    os << "potential is path dependent (discrepancy " << worst << ")";
    throw Error(ErrorCode::path_dependence, os.str());
  }

  field.g = average_negative_gradient(env);
  for (std::size_t at = 0; at < field.cell.size(); ++at) {
    const IntVec x = field.cell.coords(at);
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] != 0) continue;
      const IntVec y = shifted(x, i, env.dims()[i]);
      const double jump = field.u[field.cell.index_of(y)] - field.u[at];
      const double expected = -static_cast<double>(env.dims()[i]) * field.g(static_cast<Eigen::Index>(i));
      if (std::abs(jump - expected) > kPathTolerance)
        throw Error(ErrorCode::path_dependence, "potential increment across a period does not match -M_i g_i");
    }
  }
  return field;
}

Eigen::VectorXd average_negative_gradient(const Environment& env) {
  const auto check = check_reversible(env);
  if (!check.reversible) {
    std::ostringstream os;
    os << "environment is not reversible (max cycle defect " << check.max_cycle_defect << ")";
    throw Error(ErrorCode::not_reversible, os.str());
  }
  const std::size_t d = env.dimension();
  Eigen::VectorXd g(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const double on_axis = line_gradient(env, IntVec(d, 0), i);
    g(static_cast<Eigen::Index>(i)) = on_axis;
    for (std::size_t site = 0; site < env.num_sites(); ++site) {
      const IntVec x = env.dims().coords(site);
      if (x[i] != 0) continue;
      const double other = line_gradient(env, x, i);
      if (std::abs(other - on_axis) > kPathTolerance) {
        std::ostringstream os;
        os << "axis " << i << " gradient differs between parallel lines (" << on_axis << " vs " << other << ")";
        throw Error(ErrorCode::line_dependence, os.str());
      }
    }
  }
  return g;
}

Rational best_rational_approximation(double x, std::int64_t max_den) {
  if (max_den < 1) throw Error(ErrorCode::parameter_domain, "max denominator must be >= 1");
  if (!std::isfinite(x)) throw Error(ErrorCode::parameter_domain, "cannot approximate a non-finite value");
  if (x < 0) {
    auto r = best_rational_approximation(-x, max_den);
    return {-r.num, r.den};
  }
  // Convergents p0/q0, p1/q1 of the continued fraction of x.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rest = x;
  for (;;) {
    const double a_real = std::floor(rest);
    if (a_real > 4e18) break;
    const auto a = static_cast<std::int64_t>(a_real);
    if (q1 != 0 && a > (max_den - q0) / q1) break;
    const std::int64_t p2 = checked_mul(a, p1) + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1;
    p1 = p2; q1 = q2;
    const double frac = rest - a_real;
    if (frac == 0.0) break;
    rest = 1.0 / frac;
  }
  if (q1 == 0) return {static_cast<std::int64_t>(std::floor(x)), 1};

  const Rational convergent{p1, q1};
  const std::int64_t k = (max_den - q0) / q1;
  const Rational semi{p0 + k * p1, q0 + k * q1};
  if (semi.den < 1 || k < 1) return convergent;
  const double e_conv = std::abs(x - convergent.value());
  const double e_semi = std::abs(x - semi.value());
  if (e_semi < e_conv) return semi;
  if (e_conv < e_semi) return convergent;
  return semi.den < convergent.den ? semi : convergent;
}

AppropriateDirection approximate_appropriate_direction(const Eigen::VectorXd& g,
                                                       std::int64_t max_denominator,
                                                       const TorusDims& dims) {
  const std::size_t d = dims.dimension();
  if (static_cast<std::size_t>(g.size()) != d)
    throw Error(ErrorCode::dimension_mismatch, "gradient dimension does not match the torus");
  if (max_denominator < 1) throw Error(ErrorCode::parameter_domain, "max denominator must be >= 1");
  const double scale = g.lpNorm<Eigen::Infinity>();
  if (!(scale > 0.0)) throw Error(ErrorCode::zero_gradient, "gradient is zero; no direction to approximate");

  AppropriateDirection out;
  std::int64_t common = 1;
  for (std::size_t i = 0; i < d; ++i) {
    const double c = g(static_cast<Eigen::Index>(i)) / scale;
    out.g_rational.push_back(best_rational_approximation(c, max_denominator));
    common = checked_lcm(common, out.g_rational.back().den);
  }

  IntVec v(d);
  std::int64_t content = 0;
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = checked_mul(out.g_rational[i].num, common / out.g_rational[i].den);
    content = std::gcd(content, v[i]);
  }
  if (content == 0) throw Error(ErrorCode::zero_gradient, "rational direction collapsed to zero");
  std::int64_t multiple = 1;
  for (std::size_t i = 0; i < d; ++i) {
    v[i] /= content;
    if (v[i] != 0) multiple = checked_lcm(multiple, dims[i] / std::gcd(dims[i], v[i]));
  }
  out.g1.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.g1[i] = checked_mul(v[i], multiple);

  Eigen::VectorXd r(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) r(static_cast<Eigen::Index>(i)) = out.g_rational[i].value();
  const Eigen::VectorXd a = g.normalized();
  const Eigen::VectorXd b = r.normalized();
  out.angle_error = 2.0 * std::atan2((a - b).norm(), (a + b).norm());
  return out;
}

}  // namespace rwpe
