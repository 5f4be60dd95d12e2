#include "rwpe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwpe {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::schema: return "schema";
    case ErrorCode::duplicate_site: return "duplicate_site";
    case ErrorCode::missing_site: return "missing_site";
    case ErrorCode::probability_sum: return "probability_sum";
    case ErrorCode::nonpositive_probability: return "nonpositive_probability";
    case ErrorCode::parameter_domain: return "parameter_domain";
    case ErrorCode::not_irreducible: return "not_irreducible";
    case ErrorCode::form_mismatch: return "form_mismatch";
    case ErrorCode::singular: return "singular";
    case ErrorCode::not_nearest_neighbour: return "not_nearest_neighbour";
    case ErrorCode::not_reversible: return "not_reversible";
    case ErrorCode::path_dependence: return "path_dependence";
    case ErrorCode::line_dependence: return "line_dependence";
    case ErrorCode::zero_gradient: return "zero_gradient";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::start_out_of_range: return "start_out_of_range";
    case ErrorCode::not_one_dimensional: return "not_one_dimensional";
    case ErrorCode::all_censored: return "all_censored";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

std::string format_coord(std::span<const std::int64_t> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

TorusDims::TorusDims(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::parameter_domain, "torus dimension must be >= 1");
  size_ = 1;
  for (auto m : dims_) {
    if (m < 1) throw Error(ErrorCode::parameter_domain, "torus extents must be >= 1");
    size_ *= static_cast<std::size_t>(m);
  }
}

std::size_t TorusDims::index_of(std::span<const std::int64_t> x) const {
  if (x.size() != dims_.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "point " + format_coord(x) + " has dimension " + std::to_string(x.size()) +
                    ", torus has " + std::to_string(dims_.size()));
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    index = index * static_cast<std::size_t>(dims_[i]) +
            static_cast<std::size_t>(floor_mod(x[i], dims_[i]));
  }
  return index;
}

IntVec TorusDims::coords(std::size_t index) const {
  IntVec c(dims_.size());
  for (std::size_t i = dims_.size(); i-- > 0;) {
    const auto m = static_cast<std::size_t>(dims_[i]);
    c[i] = static_cast<std::int64_t>(index % m);
    index /= m;
  }
  return c;
}

IntVec canonical_site(std::span<const std::int64_t> x, const TorusDims& dims) {
  if (x.size() != dims.dimension()) {
    throw Error(ErrorCode::dimension_mismatch,
                "point " + format_coord(x) + " does not match torus dimension " +
                    std::to_string(dims.dimension()));
  }
  IntVec c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = floor_mod(x[i], dims[i]);
  return c;
}

IntVec unit_step(std::size_t d, std::size_t axis, int sign) {
  IntVec e(d, 0);
  e[axis] = sign;
  return e;
}

JumpLaw::JumpLaw(std::vector<Jump> jumps) : jumps_(std::move(jumps)) {
  std::sort(jumps_.begin(), jumps_.end(),
            [](const Jump& a, const Jump& b) { return a.step < b.step; });
}

double JumpLaw::total() const {
  double s = 0.0;
  for (const auto& j : jumps_) s += j.prob;
  return s;
}

double JumpLaw::prob(std::span<const std::int64_t> step) const {
  auto it = std::lower_bound(jumps_.begin(), jumps_.end(), step,
                             [](const Jump& j, std::span<const std::int64_t> s) {
                               return std::lexicographical_compare(j.step.begin(), j.step.end(),
                                                                   s.begin(), s.end());
                             });
  if (it != jumps_.end() && std::equal(it->step.begin(), it->step.end(), step.begin(), step.end()))
    return it->prob;
  return 0.0;
}

std::vector<double> JumpLaw::mean(std::size_t d) const {
  std::vector<double> m(d, 0.0);
  for (const auto& j : jumps_)
    for (std::size_t i = 0; i < d; ++i) m[i] += j.prob * static_cast<double>(j.step[i]);
  return m;
}

JumpLaw JumpLaw::renormalized() const {
  const double s = total();
  std::vector<Jump> out = jumps_;
  for (auto& j : out) {
    j.prob /= s;
    j.rational.reset();
  }
  return JumpLaw(std::move(out));
}

Environment::Environment(TorusDims dims, std::vector<JumpLaw> laws, double tolerance)
    : dims_(std::move(dims)), laws_(std::move(laws)), tolerance_(tolerance) {
  if (dims_.dimension() == 0) throw Error(ErrorCode::parameter_domain, "empty torus");
  if (laws_.size() != dims_.size()) {
    throw Error(ErrorCode::missing_site, "expected " + std::to_string(dims_.size()) +
                                             " jump laws, got " + std::to_string(laws_.size()));
  }
  const std::size_t d = dims_.dimension();
  for (std::size_t s = 0; s < laws_.size(); ++s) {
    const auto where = format_coord(dims_.coords(s));
    const auto& jumps = laws_[s].jumps();
    if (jumps.empty()) throw Error(ErrorCode::schema, "site " + where + " has an empty jump law");
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      if (jumps[k].step.size() != d)
        throw Error(ErrorCode::dimension_mismatch, "step at site " + where + " has wrong dimension");
      if (!(jumps[k].prob > 0.0) || !std::isfinite(jumps[k].prob))
        throw Error(ErrorCode::nonpositive_probability,
                    "site " + where + " step " + format_coord(jumps[k].step) +
                        " has nonpositive probability");
      if (k > 0 && jumps[k].step == jumps[k - 1].step)
        throw Error(ErrorCode::schema,
                    "site " + where + " lists step " + format_coord(jumps[k].step) + " twice");
    }
    const double defect = std::abs(laws_[s].total() - 1.0);
    if (defect > tolerance_) {
      std::ostringstream os;
      os.precision(17);
      os << "probabilities at site " << where << " sum to " << laws_[s].total()
         << " (tolerance " << tolerance_ << ")";
      throw Error(ErrorCode::probability_sum, os.str());
    }
  }
}

bool Environment::nearest_neighbour() const {
  const std::size_t d = dimension();
  for (const auto& law : laws_) {
    if (law.support_size() != 2 * d) return false;
    for (const auto& j : law.jumps()) {
      std::int64_t l1 = 0;
      for (auto c : j.step) l1 += c < 0 ? -c : c;
      if (l1 != 1) return false;
    }
  }
  return true;
}

bool Environment::unit_steps_positive() const {
  const std::size_t d = dimension();
  for (const auto& law : laws_)
    for (std::size_t i = 0; i < d; ++i)
      for (int sign : {1, -1})
        if (!(law.prob(unit_step(d, i, sign)) > 0.0)) return false;
  return true;
}

Environment make_counterexample(double K, double eps) {
  if (!(K > 1.0) || !(eps > 0.0) || !((K + 1.0) * eps < 1.0) || !std::isfinite(K)) {
    throw Error(ErrorCode::parameter_domain, "counterexample requires K > 1, eps > 0, (K+1) eps < 1");
  }
  const double rest = 1.0 - (K + 1.0) * eps;
  std::vector<Jump> jumps{
      {{1, 0}, K * eps, {}},
      {{-1, 0}, eps, {}},
      {{0, 1}, 2.0 / 3.0 * rest, {}},
      {{0, -1}, rest / 3.0, {}},
  };
  return Environment(TorusDims({1, 1}), {JumpLaw(std::move(jumps))});
}

Environment make_tilted_conductance(const TorusDims& dims, const EdgeWeights& s,
                                    std::span<const double> h) {
  const std::size_t d = dims.dimension();
  if (h.size() != d) throw Error(ErrorCode::dimension_mismatch, "tilt vector has wrong dimension");
  if (s.size() != dims.size() * d)
    throw Error(ErrorCode::dimension_mismatch, "expected one edge weight per site and axis");
  for (double w : s)
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::nonpositive_probability, "edge weights must be positive");
  for (double v : h)
    if (!std::isfinite(v)) throw Error(ErrorCode::parameter_domain, "tilt must be finite");

  // exp(<h,x> + <h,x+e>) = exp(2<h,x>) exp(<h,e>); the site factor cancels in
  // the normalization, leaving a periodic law.
  std::vector<JumpLaw> laws;
  laws.reserve(dims.size());
  for (std::size_t site = 0; site < dims.size(); ++site) {
    const IntVec x = dims.coords(site);
    std::vector<Jump> jumps;
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (int sign : {1, -1}) {
        IntVec e = unit_step(d, i, sign);
        // Edge {x, x+e_i} belongs to x; edge {x-e_i, x} belongs to x-e_i.
        std::size_t owner = site;
        if (sign < 0) {
          IntVec y = x;
          y[i] -= 1;
          owner = dims.index_of(y);
        }
        const double c = s[owner * d + i] * std::exp(sign * h[i]);
        total += c;
        jumps.push_back({std::move(e), c, {}});
      }
    }
    for (auto& j : jumps) j.prob /= total;
    laws.emplace_back(std::move(jumps));
  }
  return Environment(dims, std::move(laws));
}

ValidationReport validate(const Environment& env) {
  ValidationReport r;
  for (std::size_t s = 0; s < env.num_sites(); ++s) {
    const double defect = std::abs(env.law(s).total() - 1.0);
    r.sum_defects.push_back({s, defect});
    r.max_sum_defect = std::max(r.max_sum_defect, defect);
    if (defect > env.tolerance()) r.sums_within_tolerance = false;
  }
  r.finite_support = true;
  r.nearest_neighbour = env.nearest_neighbour();
  r.strictly_positive = env.unit_steps_positive();
  return r;
}

}  // namespace rwpe
