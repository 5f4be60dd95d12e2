#include "rwpe/asymptotics.hpp"

#include <cmath>
#include <sstream>

namespace rwpe {

namespace {

constexpr double kDriftFormTolerance = 1e-12;
constexpr double kInverseTolerance = 1e-10;

void require_stationary(const InducedChain& chain) {
  if (!chain.irreducible || chain.pi.size() != chain.P.rows())
    throw Error(ErrorCode::not_irreducible, "induced chain is not irreducible");
}

// Columns i = 1..d of the left factor a_i(y) = sum_x pi(x) P_xy (mu_xy - nu)_i.
Eigen::MatrixXd centered_arrivals(const InducedChain& chain, const Eigen::VectorXd& nu) {
  const auto n = chain.P.rows();
  const auto d = nu.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      const double w = chain.P(x, y);
      if (w == 0.0) continue;
      const auto mu = chain.mu(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      for (Eigen::Index i = 0; i < d; ++i) a(y, i) += chain.pi(x) * w * (mu[static_cast<std::size_t>(i)] - nu(i));
    }
  return a;
}

// Columns j of h_j(z) = sum_w P_zw (mu_zw - nu)_j; pi-centered.
Eigen::MatrixXd centered_departures(const InducedChain& chain, const Eigen::VectorXd& nu) {
  const auto n = chain.P.rows();
  const auto d = nu.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index z = 0; z < n; ++z)
    for (Eigen::Index w = 0; w < n; ++w) {
      const double p = chain.P(z, w);
      if (p == 0.0) continue;
      const auto mu = chain.mu(static_cast<std::size_t>(z), static_cast<std::size_t>(w));
      for (Eigen::Index j = 0; j < d; ++j) h(z, j) += p * (mu[static_cast<std::size_t>(j)] - nu(j));
    }
  return h;
}

// sum_x pi(x) sum_w p_x(w) (w - nu)(w - nu)^T
Eigen::MatrixXd one_step_covariance(const Environment& env, const InducedChain& chain,
                                    const Eigen::VectorXd& nu) {
  const auto d = static_cast<Eigen::Index>(env.dimension());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd dev(d);
  for (std::size_t x = 0; x < env.num_sites(); ++x) {
    const double total = env.law(x).total();
    Eigen::MatrixXd site = Eigen::MatrixXd::Zero(d, d);
    for (const auto& j : env.law(x).jumps()) {
      for (Eigen::Index i = 0; i < d; ++i) dev(i) = static_cast<double>(j.step[static_cast<std::size_t>(i)]) - nu(i);
      site.noalias() += (j.prob / total) * dev * dev.transpose();
    }
    c += chain.pi(static_cast<Eigen::Index>(x)) * site;
  }
  return c;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Eigen::VectorXd drift(const Environment& env, const InducedChain& chain) {
  require_stationary(chain);
  const auto d = static_cast<Eigen::Index>(env.dimension());
  const auto n = static_cast<Eigen::Index>(env.num_sites());

  Eigen::VectorXd by_law = Eigen::VectorXd::Zero(d);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto& law = env.law(static_cast<std::size_t>(x));
    const auto mean = law.mean(static_cast<std::size_t>(d));
    const double total = law.total();
    for (Eigen::Index i = 0; i < d; ++i) by_law(i) += chain.pi(x) * mean[static_cast<std::size_t>(i)] / total;
  }

  Eigen::VectorXd by_pairs = Eigen::VectorXd::Zero(d);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      const double w = chain.pi(x) * chain.P(x, y);
      if (w == 0.0) continue;
      const auto mu = chain.mu(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      for (Eigen::Index i = 0; i < d; ++i) by_pairs(i) += w * mu[static_cast<std::size_t>(i)];
    }

  const double gap = (by_law - by_pairs).lpNorm<Eigen::Infinity>();
  if (!(gap <= kDriftFormTolerance)) {
    std::ostringstream os;
    os << "drift forms disagree by " << gap;
    throw Error(ErrorCode::form_mismatch, os.str());
  }
  return by_law;
}

Eigen::MatrixXd fundamental_matrix(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  const auto n = P.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = I - P + Eigen::VectorXd::Ones(n) * pi.transpose();
  Eigen::MatrixXd Z = M.partialPivLu().inverse();
  const double residual = (Z * M - I).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(residual) || residual > kInverseTolerance) {
    std::ostringstream os;
    os << "I - P + Pi is numerically singular (residual " << residual << ")";
    throw Error(ErrorCode::singular, os.str());
  }
  return Z;
}

Eigen::MatrixXd diffusion_matrix(const Environment& env, const InducedChain& chain,
                                 const Eigen::VectorXd& nu) {
  require_stationary(chain);
  const Eigen::MatrixXd Z = fundamental_matrix(chain.P, chain.pi);
  const Eigen::MatrixXd a = centered_arrivals(chain, nu);
  const Eigen::MatrixXd h = centered_departures(chain, nu);
  const Eigen::MatrixXd sigma = one_step_covariance(env, chain, nu) + 2.0 * a.transpose() * Z * h;
  return symmetrized(sigma);
}

Eigen::MatrixXd green_kubo_truncated(const Environment& env, const InducedChain& chain,
                                     const Eigen::VectorXd& nu, int N) {
  require_stationary(chain);
  if (N < 0) throw Error(ErrorCode::parameter_domain, "truncation order must be >= 0");
  const Eigen::MatrixXd a = centered_arrivals(chain, nu);
  Eigen::MatrixXd v = centered_departures(chain, nu);

  Eigen::MatrixXd partial = one_step_covariance(env, chain, nu);
  const bool cesaro = chain.period > 1;
  Eigen::MatrixXd running = partial;
  for (int n = 1; n <= N; ++n) {
    partial += 2.0 * a.transpose() * v;
    v = chain.P * v;
    if (cesaro) running += partial;
  }
  if (cesaro) partial = running / static_cast<double>(N + 1);
  return symmetrized(partial);
}

AsymptoticSummary analyze(const Environment& env, const InducedChain& chain) {
  require_stationary(chain);
  AsymptoticSummary s;
  s.nu = drift(env, chain);
  s.Z = fundamental_matrix(chain.P, chain.pi);
  s.sigma = diffusion_matrix(env, chain, s.nu);
  s.period = chain.period;
  s.aperiodic_warning = chain.period > 1;
  return s;
}

}  // namespace rwpe
