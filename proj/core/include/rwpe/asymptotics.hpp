#pragma once

#include <Eigen/Dense>

#include "rwpe/environment.hpp"
#include "rwpe/induced_chain.hpp"

namespace rwpe {

/// Law of large numbers limit nu of X_n / n.
///
/// Evaluates sum_x pi(x) sum_w p_x(w) w and checks it against the equivalent
/// form sum_{x,y} pi(x) P_xy mu_xy (throws form_mismatch beyond 1e-12).
Eigen::VectorXd drift(const Environment& env, const InducedChain& chain);

/// Z = (I - P + Pi)^{-1}, Pi the rank-one matrix with every row equal to pi.
///
/// On pi-centered vectors Z acts as the (Cesaro) sum of P^n, which is what
/// the singular (I - P)^{-1} means in the Green-Kubo expression.
Eigen::MatrixXd fundamental_matrix(const Eigen::MatrixXd& P,
                                   const Eigen::VectorXd& pi);

/// Limiting covariance of (X_n - n nu) / sqrt(n), symmetrized.
Eigen::MatrixXd diffusion_matrix(const Environment& env,
                                 const InducedChain& chain,
                                 const Eigen::VectorXd& nu);

/// Same quantity from the autocovariance series truncated after N lags.
/// For periodic chains the Cesaro mean of the partial sums S_0..S_N is
/// returned instead of S_N.
Eigen::MatrixXd green_kubo_truncated(const Environment& env,
                                     const InducedChain& chain,
                                     const Eigen::VectorXd& nu, int N);

struct AsymptoticSummary {
  Eigen::VectorXd nu;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd Z;
  long period = 1;
  bool aperiodic_warning = false;
};

/// Throws not_irreducible when the induced chain is reducible.
AsymptoticSummary analyze(const Environment& env, const InducedChain& chain);

}  // namespace rwpe
