#include <doctest.h>

#include <random>

#include "rwpe/induced_chain.hpp"
#include "support.hpp"

using namespace rwpe;
using rwpe::testing::make_env;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Environment translated by t: law'(x) = law(x + t).
Environment translated(const Environment& env, const IntVec& t) {
  std::vector<JumpLaw> laws;
  for (std::size_t s = 0; s < env.num_sites(); ++s) {
    IntVec x = env.dims().coords(s);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += t[i];
    laws.push_back(env.law_at(x));
  }
  return Environment(env.dims(), std::move(laws));
}

}  // namespace

TEST_CASE("transition matrix examples") {
  CHECK(build_transition_matrix(rwpe::testing::two_site_1d(0.3, 0.8)).isApprox(mat({{0, 1}, {1, 0}})));
  CHECK(build_transition_matrix(rwpe::testing::srw(2)) == mat({{1}}));

  const auto circ = rwpe::testing::nn_1d({0.9, 0.5, 0.2});
  const auto P = build_transition_matrix(circ);
  const Eigen::MatrixXd expected = mat({{0, 0.9, 0.1}, {0.5, 0, 0.5}, {0.2, 0.8, 0}});
  CHECK((P - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("jump means examples") {
  const double a = 0.7;
  const auto mu = jump_means(rwpe::testing::two_site_1d(a, 0.6));
  CHECK(mu(0, 1)[0] == doctest::Approx(2 * a - 1).epsilon(1e-15));
  CHECK(mu(0, 0)[0] == 0.0);  // impossible transition

  const auto env = make_counterexample(3.0, 0.05);
  const auto single = jump_means(env);
  const auto mean = env.law(0).mean(2);
  CHECK(single(0, 0)[0] == doctest::Approx(mean[0]).epsilon(1e-15));
  CHECK(single(0, 0)[1] == doctest::Approx(mean[1]).epsilon(1e-15));

  const auto three = rwpe::testing::nn_1d({0.9, 0.5, 0.2});
  CHECK(jump_means(three)(0, 1)[0] == 1.0);
  CHECK(jump_means(three)(0, 2)[0] == -1.0);
}

TEST_CASE("stationary distribution examples") {
  const Eigen::VectorXd flip = stationary_distribution(mat({{0, 1}, {1, 0}}));
  CHECK(flip(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(flip(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stationary_distribution(mat({{1}}))(0) == doctest::Approx(1.0));

  const auto P = build_transition_matrix(rwpe::testing::nn_1d({0.35, 0.35, 0.35}));
  const Eigen::VectorXd pi = stationary_distribution(P);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(pi(i) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK((pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(stationary_distribution(mat({{1, 0}, {0, 1}})), Error);
  CHECK_THROWS_AS(stationary_distribution(mat({{0.5, 0.5}, {0, 1}})), Error);
}

TEST_CASE("irreducibility and period examples") {
  auto c = irreducibility_and_period(mat({{0, 1}, {1, 0}}));
  CHECK(c.irreducible);
  CHECK(c.period == 2);
  c = irreducibility_and_period(mat({{1}}));
  CHECK(c.irreducible);
  CHECK(c.period == 1);
  c = irreducibility_and_period(mat({{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(c.irreducible);
  CHECK(c.period == 1);
  c = irreducibility_and_period(mat({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  CHECK(c.period == 3);
  // 1-D ring of 3 sites with +-1 steps: cycles of length 2 and 3.
  CHECK(irreducibility_and_period(build_transition_matrix(rwpe::testing::nn_1d({0.9, 0.5, 0.2}))).period == 1);
  // Nearest-neighbour on a 4x2 torus is bipartite.
  const auto tilted = make_tilted_conductance(TorusDims({4, 2}), EdgeWeights(16, 1.0), std::vector<double>{0.1, 0.2});
  CHECK(InducedChain::build(tilted).period == 2);
  CHECK_FALSE(irreducibility_and_period(mat({{0.5, 0.5}, {0, 1}})).irreducible);
}

TEST_CASE("chain invariants on random environments") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const auto env = rwpe::testing::random_env(rng, d, 3, trial % 2 == 0);
    const auto chain = InducedChain::build(env);
    const auto n = chain.P.rows();
    CHECK((chain.P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(chain.P.minCoeff() >= 0.0);

    // Total expectation: sum_y P_xy mu_xy = mean jump at x.
    for (Eigen::Index x = 0; x < n; ++x) {
      const auto mean = env.law(static_cast<std::size_t>(x)).mean(d);
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (Eigen::Index y = 0; y < n; ++y)
          acc += chain.P(x, y) * chain.mu(static_cast<std::size_t>(x), static_cast<std::size_t>(y))[i];
        CHECK(std::abs(acc - mean[i]) <= 1e-12);
      }
      for (Eigen::Index y = 0; y < n; ++y)
        if (chain.P(x, y) == 0.0)
          for (double c : chain.mu(static_cast<std::size_t>(x), static_cast<std::size_t>(y))) CHECK(c == 0.0);
    }

    if (!chain.irreducible) continue;
    CHECK(chain.pi.minCoeff() > 0.0);
    CHECK(std::abs(chain.pi.sum() - 1.0) <= 1e-12);
    CHECK((chain.pi.transpose() * chain.P - chain.pi.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    // Translating the environment relabels pi accordingly.
    IntVec t(d);
    for (std::size_t i = 0; i < d; ++i) t[i] = static_cast<std::int64_t>(trial % 5) - 2;
    const auto shifted = InducedChain::build(translated(env, t));
    for (std::size_t s = 0; s < env.num_sites(); ++s) {
      IntVec x = env.dims().coords(s);
      for (std::size_t i = 0; i < d; ++i) x[i] += t[i];
      CHECK(std::abs(shifted.pi(static_cast<Eigen::Index>(s)) -
                     chain.pi(static_cast<Eigen::Index>(env.dims().index_of(x)))) <= 1e-10);
    }
  }
}

TEST_CASE("nearest-neighbour chains only move between adjacent classes") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto draw = rwpe::testing::random_tilted(rng, 2, 4, 0.2, 5.0, 0.05, 1.0);
    const auto env = make_tilted_conductance(draw.dims, draw.s, draw.h);
    const auto P = build_transition_matrix(env);
    for (std::size_t x = 0; x < env.num_sites(); ++x)
      for (std::size_t y = 0; y < env.num_sites(); ++y) {
        if (P(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) == 0.0) continue;
        const auto cx = env.dims().coords(x);
        bool adjacent = false;
        for (std::size_t i = 0; i < 2; ++i)
          for (int s : {1, -1}) {
            IntVec z = cx;
            z[i] += s;
            adjacent |= env.dims().index_of(z) == y;
          }
        CHECK(adjacent);
      }
  }
}
