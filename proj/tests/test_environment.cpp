#include <doctest.h>

#include <random>

#include "rwpe/environment.hpp"
#include "rwpe/environment_io.hpp"
#include "support.hpp"

using namespace rwpe;
using rwpe::testing::make_env;

namespace {

// Searches m in M (bounded box) with x - m in the fundamental cell.
IntVec brute_force_canonical(const IntVec& x, const TorusDims& dims) {
  IntVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::int64_t q = -100; q <= 100; ++q) {
      const std::int64_t c = x[i] - q * dims[i];
      if (c >= 0 && c < dims[i]) out[i] = c;
    }
  return out;
}

const char* kTwoSite = R"({ "dims": [2],
  "sites": [
    { "coord": [1], "jumps": [ { "step": [1], "prob": 0.6 }, { "step": [-1], "prob": 0.4 } ] },
    { "coord": [0], "jumps": [ { "step": [1], "prob": "7/10" }, { "step": [-1], "prob": "3/10" } ] }
  ] })";

ErrorCode parse_code(const std::string& text, ParseOptions opts = {}) {
  try {
    parse_environment(text, opts);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("canonical_site reduces into the fundamental cell") {
  const TorusDims dims({2, 3});
  CHECK(canonical_site(IntVec{0, 0}, dims) == IntVec{0, 0});
  CHECK(canonical_site(IntVec{-1, 4}, dims) == IntVec{1, 1});
  CHECK(canonical_site(IntVec{5, -7}, dims) == IntVec{1, 2});
  CHECK(brute_force_canonical(IntVec{5, -7}, dims) == IntVec{1, 2});
  CHECK_THROWS_AS(canonical_site(IntVec{1, 2, 3}, dims), Error);
}

TEST_CASE("canonical_site is a homomorphism modulo M") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> coord(-50, 50), extent(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + trial % 3;
    std::vector<std::int64_t> m(d);
    for (auto& v : m) v = extent(rng);
    const TorusDims dims(m);
    IntVec x(d), y(d), shift(d);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = coord(rng);
      y[i] = coord(rng);
      shift[i] = x[i] + m[i] * coord(rng);
    }
    const auto cx = canonical_site(x, dims);
    CHECK(canonical_site(cx, dims) == cx);
    CHECK(canonical_site(shift, dims) == cx);
    CHECK(cx == brute_force_canonical(x, dims));
    IntVec sum(d), csum(d);
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] = x[i] + y[i];
      csum[i] = cx[i] + y[i];
    }
    CHECK(canonical_site(sum, dims) == canonical_site(csum, dims));
    CHECK(dims.coords(dims.index_of(x)) == cx);
  }
}

TEST_CASE("site indexing is lexicographic") {
  const TorusDims dims({2, 3});
  CHECK(dims.size() == 6);
  CHECK(dims.coords(0) == IntVec{0, 0});
  CHECK(dims.coords(1) == IntVec{0, 1});
  CHECK(dims.coords(3) == IntVec{1, 0});
  CHECK(dims.index_of(IntVec{1, 2}) == 5);
}

TEST_CASE("parse_environment reads the documented schema") {
  const auto env = parse_environment(kTwoSite);
  CHECK(env.dims().extents() == std::vector<std::int64_t>{2});
  CHECK(env.law(0).prob(IntVec{1}) == 0.7);
  CHECK(env.law(0).prob(IntVec{-1}) == 0.3);
  CHECK(env.law(1).prob(IntVec{1}) == 0.6);
  CHECK(env.nearest_neighbour());
  // Steps are held in lexicographic order.
  CHECK(env.law(1).jumps().front().step == IntVec{-1});
}

TEST_CASE("parse_environment rejects malformed documents") {
  SUBCASE("missing site") {
    const std::string text = R"({"dims": [2], "sites": [
      {"coord": [0], "jumps": [{"step": [1], "prob": 0.5}, {"step": [-1], "prob": 0.5}]}]})";
    try {
      parse_environment(text);
      FAIL("missing site accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::missing_site);
      CHECK(std::string(e.what()).find("missing site (1)") != std::string::npos);
    }
  }
  SUBCASE("probability sum outside tolerance names the site") {
    const std::string text = R"({"dims": [1], "sites": [
      {"coord": [0], "jumps": [{"step": [1], "prob": 0.5}, {"step": [-1], "prob": 0.499}]}]})";
    try {
      parse_environment(text);
      FAIL("bad sum accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::probability_sum);
      CHECK(std::string(e.what()).find("site (0)") != std::string::npos);
    }
    ParseOptions opts;
    opts.renormalize = true;
    const auto env = parse_environment(text, opts);
    CHECK(env.law(0).total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(env.law(0).prob(IntVec{1}) == doctest::Approx(0.5 / 0.999));
  }
  SUBCASE("other schema violations") {
    CHECK(parse_code(R"({"dims": [1], "sites": [)") == ErrorCode::syntax);
    CHECK(parse_code(R"({"dims": [1], "sites": [{"coord": [0], "jumps": [{"step": [1], "prob": 0}, {"step": [-1], "prob": 1}]}]})") ==
          ErrorCode::nonpositive_probability);
    CHECK(parse_code(R"({"dims": [1], "sites": [{"coord": [0], "jumps": [{"step": [1], "prob": 1}]},
                                                {"coord": [0], "jumps": [{"step": [1], "prob": 1}]}]})") ==
          ErrorCode::duplicate_site);
    CHECK(parse_code(R"({"dims": [1], "sites": [{"coord": [1], "jumps": [{"step": [1], "prob": 1}]}]})") ==
          ErrorCode::schema);
    CHECK(parse_code(R"({"dims": [1], "sites": [{"coord": [0], "jumps": [{"step": [1, 0], "prob": 1}]}]})") ==
          ErrorCode::dimension_mismatch);
    CHECK(parse_code(R"({"dims": [1], "sites": [{"coord": [0], "jumps": [{"step": [1], "prob": "1/0"}]}]})") ==
          ErrorCode::syntax);
    CHECK(parse_code(R"({"dims": [1], "extra": 1, "sites": []})") == ErrorCode::schema);
  }
  SUBCASE("syntax errors carry a position") {
    try {
      parse_environment("{\n \"dims\": [1,\n }");
      FAIL("syntax error accepted");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
}

TEST_CASE("serialize then parse is the identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto env = rwpe::testing::random_env(rng, 1 + trial % 3, 3, false);
    const auto text = serialize_environment(env);
    const auto back = parse_environment(text);
    REQUIRE(back.dims() == env.dims());
    for (std::size_t s = 0; s < env.num_sites(); ++s) {
      REQUIRE(back.law(s).support_size() == env.law(s).support_size());
      for (std::size_t k = 0; k < env.law(s).support_size(); ++k) {
        CHECK(back.law(s).jumps()[k].step == env.law(s).jumps()[k].step);
        CHECK(back.law(s).jumps()[k].prob == env.law(s).jumps()[k].prob);
      }
    }
    CHECK(serialize_environment(back) == text);
  }
  // Rationals are re-emitted verbatim.
  const auto text = serialize_environment(parse_environment(kTwoSite));
  CHECK(text.find("\"7/10\"") != std::string::npos);
  CHECK(serialize_environment(parse_environment(text)) == text);
}

TEST_CASE("make_counterexample follows the closed forms") {
  const auto env = make_counterexample(2.0, 0.1);
  const auto& law = env.law(0);
  CHECK(law.prob(IntVec{1, 0}) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(law.prob(IntVec{-1, 0}) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(law.prob(IntVec{0, 1}) == doctest::Approx(0.7 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(law.prob(IntVec{0, -1}) == doctest::Approx(0.7 / 3.0).epsilon(1e-15));
  const auto m = law.mean(2);
  CHECK(m[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(m[1] == doctest::Approx(0.7 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(make_counterexample(1.0, 0.1), Error);
  CHECK_THROWS_AS(make_counterexample(2.0, 0.0), Error);
  CHECK_THROWS_AS(make_counterexample(4.0, 0.2), Error);
}

TEST_CASE("make_tilted_conductance") {
  const TorusDims unit({1, 1});
  SUBCASE("no tilt gives the simple symmetric walk") {
    const auto env = make_tilted_conductance(unit, EdgeWeights(2, 1.0), std::vector<double>{0.0, 0.0});
    for (const auto& j : env.law(0).jumps()) CHECK(j.prob == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("tilt along e_1") {
    const double t = 0.37;
    const auto env = make_tilted_conductance(unit, EdgeWeights(2, 1.0), std::vector<double>{t, 0.0});
    const double z = 2.0 * std::cosh(t) + 2.0;
    CHECK(env.law(0).prob(IntVec{1, 0}) == doctest::Approx(std::exp(t) / z).epsilon(1e-14));
    CHECK(env.law(0).prob(IntVec{-1, 0}) == doctest::Approx(std::exp(-t) / z).epsilon(1e-14));
    CHECK(env.law(0).prob(IntVec{0, 1}) == doctest::Approx(1.0 / z).epsilon(1e-14));
    CHECK(env.law(0).prob(IntVec{0, -1}) == doctest::Approx(1.0 / z).epsilon(1e-14));
  }
  SUBCASE("periodic: laws depend on s only through the torus site") {
    const TorusDims dims({3, 2});
    EdgeWeights s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const auto env = make_tilted_conductance(dims, s, std::vector<double>{0.4, -0.2});
    // Site (1,0) has index 2. Axis 0 edges: {(1,0),(2,0)} is s[4], {(0,0),(1,0)} is s[0].
    // Axis 1 edges: {(1,0),(1,1)} is s[5], {(1,1),(1,2)~(1,0)} is s[7].
    const double up = 5 * std::exp(0.4), down = 1 * std::exp(-0.4);
    const double right = 6 * std::exp(-0.2), left = 8 * std::exp(0.2);
    const double z = up + down + right + left;
    const auto& law = env.law(dims.index_of(IntVec{1, 0}));
    CHECK(law.prob(IntVec{1, 0}) == doctest::Approx(up / z).epsilon(1e-14));
    CHECK(law.prob(IntVec{-1, 0}) == doctest::Approx(down / z).epsilon(1e-14));
    CHECK(law.prob(IntVec{0, 1}) == doctest::Approx(right / z).epsilon(1e-14));
    CHECK(law.prob(IntVec{0, -1}) == doctest::Approx(left / z).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_tilted_conductance(unit, EdgeWeights{1.0, 0.0}, std::vector<double>{0.0, 0.0}), Error);
  CHECK_THROWS_AS(make_tilted_conductance(unit, EdgeWeights{1.0}, std::vector<double>{0.0, 0.0}), Error);
}

TEST_CASE("validate") {
  const auto srw = rwpe::testing::srw(2);
  auto r = validate(srw);
  CHECK(r.ok());
  CHECK(r.nearest_neighbour);
  CHECK(r.strictly_positive);

  const auto long_step = make_env({1, 1}, {{{{2, 0}, 0.25}, {{-1, 0}, 0.25}, {{0, 1}, 0.25}, {{0, -1}, 0.25}}});
  r = validate(long_step);
  CHECK(r.ok());
  CHECK_FALSE(r.nearest_neighbour);
  CHECK_FALSE(r.strictly_positive);

  r = validate(make_counterexample(2.0, 0.1));
  CHECK(r.nearest_neighbour);
  CHECK(r.strictly_positive);
  CHECK(r.max_sum_defect < 1e-15);
}
