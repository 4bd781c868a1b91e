#include <doctest.h>

#include <cmath>
#include <random>

#include "mon/lp.hpp"
#include "oracles.hpp"

using namespace mon;
using namespace mon::lp;

namespace {

void check_verified(const LinearProgram& lp, const Solution& s) {
  auto v = verify(lp, s);
  CHECK(v.primal <= 1e-7);
  CHECK(v.dual_sign <= 1e-7);
  CHECK(v.slackness <= 1e-7);
  CHECK(v.bound_slackness <= 1e-7);
  CHECK(v.gap <= 1e-7);
}

}  // namespace

TEST_CASE("single bound row") {
  LinearProgram lp;
  lp.add_var(1.0, 0.0, kInf);
  lp.add_row({{0, 1.0}}, 5.0);
  auto s = solve(lp);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[0] == doctest::Approx(5.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
  check_verified(lp, s);
}

TEST_CASE("sum row binds, side row slack") {
  LinearProgram lp;
  lp.add_var(1.0, 0.0, kInf);
  lp.add_var(1.0, 0.0, kInf);
  lp.add_row({{0, 1.0}, {1, 1.0}}, 3.0);
  lp.add_row({{0, 1.0}}, 1.0);
  auto s = solve(lp);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
  CHECK(s.duals[1] == doctest::Approx(0.0));
  check_verified(lp, s);
}

TEST_CASE("infeasible and unbounded") {
  LinearProgram bad;
  bad.add_var(1.0, 0.0, kInf);
  bad.add_row({{0, 1.0}}, -1.0);
  CHECK(solve(bad).status == Status::infeasible);

  LinearProgram open;
  open.add_var(1.0, 0.0, kInf);
  open.add_var(0.0, 0.0, kInf);
  open.add_row({{0, 1.0}, {1, -1.0}}, 2.0);
  CHECK(solve(open).status == Status::unbounded);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp;
  lp.add_var(std::nan(""), 0.0, 1.0);
  CHECK_THROWS_AS(solve(lp), InputError);
  LinearProgram flipped;
  flipped.add_var(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(solve(flipped), InputError);
  LinearProgram ragged;
  ragged.add_var(1.0, 0.0, 1.0);
  ragged.rows.push_back({1.0, 2.0});
  ragged.rhs.push_back(1.0);
  CHECK_THROWS_AS(solve(ragged), InputError);
}

TEST_CASE("degenerate cycling example terminates") {
  // Beale's instance cycles under textbook Dantzig pricing without anti-cycling.
  LinearProgram lp;
  lp.add_var(0.75, 0.0, kInf);
  lp.add_var(-20.0, 0.0, kInf);
  lp.add_var(0.5, 0.0, kInf);
  lp.add_var(-6.0, 0.0, kInf);
  lp.add_row({{0, 0.25}, {1, -8.0}, {2, -1.0}, {3, 9.0}}, 0.0);
  lp.add_row({{0, 0.5}, {1, -12.0}, {2, -0.5}, {3, 3.0}}, 0.0);
  lp.add_row({{2, 1.0}}, 1.0);
  auto s = solve(lp);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(1.25));
  check_verified(lp, s);
  auto bounded = lp;
  for (auto& u : bounded.upper) u = 50.0;
  CHECK(oracle::lp_vertex_max(bounded).objective == doctest::Approx(1.25));
}

TEST_CASE("random programs match vertex enumeration") {
  std::mt19937_64 rng(2024);
  int infeasible = 0;
  for (int i = 0; i < 400; ++i) {
    auto lp = oracle::random_lp(rng, i % 2 == 0 ? 0 : -6);
    auto ref = oracle::lp_vertex_max(lp);
    auto s = solve(lp);
    REQUIRE(s.status == (ref.feasible ? Status::optimal : Status::infeasible));
    if (!ref.feasible) {
      ++infeasible;
      continue;
    }
    CHECK(std::abs(s.objective - ref.objective) <= 1e-7);
    check_verified(lp, s);
  }
  CHECK(infeasible > 0);
}

TEST_CASE("solve is deterministic") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto lp = oracle::random_lp(rng);
    auto a = solve(lp), b = solve(lp);
    CHECK(a.x == b.x);
    CHECK(a.duals == b.duals);
  }
}
