#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "mon/pfo.hpp"
#include "oracles.hpp"

using namespace mon;

TEST_CASE("triangle plan routes 10 direct and 5 via B") {
  auto in = fixture::triangle_instance();
  auto plan = solve_pfo(in);
  CHECK(plan.n.at("A") == 1);
  CHECK(plan.rates.at("A:A-C") == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(plan.rates.at("A:A-B-C") == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(plan.utility == doctest::Approx(3.0));
  CHECK(plan.optimality == Optimality::proved_optimal);
  CHECK(check_kkt(in, plan).ok());
}

TEST_CASE("single link U_B") {
  auto in = fixture::single_link_instance(10, utility_b(), 1);
  auto plan = solve_pfo(in);
  CHECK(plan.n.at("k") == 1);
  CHECK(plan.rates.at("k:A-B") == doctest::Approx(10.0));
  CHECK(plan.duals.at(link_id("A", "B")) == doctest::Approx(0.2));
  CHECK(plan.utility == doctest::Approx(2.0));
  CHECK(oracle::pfo_grid(in) == doctest::Approx(2.0));
  auto r = check_kkt(in, plan);
  CHECK(r.worst() <= 1e-7);
}

TEST_CASE("all N = 0 gives the zero plan") {
  auto in = fixture::triangle_instance();
  in.classes[0].max_sessions = 0;
  auto plan = solve_pfo(in);
  CHECK(plan.n.at("A") == 0);
  CHECK(plan.utility == 0.0);
  for (const auto& [f, x] : plan.rates) CHECK(x == 0.0);
  auto r = check_kkt(in, plan);
  CHECK(r.feasibility == 0.0);
}

TEST_CASE("single link U_A with 20 sessions") {
  auto in = fixture::single_link_instance(10, utility_a(), 20);
  auto plan = solve_pfo(in);
  double ref = oracle::pfo_grid(in);
  CHECK(ref == doctest::Approx(1.0));
  CHECK(plan.utility == doctest::Approx(ref).epsilon(1e-9));
  // n = 9..12 all reach the optimum; the fewest sessions win the tie.
  CHECK(plan.n.at("k") == 9);
  CHECK(plan.rates.at("k:A-B") == doctest::Approx(10.0 / 9.0));
  CHECK(check_kkt(in, plan).ok());
}

TEST_CASE("inner LP at fixed sessions and segments") {
  auto in = fixture::single_link_instance(10, utility_b(), 1);
  std::vector<int> one{1};
  auto s = inner_lp(in, one, {{0}});
  REQUIRE(s.status == lp::Status::optimal);
  CHECK(s.x[0] == doctest::Approx(10.0));
  CHECK(s.duals[0] == doctest::Approx(0.2));
  std::vector<int> none{0};
  auto z = inner_lp(in, none, {{0}});
  CHECK(z.objective == 0.0);
  CHECK(z.x[0] == 0.0);
  auto flat = fixture::single_link_instance(10, utility_a(), 1);
  auto f = inner_lp(flat, one, {{0}});
  REQUIRE(f.status == lp::Status::optimal);
  CHECK(f.objective == doctest::Approx(0.0));
  CHECK(f.x[0] == doctest::Approx(0.0));
}

TEST_CASE("McCormick bounds") {
  auto in = fixture::single_link_instance(10, utility_b(), 2);
  std::vector<std::pair<int, int>> point{{2, 2}};
  std::vector<std::pair<double, double>> x3{{3.0, 3.0}};
  // A degenerate box pins n x = 6, so the bound is 0.2 * 6.
  CHECK(mccormick_bound(in, point, x3) == doctest::Approx(1.2));
  auto one = fixture::single_link_instance(10, utility_b(), 1);
  std::vector<std::pair<int, int>> nbox{{0, 1}};
  std::vector<std::pair<double, double>> xbox{{0.0, 10.0}};
  double b = mccormick_bound(one, nbox, xbox);
  CHECK(b >= 2.0 - 1e-9);
  CHECK(b <= 2.0 + 1e-6);
}

TEST_CASE("McCormick bound dominates the optimum") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto in = oracle::tiny_instance(seed);
    std::vector<std::pair<int, int>> nbox;
    for (const auto& k : in.classes) nbox.push_back({0, k.max_sessions});
    std::vector<std::pair<double, double>> xbox;
    for (std::size_t f = 0; f < in.flows.size(); ++f) xbox.push_back({0.0, 10.0});
    CHECK(mccormick_bound(in, nbox, xbox) >= solve_pfo(in).utility - 1e-7);
  }
}

TEST_CASE("KKT residuals") {
  auto in = fixture::single_link_instance(10, utility_b(), 1);
  auto plan = solve_pfo(in);
  CHECK(check_kkt(in, plan).worst() <= 1e-7);
  auto slack = plan;
  slack.rates["k:A-B"] = 5.0;
  auto r = check_kkt(in, slack);
  CHECK(r.slackness > 0.0);
  CHECK_FALSE(r.ok());
  auto inflated = plan;
  inflated.rates["k:A-B"] = 12.0;
  CHECK(check_kkt(in, inflated).feasibility == doctest::Approx(2.0));
  PfoPlan zero{{{"k", 0}}, {{"k:A-B", 0.0}}, {{link_id("A", "B"), 0.0}}, 0.0};
  CHECK(check_kkt(in, zero).feasibility == 0.0);
  PfoPlan missing{{}, {}, {}, 0.0};
  CHECK_THROWS_AS(check_kkt(in, missing), LookupError);
}

TEST_CASE("solver matches the grid oracle on tiny instances") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    auto in = oracle::tiny_instance(seed);
    auto plan = solve_pfo(in);
    CAPTURE(seed);
    CHECK(std::abs(plan.utility - oracle::pfo_grid(in)) <= 1e-3);
    if (!oracle::segment_bound_active(in, plan)) CHECK(check_kkt(in, plan).ok());
  }
}

TEST_CASE("branch and bound agrees with enumeration") {
  SolverConfig bb;
  bb.enumeration_budget = 0;
  bb.concave_fast_path = false;
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    auto in = oracle::tiny_instance(seed);
    CAPTURE(seed);
    CHECK(solve_pfo(in, bb).utility == doctest::Approx(solve_pfo(in).utility).epsilon(1e-6));
  }
}

TEST_CASE("plan invariants and determinism") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto in = oracle::mapping_instance(seed);
    auto plan = solve_pfo(in);
    CHECK(plan == solve_pfo(in));
    for (const auto& k : in.classes) {
      CHECK(plan.n.at(k.id) >= 0);
      CHECK(plan.n.at(k.id) <= k.max_sessions);
    }
    auto loads = link_loads(in, plan);
    for (std::size_t l = 0; l < loads.size(); ++l) CHECK(loads[l] <= in.topology.links()[l].capacity + 1e-7);
    double u = 0.0;
    auto x = class_rates(in, plan);
    for (const auto& k : in.classes) u += plan.n.at(k.id) * k.utility(x.at(k.id));
    CHECK(plan.utility == doctest::Approx(u));
  }
}

TEST_CASE("a rate held just past an upward jump is not a capacity KKT point") {
  // k1 jumps from 0.35 to 0.45 at x = 2; three sessions sit just above it.
  auto t = fixture::single_link(10);
  PiecewiseLinearUtility stepped({{0, 1, 0.2, 0}, {1, 2, 0.1, 0.15}, {2, kInf, 0.1, 0.25}});
  TrafficClass a{"a", "A", "B", 2, utility_b()}, b{"b", "A", "B", 3, stepped};
  PfoInstance in{t, {a, b}, {{"a:A-B", "a", {link_id("A", "B")}}, {"b:A-B", "b", {link_id("A", "B")}}}};
  auto plan = solve_pfo(in);
  CHECK(plan.utility == doctest::Approx(2.15).epsilon(1e-6));
  CHECK(std::abs(plan.utility - oracle::pfo_grid(in)) <= 1e-5);
  CHECK(oracle::segment_bound_active(in, plan));
  CHECK(check_kkt(in, plan).gradient > 1e-6);
}

TEST_CASE("invalid instances are rejected") {
  auto in = fixture::triangle_instance();
  in.flows[0].route = {link_id("A", "B")};
  CHECK_THROWS_AS(solve_pfo(in), InputError);
  auto dup = fixture::triangle_instance();
  dup.flows.push_back(dup.flows[0]);
  CHECK_THROWS_AS(solve_pfo(dup), InputError);
}
