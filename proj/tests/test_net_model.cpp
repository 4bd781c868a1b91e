#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "mon/net_model.hpp"
#include "oracles.hpp"

using namespace mon;

TEST_CASE("utility A closed form") {
  auto u = utility_a();
  CHECK(eval_utility(u, 0.8) == 0.0);
  CHECK(eval_utility(u, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(eval_utility(u, 2.0) == doctest::Approx(0.124).epsilon(1e-12));
  CHECK(eval_utility(u, 1.2) == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(eval_utility(utility_b(), 0.0) == 0.0);
}

TEST_CASE("utility A matches min form on a grid") {
  auto u = utility_a();
  for (int i = 0; i <= 1000; ++i) {
    double x = i * 0.01;
    double ref = x <= 0.8 ? 0.0 : std::min(0.1 * x, 0.005 * x + 0.114);
    CHECK(u(x) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("utility rejects bad input") {
  CHECK_THROWS_AS(eval_utility(utility_a(), -1.0), DomainError);
  CHECK_THROWS_AS(eval_utility(utility_a(), std::nan("")), DomainError);
  CHECK_THROWS_AS(PiecewiseLinearUtility({{0.0, 1.0, -1.0, 0.0}, {1.0, kInf, 0.0, 0.0}}), InputError);
  CHECK_THROWS_AS(PiecewiseLinearUtility({{0.0, 1.0, 1.0, 0.0}, {1.0, kInf, 0.0, 0.5}}), InputError);
  CHECK_THROWS_AS(PiecewiseLinearUtility({{0.5, kInf, 1.0, 0.0}}), InputError);
  CHECK_THROWS_AS(PiecewiseLinearUtility(std::vector<Piece>{}), InputError);
}

TEST_CASE("utility breakpoints use the left piece") {
  auto u = utility_a();
  CHECK(u.piece_index(0.8) == 0);
  CHECK(u.piece_index(0.8000001) == 1);
  CHECK(u.jumps_at_lower(1));
  CHECK_FALSE(u.is_concave_from_origin());
  CHECK(utility_b().is_linear_from_origin());
}

TEST_CASE("random utilities are non-decreasing") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto u = oracle::random_utility(rng);
    double prev = 0.0;
    for (int j = 0; j <= 400; ++j) {
      double v = u(j * 0.025);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("cumulative utility") {
  std::vector<TrafficClass> one{{"B", "A", "B", 1, utility_b()}};
  CHECK(cumulative_utility(one, {{"B", 1}}, {{"B", 5.0}}) == doctest::Approx(1.0));
  CHECK(cumulative_utility(one, {{"B", 0}}, {{"B", 5.0}}) == 0.0);
  std::vector<TrafficClass> two{{"A", "A", "B", 3, utility_a()}, {"B", "A", "B", 1, utility_b()}};
  CHECK(cumulative_utility(two, {{"A", 2}, {"B", 1}}, {{"A", 1.0}, {"B", 2.0}}) == doctest::Approx(0.6));
  CHECK(cumulative_utility(two, {{"A", 0}, {"B", 0}}, {{"A", 1.0}, {"B", 2.0}}) == 0.0);
  CHECK(cumulative_utility(two, {{"A", 2}}, {{"A", 1.0}}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(cumulative_utility(two, {{"Z", 1}}, {{"A", 1.0}}), LookupError);
  CHECK_THROWS_AS(cumulative_utility(two, {{"B", 1}}, {{"A", 1.0}}), LookupError);
  CHECK_THROWS_AS(cumulative_utility(two, {{"A", -1}, {"B", 1}}, {{"A", 1.0}, {"B", 1.0}}), DomainError);
}

TEST_CASE("cumulative utility is additive and non-decreasing in rates") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<TrafficClass> cls{{"a", "A", "B", 3, oracle::random_utility(rng)},
                                  {"b", "A", "B", 3, oracle::random_utility(rng)}};
    double xa = x(rng), xb = x(rng);
    double both = cumulative_utility(cls, {{"a", 2}, {"b", 3}}, {{"a", xa}, {"b", xb}});
    double sep = 2 * cls[0].utility(xa) + 3 * cls[1].utility(xb);
    CHECK(both == doctest::Approx(sep).epsilon(1e-12));
    double more = cumulative_utility(cls, {{"a", 2}, {"b", 3}}, {{"a", xa + 0.5}, {"b", xb}});
    CHECK(more >= both - 1e-12);
  }
}

TEST_CASE("topology invariants") {
  std::vector<Node> ab{{"A", NodeKind::site}, {"B", NodeKind::site}};
  CHECK_THROWS_AS(Topology("t", ab, {{"x", "A", "A", 1}}), InputError);
  CHECK_THROWS_AS(Topology("t", ab, {{"x", "A", "Z", 1}}), InputError);
  CHECK_THROWS_AS(Topology("t", ab, {{"x", "A", "B", 0}}), InputError);
  CHECK_THROWS_AS(Topology("t", ab, {{"x", "A", "B", 1}, {"y", "A", "B", 2}}), InputError);
  CHECK_THROWS_AS(Topology("t", {{"A", NodeKind::site}, {"A", NodeKind::router}}, {}), InputError);
  auto t = fixture::triangle();
  CHECK(t.links().size() == 6);
  CHECK_THROWS_AS(t.link("nope"), LookupError);
  CHECK_THROWS_AS(t.set_capacity(link_id("A", "B"), -1), InputError);
}

TEST_CASE("triangle path enumeration") {
  auto t = fixture::triangle();
  auto one = enumerate_paths(t, "A", "C", 1);
  REQUIRE(one.size() == 1);
  CHECK(route_label(t, one[0]) == "A-C");
  auto two = enumerate_paths(t, "A", "C", 2);
  REQUIRE(two.size() == 2);
  CHECK(route_label(t, two[0]) == "A-C");
  CHECK(route_label(t, two[1]) == "A-B-C");
  CHECK(overlay_hops(t, two[1]) == 2);
  CHECK(enumerate_paths(t, "A", "C", 4).size() == 2);
}

TEST_CASE("two-node topology has only the direct path") {
  auto t = fixture::single_link(10);
  CHECK(enumerate_paths(t, "A", "B", 2).size() == 1);
  CHECK(enumerate_paths(t, "B", "A", 2).empty());
  CHECK_THROWS_AS(enumerate_paths(t, "A", "B", 0), InputError);
}

TEST_CASE("leaf sites route through their host routers") {
  // Sites S1..S3 hang off routers 1..3 on a router chain 1 - 2 - 3.
  std::vector<Node> nodes{{"1", NodeKind::router}, {"2", NodeKind::router}, {"3", NodeKind::router},
                          {"S1", NodeKind::site},  {"S2", NodeKind::site},  {"S3", NodeKind::site}};
  std::vector<Link> links;
  auto both = [&](const NodeId& a, const NodeId& b) {
    links.push_back({link_id(a, b), a, b, 10});
    links.push_back({link_id(b, a), b, a, 10});
  };
  both("1", "2");
  both("2", "3");
  both("S1", "1");
  both("S2", "2");
  both("S3", "3");
  Topology t("chain", nodes, links);
  auto paths = enumerate_paths(t, "S1", "S3", 2);
  REQUIRE(paths.size() == 2);
  CHECK(route_label(t, paths[0]) == "S1-1-2-3-S3");
  CHECK(route_label(t, paths[1]) == "S1-1-2-S2-2-3-S3");
  CHECK(overlay_hops(t, paths[1]) == 2);
  TrafficClass k{"k", "S1", "S3", 1, utility_b()};
  for (const auto& f : make_flows(t, k, paths)) CHECK_NOTHROW(validate_flow(t, k, f));
}

TEST_CASE("enumerated routes are valid and within the hop limit") {
  for (int seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    auto t = oracle::random_topology(rng, 4, 8, 1, 10);
    for (int h = 1; h <= 3; ++h) {
      auto routes = enumerate_paths(t, "A", "D", h);
      TrafficClass k{"k", "A", "D", 1, utility_b()};
      for (const auto& f : make_flows(t, k, routes)) {
        CHECK_NOTHROW(validate_flow(t, k, f));
        CHECK(overlay_hops(t, f.route) <= h);
      }
      CHECK(enumerate_paths(t, "A", "D", h + 1).size() >= routes.size());
    }
  }
}

TEST_CASE("validate_flow rejects broken routes") {
  auto t = fixture::triangle();
  TrafficClass k{"k", "A", "C", 1, utility_b()};
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "k", {}}), InputError);
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "k", {link_id("A", "B")}}), InputError);
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "k", {link_id("A", "B"), link_id("A", "C")}}), InputError);
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "k", {"A->Q"}}), InputError);
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "k", {link_id("A", "B"), link_id("B", "A"), link_id("A", "C")}}),
                  InputError);
  CHECK_THROWS_AS(validate_flow(t, k, {"f", "other", {link_id("A", "C")}}), InputError);
}

TEST_CASE("random path sampling") {
  auto t = fixture::triangle();
  std::vector<Route> five(5, enumerate_paths(t, "A", "C", 1)[0]);
  CHECK(sample_random_paths(five, 0, 1).empty());
  std::vector<Route> three{{"a"}, {"b"}, {"c"}};
  CHECK(sample_random_paths(three, 5, 1).size() == 3);
  std::vector<Route> many;
  for (int i = 0; i < 20; ++i) many.push_back({"l" + std::to_string(i)});
  auto a = sample_random_paths(many, 1, 42), b = sample_random_paths(many, 1, 42);
  CHECK(a == b);
  auto c = sample_random_paths(many, 7, 9);
  std::set<Route> unique(c.begin(), c.end());
  CHECK(unique.size() == 7);
}
