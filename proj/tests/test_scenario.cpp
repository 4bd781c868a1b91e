#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "mon/graphml.hpp"
#include "mon/scenario.hpp"

using namespace mon;

namespace {

std::string graphml(const std::string& body) {
  return R"(<?xml version="1.0"?><graphml xmlns="http://graphml.graphdrawing.org/xmlns">)"
         R"(<graph edgedefault="undirected">)" +
         body + "</graph></graphml>";
}

}  // namespace

TEST_CASE("minimal GraphML") {
  auto t = parse_graphml(graphml(R"(<node id="0"/><node id="1"/><edge source="0" target="1"/>)"), "mini", 7);
  CHECK(t.nodes().size() == 2);
  CHECK(t.links().size() == 2);
  for (const auto& n : t.nodes()) CHECK(n.kind == NodeKind::router);
  CHECK(t.link(link_id("1", "0")).capacity == 7.0);
}

TEST_CASE("GraphML rejects malformed graphs") {
  CHECK_THROWS_AS(parse_graphml(graphml(R"(<node id="0"/><node id="1"/><edge source="0" target="1"/>)"
                                        R"(<edge source="1" target="0"/>)")),
                  ParseError);
  CHECK_THROWS_AS(parse_graphml(graphml(R"(<node id="0"/><edge source="0" target="0"/>)")), ParseError);
  CHECK_THROWS_AS(parse_graphml(graphml(R"(<node id="0"/><edge source="0" target="9"/>)")), ParseError);
  CHECK_THROWS_AS(parse_graphml(graphml(R"(<node/>)")), ParseError);
  CHECK_THROWS_AS(parse_graphml("<graphml><graph>"), ParseError);
  CHECK_THROWS_AS(parse_graphml("<other/>"), ParseError);
}

TEST_CASE("Abilene has 11 routers and 28 directed links") {
  auto t = load_graphml(topology_path("Abilene"));
  CHECK(t.nodes().size() == 11);
  CHECK(t.links().size() == 28);
}

TEST_CASE("degree ranking uses natural id order") {
  CHECK(natural_less("2", "13"));
  CHECK_FALSE(natural_less("13", "2"));
  CHECK(natural_less("a", "b"));
  auto s = build_paper_scenario("failure-large", 1);
  auto top = top_degree_routers(s.topology, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0] == "13");
  CHECK(top[1] == "2");
}

TEST_CASE("triangle-basic setup") {
  auto s = build_paper_scenario("triangle-basic");
  CHECK(s.topology.link(link_id("B", "C")).capacity == 5.0);
  CHECK(s.topology.link(link_id("C", "B")).capacity == 5.0);
  CHECK(s.topology.link(link_id("A", "B")).capacity == 10.0);
  CHECK(s.topology.link(link_id("A", "C")).capacity == 10.0);
  CHECK(s.classes.classes.size() == 2);
  CHECK(s.paths.max_hops == 2);
  CHECK(s.events.empty());
}

TEST_CASE("demand-sweep plan admits eleven class-A sessions") {
  auto s = build_paper_scenario("demand-sweep");
  auto plan = solve_pfo(scenario_instance(s));
  CHECK(plan.n.at("A") == 11);
  CHECK(plan.n.at("A") * plan.rates.at("A:A-B-C") == doctest::Approx(3.0));
}

TEST_CASE("failure scenarios schedule failure and re-run") {
  auto tri = build_paper_scenario("failure-triangle");
  REQUIRE(tri.events.size() == 3);
  CHECK(tri.events[0].t == 60.0);
  CHECK(std::holds_alternative<RerunPfo>(tri.events.back().action));
  CHECK(tri.events.back().t == 140.0);
  auto big = build_paper_scenario("failure-large", 1);
  CHECK(big.events.front().t == 40.0);
  CHECK(std::holds_alternative<RerunPfo>(big.events.back().action));
  CHECK(big.events.back().t == 150.0);
  for (const auto& l : big.topology.links()) CHECK(l.capacity == 10.0);
}

TEST_CASE("unknown scenario names are rejected") {
  CHECK_THROWS_AS(build_paper_scenario("nope"), ScenarioError);
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& name : paper_scenario_names()) {
    CAPTURE(name);
    auto s = build_paper_scenario(name, 1);
    auto back = scenario_from_json(to_json(s));
    CHECK(back == s);
  }
}

TEST_CASE("scenario validation") {
  auto s = build_paper_scenario("triangle-basic");
  s.duration = 0.0;
  CHECK_THROWS_AS(validate(s), ScenarioError);
  s = build_paper_scenario("triangle-basic");
  s.events.push_back({10.0, SetCapacity{"X->Y", 1.0}});
  CHECK_THROWS_AS(validate(s), ScenarioError);
  s = build_paper_scenario("triangle-basic");
  s.events.push_back({90.0, RerunPfo{}});
  CHECK_THROWS_AS(validate(s), ScenarioError);
}

TEST_CASE("empty timeline matches the manual pipeline") {
  auto s = build_paper_scenario("triangle-basic");
  auto r = run_experiment(s);
  auto in = scenario_instance(s);
  auto plan = solve_pfo(in);
  auto trace = simulate(in, {compute_weights(plan, in, s.gamma), plan.rates}, s.duration);
  REQUIRE(r.trace.samples.size() == trace.samples.size());
  CHECK(r.trace.last().send == trace.last().send);
  CHECK(r.plans.size() == 1);
  CHECK(r.plans[0].plan == plan);
  REQUIRE(r.summary.size() == 2);
  for (const auto& row : r.summary) CHECK(std::abs(row.actual - row.target) <= 0.05 * row.target);
}

TEST_CASE("no classes gives a flat zero trace") {
  Scenario s;
  s.name = "empty";
  s.topology = fixture::triangle();
  s.duration = 5.0;
  auto r = run_experiment(s);
  for (const auto& smp : r.trace.samples) CHECK(smp.utility == 0.0);
  CHECK(r.summary.empty());
}

TEST_CASE("failure-triangle phases") {
  auto r = run_experiment(build_paper_scenario("failure-triangle"));
  REQUIRE(r.phases.size() == 3);
  CHECK(r.phases[0].mean_utility > r.phases[2].mean_utility);
  CHECK(r.phases[2].mean_utility > r.phases[1].mean_utility);
  CHECK(r.plans.size() == 2);
  std::ostringstream a, b;
  write_phases_csv(a, r);
  write_phases_csv(b, run_experiment(build_paper_scenario("failure-triangle")));
  CHECK(a.str() == b.str());
}

TEST_CASE("hop study is monotone on Abilene") {
  auto s = build_paper_scenario("hop-study", 1);
  std::vector<Scenario> setups{s};
  std::vector<int> limits{1, 2, 3};
  auto rows = hop_study(setups, limits);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].utility >= rows[i - 1].utility * (1.0 - 1e-9));
    CHECK(rows[i].flows >= rows[i - 1].flows);
  }
}

TEST_CASE("random path study extremes") {
  auto s = build_paper_scenario("random-path-study", 1);
  std::vector<int> ks{0, 1000, -1};
  auto rows = random_path_study(s, ks, 2, 1);
  REQUIRE(rows.size() == 3);
  auto direct = s;
  direct.paths.kind = PathPolicy::Kind::max_hops;
  direct.paths.max_hops = 1;
  auto all = s;
  all.paths.kind = PathPolicy::Kind::max_hops;
  double frac = solve_pfo(scenario_instance(direct)).utility / solve_pfo(scenario_instance(all)).utility;
  CHECK(rows[0].mean_fraction == doctest::Approx(frac));
  CHECK(rows[1].mean_fraction == doctest::Approx(1.0));
  CHECK(rows[2].mean_fraction == doctest::Approx(1.0));
  CHECK(rows[0].min_fraction == rows[0].max_fraction);
}

TEST_CASE("random policy is seeded") {
  auto s = build_paper_scenario("random-path-study", 3);
  CHECK(scenario_instance(s).flows == scenario_instance(s).flows);
}
