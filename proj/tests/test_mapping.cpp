#include <doctest.h>

#include "fixtures.hpp"
#include "mon/mapping.hpp"
#include "oracles.hpp"

using namespace mon;

namespace {

// Class k A->C over the two-link route A->B->C.
PfoInstance two_hop(int sessions) {
  Topology t("line", {{"A", NodeKind::site}, {"B", NodeKind::site}, {"C", NodeKind::site}},
             {{link_id("A", "B"), "A", "B", 10}, {link_id("B", "C"), "B", "C", 10}});
  TrafficClass k{"k", "A", "C", sessions, utility_b()};
  auto routes = enumerate_paths(t, "A", "C", 2);
  return {t, {k}, make_flows(t, k, routes)};
}

}  // namespace

TEST_CASE("weight from the single-link plan") {
  auto in = fixture::single_link_instance(10, utility_b(), 1);
  auto plan = solve_pfo(in);
  auto cfg = compute_weights(plan, in);
  CHECK(cfg.weights.at("k:A-B") == doctest::Approx(2.0));
  CHECK(cfg.sessions.at("k") == 1);
  CHECK(cfg.gamma == 0.001);
  CHECK(cfg.gamma_norm == doctest::Approx(0.001 / 2.0));
}

TEST_CASE("weight arithmetic") {
  auto in = two_hop(3);
  const FlowId f = in.flows[0].id;
  PfoPlan plan{{{"k", 3}}, {{f, 2.0}}, {{link_id("A", "B"), 0.04}, {link_id("B", "C"), 0.06}}, 0.0};
  CHECK(compute_weights(plan, in).weights.at(f) == doctest::Approx(0.6));
  plan.rates[f] = 0.0;
  CHECK(compute_weights(plan, in).weights.at(f) == 0.0);
}

TEST_CASE("weights are linear in the duals") {
  auto in = fixture::triangle_instance();
  auto plan = solve_pfo(in);
  auto doubled = plan;
  for (auto& [l, y] : doubled.duals) y *= 2.0;
  auto a = compute_weights(plan, in), b = compute_weights(doubled, in);
  for (const auto& [f, w] : a.weights) CHECK(b.weights.at(f) == doctest::Approx(2.0 * w));
}

TEST_CASE("mapping errors") {
  auto in = fixture::single_link_instance(10, utility_b(), 1);
  auto plan = solve_pfo(in);
  CHECK_THROWS_AS(compute_weights(plan, in, 0.0), ConfigError);
  auto missing = plan;
  missing.duals.clear();
  CHECK_THROWS_AS(compute_weights(missing, in), ConfigError);
}

TEST_CASE("gradient match on solved plans") {
  auto tri = fixture::triangle_instance();
  auto plan = solve_pfo(tri);
  auto report = check_gradient_match(plan, tri, compute_weights(plan, tri));
  CHECK(report.ok());
  for (const auto& e : report.entries) CHECK(e.outcome == GradientEntry::Outcome::pass);
}

TEST_CASE("gradient match at a utility breakpoint uses the interval") {
  // C = 1.2 puts the single session exactly on the kink of U_A.
  auto in = fixture::single_link_instance(1.2, utility_a(), 1);
  auto plan = solve_pfo(in);
  REQUIRE(plan.rates.at("k:A-B") == doctest::Approx(1.2));
  auto report = check_gradient_match(plan, in, compute_weights(plan, in));
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].outcome == GradientEntry::Outcome::interval_pass);
  CHECK(report.ok());
}

TEST_CASE("gradient match skips idle flows and flags bad weights") {
  auto in = two_hop(1);
  const FlowId f = in.flows[0].id;
  PfoPlan idle{{{"k", 1}}, {{f, 0.0}}, {{link_id("A", "B"), 0.0}, {link_id("B", "C"), 0.0}}, 0.0};
  auto r = check_gradient_match(idle, in, compute_weights(idle, in));
  CHECK(r.entries[0].outcome == GradientEntry::Outcome::skipped);
  auto plan = solve_pfo(in);
  auto cfg = compute_weights(plan, in);
  cfg.weights[f] *= 1.5;
  auto bad = check_gradient_match(plan, in, cfg);
  CHECK(bad.entries[0].outcome == GradientEntry::Outcome::fail);
  CHECK_FALSE(bad.ok());
}

TEST_CASE("gradient match holds on random solved plans") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto in = oracle::mapping_instance(seed);
    auto plan = solve_pfo(in);
    CAPTURE(seed);
    if (oracle::segment_bound_active(in, plan)) continue;
    CHECK(check_gradient_match(plan, in, compute_weights(plan, in)).ok());
  }
}
