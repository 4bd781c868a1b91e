#pragma once

#include "mon/net_model.hpp"
#include "mon/pfo.hpp"

namespace fixture {

// A<->B 10, A<->C 10, B<->C 5 Mbps, both directions.
inline mon::Topology triangle() {
  std::vector<mon::Node> nodes{{"A", mon::NodeKind::site}, {"B", mon::NodeKind::site}, {"C", mon::NodeKind::site}};
  std::vector<mon::Link> links;
  auto both = [&](const mon::NodeId& a, const mon::NodeId& b, double c) {
    links.push_back({mon::link_id(a, b), a, b, c});
    links.push_back({mon::link_id(b, a), b, a, c});
  };
  both("A", "B", 10);
  both("A", "C", 10);
  both("B", "C", 5);
  return mon::Topology("triangle", nodes, links);
}

inline mon::Topology single_link(double capacity) {
  return mon::Topology("link", {{"A", mon::NodeKind::site}, {"B", mon::NodeKind::site}},
                       {{mon::link_id("A", "B"), "A", "B", capacity}});
}

// One class over the single A->B link.
inline mon::PfoInstance single_link_instance(double capacity, const mon::PiecewiseLinearUtility& u, int sessions) {
  auto t = single_link(capacity);
  mon::TrafficClass k{"k", "A", "B", sessions, u};
  auto routes = mon::enumerate_paths(t, "A", "B", 1);
  return {t, {k}, mon::make_flows(t, k, routes)};
}

// Class A->C U_B N = 1 over the direct and via-B routes.
inline mon::PfoInstance triangle_instance() {
  auto t = triangle();
  mon::TrafficClass k{"A", "A", "C", 1, mon::utility_b()};
  auto routes = mon::enumerate_paths(t, "A", "C", 2);
  return {t, {k}, mon::make_flows(t, k, routes)};
}

}  // namespace fixture
