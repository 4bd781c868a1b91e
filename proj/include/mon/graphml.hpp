#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mon/net_model.hpp"

namespace mon {

/**
 * Topology Zoo GraphML: every <node> becomes a router, every undirected
 * <edge> a pair of directed links of `capacity` Mbps. Throws ParseError with
 * the offending line or element on malformed input, missing ids, self-loops
 * and duplicate edges.
 */
Topology parse_graphml(std::string_view xml, const std::string& name = "", double capacity = 10.0);

Topology load_graphml(const std::string& path, double capacity = 10.0);

/// Name of the site attached to a router.
NodeId site_for(const NodeId& router);

/// Adds one site per host router, linked both ways with `uplink_mbps`.
Topology attach_sites(const Topology& routers, std::span<const NodeId> hosts, double uplink_mbps);

/// Ordering on ids that compares all-digit ids numerically.
bool natural_less(const std::string& a, const std::string& b);

/// Routers ranked by router-to-router out-degree, ties by natural id order.
std::vector<NodeId> top_degree_routers(const Topology& t, std::size_t count);

/// data/topologies/<name>.graphml under the compiled-in data directory.
std::string topology_path(const std::string& name);

}  // namespace mon
