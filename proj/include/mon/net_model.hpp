#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mon/error.hpp"

namespace mon {

using NodeId = std::string;
using LinkId = std::string;
using ClassId = std::string;
using FlowId = std::string;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NodeKind { site, router };

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::router;

  bool operator==(const Node&) const = default;
};

struct Link {
  LinkId id;
  NodeId src;
  NodeId dst;
  double capacity = 0.0;  // Mbps

  bool operator==(const Link&) const = default;
};

/// Canonical id of the directed link src -> dst.
LinkId link_id(const NodeId& src, const NodeId& dst);

/**
 * Directed capacitated graph. Nodes are either overlay sites or underlay
 * routers. The constructor enforces endpoint, duplicate and capacity
 * invariants and throws InputError on violation.
 */
class Topology {
 public:
  Topology() = default;
  Topology(std::string name, std::vector<Node> nodes, std::vector<Link> links);

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  bool has_node(const NodeId& id) const { return node_index_.contains(id); }
  bool has_link(const LinkId& id) const { return link_index_.contains(id); }
  const Node& node(const NodeId& id) const;
  const Link& link(const LinkId& id) const;
  std::size_t link_index(const LinkId& id) const;
  std::optional<LinkId> find_link(const NodeId& src, const NodeId& dst) const;
  bool is_site(const NodeId& id) const { return node(id).kind == NodeKind::site; }
  std::vector<NodeId> sites() const;

  /// Outgoing link indices per node, ordered by destination id.
  const std::vector<std::size_t>& out_links(const NodeId& id) const;

  void set_capacity(const LinkId& id, double mbps);

  bool operator==(const Topology& o) const {
    return name_ == o.name_ && nodes_ == o.nodes_ && links_ == o.links_;
  }

 private:
  void reindex();

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<NodeId, std::size_t> node_index_;
  std::map<LinkId, std::size_t> link_index_;
  std::map<NodeId, std::vector<std::size_t>> out_;
};

/// One linear piece U(x) = slope * x + intercept on [lo, hi].
struct Piece {
  double lo = 0.0;
  double hi = kInf;
  double slope = 0.0;
  double intercept = 0.0;

  double value(double x) const { return slope * x + intercept; }
  bool operator==(const Piece&) const = default;
};

/**
 * Non-decreasing piecewise-linear mission utility covering [0, inf).
 * Piece 0 owns [0, hi0]; piece i > 0 owns (lo_i, hi_i], so a breakpoint
 * evaluates with the left piece. Upward jumps are allowed.
 */
class PiecewiseLinearUtility {
 public:
  PiecewiseLinearUtility() = default;
  explicit PiecewiseLinearUtility(std::vector<Piece> pieces);

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  const Piece& piece(std::size_t i) const { return pieces_.at(i); }

  /// Index of the piece owning x (left semantics at breakpoints).
  std::size_t piece_index(double x) const;
  double operator()(double x) const;

  /// True when piece i starts with an upward jump (open lower bound matters).
  bool jumps_at_lower(std::size_t i) const;
  /// Concave, continuous, and U(0) == 0.
  bool is_concave_from_origin() const;
  /// Single piece through the origin: U(x) = a x.
  bool is_linear_from_origin() const;

  bool operator==(const PiecewiseLinearUtility&) const = default;

 private:
  std::vector<Piece> pieces_;
};

/// 0 for x <= 0.8, otherwise min(0.1 x, 0.005 x + 0.114).
PiecewiseLinearUtility utility_a();
/// 0.2 x.
PiecewiseLinearUtility utility_b();

struct TrafficClass {
  ClassId id;
  NodeId src;
  NodeId dst;
  int max_sessions = 0;
  PiecewiseLinearUtility utility;

  bool operator==(const TrafficClass&) const = default;
};

using Route = std::vector<LinkId>;

struct Flow {
  FlowId id;
  ClassId class_id;
  Route route;

  bool operator==(const Flow&) const = default;
};

using RateAssignment = std::map<FlowId, double>;

double eval_utility(const PiecewiseLinearUtility& u, double x);

double cumulative_utility(std::span<const TrafficClass> classes,
                          const std::map<ClassId, int>& sessions,
                          const std::map<ClassId, double>& agg_rates);

/// Nodes visited by a route, starting at the first link's source.
std::vector<NodeId> route_nodes(const Topology& t, const Route& r);
Route route_from_nodes(const Topology& t, std::span<const NodeId> nodes);
/// Number of site-to-site legs on a route.
int overlay_hops(const Topology& t, const Route& r);
/// "A-B-C" style label of the node sequence.
std::string route_label(const Topology& t, const Route& r);

/// Check class/route consistency; throws InputError.
void validate_class(const Topology& t, const TrafficClass& k);
void validate_flow(const Topology& t, const TrafficClass& k, const Flow& f);

/**
 * All routes from src to dst using at most max_overlay_hops site-to-site
 * legs. Each leg is the shortest underlay path through routers
 * (lexicographically smallest node sequence on ties). A route never visits a
 * site twice or reuses a directed link; routers may recur across legs since
 * an intermediate leaf site is entered and left through its host router.
 * Sorted by hop count, then node sequence.
 */
std::vector<Route> enumerate_paths(const Topology& t, const NodeId& src, const NodeId& dst,
                                   int max_overlay_hops);

/// enumerate_paths with the site-to-site legs cached across calls.
class PathEnumerator {
 public:
  explicit PathEnumerator(const Topology& t);

  std::vector<Route> paths(const NodeId& src, const NodeId& dst, int max_overlay_hops) const;
  /// Node sequence of the underlay leg between two sites; empty if none.
  const std::vector<NodeId>& leg(const NodeId& from, const NodeId& to) const;

 private:
  const Topology* topo_;
  std::vector<NodeId> sites_;
  std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> legs_;
};

/// Uniform sample without replacement; returns all when count >= size.
std::vector<Route> sample_random_paths(std::span<const Route> paths, std::size_t count,
                                       std::uint64_t seed);

/// Flows for a class from a list of routes; ids are "<class>:<node-label>".
std::vector<Flow> make_flows(const Topology& t, const TrafficClass& k,
                             std::span<const Route> routes);

}  // namespace mon
