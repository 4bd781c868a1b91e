#include "mon/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>

namespace mon {

LinkId link_id(const NodeId& src, const NodeId& dst) { return src + "->" + dst; }

Topology::Topology(std::string name, std::vector<Node> nodes, std::vector<Link> links)
    : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
  reindex();
}

void Topology::reindex() {
  node_index_.clear();
  link_index_.clear();
  out_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw InputError("topology '" + name_ + "': empty node id");
    if (!node_index_.emplace(nodes_[i].id, i).second)
      throw InputError("topology '" + name_ + "': duplicate node '" + nodes_[i].id + "'");
    out_[nodes_[i].id];
  }
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!node_index_.contains(l.src) || !node_index_.contains(l.dst))
      throw InputError("link '" + l.id + "' references an unknown node");
    if (l.src == l.dst) throw InputError("link '" + l.id + "' is a self-loop");
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
      throw InputError("link '" + l.id + "' must have a finite positive capacity");
    if (!pairs.emplace(l.src, l.dst).second)
      throw InputError("duplicate link " + l.src + " -> " + l.dst);
    if (!link_index_.emplace(l.id, i).second) throw InputError("duplicate link id '" + l.id + "'");
    out_[l.src].push_back(i);
  }
  for (auto& [id, v] : out_)
    std::sort(v.begin(), v.end(),
              [&](std::size_t a, std::size_t b) { return links_[a].dst < links_[b].dst; });
}

const Node& Topology::node(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw LookupError("unknown node '" + id + "'");
  return nodes_[it->second];
}

const Link& Topology::link(const LinkId& id) const { return links_[link_index(id)]; }

std::size_t Topology::link_index(const LinkId& id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) throw LookupError("unknown link '" + id + "'");
  return it->second;
}

std::optional<LinkId> Topology::find_link(const NodeId& src, const NodeId& dst) const {
  auto it = out_.find(src);
  if (it == out_.end()) return std::nullopt;
  for (std::size_t i : it->second)
    if (links_[i].dst == dst) return links_[i].id;
  return std::nullopt;
}

std::vector<NodeId> Topology::sites() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::site) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::size_t>& Topology::out_links(const NodeId& id) const {
  auto it = out_.find(id);
  if (it == out_.end()) throw LookupError("unknown node '" + id + "'");
  return it->second;
}

void Topology::set_capacity(const LinkId& id, double mbps) {
  if (!(mbps > 0.0) || !std::isfinite(mbps))
    throw InputError("capacity for '" + id + "' must be finite and positive");
  links_[link_index(id)].capacity = mbps;
}

// ---------------------------------------------------------------------------

PiecewiseLinearUtility::PiecewiseLinearUtility(std::vector<Piece> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw InputError("utility needs at least one piece");
  if (pieces_.front().lo != 0.0) throw InputError("utility must start at x = 0");
  if (pieces_.back().hi != kInf) throw InputError("utility must extend to +inf");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    if (!std::isfinite(p.lo) || !std::isfinite(p.slope) || !std::isfinite(p.intercept) ||
        std::isnan(p.hi))
      throw InputError("utility piece " + std::to_string(i) + " has non-finite fields");
    if (!(p.hi > p.lo)) throw InputError("utility piece " + std::to_string(i) + " is empty");
    if (p.slope < 0.0) throw InputError("utility piece " + std::to_string(i) + " decreases");
    if (i + 1 < pieces_.size()) {
      const Piece& q = pieces_[i + 1];
      if (q.lo != p.hi)
        throw InputError("utility pieces " + std::to_string(i) + " and " +
                         std::to_string(i + 1) + " leave a gap or overlap");
      double left = p.value(p.hi);
      double right = q.value(q.lo);
      if (right < left - 1e-12 * std::max(1.0, std::abs(left)))
        throw InputError("utility jumps downward at x = " + std::to_string(p.hi));
    }
  }
}

std::size_t PiecewiseLinearUtility::piece_index(double x) const {
  if (std::isnan(x) || x < 0.0) throw DomainError("utility evaluated at negative or NaN rate");
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (x <= pieces_[i].hi) return i;
  return pieces_.size() - 1;
}

double PiecewiseLinearUtility::operator()(double x) const {
  return pieces_[piece_index(x)].value(x);
}

bool PiecewiseLinearUtility::jumps_at_lower(std::size_t i) const {
  if (i == 0 || i >= pieces_.size()) return false;
  double x = pieces_[i].lo;
  return pieces_[i].value(x) > pieces_[i - 1].value(x) + 1e-12;
}

bool PiecewiseLinearUtility::is_concave_from_origin() const {
  if (pieces_.empty() || pieces_.front().intercept != 0.0) return false;
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (jumps_at_lower(i)) return false;
    if (pieces_[i].slope > pieces_[i - 1].slope) return false;
  }
  return true;
}

bool PiecewiseLinearUtility::is_linear_from_origin() const {
  return pieces_.size() == 1 && pieces_.front().intercept == 0.0;
}

PiecewiseLinearUtility utility_a() {
  return PiecewiseLinearUtility({{0.0, 0.8, 0.0, 0.0}, {0.8, 1.2, 0.1, 0.0}, {1.2, kInf, 0.005, 0.114}});
}

PiecewiseLinearUtility utility_b() { return PiecewiseLinearUtility({{0.0, kInf, 0.2, 0.0}}); }

double eval_utility(const PiecewiseLinearUtility& u, double x) { return u(x); }

double cumulative_utility(std::span<const TrafficClass> classes,
                          const std::map<ClassId, int>& sessions,
                          const std::map<ClassId, double>& agg_rates) {
  auto find = [&](const ClassId& id) -> const TrafficClass& {
    for (const auto& k : classes)
      if (k.id == id) return k;
    throw LookupError("unknown class '" + id + "'");
  };
  for (const auto& [id, x] : agg_rates) find(id);
  double total = 0.0;
  for (const auto& [id, n] : sessions) {
    const TrafficClass& k = find(id);
    if (n < 0) throw DomainError("negative session count for class '" + id + "'");
    if (n == 0) continue;
    auto it = agg_rates.find(id);
    if (it == agg_rates.end()) throw LookupError("no rate for class '" + id + "'");
    total += n * k.utility(it->second);
  }
  return total;
}

// ---------------------------------------------------------------------------

std::vector<NodeId> route_nodes(const Topology& t, const Route& r) {
  std::vector<NodeId> nodes;
  if (r.empty()) return nodes;
  nodes.push_back(t.link(r.front()).src);
  for (const auto& id : r) nodes.push_back(t.link(id).dst);
  return nodes;
}

Route route_from_nodes(const Topology& t, std::span<const NodeId> nodes) {
  Route r;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto id = t.find_link(nodes[i], nodes[i + 1]);
    if (!id) throw LookupError("no link " + nodes[i] + " -> " + nodes[i + 1]);
    r.push_back(*id);
  }
  return r;
}

int overlay_hops(const Topology& t, const Route& r) {
  int hops = 0;
  for (const auto& id : r)
    if (t.is_site(t.link(id).dst)) ++hops;
  return hops;
}

std::string route_label(const Topology& t, const Route& r) {
  std::string s;
  for (const auto& n : route_nodes(t, r)) {
    if (!s.empty()) s += '-';
    s += n;
  }
  return s;
}

void validate_class(const Topology& t, const TrafficClass& k) {
  if (k.id.empty()) throw InputError("class with empty id");
  if (!t.has_node(k.src) || !t.has_node(k.dst))
    throw InputError("class '" + k.id + "' references an unknown node");
  if (k.src == k.dst) throw InputError("class '" + k.id + "' has src == dst");
  if (k.max_sessions < 0) throw InputError("class '" + k.id + "' has negative max_sessions");
  if (k.utility.size() == 0) throw InputError("class '" + k.id + "' has no utility");
}

void validate_flow(const Topology& t, const TrafficClass& k, const Flow& f) {
  if (f.class_id != k.id) throw InputError("flow '" + f.id + "' belongs to another class");
  if (f.route.empty()) throw InputError("flow '" + f.id + "' has an empty route");
  for (const auto& id : f.route)
    if (!t.has_link(id)) throw InputError("flow '" + f.id + "' uses unknown link '" + id + "'");
  auto nodes = route_nodes(t, f.route);
  for (std::size_t i = 0; i + 1 < f.route.size(); ++i)
    if (t.link(f.route[i]).dst != t.link(f.route[i + 1]).src)
      throw InputError("flow '" + f.id + "' route is not contiguous");
  if (nodes.front() != k.src || nodes.back() != k.dst)
    throw InputError("flow '" + f.id + "' does not connect its class endpoints");
  std::set<NodeId> sites;
  for (const auto& n : nodes)
    if (t.is_site(n) && !sites.insert(n).second)
      throw InputError("flow '" + f.id + "' visits site '" + n + "' twice");
  std::set<LinkId> links(f.route.begin(), f.route.end());
  if (links.size() != f.route.size()) throw InputError("flow '" + f.id + "' uses a link twice");
}

// ---------------------------------------------------------------------------

PathEnumerator::PathEnumerator(const Topology& t) : topo_(&t), sites_(t.sites()) {
  const auto& links = t.links();
  std::map<NodeId, std::vector<NodeId>> in;
  for (const auto& l : links) in[l.dst].push_back(l.src);

  for (const NodeId& to : sites_) {
    std::map<NodeId, int> dist;
    std::deque<NodeId> q{to};
    dist[to] = 0;
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      if (v != to && t.is_site(v)) continue;  // sites terminate legs
      for (const NodeId& u : in[v]) {
        if (dist.contains(u)) continue;
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
    }
    for (const NodeId& from : sites_) {
      if (from == to || !dist.contains(from)) continue;
      std::vector<NodeId> seq{from};
      NodeId cur = from;
      while (cur != to) {
        int d = dist.at(cur);
        const NodeId* next = nullptr;
        for (std::size_t li : t.out_links(cur)) {
          const NodeId& v = links[li].dst;
          auto it = dist.find(v);
          if (it == dist.end() || it->second != d - 1) continue;
          if (v != to && t.is_site(v)) continue;
          next = &v;
          break;  // out_links is sorted by destination id
        }
        if (next == nullptr) break;
        cur = *next;
        seq.push_back(cur);
      }
      if (cur == to) legs_.emplace(std::make_pair(from, to), std::move(seq));
    }
  }
}

const std::vector<NodeId>& PathEnumerator::leg(const NodeId& from, const NodeId& to) const {
  static const std::vector<NodeId> none;
  auto it = legs_.find({from, to});
  return it == legs_.end() ? none : it->second;
}

std::vector<Route> PathEnumerator::paths(const NodeId& src, const NodeId& dst,
                                         int max_overlay_hops) const {
  const Topology& t = *topo_;
  if (!t.is_site(src) || !t.is_site(dst)) throw InputError("path endpoints must be sites");
  if (max_overlay_hops < 1) throw InputError("max_overlay_hops must be >= 1");

  std::vector<std::pair<int, std::vector<NodeId>>> found;
  std::vector<NodeId> nodes{src};
  std::set<NodeId> used_sites{src};
  std::set<std::pair<NodeId, NodeId>> used_links;
  auto fits = [&](const std::vector<NodeId>& l) {
    for (std::size_t i = 0; i + 1 < l.size(); ++i)
      if (used_links.contains({l[i], l[i + 1]})) return false;
    return true;
  };

  auto extend = [&](auto&& self, const NodeId& at, int hops) -> void {
    const auto& last = leg(at, dst);
    if (!last.empty() && fits(last)) {
      std::vector<NodeId> full = nodes;
      full.insert(full.end(), last.begin() + 1, last.end());
      found.emplace_back(hops + 1, std::move(full));
    }
    if (hops + 1 >= max_overlay_hops) return;
    for (const NodeId& s : sites_) {
      if (s == dst || used_sites.contains(s)) continue;
      const auto& l = leg(at, s);
      if (l.empty() || !fits(l)) continue;
      std::size_t mark = nodes.size();
      nodes.insert(nodes.end(), l.begin() + 1, l.end());
      for (std::size_t i = 0; i + 1 < l.size(); ++i) used_links.insert({l[i], l[i + 1]});
      used_sites.insert(s);
      self(self, s, hops + 1);
      used_sites.erase(s);
      for (std::size_t i = 0; i + 1 < l.size(); ++i) used_links.erase({l[i], l[i + 1]});
      nodes.resize(mark);
    }
  };
  extend(extend, src, 0);

  std::sort(found.begin(), found.end());
  std::vector<Route> out;
  out.reserve(found.size());
  for (const auto& [h, seq] : found) out.push_back(route_from_nodes(t, seq));
  return out;
}

std::vector<Route> enumerate_paths(const Topology& t, const NodeId& src, const NodeId& dst,
                                   int max_overlay_hops) {
  return PathEnumerator(t).paths(src, dst, max_overlay_hops);
}

std::vector<Route> sample_random_paths(std::span<const Route> paths, std::size_t count,
                                       std::uint64_t seed) {
  if (count >= paths.size()) return {paths.begin(), paths.end()};
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = rng();
      if (r >= threshold) return r % n;
    }
  };
  std::vector<std::size_t> idx(paths.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + below(idx.size() - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<Route> out;
  for (std::size_t i : idx) out.push_back(paths[i]);
  return out;
}

std::vector<Flow> make_flows(const Topology& t, const TrafficClass& k,
                             std::span<const Route> routes) {
  std::vector<Flow> out;
  for (const auto& r : routes) out.push_back({k.id + ":" + route_label(t, r), k.id, r});
  return out;
}

}  // namespace mon
