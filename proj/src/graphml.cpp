#include "mon/graphml.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "mon/json_io.hpp"

namespace mon {

namespace pt = boost::property_tree;

namespace {

std::string attr(const pt::ptree& el, const char* name) {
  return el.get<std::string>(std::string("<xmlattr>.") + name, "");
}

}  // namespace

Topology parse_graphml(std::string_view xml, const std::string& name, double capacity) {
  pt::ptree doc;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("GraphML line " + std::to_string(e.line()) + ": " + e.message());
  }
  auto root = doc.get_child_optional("graphml");
  if (!root) throw ParseError("GraphML: missing <graphml> root element");
  auto graph = root->get_child_optional("graph");
  if (!graph) throw ParseError("GraphML: missing <graph> element");
  bool directed_default = attr(*graph, "edgedefault") == "directed";
  std::string topo_name = name.empty() ? attr(*graph, "id") : name;

  std::vector<Node> nodes;
  std::set<NodeId> seen;
  std::vector<Link> links;
  std::set<std::pair<NodeId, NodeId>> edges;
  std::size_t node_no = 0, edge_no = 0;
  for (const auto& [tag, el] : *graph) {
    if (tag == "node") {
      ++node_no;
      auto id = attr(el, "id");
      if (id.empty()) throw ParseError("GraphML node #" + std::to_string(node_no) + ": missing id");
      if (!seen.insert(id).second) throw ParseError("GraphML node #" + std::to_string(node_no) + ": duplicate id '" + id + "'");
      nodes.push_back({id, NodeKind::router});
    } else if (tag == "edge") {
      ++edge_no;
      std::string where = "GraphML edge #" + std::to_string(edge_no);
      auto s = attr(el, "source"), d = attr(el, "target");
      if (s.empty() || d.empty()) throw ParseError(where + ": missing source or target");
      where += " (" + s + ", " + d + ")";
      if (s == d) throw ParseError(where + ": self-loop");
      auto dir = attr(el, "directed");
      bool directed = dir.empty() ? directed_default : dir == "true";
      std::pair<NodeId, NodeId> key = directed || s < d ? std::pair{s, d} : std::pair{d, s};
      if (!edges.insert(key).second) throw ParseError(where + ": duplicate link");
      links.push_back({link_id(s, d), s, d, capacity});
      if (!directed) links.push_back({link_id(d, s), d, s, capacity});
    }
  }
  for (const auto& l : links)
    if (!seen.contains(l.src) || !seen.contains(l.dst))
      throw ParseError("GraphML edge " + l.id + ": endpoint is not a declared node");
  return Topology(topo_name, std::move(nodes), std::move(links));
}

Topology load_graphml(const std::string& path, double capacity) {
  auto text = read_text_file(path);
  auto slash = path.find_last_of('/');
  auto base = path.substr(slash == std::string::npos ? 0 : slash + 1);
  auto dot = base.rfind('.');
  return parse_graphml(text, dot == std::string::npos ? base : base.substr(0, dot), capacity);
}

NodeId site_for(const NodeId& router) { return "S" + router; }

Topology attach_sites(const Topology& routers, std::span<const NodeId> hosts, double uplink_mbps) {
  auto nodes = routers.nodes();
  auto links = routers.links();
  for (const auto& h : hosts) {
    if (!routers.has_node(h)) throw LookupError("unknown host router '" + h + "'");
    auto s = site_for(h);
    nodes.push_back({s, NodeKind::site});
    links.push_back({link_id(s, h), s, h, uplink_mbps});
    links.push_back({link_id(h, s), h, s, uplink_mbps});
  }
  return Topology(routers.name(), std::move(nodes), std::move(links));
}

bool natural_less(const std::string& a, const std::string& b) {
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if (digits(a) && digits(b) && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<NodeId> top_degree_routers(const Topology& t, std::size_t count) {
  std::vector<std::pair<int, NodeId>> deg;
  for (const auto& n : t.nodes()) {
    if (n.kind != NodeKind::router) continue;
    int d = 0;
    for (auto l : t.out_links(n.id))
      if (!t.is_site(t.links()[l].dst)) ++d;
    deg.push_back({d, n.id});
  }
  std::sort(deg.begin(), deg.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return natural_less(x.second, y.second);
  });
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < deg.size() && i < count; ++i) out.push_back(deg[i].second);
  return out;
}

std::string topology_path(const std::string& name) {
  return std::string(MON_DATA_DIR) + "/topologies/" + name + ".graphml";
}

}  // namespace mon
