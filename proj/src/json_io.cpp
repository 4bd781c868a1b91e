#include "mon/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mon {

namespace {

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
  const auto& v = need(j, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + " must be a number");
  return v.get<double>();
}

int get_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + " must be an integer");
  return v.get<int>();
}

// Plan and config numbers: inf/nan have no JSON form, stored as null only for +inf.
Json number(double v) {
  if (std::isinf(v) && v > 0) return nullptr;
  return v;
}

}  // namespace

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

Topology topology_from_json(const Json& j) {
  const std::string where = "topology";
  std::string name = j.contains("name") ? get_string(j, "name", where) : "";
  bool directed = j.contains("directed") && j["directed"].is_boolean() && j["directed"].get<bool>();
  std::vector<Node> nodes;
  const auto& jn = need(j, "nodes", where);
  if (!jn.is_array()) throw ParseError(where + ": 'nodes' must be an array");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    std::string w = where + ".nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = get_string(jn[i], "id", w);
    std::string kind = jn[i].contains("kind") ? get_string(jn[i], "kind", w) : "site";
    if (kind == "site") n.kind = NodeKind::site;
    else if (kind == "router") n.kind = NodeKind::router;
    else throw ParseError(w + ": kind must be 'site' or 'router'");
    nodes.push_back(std::move(n));
  }
  std::vector<Link> links;
  const auto& jl = need(j, "links", where);
  if (!jl.is_array()) throw ParseError(where + ": 'links' must be an array");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    std::string w = where + ".links[" + std::to_string(i) + "]";
    std::string src = get_string(jl[i], "src", w), dst = get_string(jl[i], "dst", w);
    double c = get_number(need(jl[i], "capacity_mbps", w), w + ".capacity_mbps");
    links.push_back({link_id(src, dst), src, dst, c});
    if (!directed) links.push_back({link_id(dst, src), dst, src, c});
  }
  return Topology(std::move(name), std::move(nodes), std::move(links));
}

Json to_json(const Topology& t) {
  Json j;
  j["name"] = t.name();
  j["directed"] = true;
  j["nodes"] = Json::array();
  for (const auto& n : t.nodes())
    j["nodes"].push_back({{"id", n.id}, {"kind", n.kind == NodeKind::site ? "site" : "router"}});
  j["links"] = Json::array();
  for (const auto& l : t.links())
    j["links"].push_back({{"src", l.src}, {"dst", l.dst}, {"capacity_mbps", l.capacity}});
  return j;
}

PiecewiseLinearUtility utility_from_json(const Json& j) {
  if (j.is_string()) {
    auto name = j.get<std::string>();
    if (name == "U_A") return utility_a();
    if (name == "U_B") return utility_b();
    throw ParseError("unknown utility '" + name + "' (expected U_A, U_B or a piece list)");
  }
  const Json& pieces = j.is_object() ? need(j, "pieces", "utility") : j;
  if (!pieces.is_array()) throw ParseError("utility: expected a name or a piece array");
  std::vector<Piece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    std::string w = "utility.pieces[" + std::to_string(i) + "]";
    const auto& p = pieces[i];
    Piece q;
    q.lo = get_number(need(p, "lo", w), w + ".lo");
    const auto& hi = need(p, "hi", w);
    q.hi = hi.is_null() ? kInf : get_number(hi, w + ".hi");
    q.slope = get_number(need(p, "slope", w), w + ".slope");
    q.intercept = get_number(need(p, "intercept", w), w + ".intercept");
    out.push_back(q);
  }
  return PiecewiseLinearUtility(std::move(out));
}

Json to_json(const PiecewiseLinearUtility& u) {
  if (u == utility_a()) return "U_A";
  if (u == utility_b()) return "U_B";
  Json arr = Json::array();
  for (const auto& p : u.pieces())
    arr.push_back({{"lo", p.lo}, {"hi", number(p.hi)}, {"slope", p.slope}, {"intercept", p.intercept}});
  return {{"pieces", arr}};
}

ClassesDoc classes_from_json(const Json& j) {
  ClassesDoc d;
  const Json* list = &j;
  if (j.is_object()) {
    list = &need(j, "classes", "classes");
    if (j.contains("max_hops")) d.max_hops = get_int(j["max_hops"], "max_hops");
  }
  if (!list->is_array()) throw ParseError("classes: expected an array");
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& c = (*list)[i];
    std::string w = "classes[" + std::to_string(i) + "]";
    ClassSpec s;
    s.traffic.id = get_string(c, "id", w);
    s.traffic.src = get_string(c, "src", w);
    s.traffic.dst = get_string(c, "dst", w);
    s.traffic.max_sessions = get_int(need(c, "max_sessions", w), w + ".max_sessions");
    s.traffic.utility = utility_from_json(need(c, "utility", w));
    if (c.contains("flows")) {
      const auto& fl = c["flows"];
      if (!fl.is_array()) throw ParseError(w + ".flows must be an array of node sequences");
      for (const auto& seq : fl) {
        if (!seq.is_array()) throw ParseError(w + ".flows entries must be node arrays");
        std::vector<NodeId> nodes;
        for (const auto& n : seq) {
          if (!n.is_string()) throw ParseError(w + ".flows node ids must be strings");
          nodes.push_back(n.get<std::string>());
        }
        s.paths.push_back(std::move(nodes));
      }
    }
    d.classes.push_back(std::move(s));
  }
  if (d.max_hops < 1) throw DomainError("max_hops must be >= 1");
  return d;
}

Json to_json(const ClassesDoc& d) {
  Json j;
  j["max_hops"] = d.max_hops;
  j["classes"] = Json::array();
  for (const auto& s : d.classes) {
    Json c{{"id", s.traffic.id},
           {"src", s.traffic.src},
           {"dst", s.traffic.dst},
           {"max_sessions", s.traffic.max_sessions},
           {"utility", to_json(s.traffic.utility)}};
    if (!s.paths.empty()) c["flows"] = s.paths;
    j["classes"].push_back(std::move(c));
  }
  return j;
}

PfoInstance build_instance(const Topology& t, const ClassesDoc& d) { return build_instance(t, d, d.max_hops); }

PfoInstance build_instance(const Topology& t, const ClassesDoc& d, int max_hops) {
  PfoInstance in{t, {}, {}};
  PathEnumerator paths(t);
  for (const auto& s : d.classes) {
    validate_class(t, s.traffic);
    std::vector<Route> routes;
    if (s.paths.empty()) {
      routes = paths.paths(s.traffic.src, s.traffic.dst, max_hops);
    } else {
      for (const auto& seq : s.paths) routes.push_back(route_from_nodes(t, seq));
    }
    in.classes.push_back(s.traffic);
    for (auto& f : make_flows(t, s.traffic, routes)) in.flows.push_back(std::move(f));
  }
  in.validate();
  return in;
}

PfoPlan plan_from_json(const Json& j) {
  const std::string where = "plan";
  PfoPlan p;
  for (const auto& [k, v] : need(j, "n", where).items()) p.n[k] = get_int(v, "plan.n." + k);
  for (const auto& [k, v] : need(j, "rates", where).items()) p.rates[k] = get_number(v, "plan.rates." + k);
  for (const auto& [k, v] : need(j, "duals", where).items()) p.duals[k] = get_number(v, "plan.duals." + k);
  p.utility = j.contains("utility") ? get_number(j["utility"], "plan.utility") : 0.0;
  std::string opt = j.contains("optimality") ? get_string(j, "optimality", where) : "proved-optimal";
  if (opt == "proved-optimal") p.optimality = Optimality::proved_optimal;
  else if (opt == "best-found") p.optimality = Optimality::best_found;
  else throw ParseError("plan.optimality must be 'proved-optimal' or 'best-found'");
  return p;
}

Json to_json(const PfoPlan& p) {
  Json j;
  j["n"] = Json::object();
  for (const auto& [k, v] : p.n) j["n"][k] = v;
  j["rates"] = Json::object();
  for (const auto& [k, v] : p.rates) j["rates"][k] = v;
  j["duals"] = Json::object();
  for (const auto& [k, v] : p.duals) j["duals"][k] = v;
  j["utility"] = p.utility;
  j["optimality"] = to_string(p.optimality);
  return j;
}

TransportConfig config_from_json(const Json& j) {
  const std::string where = "config";
  TransportConfig c;
  for (const auto& [k, v] : need(j, "weights", where).items()) c.weights[k] = get_number(v, "config.weights." + k);
  for (const auto& [k, v] : need(j, "sessions", where).items()) c.sessions[k] = get_int(v, "config.sessions." + k);
  c.gamma = get_number(need(j, "gamma", where), "config.gamma");
  c.gamma_norm = j.contains("gamma_norm") ? get_number(j["gamma_norm"], "config.gamma_norm") : c.gamma;
  return c;
}

Json to_json(const TransportConfig& c) {
  Json j;
  j["weights"] = Json::object();
  for (const auto& [k, v] : c.weights) j["weights"][k] = v;
  j["sessions"] = Json::object();
  for (const auto& [k, v] : c.sessions) j["sessions"][k] = v;
  j["gamma"] = c.gamma;
  j["gamma_norm"] = c.gamma_norm;
  return j;
}

}  // namespace mon
