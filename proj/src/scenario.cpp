#include "mon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "mon/graphml.hpp"

namespace mon {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const char* event_name(const Event& e) {
  return std::visit(
      [](const auto& a) -> const char* {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SetCapacity>) return "set_capacity";
        else if constexpr (std::is_same_v<T, SetSessions>) return "set_sessions";
        else if constexpr (std::is_same_v<T, RerunPfo>) return "rerun_pfo";
        else return "install_config";
      },
      e.action);
}

const char* to_string(Knowledge k) { return k == Knowledge::stale ? "stale" : "current-truth"; }

Knowledge knowledge_from(const std::string& s) {
  if (s == "current-truth") return Knowledge::current_truth;
  if (s == "stale") return Knowledge::stale;
  throw ParseError("knowledge must be 'current-truth' or 'stale'");
}

std::vector<Route> class_routes(const Topology& t, const PathEnumerator& paths, const ClassSpec& c,
                                const PathPolicy& p, std::size_t index) {
  std::vector<Route> routes;
  if (!c.paths.empty()) {
    for (const auto& seq : c.paths) routes.push_back(route_from_nodes(t, seq));
    return routes;
  }
  if (p.kind == PathPolicy::Kind::explicit_flows)
    throw ScenarioError("class '" + c.traffic.id + "' has no explicit flows");
  auto all = paths.paths(c.traffic.src, c.traffic.dst, p.max_hops);
  if (p.kind == PathPolicy::Kind::max_hops) return all;
  std::vector<Route> indirect;
  for (auto& r : all) {
    if (overlay_hops(t, r) == 1) routes.push_back(r);
    else indirect.push_back(r);
  }
  auto chosen = sample_random_paths(indirect, static_cast<std::size_t>(std::max(0, p.random_k)),
                                    mix_seed(p.seed, index));
  routes.insert(routes.end(), chosen.begin(), chosen.end());
  return routes;
}

PfoInstance instance_with(const Topology& t, const ClassesDoc& classes, const PathPolicy& policy) {
  PfoInstance in{t, {}, {}};
  PathEnumerator paths(t);
  for (std::size_t i = 0; i < classes.classes.size(); ++i) {
    const auto& c = classes.classes[i];
    validate_class(t, c.traffic);
    in.classes.push_back(c.traffic);
    for (auto& f : make_flows(t, c.traffic, class_routes(t, paths, c, policy, i))) in.flows.push_back(std::move(f));
  }
  in.validate();
  return in;
}

template <class F>
auto annotated(const std::string& phase, F&& f) {
  try {
    return f();
  } catch (const SolverError& e) {
    throw SolverError(phase + ": " + e.what());
  } catch (const InputError& e) {
    throw ScenarioError(phase + ": " + e.what());
  }
}

Json event_to_json(const Event& e) {
  Json j;
  j["t"] = e.t;
  j["type"] = event_name(e);
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SetCapacity>) {
          j["link"] = a.link;
          j["mbps"] = a.mbps;
        } else if constexpr (std::is_same_v<T, SetSessions>) {
          j["class"] = a.class_id;
          j["n"] = a.n;
        } else if constexpr (std::is_same_v<T, RerunPfo>) {
          j["knowledge"] = to_string(a.knowledge);
        } else {
          j["config"] = to_json(a.config);
          Json r = Json::object();
          for (const auto& [k, v] : a.rates) r[k] = v;
          j["rates"] = r;
        }
      },
      e.action);
  return j;
}

Event event_from_json(const Json& j, std::size_t i) {
  std::string where = "events[" + std::to_string(i) + "]";
  if (!j.is_object() || !j.contains("t") || !j["t"].is_number() || !j.contains("type") || !j["type"].is_string())
    throw ParseError(where + ": needs numeric 't' and string 'type'");
  Event e;
  e.t = j["t"].get<double>();
  auto type = j["type"].get<std::string>();
  auto field = [&](const char* k) -> const Json& {
    if (!j.contains(k)) throw ParseError(where + ": missing '" + k + "'");
    return j[k];
  };
  try {
    if (type == "set_capacity") {
      e.action = SetCapacity{field("link").get<std::string>(), field("mbps").get<double>()};
    } else if (type == "set_sessions") {
      e.action = SetSessions{field("class").get<std::string>(), field("n").get<int>()};
    } else if (type == "rerun_pfo") {
      e.action = RerunPfo{knowledge_from(j.value("knowledge", std::string("current-truth")))};
    } else if (type == "install_config") {
      InstallConfig ic;
      ic.config = config_from_json(field("config"));
      for (const auto& [k, v] : field("rates").items()) ic.rates[k] = v.get<double>();
      e.action = std::move(ic);
    } else {
      throw ParseError(where + ": unknown event type '" + type + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(where + ": " + ex.what());
  }
  return e;
}

Topology triangle() {
  std::vector<Node> nodes{{"A", NodeKind::site}, {"B", NodeKind::site}, {"C", NodeKind::site}};
  std::vector<Link> links;
  auto both = [&](const NodeId& a, const NodeId& b, double c) {
    links.push_back({link_id(a, b), a, b, c});
    links.push_back({link_id(b, a), b, a, c});
  };
  both("A", "B", 10);
  both("A", "C", 10);
  both("B", "C", 5);
  return Topology("triangle", std::move(nodes), std::move(links));
}

Topology directed_triangle() {
  return Topology("triangle-directed", {{"A", NodeKind::site}, {"B", NodeKind::site}, {"C", NodeKind::site}},
                  {{link_id("A", "B"), "A", "B", 3}, {link_id("B", "C"), "B", "C", 5}, {link_id("A", "C"), "A", "C", 10}});
}

Scenario demand_setup(const std::string& name) {
  Scenario s;
  s.name = name;
  s.topology = directed_triangle();
  s.classes.classes = {{{"A", "A", "C", 20, utility_a()}, {{"A", "C"}, {"A", "B", "C"}}},
                       {{"B", "B", "C", 1, utility_a()}, {{"B", "C"}}}};
  s.paths.kind = PathPolicy::Kind::explicit_flows;
  s.duration = 60.0;
  return s;
}

}  // namespace

void validate(const Scenario& s) {
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw ScenarioError("duration must be positive");
  if (!(s.dt > 0.0) || s.dt > 1.0) throw ScenarioError("dt must be in (0, 1]");
  if (!(s.gamma > 0.0)) throw ScenarioError("gamma must be positive");
  if (s.paths.max_hops < 1) throw ScenarioError("max_hops must be >= 1");
  for (const auto& [l, c] : s.estimate) {
    if (!s.topology.has_link(l)) throw ScenarioError("estimate references unknown link '" + l + "'");
    if (!(c > 0.0)) throw ScenarioError("estimated capacity of '" + l + "' must be positive");
  }
  std::set<ClassId> classes;
  for (const auto& c : s.classes.classes) classes.insert(c.traffic.id);
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    if (e.t < 0.0 || e.t > s.duration) throw ScenarioError("event at t = " + format_number(e.t) + " outside [0, duration]");
    if (i > 0 && e.t < s.events[i - 1].t) throw ScenarioError("events must be sorted by time");
    if (auto* a = std::get_if<SetCapacity>(&e.action)) {
      if (!s.topology.has_link(a->link)) throw ScenarioError("event references unknown link '" + a->link + "'");
      if (!(a->mbps > 0.0)) throw ScenarioError("capacity of '" + a->link + "' must be positive");
    } else if (auto* b = std::get_if<SetSessions>(&e.action)) {
      if (!classes.contains(b->class_id)) throw ScenarioError("event references unknown class '" + b->class_id + "'");
      if (b->n < 0) throw ScenarioError("session count must be >= 0");
    }
  }
}

Json to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["topology"] = to_json(s.topology);
  j["classes"] = to_json(s.classes);
  Json p;
  switch (s.paths.kind) {
    case PathPolicy::Kind::max_hops: p["kind"] = "max_hops"; break;
    case PathPolicy::Kind::explicit_flows: p["kind"] = "explicit"; break;
    case PathPolicy::Kind::random: p["kind"] = "random"; break;
  }
  p["max_hops"] = s.paths.max_hops;
  p["k"] = s.paths.random_k;
  p["seed"] = s.paths.seed;
  j["paths"] = p;
  j["estimate"] = Json::object();
  for (const auto& [l, c] : s.estimate) j["estimate"][l] = c;
  j["events"] = Json::array();
  for (const auto& e : s.events) j["events"].push_back(event_to_json(e));
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["gamma"] = s.gamma;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("scenario: expected an object");
  Scenario s;
  try {
    s.name = j.value("name", std::string());
    if (!j.contains("topology")) throw ParseError("scenario: missing 'topology'");
    const auto& t = j["topology"];
    if (t.is_string()) {
      auto path = t.get<std::string>();
      bool graphml = path.size() > 8 && path.ends_with(".graphml");
      if (graphml) {
        auto routers = load_graphml(path, j.value("core_mbps", 10.0));
        std::vector<NodeId> hosts = j.value("sites", std::vector<NodeId>{});
        s.topology = attach_sites(routers, hosts, j.value("uplink_mbps", 30.0));
      } else {
        s.topology = topology_from_json(read_json_file(path));
      }
    } else {
      s.topology = topology_from_json(t);
    }
    if (!j.contains("classes")) throw ParseError("scenario: missing 'classes'");
    s.classes = classes_from_json(j["classes"]);
    s.paths.max_hops = s.classes.max_hops;
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      auto kind = p.value("kind", std::string("max_hops"));
      if (kind == "max_hops") s.paths.kind = PathPolicy::Kind::max_hops;
      else if (kind == "explicit") s.paths.kind = PathPolicy::Kind::explicit_flows;
      else if (kind == "random") s.paths.kind = PathPolicy::Kind::random;
      else throw ParseError("scenario.paths.kind must be max_hops, explicit or random");
      s.paths.max_hops = p.value("max_hops", s.classes.max_hops);
      s.paths.random_k = p.value("k", 0);
      s.paths.seed = p.value("seed", std::uint64_t{0});
    }
    if (j.contains("estimate"))
      for (const auto& [l, c] : j["estimate"].items()) s.estimate[l] = c.get<double>();
    if (j.contains("events")) {
      if (!j["events"].is_array()) throw ParseError("scenario.events must be an array");
      for (std::size_t i = 0; i < j["events"].size(); ++i) s.events.push_back(event_from_json(j["events"][i], i));
    }
    s.duration = j.value("duration", 60.0);
    s.dt = j.value("dt", 0.01);
    s.gamma = j.value("gamma", 0.001);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

const std::vector<std::string>& paper_scenario_names() {
  static const std::vector<std::string> names{"triangle-basic",   "hop-study",         "random-path-study",
                                              "robustness-sweep", "demand-sweep",      "failure-triangle",
                                              "failure-large"};
  return names;
}

Scenario study_scenario(const std::string& topology, std::size_t site_count, std::uint64_t seed,
                        double uplink_mbps, double core_mbps, ClassSelection selection) {
  auto routers = load_graphml(topology.ends_with(".graphml") ? topology : topology_path(topology), core_mbps);
  std::vector<NodeId> ids;
  for (const auto& n : routers.nodes()) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end(), natural_less);
  std::mt19937_64 rng(seed);
  if (site_count > 0 && site_count < ids.size()) {
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(site_count);
    std::sort(ids.begin(), ids.end(), natural_less);
  }
  Scenario s;
  s.name = routers.name();
  s.topology = attach_sites(routers, ids, uplink_mbps);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (selection == ClassSelection::half_of_sites) {
    auto members = ids;
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(std::max<std::size_t>(2, members.size() / 2));
    for (const auto& a : members)
      for (const auto& b : members)
        if (a != b) pairs.push_back({a, b});
  } else {
    for (const auto& a : ids)
      for (const auto& b : ids)
        if (a != b) pairs.push_back({a, b});
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(pairs.size() / 2);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return natural_less(x.first, y.first);
    return natural_less(x.second, y.second);
  });
  for (const auto& [a, b] : pairs) {
    auto src = site_for(a), dst = site_for(b);
    s.classes.classes.push_back({{src + "-" + dst, src, dst, 1, utility_b()}, {}});
  }
  s.classes.max_hops = 2;
  s.paths.max_hops = 2;
  return s;
}

Scenario build_paper_scenario(const std::string& name, std::uint64_t seed, const std::string& topology) {
  if (name == "triangle-basic" || name == "failure-triangle") {
    Scenario s;
    s.name = name;
    s.topology = triangle();
    s.classes.classes = {{{"A", "A", "C", 1, utility_b()}, {}}, {{"B", "B", "C", 1, utility_a()}, {}}};
    s.duration = 60.0;
    if (name == "failure-triangle") {
      s.events = {{60.0, SetCapacity{link_id("A", "B"), 1.0}},
                  {60.0, SetCapacity{link_id("B", "A"), 1.0}},
                  {140.0, RerunPfo{Knowledge::current_truth}}};
      s.duration = 220.0;
    }
    return s;
  }
  if (name == "robustness-sweep") {
    auto s = demand_setup(name);
    s.estimate[link_id("A", "B")] = 3.0;
    return s;
  }
  if (name == "demand-sweep") return demand_setup(name);
  if (name == "hop-study" || name == "random-path-study") {
    auto s = study_scenario(topology.empty() ? "Abilene" : topology, 12, seed);
    s.name = name;
    if (name == "random-path-study") {
      s.paths.kind = PathPolicy::Kind::random;
      s.paths.random_k = 1;
      s.paths.seed = seed;
    }
    return s;
  }
  if (name == "failure-large") {
    auto s = study_scenario(topology.empty() ? "AttMpls" : topology, 12, seed, 10.0, 10.0);
    s.name = name;
    auto failed = top_degree_routers(s.topology, 2);
    for (const auto& l : s.topology.links())
      if (std::find(failed.begin(), failed.end(), l.src) != failed.end() ||
          std::find(failed.begin(), failed.end(), l.dst) != failed.end())
        s.events.push_back({40.0, SetCapacity{l.id, 0.001}});
    s.events.push_back({150.0, RerunPfo{Knowledge::current_truth}});
    s.duration = 220.0;
    return s;
  }
  std::string valid;
  for (const auto& n : paper_scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ScenarioError("unknown scenario '" + name + "'; valid names: " + valid);
}

PfoInstance scenario_instance(const Scenario& s) { return instance_with(s.topology, s.classes, s.paths); }

PfoInstance estimated_instance(const Scenario& s) {
  auto in = scenario_instance(s);
  for (const auto& [l, c] : s.estimate) in.topology.set_capacity(l, c);
  return in;
}

ExperimentResult run_experiment(const Scenario& s, SimConfig sim) {
  validate(s);
  sim.dt = s.dt;
  ExperimentResult out;
  auto truth = annotated("setup", [&] { return scenario_instance(s); });
  auto est = truth;
  for (const auto& [l, c] : s.estimate) est.topology.set_capacity(l, c);
  const Knowledge first = s.estimate.empty() ? Knowledge::current_truth : Knowledge::stale;
  auto plan = annotated("initial PFO", [&] { return solve_pfo(est); });
  out.plans.push_back({0.0, first, plan});
  InstallConfig initial{annotated("initial mapping", [&] { return compute_weights(plan, est, s.gamma); }), plan.rates};

  std::vector<SimEvent> events;
  std::vector<std::pair<double, Topology>> capacity_at{{0.0, truth.topology}};
  Topology now = truth.topology;
  for (const auto& e : s.events) {
    if (auto* a = std::get_if<SetCapacity>(&e.action)) {
      now.set_capacity(a->link, a->mbps);
      events.push_back({e.t, *a});
      if (capacity_at.back().first == e.t) capacity_at.back().second = now;
      else capacity_at.push_back({e.t, now});
    } else if (auto* b = std::get_if<SetSessions>(&e.action)) {
      events.push_back({e.t, *b});
    } else if (auto* c = std::get_if<InstallConfig>(&e.action)) {
      events.push_back({e.t, *c});
    } else {
      auto k = std::get<RerunPfo>(e.action).knowledge;
      auto inst = k == Knowledge::stale ? est : truth;
      if (k == Knowledge::current_truth) inst.topology = now;
      std::string phase = "PFO re-run at t = " + format_number(e.t);
      auto p = annotated(phase, [&] { return solve_pfo(inst); });
      out.plans.push_back({e.t, k, p});
      events.push_back({e.t, InstallConfig{annotated(phase, [&] { return compute_weights(p, inst, s.gamma); }), p.rates}});
    }
  }
  out.trace = annotated("simulation", [&] { return simulate(truth, initial, s.duration, events, sim); });

  std::vector<std::pair<double, std::string>> bounds{{0.0, "initial"}};
  for (const auto& e : s.events) {
    if (e.t <= 0.0 || e.t >= s.duration) continue;
    if (bounds.back().first == e.t) {
      if (bounds.back().second.find(event_name(e)) == std::string::npos) bounds.back().second += "+" + std::string(event_name(e));
    } else {
      bounds.push_back({e.t, event_name(e)});
    }
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    Phase ph;
    ph.label = bounds[i].second;
    ph.start = bounds[i].first;
    ph.end = i + 1 < bounds.size() ? bounds[i + 1].first : s.duration;
    const double stop = i + 1 < bounds.size() ? ph.end : s.duration + 1.0;
    ph.mean_utility = out.trace.mean_utility(ph.start, stop);
    const Sample* last = nullptr;
    for (const auto& smp : out.trace.samples)
      if (smp.t >= ph.start - 1e-9 && smp.t < stop - 1e-9) last = &smp;
    const Topology* caps = &capacity_at.front().second;
    for (const auto& [t, topo] : capacity_at)
      if (t <= ph.start + 1e-9) caps = &topo;
    ph.end_utility = last->utility;
    ph.steady = last->steady;
    for (std::size_t l = 0; l < caps->links().size(); ++l)
      ph.max_overshoot = std::max(ph.max_overshoot, last->link_goodput[l] / caps->links()[l].capacity - 1.0);
    out.phases.push_back(ph);
  }

  const auto& final_plan = out.plans.back().plan;
  const auto& end = out.trace.last();
  for (std::size_t f = 0; f < truth.flows.size(); ++f) {
    const auto& flow = truth.flows[f];
    double a = final_plan.rates.at(flow.id);
    int n = final_plan.n.at(flow.class_id);
    if (a <= 0.0 || n <= 0) continue;
    int actual_n = end.sessions[out.trace.class_index(flow.class_id)];
    out.summary.push_back({flow.id, n * a, actual_n * end.goodput[f]});
  }
  return out;
}

void write_summary_csv(std::ostream& out, const ExperimentResult& r) {
  out << "path,target_mbps,actual_mbps\n";
  for (const auto& row : r.summary)
    out << row.path << ',' << format_number(row.target) << ',' << format_number(row.actual) << '\n';
}

void write_phases_csv(std::ostream& out, const ExperimentResult& r) {
  out << "phase,start_s,end_s,mean_utility,end_utility,max_overshoot,steady\n";
  for (const auto& p : r.phases)
    out << p.label << ',' << format_number(p.start) << ',' << format_number(p.end) << ','
        << format_number(p.mean_utility) << ',' << format_number(p.end_utility) << ','
        << format_number(p.max_overshoot) << ',' << (p.steady ? "true" : "false") << '\n';
}

std::vector<HopRow> hop_study(std::span<const Scenario> setups, std::span<const int> hop_limits) {
  std::vector<HopRow> rows;
  for (const auto& s : setups) {
    for (int h : hop_limits) {
      if (h < 1) throw DomainError("hop limits must be >= 1");
      PathPolicy p = s.paths;
      p.kind = PathPolicy::Kind::max_hops;
      p.max_hops = h;
      auto in = instance_with(s.topology, s.classes, p);
      auto plan = solve_pfo(in);
      rows.push_back({s.topology.name(), h, plan.utility, in.flows.size()});
    }
  }
  return rows;
}

std::vector<RandomPathRow> random_path_study(const Scenario& setup, std::span<const int> k_values,
                                             int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  PathPolicy all = setup.paths;
  all.kind = PathPolicy::Kind::max_hops;
  const double best = solve_pfo(instance_with(setup.topology, setup.classes, all)).utility;
  std::vector<RandomPathRow> rows;
  for (int k : k_values) {
    RandomPathRow row;
    row.topology = setup.topology.name();
    row.k = k;
    row.min_fraction = kInf;
    row.max_fraction = -kInf;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      PathPolicy p = all;
      if (k >= 0) {
        p.kind = PathPolicy::Kind::random;
        p.random_k = k;
        p.seed = mix_seed(seed, static_cast<std::uint64_t>(t));
      }
      double u = solve_pfo(instance_with(setup.topology, setup.classes, p)).utility;
      double frac = best > 0.0 ? u / best : 1.0;
      sum += frac;
      row.min_fraction = std::min(row.min_fraction, frac);
      row.max_fraction = std::max(row.max_fraction, frac);
    }
    row.mean_fraction = sum / trials;
    rows.push_back(row);
  }
  return rows;
}

namespace {

constexpr double kSettleFactor = 256.0;

SweepPoint sweep_point(double value, const PfoInstance& truth, const InstallConfig& install,
                       const PfoPlan& plan, double duration, const std::vector<SimEvent>& events,
                       const SimConfig& sim) {
  SweepPoint pt;
  pt.value = value;
  for (auto kind : {Controller::montra, Controller::fixed_rate, Controller::unit_weight}) {
    double horizon = duration;
    auto trace = simulate_baseline(kind, truth, install, horizon, events, sim);
    auto agrees = [](const SimTrace& a, const SimTrace& b) {
      for (std::size_t f = 0; f < a.last().send.size(); ++f) {
        double x = a.last().send[f], y = b.last().send[f];
        if (std::abs(y - x) > 1e-3 * std::max(x, 1e-9)) return false;
      }
      return true;
    };
    while (horizon < kSettleFactor * duration) {
      horizon *= 2.0;
      auto next = simulate_baseline(kind, truth, install, horizon, events, sim);
      bool done = trace.converged_at && next.converged_at && agrees(trace, next);
      trace = std::move(next);
      if (done) break;
    }
    pt.horizon[kind] = horizon;
    pt.utility[kind] = trace.last().utility;
    pt.steady[kind] = trace.converged_at.has_value();
    if (kind != Controller::montra) continue;
    const auto& end = trace.last();
    for (std::size_t f = 0; f < truth.flows.size(); ++f) {
      const auto& flow = truth.flows[f];
      double a = plan.rates.at(flow.id);
      int n = plan.n.at(flow.class_id);
      int actual_n = end.sessions[trace.class_index(flow.class_id)];
      if (a <= 0.0 || n <= 0) continue;
      pt.flows.push_back({flow.id, n * a, actual_n * end.goodput[f]});
    }
  }
  return pt;
}

}  // namespace

std::vector<SweepPoint> robustness_sweep(const Scenario& s, const LinkId& link,
                                         std::span<const double> capacities, SimConfig sim) {
  validate(s);
  sim.dt = s.dt;
  auto est = estimated_instance(s);
  auto plan = solve_pfo(est);
  InstallConfig install{compute_weights(plan, est, s.gamma), plan.rates};
  auto truth = scenario_instance(s);
  if (!truth.topology.has_link(link)) throw ScenarioError("unknown sweep link '" + link + "'");
  std::vector<SweepPoint> out;
  for (double c : capacities) {
    auto t = truth;
    t.topology.set_capacity(link, c);
    out.push_back(sweep_point(c, t, install, plan, s.duration, {}, sim));
  }
  return out;
}

std::vector<SweepPoint> demand_sweep(const Scenario& s, const ClassId& class_id,
                                     std::span<const int> sessions, SimConfig sim) {
  validate(s);
  sim.dt = s.dt;
  auto est = estimated_instance(s);
  auto plan = solve_pfo(est);
  InstallConfig install{compute_weights(plan, est, s.gamma), plan.rates};
  auto truth = scenario_instance(s);
  truth.class_index(class_id);
  std::vector<SweepPoint> out;
  for (int n : sessions)
    out.push_back(sweep_point(n, truth, install, plan, s.duration, {{0.0, SetSessions{class_id, n}}}, sim));
  return out;
}

void write_hops_csv(std::ostream& out, std::span<const HopRow> rows) {
  out << "topology,hops,utility,flows\n";
  for (const auto& r : rows) out << r.topology << ',' << r.hops << ',' << format_number(r.utility) << ',' << r.flows << '\n';
}

void write_random_csv(std::ostream& out, std::span<const RandomPathRow> rows) {
  out << "topology,k,mean_fraction,min_fraction,max_fraction\n";
  for (const auto& r : rows)
    out << r.topology << ',' << (r.k < 0 ? std::string("all") : std::to_string(r.k)) << ',' << format_number(r.mean_fraction) << ','
        << format_number(r.min_fraction) << ',' << format_number(r.max_fraction) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> rows, const std::string& value_name) {
  out << value_name << ",montra_utility,fixed_rate_utility,unit_weight_utility,montra_steady";
  if (!rows.empty())
    for (const auto& f : rows.front().flows) out << ',' << f.path << "_target," << f.path << "_actual";
  out << '\n';
  for (const auto& r : rows) {
    out << format_number(r.value) << ',' << format_number(r.utility.at(Controller::montra)) << ','
        << format_number(r.utility.at(Controller::fixed_rate)) << ','
        << format_number(r.utility.at(Controller::unit_weight)) << ','
        << (r.steady.at(Controller::montra) ? "true" : "false");
    for (const auto& f : r.flows) out << ',' << format_number(f.target) << ',' << format_number(f.actual);
    out << '\n';
  }
}

}  // namespace mon
