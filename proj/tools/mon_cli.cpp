#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mon/graphml.hpp"
#include "mon/json_io.hpp"
#include "mon/scenario.hpp"

namespace {

using namespace mon;

enum Exit { ok = 0, check_failed = 1, input_error = 2, internal_error = 3 };

Topology load_topology(const std::string& path) {
  if (path.ends_with(".graphml")) return load_graphml(path);
  return topology_from_json(read_json_file(path));
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << text;
}

template <class F>
std::string render(F&& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

struct Options {
  std::string topology, classes, scenario, paper, plan, out, src, dst;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma, dt, duration;
  std::optional<int> max_hops;
  std::vector<std::string> topologies;
  std::vector<int> k_values{0, 1, 2, 3, 4, -1};
  int trials = 10;
};

bool stochastic(const std::string& paper) {
  return paper == "hop-study" || paper == "random-path-study" || paper == "failure-large";
}

PfoInstance load_instance(const Options& o) {
  auto topo = load_topology(o.topology);
  auto doc = classes_from_json(read_json_file(o.classes));
  return build_instance(topo, doc, o.max_hops.value_or(doc.max_hops));
}

int cmd_solve(const Options& o) {
  auto in = load_instance(o);
  auto plan = solve_pfo(in);
  if (plan.optimality == Optimality::best_found)
    std::cerr << "warning: search budget exhausted, plan is best-found (not proved optimal)\n";
  auto text = to_json(plan).dump(2) + "\n";
  if (o.out.empty()) std::cout << text;
  else write_file(o.out, text);
  return ok;
}

int cmd_check(const Options& o) {
  auto in = load_instance(o);
  auto plan = plan_from_json(read_json_file(o.plan));
  auto rep = check_kkt(in, plan);
  std::cout << "residual,value\n"
            << "feasibility," << format_number(rep.feasibility) << '\n'
            << "nonnegativity," << format_number(rep.nonnegativity) << '\n'
            << "slackness," << format_number(rep.slackness) << '\n'
            << "gradient," << format_number(rep.gradient) << '\n';
  for (const auto& n : rep.notes) std::cerr << "note: " << n << '\n';
  bool pass = rep.ok(1e-6);
  std::cerr << (pass ? "KKT residuals within 1e-6\n" : "KKT residuals exceed 1e-6\n");
  return pass ? ok : check_failed;
}

int cmd_paths(const Options& o) {
  auto topo = load_topology(o.topology);
  int hops = o.max_hops.value_or(2);
  if (hops < 1) throw DomainError("max-hops must be >= 1");
  PathEnumerator paths(topo);
  std::cout << "class,hops,route\n";
  auto dump = [&](const std::string& name, const NodeId& s, const NodeId& d) {
    for (const auto& r : paths.paths(s, d, hops))
      std::cout << name << ',' << overlay_hops(topo, r) << ',' << route_label(topo, r) << '\n';
  };
  if (!o.classes.empty()) {
    for (const auto& c : classes_from_json(read_json_file(o.classes)).classes) {
      validate_class(topo, c.traffic);
      dump(c.traffic.id, c.traffic.src, c.traffic.dst);
    }
  } else {
    if (o.src.empty() || o.dst.empty()) throw InputError("paths needs --classes or both --src and --dst");
    if (!topo.has_node(o.src) || !topo.has_node(o.dst)) throw LookupError("unknown --src or --dst node");
    dump(o.src + "->" + o.dst, o.src, o.dst);
  }
  return ok;
}

std::vector<std::string> study_topologies(const Options& o) {
  if (!o.topologies.empty()) return o.topologies;
  return {"Abilene", "BtNorthAmerica"};
}

int cmd_hops(const Options& o) {
  if (!o.seed) throw InputError("hops needs --seed");
  std::vector<Scenario> setups;
  for (const auto& t : study_topologies(o)) setups.push_back(study_scenario(t, 12, *o.seed));
  std::vector<int> limits;
  for (int h = 1; h <= o.max_hops.value_or(4); ++h) limits.push_back(h);
  auto rows = hop_study(setups, limits);
  auto text = render([&](std::ostream& s) { write_hops_csv(s, rows); });
  std::cout << text;
  if (!o.out.empty()) write_file(o.out, text);
  return ok;
}

int cmd_randpaths(const Options& o) {
  if (!o.seed) throw InputError("randpaths needs --seed");
  std::string text;
  for (const auto& t : study_topologies(o)) {
    auto setup = study_scenario(t, 12, *o.seed);
    if (o.max_hops) setup.paths.max_hops = *o.max_hops;
    auto rows = random_path_study(setup, o.k_values, o.trials, *o.seed);
    auto table = render([&](std::ostream& s) { write_random_csv(s, rows); });
    text += text.empty() ? table : table.substr(table.find('\n') + 1);
  }
  std::cout << text;
  if (!o.out.empty()) write_file(o.out, text);
  return ok;
}

int cmd_run(const Options& o) {
  if (o.scenario.empty() == o.paper.empty()) throw InputError("run needs exactly one of --scenario or --paper");
  if (!o.paper.empty() && stochastic(o.paper) && !o.seed)
    throw InputError("--paper " + o.paper + " is seeded; pass --seed");
  std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);

  if (o.paper == "hop-study") {
    Options h = o;
    h.out = (dir / "hops.csv").string();
    return cmd_hops(h);
  }
  if (o.paper == "random-path-study") {
    Options r = o;
    r.out = (dir / "randpaths.csv").string();
    return cmd_randpaths(r);
  }

  Scenario s = o.paper.empty() ? scenario_from_json(read_json_file(o.scenario))
                               : build_paper_scenario(o.paper, o.seed.value_or(1),
                                                      o.topologies.empty() ? "" : o.topologies.front());
  if (o.gamma) s.gamma = *o.gamma;
  if (o.dt) s.dt = *o.dt;
  if (o.duration) s.duration = *o.duration;
  if (o.max_hops) s.paths.max_hops = *o.max_hops;
  validate(s);

  if (o.paper == "robustness-sweep" || o.paper == "demand-sweep") {
    std::vector<SweepPoint> rows;
    std::string name;
    if (o.paper == "robustness-sweep") {
      std::vector<double> caps{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
      rows = robustness_sweep(s, link_id("A", "B"), caps);
      name = "capacity_mbps";
    } else {
      std::vector<int> n;
      for (int i = 1; i <= 20; ++i) n.push_back(i);
      rows = demand_sweep(s, "A", n);
      name = "sessions";
    }
    auto text = render([&](std::ostream& out) { write_sweep_csv(out, rows, name); });
    write_file(dir / "sweep.csv", text);
    std::cout << text;
    return ok;
  }

  auto result = run_experiment(s);
  write_file(dir / "trace.csv", render([&](std::ostream& out) { write_trace_csv(out, result.trace); }));
  write_file(dir / "summary.csv", render([&](std::ostream& out) { write_summary_csv(out, result); }));
  auto phases = render([&](std::ostream& out) { write_phases_csv(out, result); });
  write_file(dir / "phases.csv", phases);
  for (const auto& p : result.plans)
    if (p.plan.optimality == Optimality::best_found)
      std::cerr << "warning: plan at t = " << format_number(p.t) << " is best-found\n";
  std::cout << phases;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission-aware overlay planning and transport simulation"};
  app.require_subcommand(1);
  Options o;
  auto in_files = [&](CLI::App* c) {
    c->add_option("--topology", o.topology, "Topology JSON or GraphML file")->required();
    c->add_option("--classes", o.classes, "Classes JSON file")->required();
    c->add_option("--max-hops", o.max_hops, "Overlay hop limit for enumerated routes");
  };
  auto solve = app.add_subcommand("solve", "Solve PFO and print the plan JSON");
  in_files(solve);
  solve->add_option("--out", o.out, "Write the plan here instead of stdout");

  auto check = app.add_subcommand("check", "Report KKT residuals of a plan");
  in_files(check);
  check->add_option("--plan", o.plan, "Plan JSON file")->required();

  auto run = app.add_subcommand("run", "Run a scenario file or a named experiment");
  run->add_option("--scenario", o.scenario, "Scenario JSON file");
  run->add_option("--paper", o.paper, "Named experiment")->check(CLI::IsMember(paper_scenario_names()));
  run->add_option("--topology", o.topologies, "Topology Zoo graph(s) for the study and failure-large setups");
  run->add_option("--seed", o.seed, "Seed for site, class and path selection");
  run->add_option("--gamma", o.gamma, "Stability constant");
  run->add_option("--dt", o.dt, "Simulation step in seconds");
  run->add_option("--duration", o.duration, "Simulated seconds");
  run->add_option("--max-hops", o.max_hops, "Overlay hop limit");
  run->add_option("--out", o.out, "Output directory (default .)");

  auto paths = app.add_subcommand("paths", "List enumerated overlay routes");
  paths->add_option("--topology", o.topology, "Topology JSON or GraphML file")->required();
  paths->add_option("--classes", o.classes, "Classes JSON file");
  paths->add_option("--src", o.src, "Source node");
  paths->add_option("--dst", o.dst, "Destination node");
  paths->add_option("--max-hops", o.max_hops, "Overlay hop limit (default 2)");

  auto hops = app.add_subcommand("hops", "Optimal utility per hop limit");
  hops->add_option("--topology", o.topologies, "Topology Zoo names or GraphML files (default Abilene, BtNorthAmerica)");
  hops->add_option("--seed", o.seed, "Seed for site and class selection");
  hops->add_option("--max-hops", o.max_hops, "Largest hop limit (default 4)");
  hops->add_option("--out", o.out, "Also write the table here");

  auto rand = app.add_subcommand("randpaths", "Utility fraction with k random indirect paths");
  rand->add_option("--topology", o.topologies, "Topology Zoo names or GraphML files (default Abilene, BtNorthAmerica)");
  rand->add_option("--seed", o.seed, "Seed for selection and path sampling");
  rand->add_option("--k", o.k_values, "Indirect path counts, -1 for all");
  rand->add_option("--trials", o.trials, "Seeds averaged per k")->check(CLI::PositiveNumber);
  rand->add_option("--max-hops", o.max_hops, "Hop limit of candidate paths (default 2)");
  rand->add_option("--out", o.out, "Also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input_error;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*check) return cmd_check(o);
    if (*run) return cmd_run(o);
    if (*paths) return cmd_paths(o);
    if (*hops) return cmd_hops(o);
    if (*rand) return cmd_randpaths(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return internal_error;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return internal_error;
  }
  return internal_error;
}
