#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mon/json_io.hpp"
#include "mon/sim.hpp"

namespace mon {

struct PathPolicy {
  enum class Kind { max_hops, explicit_flows, random };
  Kind kind = Kind::max_hops;
  int max_hops = 2;
  int random_k = 0;  // indirect paths per class on top of the direct one
  std::uint64_t seed = 0;

  bool operator==(const PathPolicy&) const = default;
};

enum class Knowledge { current_truth, stale };

struct RerunPfo {
  Knowledge knowledge = Knowledge::current_truth;
  bool operator==(const RerunPfo&) const = default;
};

struct Event {
  double t = 0.0;
  std::variant<SetCapacity, SetSessions, RerunPfo, InstallConfig> action;
  bool operator==(const Event&) const = default;
};

struct Scenario {
  std::string name;
  Topology topology;  // ground truth at t = 0
  ClassesDoc classes;
  PathPolicy paths;
  std::map<LinkId, double> estimate;  // capacity overrides seen by the initial PFO solve
  std::vector<Event> events;
  double duration = 60.0;
  double dt = 0.01;
  double gamma = 0.001;

  bool operator==(const Scenario&) const = default;
};

void validate(const Scenario& s);

Json to_json(const Scenario& s);
/// "topology" may be inline JSON or a path to a .json or .graphml file.
Scenario scenario_from_json(const Json& j);

const std::vector<std::string>& paper_scenario_names();

/**
 * Named experiment setups. `topology` overrides the Topology Zoo graph used by
 * the hop, random-path and failure-large setups (file stem under data/).
 */
Scenario build_paper_scenario(const std::string& name, std::uint64_t seed = 1,
                              const std::string& topology = "");

/// Which site pairs get a traffic class in the study setups.
enum class ClassSelection {
  half_of_sites,  // every ordered pair among a seeded half of the sites
  half_of_pairs,  // a seeded half of all ordered site pairs
};

/// Zoo router graph (name under data/ or a .graphml path) with sites on
/// `site_count` seeded routers (0 = all) and U_B single-session classes.
Scenario study_scenario(const std::string& topology, std::size_t site_count, std::uint64_t seed,
                        double uplink_mbps = 30.0, double core_mbps = 10.0,
                        ClassSelection selection = ClassSelection::half_of_sites);

/// PFO instance on the scenario's truth topology under its path policy.
PfoInstance scenario_instance(const Scenario& s);
/// Same flows, capacities replaced by the scenario's estimate.
PfoInstance estimated_instance(const Scenario& s);

struct Phase {
  std::string label;
  double start = 0.0;
  double end = 0.0;
  double mean_utility = 0.0;
  double end_utility = 0.0;  // last sample before the phase ends
  double max_overshoot = 0.0;  // max over links of goodput / capacity - 1 at that sample
  bool steady = false;
};

struct TimedPlan {
  double t = 0.0;
  Knowledge knowledge = Knowledge::current_truth;
  PfoPlan plan;
};

struct SummaryRow {
  std::string path;
  double target = 0.0;  // planned aggregate n * A_f
  double actual = 0.0;  // aggregate goodput at the end of the run
};

struct ExperimentResult {
  SimTrace trace;
  std::vector<Phase> phases;
  std::vector<TimedPlan> plans;
  std::vector<SummaryRow> summary;
};

ExperimentResult run_experiment(const Scenario& s, SimConfig sim = {});

void write_summary_csv(std::ostream& out, const ExperimentResult& r);
void write_phases_csv(std::ostream& out, const ExperimentResult& r);

struct HopRow {
  std::string topology;
  int hops = 0;
  double utility = 0.0;
  std::size_t flows = 0;
};

std::vector<HopRow> hop_study(std::span<const Scenario> setups, std::span<const int> hop_limits);

struct RandomPathRow {
  std::string topology;
  int k = 0;  // -1 means every indirect path
  double mean_fraction = 0.0;
  double min_fraction = 0.0;
  double max_fraction = 0.0;
};

/// Direct path plus k random paths of up to two hops per class, normalized by the all-paths optimum.
std::vector<RandomPathRow> random_path_study(const Scenario& setup, std::span<const int> k_values,
                                             int trials, std::uint64_t seed);

struct SweepPoint {
  double value = 0.0;  // capacity (robustness) or session count (demand)
  std::map<Controller, double> utility;
  std::map<Controller, bool> steady;
  std::map<Controller, double> horizon;  // simulated seconds until steady (capped)
  std::vector<SummaryRow> flows;  // montra aggregate goodput vs plan
};

/// Sweep points run for the scenario duration, doubled until two horizons agree at steady state, up to 256 times that.

/// Stale plan from the scenario estimate, truth capacity of `link` swept over `capacities`.
std::vector<SweepPoint> robustness_sweep(const Scenario& s, const LinkId& link,
                                         std::span<const double> capacities, SimConfig sim = {});

/// Plan from the scenario, actual sessions of `class_id` swept over `sessions`.
std::vector<SweepPoint> demand_sweep(const Scenario& s, const ClassId& class_id,
                                     std::span<const int> sessions, SimConfig sim = {});

void write_hops_csv(std::ostream& out, std::span<const HopRow> rows);
void write_random_csv(std::ostream& out, std::span<const RandomPathRow> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> rows, const std::string& value_name);

}  // namespace mon
