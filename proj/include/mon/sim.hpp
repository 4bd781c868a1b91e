#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mon/mapping.hpp"
#include "mon/pfo.hpp"

namespace mon {

enum class Controller { montra, fixed_rate, unit_weight };

const char* to_string(Controller c);

struct SimConfig {
  double dt = 0.01;
  double sample_interval = 1.0;
  double x_min = 0.001;
  /// Packet size in Mbit; per-session packet rate is x / packet_size. 1 gives the bare drift.
  double packet_size_mbit = 0.012;
  /// Uniform weight rescale so the largest per-session target price equals this loss rate; 0 keeps raw weights.
  double loss_target = 0.01;
  double convergence_tol = 1e-3;
  Controller controller = Controller::montra;
};

struct SetCapacity {
  LinkId link;
  double mbps = 0.0;
  bool operator==(const SetCapacity&) const = default;
};

struct SetSessions {
  ClassId class_id;
  int n = 0;
  bool operator==(const SetSessions&) const = default;
};

/// New weights and sessions; controllers restart from the given rates.
struct InstallConfig {
  TransportConfig config;
  RateAssignment rates;
  bool operator==(const InstallConfig&) const = default;
};

struct SimEvent {
  double t = 0.0;
  std::variant<SetCapacity, SetSessions, InstallConfig> action;
  bool operator==(const SimEvent&) const = default;
};

struct Sample {
  double t = 0.0;
  std::vector<double> send;           // per flow, per session
  std::vector<double> goodput;        // per flow, per session
  std::vector<double> class_goodput;  // per class, per session (sum over the class's flows)
  std::vector<int> sessions;          // per class
  std::vector<double> link_goodput;   // per link, sum of n * goodput over flows crossing it
  double utility = 0.0;
  bool steady = false;  // every active rate moved < tol over the last window
};

struct SimTrace {
  std::vector<FlowId> flows;
  std::vector<ClassId> flow_class;
  std::vector<ClassId> classes;
  std::vector<LinkId> links;
  std::vector<double> capacity;  // per link at the last sample
  std::vector<Sample> samples;
  std::optional<double> converged_at;  // start of the final steady stretch

  std::size_t flow_index(const FlowId& id) const;
  std::size_t class_index(const ClassId& id) const;
  /// Mean utility over samples with t0 <= t < t1.
  double mean_utility(double t0, double t1) const;
  const Sample& last() const { return samples.back(); }
};

/**
 * Fluid simulation of the weighted proportionally fair controllers. `network`
 * is the ground truth (topology, classes, flows); `initial` is the config
 * installed at t = 0. Events must be time-sorted and are validated before the
 * first step (ScenarioError).
 */
SimTrace simulate(const PfoInstance& network, const InstallConfig& initial, double duration,
                  std::vector<SimEvent> events = {}, const SimConfig& config = {});

/// simulate with the controller forced to a baseline kind.
SimTrace simulate_baseline(Controller kind, const PfoInstance& network,
                           const InstallConfig& initial, double duration,
                           std::vector<SimEvent> events = {}, SimConfig config = {});

/// Equilibrium loss on a single path, p = 1 - prod(1 - p_l).
double path_loss(std::span<const double> link_loss);

void write_trace_csv(std::ostream& out, const SimTrace& trace);

/// Shortest round-trip decimal form used by every CSV writer.
std::string format_number(double v);

}  // namespace mon
