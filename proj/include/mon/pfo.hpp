#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mon/lp.hpp"
#include "mon/net_model.hpp"

namespace mon {

/// PFO input: estimated topology, classes, and candidate flows per class.
struct PfoInstance {
  Topology topology;
  std::vector<TrafficClass> classes;
  std::vector<Flow> flows;

  void validate() const;
  std::size_t class_index(const ClassId& id) const;
  std::size_t flow_index(const FlowId& id) const;
};

enum class Optimality { proved_optimal, best_found };

struct PfoPlan {
  std::map<ClassId, int> n;
  std::map<FlowId, double> rates;  // per-session rate of each flow
  std::map<LinkId, double> duals;
  double utility = 0.0;
  Optimality optimality = Optimality::proved_optimal;

  bool operator==(const PfoPlan&) const = default;
};

/// Chosen utility piece per class, in instance class order.
struct SegmentAssignment {
  std::vector<std::size_t> piece;
};

struct SolverConfig {
  std::uint64_t enumeration_budget = 1'000'000;
  std::uint64_t node_budget = 20'000;
  double utility_tol = 1e-9;
  bool concave_fast_path = true;
  lp::Options lp;
};

PfoPlan solve_pfo(const PfoInstance& instance, const SolverConfig& config = {});

/**
 * Inner LP at fixed sessions and segments. The returned solution is in
 * instance coordinates: x has one entry per flow (0 for classes with n = 0),
 * duals one entry per topology link (the raw capacity-row dual, 0 for links
 * no flow uses), objective includes the n_k * b_k constants.
 */
lp::Solution inner_lp(const PfoInstance& instance, std::span<const int> n,
                      const SegmentAssignment& seg, const lp::Options& opt = {});

/// LP relaxation bound over n_box (per class) and x_box (per flow).
double mccormick_bound(const PfoInstance& instance, std::span<const std::pair<int, int>> n_box,
                       std::span<const std::pair<double, double>> x_box);

struct KktReport {
  double feasibility = 0.0;    // capacity and session-bound violation
  double nonnegativity = 0.0;  // negative rates or duals
  double slackness = 0.0;      // max |lambda_l (load_l - C_l)|
  double gradient = 0.0;       // max distance of n_k sum(lambda) from n_k * slope interval
  std::vector<std::string> notes;

  double worst() const;
  bool ok(double tol = 1e-6) const { return worst() <= tol; }
};

KktReport check_kkt(const PfoInstance& instance, const PfoPlan& plan);

/// Link loads sum_f n_k(f) A_f under a plan, per topology link.
std::vector<double> link_loads(const PfoInstance& instance, const PfoPlan& plan);

/// Sum of per-session flow rates for each class under a plan.
std::map<ClassId, double> class_rates(const PfoInstance& instance, const PfoPlan& plan);

const char* to_string(Optimality o);

}  // namespace mon
