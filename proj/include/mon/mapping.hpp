#pragma once

#include <map>
#include <string>
#include <vector>

#include "mon/pfo.hpp"

namespace mon {

struct TransportConfig {
  std::map<FlowId, double> weights;
  std::map<ClassId, int> sessions;
  double gamma = 0.001;
  double gamma_norm = 0.001;  // gamma / max weight

  bool operator==(const TransportConfig&) const = default;
};

/// w_f = n_k * (sum of route duals) * A_f; sessions copied from the plan.
TransportConfig compute_weights(const PfoPlan& plan, const PfoInstance& instance,
                                double gamma = 0.001);

struct GradientEntry {
  FlowId flow;
  enum class Outcome { pass, interval_pass, fail, skipped } outcome = Outcome::skipped;
  double residual = 0.0;
  std::string reason;
};

struct GradientReport {
  std::vector<GradientEntry> entries;
  bool ok() const;
};

/// Checks w_f / A_f against n_k times the active utility slope (interval at breakpoints).
GradientReport check_gradient_match(const PfoPlan& plan, const PfoInstance& instance,
                                    const TransportConfig& config, double tol = 1e-6);

}  // namespace mon
