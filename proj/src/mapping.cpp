#include "mon/mapping.hpp"

#include <algorithm>
#include <cmath>

namespace mon {

TransportConfig compute_weights(const PfoPlan& plan, const PfoInstance& instance, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  TransportConfig cfg;
  cfg.gamma = gamma;
  cfg.sessions = plan.n;
  double wmax = 0.0;
  for (const auto& f : instance.flows) {
    auto rit = plan.rates.find(f.id);
    double a = rit == plan.rates.end() ? 0.0 : rit->second;
    auto nit = plan.n.find(f.class_id);
    int n = nit == plan.n.end() ? 0 : nit->second;
    double w = 0.0;
    if (a > 0.0 && n > 0) {
      double price = 0.0;
      for (const auto& l : f.route) {
        auto d = plan.duals.find(l);
        if (d == plan.duals.end())
          throw ConfigError("plan has no dual for link '" + l + "' on flow '" + f.id + "'");
        price += d->second;
      }
      w = n * price * a;
    }
    cfg.weights[f.id] = w;
    wmax = std::max(wmax, w);
  }
  cfg.gamma_norm = gamma / (wmax > 0.0 ? wmax : 1.0);
  return cfg;
}

bool GradientReport::ok() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const GradientEntry& e) { return e.outcome == GradientEntry::Outcome::fail; });
}

GradientReport check_gradient_match(const PfoPlan& plan, const PfoInstance& instance,
                                    const TransportConfig& config, double tol) {
  GradientReport rep;
  auto xk = class_rates(instance, plan);
  for (const auto& f : instance.flows) {
    GradientEntry e;
    e.flow = f.id;
    auto ra = plan.rates.find(f.id);
    auto rn = plan.n.find(f.class_id);
    if (ra == plan.rates.end() || rn == plan.n.end()) throw LookupError("plan does not cover flow '" + f.id + "'");
    double a = ra->second;
    int n = rn->second;
    if (a <= 0.0 || n <= 0) {
      e.reason = "zero target rate";
      rep.entries.push_back(e);
      continue;
    }
    auto wit = config.weights.find(f.id);
    if (wit == config.weights.end()) {
      e.reason = "no weight";
      rep.entries.push_back(e);
      continue;
    }
    const auto& u = instance.classes[instance.class_index(f.class_id)].utility;
    double x = xk.at(f.class_id);
    std::size_t i = u.piece_index(x);
    double lo = u.piece(i).slope, hi = lo;
    bool at_break = false;
    double scale = std::max(1.0, x);
    if (i + 1 < u.size() && std::abs(x - u.piece(i).hi) <= 1e-7 * scale) {
      lo = std::min(lo, u.piece(i + 1).slope);
      hi = std::max(hi, u.piece(i + 1).slope);
      at_break = true;
    }
    if (i > 0 && std::abs(x - u.piece(i).lo) <= 1e-7 * scale) {
      lo = std::min(lo, u.piece(i - 1).slope);
      hi = std::max(hi, u.piece(i - 1).slope);
      at_break = true;
    }
    double g = wit->second / a;
    double dist = g < n * lo ? n * lo - g : g > n * hi ? g - n * hi : 0.0;
    e.residual = dist;
    if (dist > tol) {
      e.outcome = GradientEntry::Outcome::fail;
      e.reason = "w/A differs from n * slope";
    } else {
      e.outcome = at_break ? GradientEntry::Outcome::interval_pass : GradientEntry::Outcome::pass;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace mon
