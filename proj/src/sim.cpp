#include "mon/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace mon {

const char* to_string(Controller c) {
  switch (c) {
    case Controller::montra: return "montra";
    case Controller::fixed_rate: return "fixed-rate";
    case Controller::unit_weight: return "unit-weight";
  }
  return "?";
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double path_loss(std::span<const double> link_loss) {
  double keep = 1.0;
  for (double p : link_loss) keep *= 1.0 - p;
  return 1.0 - keep;
}

std::size_t SimTrace::flow_index(const FlowId& id) const {
  auto it = std::find(flows.begin(), flows.end(), id);
  if (it == flows.end()) throw LookupError("unknown flow '" + id + "'");
  return static_cast<std::size_t>(it - flows.begin());
}

std::size_t SimTrace::class_index(const ClassId& id) const {
  auto it = std::find(classes.begin(), classes.end(), id);
  if (it == classes.end()) throw LookupError("unknown class '" + id + "'");
  return static_cast<std::size_t>(it - classes.begin());
}

double SimTrace::mean_utility(double t0, double t1) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& s : samples) {
    if (s.t >= t0 - 1e-9 && s.t < t1 - 1e-9) {
      sum += s.utility;
      ++count;
    }
  }
  if (count == 0) throw DomainError("no samples in [" + format_number(t0) + ", " + format_number(t1) + ")");
  return sum / count;
}

namespace {

class Fluid {
 public:
  Fluid(const PfoInstance& net, const SimConfig& cfg) : net_(net), cfg_(cfg), topo_(net.topology) {
    const auto nf = net.flows.size();
    flow_class_.resize(nf);
    flow_links_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      flow_class_[f] = net.class_index(net.flows[f].class_id);
      for (const auto& l : net.flows[f].route) flow_links_[f].push_back(topo_.link_index(l));
    }
    x_.assign(nf, 0.0);
    weight_.assign(nf, 0.0);
    active_.assign(nf, false);
    planned_.assign(nf, false);
    sessions_.assign(net.classes.size(), 0);
    loss_.assign(topo_.links().size(), 0.0);
    keep_.assign(nf, 1.0);
  }

  void validate(const SimEvent& e) const {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, SetCapacity>) {
            if (!topo_.has_link(a.link)) throw ScenarioError("event references unknown link '" + a.link + "'");
            if (!(a.mbps > 0.0) || !std::isfinite(a.mbps))
              throw ScenarioError("capacity of '" + a.link + "' must be positive");
          } else if constexpr (std::is_same_v<T, SetSessions>) {
            find_class(a.class_id);
            if (a.n < 0) throw ScenarioError("session count must be >= 0");
          } else {
            validate_install(a);
          }
        },
        e.action);
  }

  void validate_install(const InstallConfig& a) const {
    for (const auto& [id, w] : a.config.weights) {
      find_flow(id);
      if (!(w >= 0.0) || !std::isfinite(w)) throw ScenarioError("weight of '" + id + "' must be finite and >= 0");
    }
    for (const auto& [id, v] : a.rates) {
      find_flow(id);
      if (!(v >= 0.0) || !std::isfinite(v)) throw ScenarioError("rate of '" + id + "' must be finite and >= 0");
    }
    for (const auto& [id, n] : a.config.sessions) {
      find_class(id);
      if (n < 0) throw ScenarioError("session count must be >= 0");
    }
    if (!(a.config.gamma > 0.0)) throw ScenarioError("gamma must be positive");
  }

  void apply(const SimEvent& e) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, SetCapacity>) {
            topo_.set_capacity(a.link, a.mbps);
          } else if constexpr (std::is_same_v<T, SetSessions>) {
            sessions_[find_class(a.class_id)] = a.n;
            refresh_active();
          } else {
            install(a);
          }
        },
        e.action);
  }

  void install(const InstallConfig& a) {
    const auto nf = net_.flows.size();
    std::fill(sessions_.begin(), sessions_.end(), 0);
    for (const auto& [id, n] : a.config.sessions) sessions_[find_class(id)] = n;
    for (std::size_t f = 0; f < nf; ++f) {
      auto r = a.rates.find(net_.flows[f].id);
      x_[f] = r == a.rates.end() ? 0.0 : r->second;
      planned_[f] = x_[f] > 0.0 && sessions_[flow_class_[f]] > 0;
      if (planned_[f]) x_[f] = std::max(x_[f], cfg_.x_min);
      double raw = 0.0;
      if (cfg_.controller == Controller::unit_weight) {
        raw = planned_[f] ? 1.0 : 0.0;
      } else {
        auto w = a.config.weights.find(net_.flows[f].id);
        int n = sessions_[flow_class_[f]];
        if (w != a.config.weights.end() && n > 0) raw = w->second / n;
      }
      weight_[f] = raw;
    }
    double price = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
      if (planned_[f] && weight_[f] > 0.0) price = std::max(price, weight_[f] / x_[f]);
    if (cfg_.loss_target > 0.0 && price > 0.0)
      for (auto& w : weight_) w *= cfg_.loss_target / price;
    double wmax = 0.0;
    for (double w : weight_) wmax = std::max(wmax, w);
    gain_ = a.config.gamma / (wmax > 0.0 ? wmax : 1.0);
    refresh_active();
  }

  void step(double dt) {
    compute_loss();
    if (cfg_.controller == Controller::fixed_rate) return;
    for (std::size_t f = 0; f < x_.size(); ++f) {
      if (!active_[f]) continue;
      double p = 1.0 - keep_[f];
      double drift = gain_ * (x_[f] / cfg_.packet_size_mbit) * ((1.0 - p) * weight_[f] - p * x_[f]);
      x_[f] = std::max(cfg_.x_min, x_[f] + dt * drift);
    }
  }

  void compute_loss() {
    std::vector<double> load(topo_.links().size(), 0.0);
    for (std::size_t f = 0; f < x_.size(); ++f) {
      if (!active_[f]) continue;
      double y = sessions_[flow_class_[f]] * x_[f];
      for (auto l : flow_links_[f]) load[l] += y;
    }
    for (std::size_t l = 0; l < load.size(); ++l) {
      double c = topo_.links()[l].capacity;
      loss_[l] = load[l] > c ? (load[l] - c) / load[l] : 0.0;
    }
    for (std::size_t f = 0; f < x_.size(); ++f) {
      double keep = 1.0;
      for (auto l : flow_links_[f]) keep *= 1.0 - loss_[l];
      keep_[f] = keep;
    }
  }

  Sample sample(double t) {
    compute_loss();
    Sample s;
    s.t = t;
    const auto nf = x_.size();
    s.send.assign(nf, 0.0);
    s.goodput.assign(nf, 0.0);
    s.class_goodput.assign(net_.classes.size(), 0.0);
    s.sessions = sessions_;
    s.link_goodput.assign(topo_.links().size(), 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
      if (!active_[f]) continue;
      s.send[f] = x_[f];
      s.goodput[f] = x_[f] * keep_[f];
      s.class_goodput[flow_class_[f]] += s.goodput[f];
      for (auto l : flow_links_[f]) s.link_goodput[l] += sessions_[flow_class_[f]] * s.goodput[f];
    }
    std::map<ClassId, int> n;
    std::map<ClassId, double> rate;
    for (std::size_t k = 0; k < net_.classes.size(); ++k) {
      n[net_.classes[k].id] = sessions_[k];
      rate[net_.classes[k].id] = s.class_goodput[k];
    }
    s.utility = cumulative_utility(net_.classes, n, rate);
    return s;
  }

  const Topology& topology() const { return topo_; }

 private:
  std::size_t find_class(const ClassId& id) const {
    for (std::size_t k = 0; k < net_.classes.size(); ++k)
      if (net_.classes[k].id == id) return k;
    throw ScenarioError("event references unknown class '" + id + "'");
  }

  void find_flow(const FlowId& id) const {
    for (const auto& f : net_.flows)
      if (f.id == id) return;
    throw ScenarioError("event references unknown flow '" + id + "'");
  }

  void refresh_active() {
    for (std::size_t f = 0; f < x_.size(); ++f) active_[f] = planned_[f] && sessions_[flow_class_[f]] > 0;
  }

  const PfoInstance& net_;
  SimConfig cfg_;
  Topology topo_;
  std::vector<std::size_t> flow_class_;
  std::vector<std::vector<std::size_t>> flow_links_;
  std::vector<double> x_, weight_, loss_, keep_;
  std::vector<bool> active_, planned_;
  std::vector<int> sessions_;
  double gain_ = 0.0;
};

}  // namespace

SimTrace simulate(const PfoInstance& network, const InstallConfig& initial, double duration,
                  std::vector<SimEvent> events, const SimConfig& config) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ScenarioError("duration must be positive");
  if (!(config.dt > 0.0) || !(config.sample_interval >= config.dt))
    throw ScenarioError("dt must be positive and no larger than the sampling interval");
  if (!(config.packet_size_mbit > 0.0) || !(config.x_min > 0.0) || config.loss_target < 0.0 ||
      config.loss_target >= 1.0)
    throw ScenarioError("invalid simulator configuration");
  network.validate();
  Fluid fluid(network, config);
  fluid.validate_install(initial);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].t < 0.0 || events[i].t > duration)
      throw ScenarioError("event at t = " + format_number(events[i].t) + " outside [0, duration]");
    if (i > 0 && events[i].t < events[i - 1].t) throw ScenarioError("events must be sorted by time");
    fluid.validate(events[i]);
  }

  SimTrace trace;
  for (const auto& f : network.flows) {
    trace.flows.push_back(f.id);
    trace.flow_class.push_back(f.class_id);
  }
  for (const auto& k : network.classes) trace.classes.push_back(k.id);
  for (const auto& l : network.topology.links()) trace.links.push_back(l.id);

  fluid.install(initial);
  const auto total = static_cast<long long>(std::llround(duration / config.dt));
  const auto per_sample = std::max<long long>(1, std::llround(config.sample_interval / config.dt));
  std::size_t next_event = 0;
  std::vector<double> prev_send;
  bool have_prev = false;
  for (long long k = 0; k <= total; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    bool changed = false;
    while (next_event < events.size() && events[next_event].t <= t + 1e-9) {
      fluid.apply(events[next_event++]);
      changed = true;
    }
    if (changed) have_prev = false;
    if (k % per_sample == 0 || k == total) {
      Sample s = fluid.sample(static_cast<double>(k / per_sample) * config.sample_interval);
      if (k == total) s.t = t;
      if (have_prev) {
        bool steady = true;
        for (std::size_t f = 0; f < s.send.size() && steady; ++f) {
          double a = prev_send[f], b = s.send[f];
          if (std::abs(b - a) > config.convergence_tol * std::max(a, config.x_min)) steady = false;
        }
        s.steady = steady;
      }
      prev_send = s.send;
      have_prev = true;
      if (!trace.samples.empty() && s.t <= trace.samples.back().t + 1e-12) trace.samples.pop_back();
      trace.samples.push_back(std::move(s));
    }
    if (k < total) fluid.step(config.dt);
  }
  trace.converged_at.reset();
  for (auto it = trace.samples.rbegin(); it != trace.samples.rend() && it->steady; ++it)
    trace.converged_at = it->t;
  for (const auto& l : fluid.topology().links()) trace.capacity.push_back(l.capacity);
  return trace;
}

SimTrace simulate_baseline(Controller kind, const PfoInstance& network, const InstallConfig& initial,
                           double duration, std::vector<SimEvent> events, SimConfig config) {
  config.controller = kind;
  return simulate(network, initial, duration, std::move(events), config);
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "t,flow_id,send_rate_mbps,goodput_mbps,class_id,class_goodput_mbps,utility\n";
  for (const auto& s : trace.samples) {
    const std::string t = format_number(s.t);
    const std::string u = format_number(s.utility);
    double send_total = 0.0, good_total = 0.0;
    for (std::size_t f = 0; f < trace.flows.size(); ++f) {
      std::size_t k = trace.class_index(trace.flow_class[f]);
      send_total += s.sessions[k] * s.send[f];
      good_total += s.sessions[k] * s.goodput[f];
      out << t << ',' << trace.flows[f] << ',' << format_number(s.send[f]) << ','
          << format_number(s.goodput[f]) << ',' << trace.flow_class[f] << ','
          << format_number(s.class_goodput[k]) << ',' << u << '\n';
    }
    out << t << ",," << format_number(send_total) << ',' << format_number(good_total) << ",,," << u << '\n';
  }
}

}  // namespace mon
