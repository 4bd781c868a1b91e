#include "mon/pfo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <set>

namespace mon {

void PfoInstance::validate() const {
  std::set<ClassId> class_ids;
  for (const auto& k : classes) {
    validate_class(topology, k);
    if (!class_ids.insert(k.id).second) throw InputError("duplicate class id '" + k.id + "'");
  }
  std::set<FlowId> flow_ids;
  for (const auto& f : flows) {
    if (!flow_ids.insert(f.id).second) throw InputError("duplicate flow id '" + f.id + "'");
    validate_flow(topology, classes.at(class_index(f.class_id)), f);
  }
}

std::size_t PfoInstance::class_index(const ClassId& id) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].id == id) return i;
  throw LookupError("unknown class '" + id + "'");
}

std::size_t PfoInstance::flow_index(const FlowId& id) const {
  for (std::size_t i = 0; i < flows.size(); ++i)
    if (flows[i].id == id) return i;
  throw LookupError("unknown flow '" + id + "'");
}

const char* to_string(Optimality o) {
  return o == Optimality::proved_optimal ? "proved-optimal" : "best-found";
}

double KktReport::worst() const {
  return std::max({feasibility, nonnegativity, slackness, gradient});
}

namespace {

constexpr double kRateTol = 1e-9;
constexpr double kOpenShift = 1e-6;

struct Prepared {
  const PfoInstance& inst;
  std::size_t K = 0, F = 0, L = 0;
  std::vector<std::size_t> flow_class;
  std::vector<std::vector<std::size_t>> flow_links;
  std::vector<std::vector<std::size_t>> class_flows;
  std::vector<double> bottleneck;
  std::vector<std::size_t> class_order;
  std::vector<std::size_t> flow_order;

  explicit Prepared(const PfoInstance& in) : inst(in) {
    K = in.classes.size();
    F = in.flows.size();
    L = in.topology.links().size();
    std::map<ClassId, std::size_t> cidx;
    for (std::size_t k = 0; k < K; ++k) cidx[in.classes[k].id] = k;
    class_flows.resize(K);
    for (std::size_t f = 0; f < F; ++f) {
      std::size_t k = cidx.at(in.flows[f].class_id);
      flow_class.push_back(k);
      class_flows[k].push_back(f);
      std::vector<std::size_t> ls;
      double b = kInf;
      for (const auto& id : in.flows[f].route) {
        std::size_t li = in.topology.link_index(id);
        ls.push_back(li);
        b = std::min(b, in.topology.links()[li].capacity);
      }
      flow_links.push_back(std::move(ls));
      bottleneck.push_back(b);
    }
    class_order.resize(K);
    std::iota(class_order.begin(), class_order.end(), 0);
    std::sort(class_order.begin(), class_order.end(),
              [&](auto a, auto b) { return in.classes[a].id < in.classes[b].id; });
    flow_order.resize(F);
    std::iota(flow_order.begin(), flow_order.end(), 0);
    std::sort(flow_order.begin(), flow_order.end(),
              [&](auto a, auto b) { return in.flows[a].id < in.flows[b].id; });
  }

  const PiecewiseLinearUtility& utility(std::size_t k) const { return inst.classes[k].utility; }
};

struct InnerModel {
  lp::LinearProgram lp;
  std::vector<long> var;
  std::vector<long> cap_row;
  std::vector<long> hi_row;
  std::vector<long> lo_row;
  double constant = 0.0;
};

InnerModel build_inner(const Prepared& p, std::span<const int> n,
                       std::span<const std::size_t> piece, std::span<const double> lo) {
  InnerModel m;
  m.var.assign(p.F, -1);
  m.cap_row.assign(p.L, -1);
  m.hi_row.assign(p.K, -1);
  m.lo_row.assign(p.K, -1);
  for (std::size_t f = 0; f < p.F; ++f) {
    std::size_t k = p.flow_class[f];
    if (n[k] <= 0) continue;
    m.var[f] = static_cast<long>(m.lp.add_var(n[k] * p.utility(k).piece(piece[k]).slope, 0.0, kInf));
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> cap(p.L);
  for (std::size_t f = 0; f < p.F; ++f) {
    if (m.var[f] < 0) continue;
    double nk = n[p.flow_class[f]];
    for (std::size_t l : p.flow_links[f]) cap[l].emplace_back(m.var[f], nk);
  }
  for (std::size_t l = 0; l < p.L; ++l)
    if (!cap[l].empty())
      m.cap_row[l] = static_cast<long>(m.lp.add_row(cap[l], p.inst.topology.links()[l].capacity));
  for (std::size_t k = 0; k < p.K; ++k) {
    if (n[k] <= 0) continue;
    const Piece& pc = p.utility(k).piece(piece[k]);
    m.constant += n[k] * pc.intercept;
    std::vector<std::pair<std::size_t, double>> plus, minus;
    for (std::size_t f : p.class_flows[k]) {
      plus.emplace_back(m.var[f], 1.0);
      minus.emplace_back(m.var[f], -1.0);
    }
    if (pc.hi < kInf) m.hi_row[k] = static_cast<long>(m.lp.add_row(plus, pc.hi));
    if (lo[k] > 0.0) m.lo_row[k] = static_cast<long>(m.lp.add_row(minus, -lo[k]));
  }
  return m;
}

struct Candidate {
  bool valid = false;
  double utility = 0.0;
  int total_n = 0;
  std::vector<int> n;
  std::vector<std::size_t> piece;
  std::vector<double> rates;
  std::vector<double> duals;
};

Candidate zero_candidate(const Prepared& p) {
  Candidate c;
  c.valid = true;
  c.n.assign(p.K, 0);
  c.piece.assign(p.K, 0);
  c.rates.assign(p.F, 0.0);
  c.duals.assign(p.L, 0.0);
  return c;
}

bool better(const Candidate& a, const Candidate& b, const Prepared& p, double tol) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  double eps = tol * std::max(1.0, std::abs(b.utility));
  if (a.utility > b.utility + eps) return true;
  if (a.utility < b.utility - eps) return false;
  if (a.total_n != b.total_n) return a.total_n < b.total_n;
  for (std::size_t k : p.class_order)
    if (a.n[k] != b.n[k]) return a.n[k] < b.n[k];
  for (std::size_t f : p.flow_order)
    if (a.rates[f] != b.rates[f]) return a.rates[f] < b.rates[f];
  return false;
}

std::vector<double> class_sums(const Prepared& p, std::span<const double> rates) {
  std::vector<double> x(p.K, 0.0);
  for (std::size_t f = 0; f < p.F; ++f) x[p.flow_class[f]] += rates[f];
  return x;
}

/// Re-select capacity duals from the optimal dual face so that segment-row
/// multipliers are as small as possible.
std::optional<std::vector<double>> polish_duals(const Prepared& p, const InnerModel& m,
                                                std::span<const int> n,
                                                std::span<const std::size_t> piece,
                                                const lp::Solution& primal,
                                                const lp::Options& opt) {
  lp::LinearProgram d;
  std::vector<long> lam(p.L, -1), mu_hi(p.K, -1), mu_lo(p.K, -1);
  for (std::size_t l = 0; l < p.L; ++l) {
    long r = m.cap_row[l];
    if (r < 0) continue;
    double load = 0.0;
    for (std::size_t j = 0; j < m.lp.num_vars(); ++j) load += m.lp.rows[r][j] * primal.x[j];
    if (m.lp.rhs[r] - load <= opt.verify_tol * std::max(1.0, m.lp.rhs[r]))
      lam[l] = static_cast<long>(d.add_var(0.0, 0.0, kInf));
  }
  auto binding = [&](long r) {
    if (r < 0) return false;
    double ax = 0.0;
    for (std::size_t j = 0; j < m.lp.num_vars(); ++j) ax += m.lp.rows[r][j] * primal.x[j];
    return m.lp.rhs[r] - ax <= opt.verify_tol * std::max(1.0, std::abs(m.lp.rhs[r]));
  };
  for (std::size_t k = 0; k < p.K; ++k) {
    if (binding(m.hi_row[k])) mu_hi[k] = static_cast<long>(d.add_var(-1.0, 0.0, kInf));
    if (binding(m.lo_row[k])) mu_lo[k] = static_cast<long>(d.add_var(-1.0, 0.0, kInf));
  }
  for (std::size_t f = 0; f < p.F; ++f) {
    if (m.var[f] < 0) continue;
    std::size_t k = p.flow_class[f];
    double nk = n[k];
    double a = nk * p.utility(k).piece(piece[k]).slope;
    // reduced cost r = a - nk*sum(lam) - mu_hi + mu_lo
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t l : p.flow_links[f])
      if (lam[l] >= 0) row.emplace_back(lam[l], -nk);
    if (mu_hi[k] >= 0) row.emplace_back(mu_hi[k], -1.0);
    if (mu_lo[k] >= 0) row.emplace_back(mu_lo[k], 1.0);
    d.add_row(row, -a);  // r <= 0
    if (primal.x[m.var[f]] > kRateTol) {
      std::vector<std::pair<std::size_t, double>> neg;
      for (auto [j, c] : row) neg.emplace_back(j, -c);
      d.add_row(neg, a);  // r >= 0
    }
  }
  lp::Solution s;
  try {
    s = lp::solve(d, opt);
  } catch (const SolverError&) {
    return std::nullopt;
  }
  if (s.status != lp::Status::optimal) return std::nullopt;
  std::vector<double> out(p.L, 0.0);
  for (std::size_t l = 0; l < p.L; ++l)
    if (lam[l] >= 0) out[l] = s.x[lam[l]];
  return out;
}

/// Evaluate one (n, segment) candidate exactly. Invalid when infeasible.
Candidate evaluate(const Prepared& p, std::span<const int> n, std::span<const std::size_t> piece,
                   const SolverConfig& cfg) {
  Candidate c;
  c.n.assign(n.begin(), n.end());
  c.piece.assign(piece.begin(), piece.end());
  c.total_n = std::accumulate(n.begin(), n.end(), 0);

  std::vector<double> lo(p.K, 0.0);
  for (std::size_t k = 0; k < p.K; ++k)
    if (n[k] > 0) lo[k] = p.utility(k).piece(piece[k]).lo;

  InnerModel m = build_inner(p, n, piece, lo);
  lp::Solution s = lp::solve(m.lp, cfg.lp);
  if (s.status == lp::Status::infeasible) return c;
  if (s.status == lp::Status::unbounded) throw SolverError("inner LP unbounded");

  auto rates_of = [&](const lp::Solution& sol) {
    std::vector<double> r(p.F, 0.0);
    for (std::size_t f = 0; f < p.F; ++f)
      if (m.var[f] >= 0) r[f] = std::max(0.0, sol.x[m.var[f]]);
    return r;
  };

  // open lower bounds where the utility jumps
  {
    auto x = class_sums(p, rates_of(s));
    bool shifted = false;
    for (std::size_t k = 0; k < p.K; ++k) {
      if (n[k] <= 0 || !p.utility(k).jumps_at_lower(piece[k])) continue;
      if (x[k] <= lo[k] + kRateTol) {
        lo[k] += kOpenShift;
        shifted = true;
      }
    }
    if (shifted) {
      m = build_inner(p, n, piece, lo);
      s = lp::solve(m.lp, cfg.lp);
      if (s.status != lp::Status::optimal) return c;
    }
  }

  std::vector<double> rates = rates_of(s);

  // zero-slope classes take the smallest rate that keeps the optimum
  {
    auto x = class_sums(p, rates);
    std::vector<std::size_t> flat;
    for (std::size_t k = 0; k < p.K; ++k)
      if (n[k] > 0 && p.utility(k).piece(piece[k]).slope == 0.0 && x[k] > lo[k] + kRateTol)
        flat.push_back(k);
    if (!flat.empty()) {
      lp::LinearProgram second = m.lp;
      std::vector<std::pair<std::size_t, double>> obj;
      for (std::size_t j = 0; j < second.num_vars(); ++j)
        if (second.objective[j] != 0.0) obj.emplace_back(j, -second.objective[j]);
      double opt = s.objective;
      second.add_row(obj, -(opt - cfg.utility_tol * std::max(1.0, std::abs(opt))));
      std::fill(second.objective.begin(), second.objective.end(), 0.0);
      for (std::size_t k : flat)
        for (std::size_t f : p.class_flows[k]) second.objective[m.var[f]] = -1.0;
      lp::Solution s2 = lp::solve(second, cfg.lp);
      if (s2.status == lp::Status::optimal) rates = rates_of(s2);
    }
  }

  // keep each class inside its segment despite rounding
  for (std::size_t k = 0; k < p.K; ++k) {
    if (n[k] <= 0) continue;
    double hi = p.utility(k).piece(piece[k]).hi;
    for (int guard = 0; guard < 8; ++guard) {
      double sum = 0.0;
      for (std::size_t f : p.class_flows[k]) sum += rates[f];
      if (sum <= hi) break;
      for (std::size_t f : p.class_flows[k]) rates[f] = std::nextafter(rates[f] * (hi / sum), 0.0);
    }
  }

  c.duals.assign(p.L, 0.0);
  for (std::size_t l = 0; l < p.L; ++l)
    if (m.cap_row[l] >= 0) c.duals[l] = std::max(0.0, s.duals[m.cap_row[l]]);

  bool segment_binding = false;
  for (std::size_t k = 0; k < p.K; ++k) {
    if (m.hi_row[k] >= 0 && s.duals[m.hi_row[k]] > 1e-12) segment_binding = true;
    if (m.lo_row[k] >= 0 && s.duals[m.lo_row[k]] > 1e-12) segment_binding = true;
  }
  if (segment_binding)
    if (auto polished = polish_duals(p, m, n, piece, s, cfg.lp)) c.duals = std::move(*polished);
  for (double& d : c.duals)
    if (d < 1e-12) d = 0.0;

  auto x = class_sums(p, rates);
  c.utility = 0.0;
  for (std::size_t k = 0; k < p.K; ++k)
    if (n[k] > 0) c.utility += n[k] * p.utility(k)(x[k]);
  c.rates = std::move(rates);
  c.valid = true;
  return c;
}

/// Cheap upper bound and feasibility screen from per-flow bottlenecks.
bool screen(const Prepared& p, std::span<const int> n, std::span<const std::size_t> piece,
            double floor_utility, double tol) {
  double ub = 0.0;
  for (std::size_t k = 0; k < p.K; ++k) {
    if (n[k] <= 0) continue;
    const Piece& pc = p.utility(k).piece(piece[k]);
    if (piece[k] == 0 && pc.slope == 0.0 && pc.intercept <= 0.0) return false;
    double cap = 0.0;
    for (std::size_t f : p.class_flows[k]) cap += p.bottleneck[f];
    double xmax = std::min(pc.hi, cap / n[k]);
    if (xmax < pc.lo - 1e-12) return false;
    ub += n[k] * pc.value(xmax);
  }
  return ub >= floor_utility - tol * std::max(1.0, std::abs(floor_utility));
}

// --- relaxation -------------------------------------------------------------

struct Relaxation {
  double bound = 0.0;
  std::vector<double> n;
  std::vector<double> z;  // class aggregate n_k * x_k
};

/// Concave envelope lines (slope, intercept) of U over pieces [sl, su] on [a, b].
std::vector<std::pair<double, double>> envelope(const PiecewiseLinearUtility& u, std::size_t sl,
                                                std::size_t su, double a, double b) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = sl; i <= su; ++i) {
    const Piece& pc = u.piece(i);
    double x0 = std::max(pc.lo, a), x1 = std::min(pc.hi, b);
    if (x0 > x1) continue;
    pts.emplace_back(x0, pc.value(x0));
    pts.emplace_back(x1, pc.value(x1));
  }
  std::sort(pts.begin(), pts.end(), [](auto& p, auto& q) {
    return p.first < q.first || (p.first == q.first && p.second > q.second);
  });
  std::vector<std::pair<double, double>> hull;
  for (const auto& pt : pts) {
    if (!hull.empty() && hull.back().first == pt.first) continue;
    while (hull.size() >= 2) {
      auto [x1, y1] = hull[hull.size() - 2];
      auto [x2, y2] = hull.back();
      double cross = (x2 - x1) * (pt.second - y1) - (y2 - y1) * (pt.first - x1);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(pt);
  }
  std::vector<std::pair<double, double>> lines;
  if (hull.size() == 1) {
    lines.emplace_back(0.0, hull[0].second);
    return lines;
  }
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    double s = (hull[i + 1].second - hull[i].second) / (hull[i + 1].first - hull[i].first);
    lines.emplace_back(s, hull[i].second - s * hull[i].first);
  }
  return lines;
}

std::optional<Relaxation> relax(const Prepared& p, std::span<const int> nl, std::span<const int> nu,
                                std::span<const std::size_t> sl, std::span<const std::size_t> su,
                                std::span<const double> xlo, std::span<const double> xhi,
                                const lp::Options& opt) {
  lp::LinearProgram lp;
  std::vector<long> xv(p.F, -1), zv(p.F, -1), nv(p.K, -1), tv(p.K, -1);
  for (std::size_t k = 0; k < p.K; ++k) {
    if (nu[k] <= 0) continue;
    const auto& u = p.utility(k);
    double dlo = u.piece(sl[k]).lo;
    double cap = 0.0;
    for (std::size_t f : p.class_flows[k]) cap += xhi[f];
    double dhi = std::min(u.piece(su[k]).hi, cap);
    int nmax = nu[k];
    if (dhi < dlo) {
      if (nl[k] > 0) return std::nullopt;
      nmax = 0;
    }
    nv[k] = static_cast<long>(lp.add_var(0.0, nl[k], nmax));
    double tlb = std::min(0.0, nu[k] * u.piece(0).intercept) - 1.0;
    tv[k] = static_cast<long>(lp.add_var(1.0, tlb, kInf));
    for (std::size_t f : p.class_flows[k]) {
      xv[f] = static_cast<long>(lp.add_var(0.0, xlo[f], xhi[f]));
      zv[f] = static_cast<long>(lp.add_var(0.0, 0.0, kInf));
    }
    if (nmax == 0) {
      lp.add_row({{static_cast<std::size_t>(tv[k]), 1.0}}, 0.0);
      continue;
    }
    for (auto [slope, icpt] : envelope(u, sl[k], su[k], dlo, std::max(dhi, dlo))) {
      std::vector<std::pair<std::size_t, double>> row{{tv[k], 1.0}, {nv[k], -icpt}};
      for (std::size_t f : p.class_flows[k]) row.emplace_back(zv[f], -slope);
      lp.add_row(row, 0.0);
    }
    std::vector<std::pair<std::size_t, double>> zsum_hi, zsum_lo;
    for (std::size_t f : p.class_flows[k]) {
      zsum_hi.emplace_back(zv[f], 1.0);
      zsum_lo.emplace_back(zv[f], -1.0);
    }
    double hi = u.piece(su[k]).hi;
    if (hi < kInf) {
      auto row = zsum_hi;
      row.emplace_back(nv[k], -hi);
      lp.add_row(row, 0.0);
    }
    if (dlo > 0.0) {
      auto row = zsum_lo;
      row.emplace_back(nv[k], dlo);
      lp.add_row(row, 0.0);
    }
    if (nl[k] >= 1) {
      std::vector<std::pair<std::size_t, double>> xs_lo, xs_hi;
      for (std::size_t f : p.class_flows[k]) {
        xs_lo.emplace_back(xv[f], -1.0);
        xs_hi.emplace_back(xv[f], 1.0);
      }
      if (dlo > 0.0) lp.add_row(xs_lo, -dlo);
      if (hi < kInf) lp.add_row(xs_hi, hi);
    }
    // McCormick envelope of z = n * x
    double nL = nl[k], nU = nmax;
    for (std::size_t f : p.class_flows[k]) {
      std::size_t x = xv[f], z = zv[f], n = nv[k];
      double xL = xlo[f], xU = xhi[f];
      lp.add_row({{x, nL}, {n, xL}, {z, -1.0}}, nL * xL);
      lp.add_row({{x, nU}, {n, xU}, {z, -1.0}}, nU * xU);
      lp.add_row({{z, 1.0}, {x, -nU}, {n, -xL}}, -nU * xL);
      lp.add_row({{z, 1.0}, {x, -nL}, {n, -xU}}, -nL * xU);
    }
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> cap(p.L);
  for (std::size_t f = 0; f < p.F; ++f)
    if (zv[f] >= 0)
      for (std::size_t l : p.flow_links[f]) cap[l].emplace_back(zv[f], 1.0);
  for (std::size_t l = 0; l < p.L; ++l)
    if (!cap[l].empty()) lp.add_row(cap[l], p.inst.topology.links()[l].capacity);

  Relaxation r;
  r.n.assign(p.K, 0.0);
  r.z.assign(p.K, 0.0);
  if (lp.num_vars() == 0) return r;
  lp::Solution s = lp::solve(lp, opt);
  if (s.status == lp::Status::infeasible) return std::nullopt;
  if (s.status == lp::Status::unbounded) throw SolverError("relaxation unbounded");
  r.bound = s.objective;
  for (std::size_t k = 0; k < p.K; ++k) {
    if (nv[k] < 0) continue;
    r.n[k] = s.x[nv[k]];
    for (std::size_t f : p.class_flows[k]) r.z[k] += s.x[zv[f]];
  }
  return r;
}

std::vector<double> default_xhi(const Prepared& p, std::span<const int> nl,
                                std::span<const std::size_t> su) {
  std::vector<double> xhi(p.F);
  for (std::size_t f = 0; f < p.F; ++f) {
    std::size_t k = p.flow_class[f];
    double b = p.bottleneck[f] / std::max(1, nl[k]);
    xhi[f] = std::min(b, p.utility(k).piece(su[k]).hi);
  }
  return xhi;
}

// --- search strategies -------------------------------------------------------

std::uint64_t candidate_count(const Prepared& p, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < p.K; ++k) {
    std::uint64_t choices =
        1 + static_cast<std::uint64_t>(p.inst.classes[k].max_sessions) * p.utility(k).size();
    if (total > cap / choices + 1) return cap + 1;
    total *= choices;
    if (total > cap) return cap + 1;
  }
  return total;
}

Candidate enumerate_all(const Prepared& p, const SolverConfig& cfg) {
  Candidate best = zero_candidate(p);
  std::vector<std::uint64_t> digit(p.K, 0), radix(p.K);
  for (std::size_t k = 0; k < p.K; ++k)
    radix[k] = 1 + static_cast<std::uint64_t>(p.inst.classes[k].max_sessions) * p.utility(k).size();
  std::vector<int> n(p.K);
  std::vector<std::size_t> piece(p.K);
  for (;;) {
    std::size_t k = 0;
    while (k < p.K && ++digit[k] == radix[k]) digit[k++] = 0;
    if (k == p.K) break;
    for (std::size_t j = 0; j < p.K; ++j) {
      if (digit[j] == 0) {
        n[j] = 0;
        piece[j] = 0;
      } else {
        std::uint64_t d = digit[j] - 1;
        std::size_t pieces = p.utility(j).size();
        n[j] = static_cast<int>(d / pieces) + 1;
        piece[j] = d % pieces;
      }
    }
    if (!screen(p, n, piece, best.utility, cfg.utility_tol)) continue;
    Candidate c = evaluate(p, n, piece, cfg);
    if (better(c, best, p, cfg.utility_tol)) best = std::move(c);
  }
  return best;
}

bool all_concave(const Prepared& p) {
  for (std::size_t k = 0; k < p.K; ++k)
    if (p.inst.classes[k].max_sessions > 0 && !p.utility(k).is_concave_from_origin()) return false;
  return true;
}

/// n_k = N_k is optimal for concave utilities through the origin; one LP.
Candidate solve_concave(const Prepared& p, const SolverConfig& cfg) {
  Candidate c = zero_candidate(p);
  for (std::size_t k = 0; k < p.K; ++k) {
    int nmax = p.inst.classes[k].max_sessions;
    c.n[k] = nmax > 0 && p.utility(k).is_linear_from_origin() ? 1 : nmax;
  }
  lp::LinearProgram lp;
  std::vector<long> xv(p.F, -1), tv(p.K, -1);
  for (std::size_t f = 0; f < p.F; ++f)
    if (c.n[p.flow_class[f]] > 0) xv[f] = static_cast<long>(lp.add_var(0.0, 0.0, kInf));
  for (std::size_t k = 0; k < p.K; ++k) {
    if (c.n[k] <= 0) continue;
    tv[k] = static_cast<long>(lp.add_var(1.0, 0.0, kInf));
    for (const Piece& pc : p.utility(k).pieces()) {
      std::vector<std::pair<std::size_t, double>> row{{tv[k], 1.0}};
      for (std::size_t f : p.class_flows[k]) row.emplace_back(xv[f], -c.n[k] * pc.slope);
      lp.add_row(row, c.n[k] * pc.intercept);
    }
  }
  std::vector<long> cap_row(p.L, -1);
  std::vector<std::vector<std::pair<std::size_t, double>>> cap(p.L);
  for (std::size_t f = 0; f < p.F; ++f)
    if (xv[f] >= 0)
      for (std::size_t l : p.flow_links[f]) cap[l].emplace_back(xv[f], c.n[p.flow_class[f]]);
  for (std::size_t l = 0; l < p.L; ++l)
    if (!cap[l].empty())
      cap_row[l] = static_cast<long>(lp.add_row(cap[l], p.inst.topology.links()[l].capacity));
  if (lp.num_vars() == 0) return zero_candidate(p);
  lp::Solution s = lp::solve(lp, cfg.lp);
  if (s.status != lp::Status::optimal) throw SolverError("concave PFO LP not optimal");
  for (std::size_t f = 0; f < p.F; ++f)
    if (xv[f] >= 0) c.rates[f] = std::max(0.0, s.x[xv[f]]);
  for (std::size_t l = 0; l < p.L; ++l)
    if (cap_row[l] >= 0) c.duals[l] = s.duals[cap_row[l]] < 1e-12 ? 0.0 : s.duals[cap_row[l]];
  auto x = class_sums(p, c.rates);
  c.utility = 0.0;
  for (std::size_t k = 0; k < p.K; ++k) {
    c.piece[k] = p.utility(k).piece_index(x[k]);
    if (c.n[k] > 0) c.utility += c.n[k] * p.utility(k)(x[k]);
  }
  c.total_n = std::accumulate(c.n.begin(), c.n.end(), 0);
  return c;
}

struct Node {
  std::vector<int> nl, nu;
  std::vector<std::size_t> sl, su;
  double bound = 0.0;
  std::uint64_t seq = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.seq > b.seq;
  }
};

Candidate branch_and_bound(const Prepared& p, const SolverConfig& cfg, bool& proved) {
  Candidate best = zero_candidate(p);
  auto tol_of = [&](double u) { return cfg.utility_tol * std::max(1.0, std::abs(u)); };

  auto try_heuristics = [&](const Node& nd, const Relaxation& r) {
    for (int variant = 0; variant < 2; ++variant) {
      std::vector<int> n(p.K);
      std::vector<std::size_t> piece(p.K);
      for (std::size_t k = 0; k < p.K; ++k) {
        if (nd.nu[k] <= 0 || r.z[k] <= kRateTol) {
          n[k] = nd.nl[k];
        } else if (variant == 0) {
          n[k] = std::clamp(static_cast<int>(std::lround(r.n[k])), std::max(nd.nl[k], 1), nd.nu[k]);
        } else {
          n[k] = nd.nu[k];
        }
        piece[k] = nd.sl[k];
        if (n[k] > 0) {
          std::size_t idx = p.utility(k).piece_index(r.z[k] / n[k]);
          piece[k] = std::clamp(idx, nd.sl[k], nd.su[k]);
        }
      }
      if (!screen(p, n, piece, best.utility, cfg.utility_tol)) continue;
      Candidate c = evaluate(p, n, piece, cfg);
      if (better(c, best, p, cfg.utility_tol)) best = std::move(c);
    }
  };

  auto is_leaf = [&](const Node& nd) {
    for (std::size_t k = 0; k < p.K; ++k) {
      if (nd.nl[k] != nd.nu[k]) return false;
      if (nd.nu[k] > 0 && nd.sl[k] != nd.su[k]) return false;
    }
    return true;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t seq = 0;
  auto consider = [&](Node nd) {
    if (is_leaf(nd)) {
      std::vector<std::size_t> piece = nd.sl;
      if (!screen(p, nd.nl, piece, best.utility, cfg.utility_tol)) return;
      Candidate c = evaluate(p, nd.nl, piece, cfg);
      if (better(c, best, p, cfg.utility_tol)) best = std::move(c);
      return;
    }
    std::vector<double> xlo(p.F, 0.0);
    auto xhi = default_xhi(p, nd.nl, nd.su);
    auto r = relax(p, nd.nl, nd.nu, nd.sl, nd.su, xlo, xhi, cfg.lp);
    if (!r) return;
    try_heuristics(nd, *r);
    nd.bound = r->bound;
    if (nd.bound <= best.utility + tol_of(best.utility)) return;
    nd.seq = seq++;
    open.push(std::move(nd));
  };

  Node root;
  for (std::size_t k = 0; k < p.K; ++k) {
    root.nl.push_back(0);
    root.nu.push_back(p.inst.classes[k].max_sessions);
    root.sl.push_back(0);
    root.su.push_back(p.utility(k).size() - 1);
  }
  consider(root);

  std::uint64_t processed = 0;
  proved = true;
  while (!open.empty()) {
    Node nd = open.top();
    open.pop();
    if (nd.bound <= best.utility + tol_of(best.utility)) break;
    if (processed++ >= cfg.node_budget) {
      proved = false;
      break;
    }
    std::size_t pick = p.K;
    int width = 0;
    for (std::size_t k = 0; k < p.K; ++k)
      if (nd.nu[k] - nd.nl[k] > width) {
        width = nd.nu[k] - nd.nl[k];
        pick = k;
      }
    if (pick < p.K) {
      int mid = (nd.nl[pick] + nd.nu[pick]) / 2;
      Node a = nd, b = nd;
      a.nu[pick] = mid;
      b.nl[pick] = mid + 1;
      consider(std::move(a));
      consider(std::move(b));
      continue;
    }
    std::size_t span = 0;
    for (std::size_t k = 0; k < p.K; ++k)
      if (nd.nu[k] > 0 && nd.su[k] - nd.sl[k] > span) {
        span = nd.su[k] - nd.sl[k];
        pick = k;
      }
    std::size_t mid = (nd.sl[pick] + nd.su[pick]) / 2;
    Node a = nd, b = nd;
    a.su[pick] = mid;
    b.sl[pick] = mid + 1;
    consider(std::move(a));
    consider(std::move(b));
  }
  return best;
}

/// Classes admitted with zero rate and U(0) = 0 add nothing; drop them.
void drop_idle_classes(const Prepared& p, Candidate& c) {
  auto x = class_sums(p, c.rates);
  for (std::size_t k = 0; k < p.K; ++k) {
    if (c.n[k] > 0 && x[k] <= kRateTol && p.utility(k)(0.0) == 0.0) {
      c.n[k] = 0;
      for (std::size_t f : p.class_flows[k]) c.rates[f] = 0.0;
    }
  }
  c.total_n = std::accumulate(c.n.begin(), c.n.end(), 0);
}

PfoPlan to_plan(const Prepared& p, const Candidate& c, Optimality opt) {
  PfoPlan plan;
  for (std::size_t k = 0; k < p.K; ++k) plan.n[p.inst.classes[k].id] = c.n[k];
  for (std::size_t f = 0; f < p.F; ++f)
    plan.rates[p.inst.flows[f].id] = c.n[p.flow_class[f]] > 0 ? c.rates[f] : 0.0;
  for (std::size_t l = 0; l < p.L; ++l) plan.duals[p.inst.topology.links()[l].id] = c.duals[l];
  plan.utility = c.utility;
  plan.optimality = opt;
  return plan;
}

}  // namespace

PfoPlan solve_pfo(const PfoInstance& instance, const SolverConfig& config) {
  instance.validate();
  Prepared p(instance);
  std::uint64_t count = candidate_count(p, config.enumeration_budget);
  if (count <= config.enumeration_budget)
    return to_plan(p, enumerate_all(p, config), Optimality::proved_optimal);
  if (config.concave_fast_path && all_concave(p)) {
    Candidate c = solve_concave(p, config);
    drop_idle_classes(p, c);
    return to_plan(p, c, Optimality::proved_optimal);
  }
  bool proved = false;
  Candidate c = branch_and_bound(p, config, proved);
  drop_idle_classes(p, c);
  return to_plan(p, c, proved ? Optimality::proved_optimal : Optimality::best_found);
}

lp::Solution inner_lp(const PfoInstance& instance, std::span<const int> n,
                      const SegmentAssignment& seg, const lp::Options& opt) {
  Prepared p(instance);
  if (n.size() != p.K || seg.piece.size() != p.K)
    throw InputError("inner_lp: session or segment vector has the wrong size");
  std::vector<double> lo(p.K, 0.0);
  for (std::size_t k = 0; k < p.K; ++k) {
    if (n[k] < 0 || n[k] > instance.classes[k].max_sessions)
      throw InputError("inner_lp: session count out of range");
    if (seg.piece[k] >= p.utility(k).size()) throw InputError("inner_lp: bad segment index");
    if (n[k] > 0) lo[k] = p.utility(k).piece(seg.piece[k]).lo;
  }
  InnerModel m = build_inner(p, n, seg.piece, lo);
  lp::Solution out;
  out.x.assign(p.F, 0.0);
  out.duals.assign(p.L, 0.0);
  if (m.lp.num_vars() == 0) {
    out.status = lp::Status::optimal;
    out.objective = m.constant;
    return out;
  }
  lp::Solution s = lp::solve(m.lp, opt);
  out.status = s.status;
  out.iterations = s.iterations;
  if (s.status != lp::Status::optimal) return out;
  for (std::size_t f = 0; f < p.F; ++f)
    if (m.var[f] >= 0) out.x[f] = s.x[m.var[f]];
  for (std::size_t l = 0; l < p.L; ++l)
    if (m.cap_row[l] >= 0) out.duals[l] = s.duals[m.cap_row[l]];
  out.objective = s.objective + m.constant;
  out.reduced_costs.assign(p.F, 0.0);
  for (std::size_t f = 0; f < p.F; ++f)
    if (m.var[f] >= 0) out.reduced_costs[f] = s.reduced_costs[m.var[f]];
  return out;
}

double mccormick_bound(const PfoInstance& instance, std::span<const std::pair<int, int>> n_box,
                       std::span<const std::pair<double, double>> x_box) {
  Prepared p(instance);
  if (n_box.size() != p.K || x_box.size() != p.F)
    throw InputError("mccormick_bound: box dimensions do not match the instance");
  std::vector<int> nl, nu;
  std::vector<std::size_t> sl(p.K, 0), su(p.K);
  std::vector<double> xlo, xhi;
  for (std::size_t k = 0; k < p.K; ++k) {
    if (n_box[k].first > n_box[k].second) throw InputError("mccormick_bound: empty n box");
    nl.push_back(n_box[k].first);
    nu.push_back(n_box[k].second);
    su[k] = p.utility(k).size() - 1;
  }
  for (std::size_t f = 0; f < p.F; ++f) {
    if (x_box[f].first > x_box[f].second || !std::isfinite(x_box[f].second))
      throw InputError("mccormick_bound: x box must be finite and non-empty");
    xlo.push_back(x_box[f].first);
    xhi.push_back(x_box[f].second);
  }
  auto r = relax(p, nl, nu, sl, su, xlo, xhi, {});
  return r ? r->bound : -kInf;
}

std::vector<double> link_loads(const PfoInstance& instance, const PfoPlan& plan) {
  const auto& links = instance.topology.links();
  std::vector<double> load(links.size(), 0.0);
  for (const auto& f : instance.flows) {
    auto nit = plan.n.find(f.class_id);
    auto rit = plan.rates.find(f.id);
    if (nit == plan.n.end()) throw LookupError("plan has no session count for '" + f.class_id + "'");
    if (rit == plan.rates.end()) throw LookupError("plan has no rate for flow '" + f.id + "'");
    for (const auto& id : f.route) load[instance.topology.link_index(id)] += nit->second * rit->second;
  }
  return load;
}

std::map<ClassId, double> class_rates(const PfoInstance& instance, const PfoPlan& plan) {
  std::map<ClassId, double> x;
  for (const auto& k : instance.classes) x[k.id] = 0.0;
  for (const auto& f : instance.flows) {
    auto it = plan.rates.find(f.id);
    if (it == plan.rates.end()) throw LookupError("plan has no rate for flow '" + f.id + "'");
    x[f.class_id] += it->second;
  }
  return x;
}

KktReport check_kkt(const PfoInstance& instance, const PfoPlan& plan) {
  KktReport rep;
  const auto& links = instance.topology.links();
  for (const auto& [id, lam] : plan.duals)
    if (!instance.topology.has_link(id)) throw LookupError("plan references unknown link '" + id + "'");
  for (const auto& [id, r] : plan.rates) instance.flow_index(id);
  for (const auto& [id, n] : plan.n) instance.class_index(id);
  for (const auto& k : instance.classes)
    if (!plan.n.contains(k.id)) throw LookupError("plan has no session count for class '" + k.id + "'");
  for (const auto& f : instance.flows)
    if (!plan.rates.contains(f.id)) throw LookupError("plan has no rate for flow '" + f.id + "'");

  auto load = link_loads(instance, plan);
  std::vector<double> lam(links.size(), 0.0);
  for (std::size_t l = 0; l < links.size(); ++l) {
    auto it = plan.duals.find(links[l].id);
    if (it != plan.duals.end()) lam[l] = it->second;
    double over = load[l] - links[l].capacity;
    if (over > rep.feasibility) {
      rep.feasibility = over;
      rep.notes.push_back("capacity exceeded on " + links[l].id);
    }
    rep.nonnegativity = std::max(rep.nonnegativity, -lam[l]);
    double cs = std::abs(lam[l] * (load[l] - links[l].capacity));
    if (cs > 1e-6 && cs > rep.slackness) rep.notes.push_back("dual on slack link " + links[l].id);
    rep.slackness = std::max(rep.slackness, cs);
  }
  for (const auto& k : instance.classes) {
    int n = plan.n.at(k.id);
    if (n < 0) rep.feasibility = std::max(rep.feasibility, static_cast<double>(-n));
    if (n > k.max_sessions) rep.feasibility = std::max(rep.feasibility, double(n - k.max_sessions));
  }
  auto xk = class_rates(instance, plan);
  for (const auto& f : instance.flows) {
    double a = plan.rates.at(f.id);
    rep.nonnegativity = std::max(rep.nonnegativity, -a);
    int n = plan.n.at(f.class_id);
    if (a <= kRateTol || n <= 0) continue;
    const auto& u = instance.classes[instance.class_index(f.class_id)].utility;
    double x = xk.at(f.class_id);
    double price = 0.0;
    for (const auto& id : f.route) price += lam[instance.topology.link_index(id)];
    std::size_t i = u.piece_index(x);
    double lo = u.piece(i).slope, hi = lo;
    double scale = std::max(1.0, std::abs(x));
    if (i + 1 < u.size() && std::abs(x - u.piece(i).hi) <= 1e-7 * scale) {
      lo = std::min(lo, u.piece(i + 1).slope);
      hi = std::max(hi, u.piece(i + 1).slope);
    }
    if (i > 0 && std::abs(x - u.piece(i).lo) <= 1e-7 * scale) {
      lo = std::min(lo, u.piece(i - 1).slope);
      hi = std::max(hi, u.piece(i - 1).slope);
    }
    double dist = price < lo ? lo - price : price > hi ? price - hi : 0.0;
    double res = n * dist;
    if (res > 1e-6 && res > rep.gradient) rep.notes.push_back("gradient mismatch on " + f.id);
    rep.gradient = std::max(rep.gradient, res);
  }
  return rep;
}

}  // namespace mon
