#include "mon/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace mon::lp {

std::size_t LinearProgram::add_var(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& r : rows) r.push_back(0.0);
  return objective.size() - 1;
}

std::size_t LinearProgram::add_row(const std::vector<std::pair<std::size_t, double>>& coeffs,
                                   double b) {
  std::vector<double> r(num_vars(), 0.0);
  for (auto [j, a] : coeffs) r.at(j) += a;
  rows.push_back(std::move(r));
  rhs.push_back(b);
  return rows.size() - 1;
}

namespace {

void check_input(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n)
    throw InputError("LP bounds do not match the number of variables");
  if (lp.rhs.size() != lp.rows.size()) throw InputError("LP rhs does not match the row count");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lp.objective[j])) throw InputError("LP objective is not finite");
    if (!std::isfinite(lp.lower[j])) throw InputError("LP lower bounds must be finite");
    if (std::isnan(lp.upper[j]) || lp.upper[j] == -HUGE_VAL)
      throw InputError("LP upper bound is NaN or -inf");
    if (lp.lower[j] > lp.upper[j]) throw InputError("LP variable has lo > hi");
  }
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    if (lp.rows[i].size() != n) throw InputError("LP row has the wrong width");
    if (!std::isfinite(lp.rhs[i])) throw InputError("LP rhs is not finite");
    for (double a : lp.rows[i])
      if (!std::isfinite(a)) throw InputError("LP coefficient is not finite");
  }
}

/// Dense bounded-variable simplex tableau over shifted variables x' = x - lo.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const Options& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    sign_.assign(m_, 1.0);
    std::vector<double> b(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double v = lp.rhs[i];
      for (std::size_t j = 0; j < n_; ++j) v -= lp.rows[i][j] * lp.lower[j];
      b[i] = v;
      if (v < 0.0) {
        sign_[i] = -1.0;
        art_row_.push_back(i);
      }
    }
    cols_ = n_ + m_ + art_row_.size();
    upper_.assign(cols_, kInfinity);
    for (std::size_t j = 0; j < n_; ++j) upper_[j] = lp.upper[j] - lp.lower[j];
    at_upper_.assign(cols_, false);
    basic_row_.assign(cols_, -1);
    basis_.resize(m_);
    t_.assign(m_ * cols_, 0.0);
    beta_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign_[i] * lp.rows[i][j];
      at(i, n_ + i) = sign_[i];
      beta_[i] = sign_[i] * b[i];
    }
    for (std::size_t a = 0; a < art_row_.size(); ++a) {
      std::size_t i = art_row_[a];
      at(i, n_ + m_ + a) = 1.0;
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (sign_[i] > 0.0) set_basic(i, n_ + i);
    for (std::size_t a = 0; a < art_row_.size(); ++a) set_basic(art_row_[a], n_ + m_ + a);
    std::size_t cap = opt.max_iterations ? opt.max_iterations : 50 * (m_ + cols_) + 1000;
    max_iter_ = cap;
  }

  Solution run() {
    Solution sol;
    if (!art_row_.empty()) {
      cost_.assign(cols_, 0.0);
      for (std::size_t a = 0; a < art_row_.size(); ++a) cost_[n_ + m_ + a] = -1.0;
      compute_reduced_costs();
      if (iterate() == Status::unbounded) throw SolverError("phase 1 reported unbounded");
      bool infeasible = false;
      for (std::size_t a = 0; a < art_row_.size(); ++a) {
        double scale = std::max(1.0, std::abs(lp_.rhs[art_row_[a]]));
        if (value(n_ + m_ + a) > opt_.verify_tol * scale) infeasible = true;
      }
      if (infeasible) {
        sol.status = Status::infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      for (std::size_t a = 0; a < art_row_.size(); ++a) {
        upper_[n_ + m_ + a] = 0.0;
        at_upper_[n_ + m_ + a] = false;
      }
    }
    cost_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.objective[j];
    bland_ = false;
    compute_reduced_costs();
    Status st = iterate();
    for (int attempt = 0; st == Status::optimal && attempt < 3 && m_ > 0; ++attempt) {
      if (refactor()) break;
      st = iterate();
    }
    sol.status = st;
    sol.iterations = iterations_;
    if (st != Status::optimal) return sol;

    sol.x.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) sol.x[j] = lp_.lower[j] + value(j);
    sol.duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double y = -d_[n_ + i];
      sol.duals[i] = y < 0.0 && y > -opt_.verify_tol ? 0.0 : y;
    }
    sol.reduced_costs.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double d = lp_.objective[j];
      for (std::size_t i = 0; i < m_; ++i) d -= sol.duals[i] * lp_.rows[i][j];
      sol.reduced_costs[j] = d;
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.objective[j] * sol.x[j];
    return sol;
  }

 private:
  static constexpr double kInfinity = HUGE_VAL;

  double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * cols_ + j]; }

  void set_basic(std::size_t row, std::size_t col) {
    basis_[row] = col;
    basic_row_[col] = static_cast<long>(row);
  }

  double value(std::size_t j) const {
    long r = basic_row_[j];
    if (r >= 0) return beta_[r];
    return at_upper_[j] ? upper_[j] : 0.0;
  }

  void compute_reduced_costs() {
    d_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &t_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  long choose_entering() const {
    long best = -1;
    double best_score = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (basic_row_[j] >= 0) continue;
      double dj = d_[j];
      bool can_up = !at_upper_[j] && dj > opt_.optimality_tol && upper_[j] > 0.0;
      bool can_down = at_upper_[j] && dj < -opt_.optimality_tol;
      if (!can_up && !can_down) continue;
      if (bland_) return static_cast<long>(j);
      double score = std::abs(dj);
      if (score > best_score) {
        best_score = score;
        best = static_cast<long>(j);
      }
    }
    return best;
  }

  Status iterate() {
    std::size_t degenerate = 0;
    for (;;) {
      if (iterations_ >= max_iter_)
        throw SolverError("simplex iteration cap reached (" + std::to_string(max_iter_) + ")");
      long e = choose_entering();
      if (e < 0) return Status::optimal;
      std::size_t j = static_cast<std::size_t>(e);
      double dir = at_upper_[j] ? -1.0 : 1.0;

      double theta = upper_[j];
      long leave = -1;
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double a = dir * at(i, j);
        double limit;
        bool to_upper;
        if (a > opt_.pivot_tol) {
          limit = std::max(beta_[i], 0.0) / a;
          to_upper = false;
        } else if (a < -opt_.pivot_tol && upper_[basis_[i]] < kInfinity) {
          limit = std::max(upper_[basis_[i]] - beta_[i], 0.0) / -a;
          to_upper = true;
        } else {
          continue;
        }
        bool better = limit < theta - 1e-12;
        bool tie = !better && limit <= theta + 1e-12 && leave >= 0;
        if (tie) {
          if (bland_)
            better = basis_[i] < basis_[static_cast<std::size_t>(leave)];
          else
            better = std::abs(a) > leave_pivot;
        }
        if (better || (leave < 0 && limit <= theta)) {
          theta = limit;
          leave = static_cast<long>(i);
          leave_to_upper = to_upper;
          leave_pivot = std::abs(a);
        }
      }
      if (leave < 0 && theta == kInfinity) return Status::unbounded;
      ++iterations_;
      if (theta <= 1e-12) {
        if (++degenerate > opt_.degenerate_switch) bland_ = true;
      } else {
        degenerate = 0;
      }

      for (std::size_t i = 0; i < m_; ++i) beta_[i] -= dir * theta * at(i, j);
      if (leave < 0) {  // bound flip
        at_upper_[j] = !at_upper_[j];
        continue;
      }
      std::size_t r = static_cast<std::size_t>(leave);
      std::size_t out = basis_[r];
      double entering_value = at_upper_[j] ? upper_[j] - theta : theta;
      basic_row_[out] = -1;
      at_upper_[out] = leave_to_upper;
      at_upper_[j] = false;
      pivot(r, j);
      set_basic(r, j);
      beta_[r] = entering_value;
    }
  }

  void pivot(std::size_t r, std::size_t j) {
    double* pr = &t_[r * cols_];
    double p = pr[j];
    for (std::size_t k = 0; k < cols_; ++k) pr[k] /= p;
    pr[j] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * cols_];
      double f = row[j];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < cols_; ++k) row[k] -= f * pr[k];
      row[j] = 0.0;
    }
    double f = d_[j];
    if (f != 0.0) {
      for (std::size_t k = 0; k < cols_; ++k) d_[k] -= f * pr[k];
      d_[j] = 0.0;
    }
  }

  double original(std::size_t i, std::size_t col) const {
    if (col < n_) return sign_[i] * lp_.rows[i][col];
    if (col < n_ + m_) return col - n_ == i ? sign_[i] : 0.0;
    return art_row_[col - n_ - m_] == i ? 1.0 : 0.0;
  }

  /// Recompute tableau, basic values and reduced costs from the basis.
  /// Returns true when the refreshed state is still optimal and feasible.
  bool refactor() {
    Eigen::MatrixXd bm(m_, m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < m_; ++k) bm(i, k) = original(i, basis_[k]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
    Eigen::MatrixXd full(m_, cols_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) full(i, k) = original(i, k);
    Eigen::MatrixXd tab = lu.solve(full);
    Eigen::VectorXd rhs(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double v = sign_[i] * lp_.rhs[i];
      for (std::size_t j = 0; j < n_; ++j) v -= sign_[i] * lp_.rows[i][j] * lp_.lower[j];
      for (std::size_t k = 0; k < cols_; ++k)
        if (basic_row_[k] < 0 && at_upper_[k]) v -= original(i, k) * upper_[k];
      rhs(i) = v;
    }
    Eigen::VectorXd xb = lu.solve(rhs);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) at(i, k) = tab(i, k);
      beta_[i] = xb(i);
    }
    compute_reduced_costs();
    bool ok = true;
    for (std::size_t i = 0; i < m_; ++i) {
      double u = upper_[basis_[i]];
      double scale = std::max(1.0, std::abs(beta_[i]));
      if (beta_[i] < -opt_.verify_tol * scale) ok = false;
      if (u < kInfinity && beta_[i] > u + opt_.verify_tol * scale) ok = false;
      beta_[i] = std::max(beta_[i], 0.0);
      if (u < kInfinity) beta_[i] = std::min(beta_[i], u);
    }
    return ok && choose_entering() < 0;
  }

  const LinearProgram& lp_;
  const Options& opt_;
  std::size_t n_ = 0, m_ = 0, cols_ = 0;
  std::vector<double> sign_;
  std::vector<std::size_t> art_row_;
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<long> basic_row_;
  std::vector<std::size_t> basis_;
  std::vector<double> t_;
  std::vector<double> beta_;
  std::vector<double> cost_;
  std::vector<double> d_;
  bool bland_ = false;
  std::size_t iterations_ = 0;
  std::size_t max_iter_ = 0;
};

}  // namespace

Verification verify(const LinearProgram& lp, const Solution& s) {
  Verification v;
  const std::size_t n = lp.num_vars();
  for (std::size_t j = 0; j < n; ++j) {
    v.primal = std::max(v.primal, lp.lower[j] - s.x[j]);
    if (lp.upper[j] < HUGE_VAL) v.primal = std::max(v.primal, s.x[j] - lp.upper[j]);
  }
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    double ax = 0.0, scale = std::max(1.0, std::abs(lp.rhs[i]));
    for (std::size_t j = 0; j < n; ++j) {
      ax += lp.rows[i][j] * s.x[j];
      scale = std::max(scale, std::abs(lp.rows[i][j] * s.x[j]));
    }
    v.primal = std::max(v.primal, (ax - lp.rhs[i]) / scale);
    v.dual_sign = std::max(v.dual_sign, -s.duals[i]);
    v.slackness = std::max(v.slackness, std::abs(s.duals[i] * (lp.rhs[i] - ax)) / scale);
    dual_obj += s.duals[i] * lp.rhs[i];
  }
  double primal_obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    primal_obj += lp.objective[j] * s.x[j];
    double d = s.reduced_costs[j];
    double scale = std::max(1.0, std::abs(s.x[j]));
    if (d > 0.0) {
      double gap = lp.upper[j] < HUGE_VAL ? lp.upper[j] - s.x[j] : HUGE_VAL;
      v.bound_slackness = std::max(v.bound_slackness, gap == HUGE_VAL ? d : d * gap / scale);
      if (lp.upper[j] < HUGE_VAL) dual_obj += d * lp.upper[j];
    } else if (d < 0.0) {
      v.bound_slackness = std::max(v.bound_slackness, -d * (s.x[j] - lp.lower[j]) / scale);
      dual_obj += d * lp.lower[j];
    }
  }
  v.gap = std::abs(primal_obj - dual_obj) / std::max(1.0, std::abs(primal_obj));
  return v;
}

Solution solve(const LinearProgram& lp, const Options& opt) {
  check_input(lp);
  Tableau tab(lp, opt);
  Solution s = tab.run();
  if (s.status == Status::optimal) {
    Verification v = verify(lp, s);
    double worst = std::max({v.primal, v.dual_sign, v.slackness, v.bound_slackness, v.gap});
    if (worst > opt.verify_tol)
      throw SolverError("LP solution failed verification (residual " + std::to_string(worst) +
                        ")");
  }
  return s;
}

}  // namespace mon::lp
