#pragma once

#include <cstddef>
#include <vector>

#include "mon/error.hpp"

namespace mon::lp {

/// maximize c.x subject to A x <= b, lo <= x <= hi (hi may be +inf).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  /// Append variable with bounds and objective coefficient; returns its index.
  std::size_t add_var(double cost, double lo, double hi);
  /// Append row sum_j coeffs[j].second * x[coeffs[j].first] <= b.
  std::size_t add_row(const std::vector<std::pair<std::size_t, double>>& coeffs, double b);
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;          // one per row, >= 0
  std::vector<double> reduced_costs;  // c_j - y.A_j
  std::size_t iterations = 0;
};

struct Options {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double verify_tol = 1e-7;
  std::size_t max_iterations = 0;  // 0 = automatic
  std::size_t degenerate_switch = 50;
};

/**
 * Bounded-variable primal simplex on a dense tableau (two phases). Throws
 * InputError on malformed or non-finite input and SolverError when the
 * iteration cap is reached or the final verification fails.
 */
Solution solve(const LinearProgram& lp, const Options& opt = {});

/// Residual report of a solution against its program.
struct Verification {
  double primal = 0.0;     // max row or bound violation
  double dual_sign = 0.0;  // max negative dual
  double slackness = 0.0;  // max |y_i (b_i - a_i x)|
  double bound_slackness = 0.0;
  double gap = 0.0;        // |c.x - dual objective|
};

Verification verify(const LinearProgram& lp, const Solution& s);

}  // namespace mon::lp
