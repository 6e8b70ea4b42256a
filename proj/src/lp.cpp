#include "mwrc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwrc/errors.hpp"

namespace mwrc::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), a_(rows * (cols + 1), 0.0), basis_(rows, 0), cost_row_(cols + 1, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  std::vector<std::size_t>& basis() { return basis_; }

  // Installs the objective and prices out the basic columns.
  void set_objective(const std::vector<double>& c) {
    cost_ = c;
    for (std::size_t j = 0; j <= n_; ++j) cost_row_[j] = j < n_ ? c[j] : 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) cost_row_[j] -= cb * at(r, j);
    }
  }

  double value() const { return -cost_row_[n_]; }

  // Dantzig pricing with a switch to Bland's rule after a run of degenerate
  // pivots. Columns with blocked[j] set never enter.
  Status run(const std::vector<bool>& blocked, std::size_t& budget) {
    std::size_t degenerate = 0;
    while (true) {
      const bool bland = degenerate > 50;
      std::size_t enter = n_;
      double best = kCostEps;
      for (std::size_t j = 0; j < n_; ++j) {
        if (blocked[j] || cost_row_[j] <= kCostEps) continue;
        if (bland) { enter = j; break; }
        if (cost_row_[j] > best) { best = cost_row_[j]; enter = j; }
      }
      if (enter == n_) return Status::Optimal;
      if (budget-- == 0) return Status::IterationLimit;

      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotEps) continue;
        const double q = rhs(r) / a;
        if (q < ratio - 1e-13 || (q <= ratio + 1e-13 && leave < m_ && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave == m_) return Status::Unbounded;
      degenerate = ratio < 1e-13 ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = cost_row_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= n_; ++j) cost_row_[j] -= f * at(r, j);
      cost_row_[c] = 0.0;
    }
    basis_[r] = c;
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
  std::vector<double> cost_;
  std::vector<double> cost_row_;
};

}  // namespace

Solution maximize(const Problem& problem, std::size_t max_pivots) {
  const std::size_t m = problem.rows.size();
  const std::size_t n = problem.objective.size();
  if (problem.senses.size() != m || problem.rhs.size() != m)
    throw UsageError("lp: rows, senses and rhs differ in length");
  for (const auto& row : problem.rows)
    if (row.size() != n) throw UsageError("lp: row width differs from objective length");

  // Column layout: originals | one slack/surplus per inequality | artificials.
  std::size_t slacks = 0, artificials = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const bool flip = problem.rhs[r] < 0.0;
    Sense s = problem.senses[r];
    if (flip && s != Sense::Equal) s = s == Sense::LessEqual ? Sense::GreaterEqual : Sense::LessEqual;
    if (s != Sense::Equal) ++slacks;
    if (s != Sense::LessEqual) ++artificials;
  }
  const std::size_t cols = n + slacks + artificials;
  Tableau t(m, cols);
  std::vector<bool> is_artificial(cols, false);

  std::size_t next_slack = n, next_art = n + slacks;
  for (std::size_t r = 0; r < m; ++r) {
    const bool flip = problem.rhs[r] < 0.0;
    const double sign = flip ? -1.0 : 1.0;
    Sense s = problem.senses[r];
    if (flip && s != Sense::Equal) s = s == Sense::LessEqual ? Sense::GreaterEqual : Sense::LessEqual;
    for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign * problem.rows[r][j];
    t.rhs(r) = sign * problem.rhs[r];
    if (s == Sense::LessEqual) {
      t.at(r, next_slack) = 1.0;
      t.basis()[r] = next_slack++;
    } else {
      if (s == Sense::GreaterEqual) t.at(r, next_slack++) = -1.0;
      t.at(r, next_art) = 1.0;
      is_artificial[next_art] = true;
      t.basis()[r] = next_art++;
    }
  }

  std::size_t budget = max_pivots;
  Solution sol;
  const std::vector<bool> none(cols, false);

  if (artificials > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j)
      if (is_artificial[j]) phase1[j] = -1.0;
    t.set_objective(phase1);
    const Status s = t.run(none, budget);
    if (s == Status::IterationLimit) {
      sol.status = s;
      return sol;
    }
    if (t.value() < -1e-8) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (!is_artificial[t.basis()[r]]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (is_artificial[j] || std::abs(t.at(r, j)) <= 1e-9) continue;
        t.pivot(r, j);
        break;
      }
    }
  }

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = problem.objective[j];
  t.set_objective(phase2);
  sol.status = t.run(is_artificial, budget);
  if (sol.status != Status::Optimal) return sol;

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (t.basis()[r] < n) sol.x[t.basis()[r]] = std::max(0.0, t.rhs(r));
  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += problem.objective[j] * sol.x[j];
  return sol;
}

}  // namespace mwrc::lp
