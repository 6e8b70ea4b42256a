#pragma once

// Dense two-phase simplex for the small linear programs that come up in
// region computations (a few hundred columns at most).
//
//   maximize  c.x   subject to  A x (<=|>=|=) b,  x >= 0

#include <cstddef>
#include <vector>

namespace mwrc::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Problem {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Sense> senses;
  std::vector<double> rhs;

  void add_row(std::vector<double> row, Sense sense, double b) {
    rows.push_back(std::move(row));
    senses.push_back(sense);
    rhs.push_back(b);
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Infeasible;
  double value = 0.0;
  std::vector<double> x;
};

Solution maximize(const Problem& problem, std::size_t max_pivots = 200000);

}  // namespace mwrc::lp
