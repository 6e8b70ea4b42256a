#pragma once

// Discrete probability primitives: distributions, dense joint tables,
// entropies in bits, empirical types and typicality tests on sequences.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mwrc/errors.hpp"

namespace mwrc {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;
using AxisSet = std::vector<std::size_t>;

// Absolute tolerance on the total mass of a distribution.
inline constexpr double kMassTolerance = 1e-12;

class Distribution {
 public:
  Distribution() = default;
  // Throws ValidationError on negative or non-finite entries, or a sum that
  // is off by more than kMassTolerance.
  explicit Distribution(std::vector<double> mass);

  static Distribution uniform(std::size_t size);
  static Distribution point_mass(std::size_t size, std::size_t at);

  std::size_t size() const noexcept { return mass_.size(); }
  double operator[](std::size_t k) const { return mass_[k]; }
  std::span<const double> mass() const noexcept { return mass_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> mass_;
};

// Dense tensor over several finite random variables, row-major with axis 0
// varying slowest.
class JointTable {
 public:
  JointTable(std::vector<std::size_t> axis_sizes, std::vector<double> mass);

  // Product law of independent variables, one axis per factor.
  static JointTable product(std::span<const Distribution> factors);
  // p(a) * p(b | a) for a conditional given as one row per value of a.
  static JointTable from_conditional(const Distribution& input,
                                     std::span<const Distribution> rows);

  std::size_t rank() const noexcept { return axis_sizes_.size(); }
  const std::vector<std::size_t>& axis_sizes() const noexcept { return axis_sizes_; }
  std::span<const double> mass() const noexcept { return mass_; }
  std::size_t cell_count() const noexcept { return mass_.size(); }

  std::size_t flat_index(std::span<const Symbol> cell) const;
  JointTable marginal(std::span<const std::size_t> axes) const;

 private:
  std::vector<std::size_t> axis_sizes_;
  std::vector<double> mass_;
};

// -sum p log2 p over raw masses; validates like Distribution.
double entropy(std::span<const double> mass);
double entropy(const Distribution& p);
double binary_entropy(double p);

double joint_entropy(const JointTable& joint, std::span<const std::size_t> axes);
double conditional_entropy(const JointTable& joint, const AxisSet& target,
                           const AxisSet& given);
double mutual_information(const JointTable& joint, const AxisSet& a,
                          const AxisSet& b);

Distribution empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size);

// Counts of each joint symbol over aligned sequences, indexed like the cells
// of a table with the given axis sizes.
std::vector<std::uint32_t> joint_counts(std::span<const Sequence> seqs,
                                        std::span<const std::size_t> axis_sizes);

enum class Typicality { Robust, Weak };

// Membership test for the typical set of a reference law at a fixed block
// length, evaluated on joint-type counts.
//
// Robust: every cell a satisfies |count(a)/n - p(a)| <= eps * p(a), so cells of
// zero reference mass must be empty.
// Weak: for every non-empty subset S of axes,
// |-(1/n) log2 p_S(seq_S) - H(S)| < eps, and no zero-mass cell is visited.
class TypicalSet {
 public:
  TypicalSet(const JointTable& reference, std::size_t length, double epsilon,
             Typicality flavor = Typicality::Robust);

  bool accepts(std::span<const std::uint32_t> counts) const;
  // True when no count vector summing to the block length can be accepted.
  // Only decided for the robust flavor; the weak flavor always returns false.
  bool provably_empty() const;

  std::size_t length() const noexcept { return length_; }
  std::size_t cell_count() const noexcept { return cells_; }
  const std::vector<std::size_t>& axis_sizes() const noexcept { return axis_sizes_; }

 private:
  struct Projection {
    std::vector<std::uint32_t> cell_to_marginal;
    std::vector<double> neg_log2_mass;  // +inf where the marginal mass is 0
    std::size_t marginal_cells = 0;
    double entropy = 0.0;
  };

  Typicality flavor_;
  std::size_t length_;
  std::size_t cells_;
  double epsilon_;
  std::vector<std::size_t> axis_sizes_;
  std::vector<std::int64_t> lower_;
  std::vector<std::int64_t> upper_;
  std::vector<Projection> projections_;
};

bool is_robust_typical(std::span<const Sequence> seqs, const JointTable& reference,
                       double epsilon);
bool is_weakly_typical(std::span<const Sequence> seqs, const JointTable& reference,
                       double epsilon);

}  // namespace mwrc
