#include "mwrc/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mwrc {

namespace {

void check_mass(std::span<const double> mass) {
  if (mass.empty()) throw ValidationError("distribution has empty support");
  double total = 0.0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (!std::isfinite(mass[k]) || mass[k] < 0.0)
      throw ValidationError("mass entry " + std::to_string(k) + " is negative or not finite");
    total += mass[k];
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw ValidationError("mass sums to " + std::to_string(total) + ", not 1");
}

double entropy_unchecked(std::span<const double> mass) {
  double h = 0.0;
  for (double p : mass)
    if (p > 0.0) h -= p * std::log2(p);
  return std::max(h, 0.0);
}

void check_axes(const JointTable& joint, std::span<const std::size_t> axes) {
  std::vector<bool> seen(joint.rank(), false);
  for (std::size_t a : axes) {
    if (a >= joint.rank())
      throw UsageError("axis " + std::to_string(a) + " out of range for rank " +
                       std::to_string(joint.rank()));
    if (seen[a]) throw UsageError("axis " + std::to_string(a) + " listed twice");
    seen[a] = true;
  }
}

void check_disjoint(const AxisSet& a, const AxisSet& b) {
  for (std::size_t x : a)
    if (std::find(b.begin(), b.end(), x) != b.end())
      throw UsageError("axis sets overlap on axis " + std::to_string(x));
}

AxisSet merged(const AxisSet& a, const AxisSet& b) {
  AxisSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Distribution::Distribution(std::vector<double> mass) : mass_(std::move(mass)) {
  check_mass(mass_);
}

Distribution Distribution::uniform(std::size_t size) {
  if (size == 0) throw ValidationError("uniform distribution needs a non-empty support");
  return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Distribution Distribution::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw UsageError("point mass location outside support");
  std::vector<double> mass(size, 0.0);
  mass[at] = 1.0;
  return Distribution(std::move(mass));
}

JointTable::JointTable(std::vector<std::size_t> axis_sizes, std::vector<double> mass)
    : axis_sizes_(std::move(axis_sizes)), mass_(std::move(mass)) {
  std::size_t cells = 1;
  for (std::size_t s : axis_sizes_) {
    if (s == 0) throw ValidationError("joint table axis of size 0");
    cells *= s;
  }
  if (cells != mass_.size())
    throw ValidationError("joint table has " + std::to_string(mass_.size()) +
                          " cells, axes imply " + std::to_string(cells));
  check_mass(mass_);
}

JointTable JointTable::product(std::span<const Distribution> factors) {
  std::vector<std::size_t> sizes;
  std::vector<double> mass{1.0};
  for (const auto& f : factors) {
    sizes.push_back(f.size());
    std::vector<double> next;
    next.reserve(mass.size() * f.size());
    for (double m : mass)
      for (double p : f.mass()) next.push_back(m * p);
    mass = std::move(next);
  }
  // Products of valid masses can drift by a few ulps; renormalise.
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return JointTable(std::move(sizes), std::move(mass));
}

JointTable JointTable::from_conditional(const Distribution& input,
                                        std::span<const Distribution> rows) {
  if (rows.size() != input.size())
    throw UsageError("conditional has " + std::to_string(rows.size()) +
                     " rows for an input of size " + std::to_string(input.size()));
  const std::size_t out = rows.empty() ? 0 : rows.front().size();
  std::vector<double> mass;
  mass.reserve(input.size() * out);
  for (std::size_t a = 0; a < input.size(); ++a) {
    if (rows[a].size() != out) throw UsageError("conditional rows differ in length");
    for (double p : rows[a].mass()) mass.push_back(input[a] * p);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return JointTable({input.size(), out}, std::move(mass));
}

std::size_t JointTable::flat_index(std::span<const Symbol> cell) const {
  if (cell.size() != rank()) throw UsageError("cell arity does not match table rank");
  std::size_t idx = 0;
  for (std::size_t a = 0; a < rank(); ++a) {
    if (cell[a] >= axis_sizes_[a]) throw UsageError("symbol outside axis alphabet");
    idx = idx * axis_sizes_[a] + cell[a];
  }
  return idx;
}

JointTable JointTable::marginal(std::span<const std::size_t> axes) const {
  check_axes(*this, axes);
  std::vector<std::size_t> sizes;
  for (std::size_t a : axes) sizes.push_back(axis_sizes_[a]);
  std::size_t out_cells = 1;
  for (std::size_t s : sizes) out_cells *= s;
  std::vector<double> out(out_cells, 0.0);

  std::vector<std::size_t> digit(rank(), 0);
  for (std::size_t cell = 0; cell < mass_.size(); ++cell) {
    std::size_t idx = 0;
    for (std::size_t a : axes) idx = idx * axis_sizes_[a] + digit[a];
    out[idx] += mass_[cell];
    for (std::size_t a = rank(); a-- > 0;) {
      if (++digit[a] < axis_sizes_[a]) break;
      digit[a] = 0;
    }
  }
  if (axes.empty()) out.assign(1, 1.0);
  return JointTable(std::move(sizes), std::move(out));
}

double entropy(std::span<const double> mass) {
  check_mass(mass);
  return entropy_unchecked(mass);
}

double entropy(const Distribution& p) { return entropy_unchecked(p.mass()); }

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw ValidationError("binary entropy argument outside [0,1]");
  return entropy_unchecked(std::vector<double>{p, 1.0 - p});
}

double joint_entropy(const JointTable& joint, std::span<const std::size_t> axes) {
  if (axes.empty()) return 0.0;
  return entropy_unchecked(joint.marginal(axes).mass());
}

double conditional_entropy(const JointTable& joint, const AxisSet& target,
                           const AxisSet& given) {
  check_disjoint(target, given);
  const AxisSet both = merged(target, given);
  check_axes(joint, both);
  const double h = joint_entropy(joint, both) - joint_entropy(joint, given);
  return std::max(h, 0.0);
}

double mutual_information(const JointTable& joint, const AxisSet& a, const AxisSet& b) {
  check_disjoint(a, b);
  const AxisSet both = merged(a, b);
  check_axes(joint, both);
  const double i = joint_entropy(joint, a) + joint_entropy(joint, b) - joint_entropy(joint, both);
  return std::max(i, 0.0);
}

Distribution empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size) {
  if (seq.empty()) throw UsageError("empirical type of an empty sequence");
  std::vector<double> counts(alphabet_size, 0.0);
  for (Symbol s : seq) {
    if (s >= alphabet_size)
      throw ValidationError("symbol " + std::to_string(s) + " outside alphabet of size " +
                            std::to_string(alphabet_size));
    counts[s] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(seq.size());
  return Distribution(std::move(counts));
}

std::vector<std::uint32_t> joint_counts(std::span<const Sequence> seqs,
                                        std::span<const std::size_t> axis_sizes) {
  if (seqs.size() != axis_sizes.size())
    throw UsageError("sequence tuple arity does not match reference rank");
  if (seqs.empty()) throw UsageError("empty sequence tuple");
  const std::size_t n = seqs.front().size();
  for (const auto& s : seqs)
    if (s.size() != n) throw UsageError("sequences differ in length");
  if (n == 0) throw UsageError("sequences are empty");

  std::size_t cells = 1;
  for (std::size_t s : axis_sizes) cells *= s;
  std::vector<std::uint32_t> counts(cells, 0);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a) {
      const Symbol x = seqs[a][t];
      if (x >= axis_sizes[a]) throw ValidationError("symbol outside axis alphabet");
      idx = idx * axis_sizes[a] + x;
    }
    ++counts[idx];
  }
  return counts;
}

TypicalSet::TypicalSet(const JointTable& reference, std::size_t length, double epsilon,
                       Typicality flavor)
    : flavor_(flavor),
      length_(length),
      cells_(reference.cell_count()),
      epsilon_(epsilon),
      axis_sizes_(reference.axis_sizes()) {
  if (length == 0) throw UsageError("typicality needs a positive block length");
  if (!(epsilon >= 0.0)) throw UsageError("typicality epsilon must be non-negative");

  const double n = static_cast<double>(length);
  if (flavor_ == Typicality::Robust) {
    // Integer count window per cell; the 1e-9 slack absorbs rounding in n*p.
    lower_.resize(cells_);
    upper_.resize(cells_);
    for (std::size_t c = 0; c < cells_; ++c) {
      const double centre = n * reference.mass()[c];
      const double width = epsilon * centre;
      lower_[c] = static_cast<std::int64_t>(std::ceil(centre - width - 1e-9));
      upper_[c] = static_cast<std::int64_t>(std::floor(centre + width + 1e-9));
    }
    return;
  }

  const std::size_t rank = reference.rank();
  for (std::uint32_t subset = 1; subset < (1u << rank); ++subset) {
    AxisSet axes;
    for (std::size_t a = 0; a < rank; ++a)
      if (subset & (1u << a)) axes.push_back(a);
    const JointTable marg = reference.marginal(axes);
    Projection proj;
    proj.marginal_cells = marg.cell_count();
    proj.entropy = entropy_unchecked(marg.mass());
    proj.neg_log2_mass.resize(marg.cell_count());
    for (std::size_t m = 0; m < marg.cell_count(); ++m) {
      const double p = marg.mass()[m];
      proj.neg_log2_mass[m] = p > 0.0 ? -std::log2(p) : std::numeric_limits<double>::infinity();
    }
    proj.cell_to_marginal.resize(cells_);
    std::vector<std::size_t> digit(rank, 0);
    for (std::size_t c = 0; c < cells_; ++c) {
      std::size_t idx = 0;
      for (std::size_t a : axes) idx = idx * axis_sizes_[a] + digit[a];
      proj.cell_to_marginal[c] = static_cast<std::uint32_t>(idx);
      for (std::size_t a = rank; a-- > 0;) {
        if (++digit[a] < axis_sizes_[a]) break;
        digit[a] = 0;
      }
    }
    projections_.push_back(std::move(proj));
  }
}

bool TypicalSet::accepts(std::span<const std::uint32_t> counts) const {
  if (counts.size() != cells_) throw UsageError("count vector does not match reference cells");
  if (flavor_ == Typicality::Robust) {
    for (std::size_t c = 0; c < cells_; ++c) {
      const auto k = static_cast<std::int64_t>(counts[c]);
      if (k < lower_[c] || k > upper_[c]) return false;
    }
    return true;
  }

  const double n = static_cast<double>(length_);
  std::vector<std::uint64_t> marg;
  for (const auto& proj : projections_) {
    marg.assign(proj.marginal_cells, 0);
    for (std::size_t c = 0; c < cells_; ++c) marg[proj.cell_to_marginal[c]] += counts[c];
    double rate = 0.0;
    for (std::size_t m = 0; m < proj.marginal_cells; ++m) {
      if (marg[m] == 0) continue;
      if (std::isinf(proj.neg_log2_mass[m])) return false;
      rate += static_cast<double>(marg[m]) * proj.neg_log2_mass[m];
    }
    if (!(std::abs(rate / n - proj.entropy) < epsilon_)) return false;
  }
  return true;
}

bool TypicalSet::provably_empty() const {
  if (flavor_ != Typicality::Robust) return false;
  std::int64_t lo = 0, hi = 0;
  for (std::size_t c = 0; c < cells_; ++c) {
    const std::int64_t l = std::max<std::int64_t>(lower_[c], 0);
    if (l > upper_[c]) return true;
    lo += l;
    hi += upper_[c];
  }
  const auto n = static_cast<std::int64_t>(length_);
  return lo > n || hi < n;
}

bool is_robust_typical(std::span<const Sequence> seqs, const JointTable& reference,
                       double epsilon) {
  const auto counts = joint_counts(seqs, reference.axis_sizes());
  return TypicalSet(reference, seqs.front().size(), epsilon, Typicality::Robust).accepts(counts);
}

bool is_weakly_typical(std::span<const Sequence> seqs, const JointTable& reference,
                       double epsilon) {
  const auto counts = joint_counts(seqs, reference.axis_sizes());
  return TypicalSet(reference, seqs.front().size(), epsilon, Typicality::Weak).accepts(counts);
}

}  // namespace mwrc
