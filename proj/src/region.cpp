#include "mwrc/region.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mwrc/lp.hpp"
#include "mwrc/random.hpp"

namespace mwrc {

namespace {

constexpr double kTieWindow = 1e-9;
// Stand-in for log2(0) in gradients; steep enough to dominate any real term.
constexpr double kLogFloor = -1000.0;

double safe_log2(double x) { return x > 0.0 ? std::log2(x) : kLogFloor; }

// Golden-section search for the maximiser of a concave function on [0, hi].
template <class F>
double golden_max(F&& f, double hi, int iterations = 60) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iterations && b - a > 1e-15; ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    }
  }
  // Endpoints matter: optima often sit on a face of the simplex.
  double best = 0.5 * (a + b), fbest = f(best);
  for (double x : {0.0, hi}) {
    const double fx = f(x);
    if (fx > fbest) { best = x; fbest = fx; }
  }
  return best;
}

std::vector<double> normalized(std::vector<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return v;
}

// I(X;Y) in bits for input p and channel rows W[x][y].
double mutual_info(std::span<const double> p, const std::vector<std::vector<double>>& w,
                   std::vector<double>& q) {
  const std::size_t ny = w.empty() ? 0 : w.front().size();
  q.assign(ny, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x)
    for (std::size_t y = 0; y < ny; ++y) q[y] += p[x] * w[x][y];
  double info = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    for (std::size_t y = 0; y < ny; ++y)
      if (w[x][y] > 0.0) info += p[x] * w[x][y] * std::log2(w[x][y] / q[y]);
  }
  return std::max(info, 0.0);
}

// dI/dp(x) up to the constant -log2(e), which cancels along simplex directions.
void mutual_info_gradient(const std::vector<std::vector<double>>& w, const std::vector<double>& q,
                          std::vector<double>& grad) {
  grad.assign(w.size(), 0.0);
  for (std::size_t x = 0; x < w.size(); ++x)
    for (std::size_t y = 0; y < w[x].size(); ++y)
      if (w[x][y] > 0.0) grad[x] += w[x][y] * (std::log2(w[x][y]) - safe_log2(q[y]));
}

std::vector<std::vector<double>> raw_rows(const std::vector<Distribution>& rows) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) out.emplace_back(r.mass().begin(), r.mass().end());
  return out;
}

void check_rates(const ChannelSpec& spec, const RateTuple& rates) {
  if (rates.size() != spec.num_users)
    throw UsageError("rate tuple has " + std::to_string(rates.size()) + " entries for " +
                     std::to_string(spec.num_users) + " users");
  for (double r : rates)
    if (!std::isfinite(r) || r < 0.0) throw UsageError("rates must be finite and non-negative");
}

std::vector<double> downlink_sums(const RateTuple& rates) {
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  std::vector<double> s(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) s[i] = total - rates[i];
  return s;
}

// Every uplink input tuple with its output, plus for each strict subset U the
// cell of (x_{U^c}, y0) the tuple lands in.
class UplinkModel {
 public:
  explicit UplinkModel(const ChannelSpec& spec)
      : users_(spec.num_users),
        sizes_(spec.user_alphabet_sizes),
        outputs_(spec.relay_output_size),
        masks_(strict_subsets(spec.num_users)) {
    const std::size_t domain = spec.uplink_domain_size();
    tuples_.reserve(domain);
    for (std::size_t c = 0; c < domain; ++c) tuples_.push_back(spec.uplink_tuple(c));
    y0_ = spec.uplink_table;
    cells_.resize(masks_.size());
    cell_count_.resize(masks_.size());
    for (std::size_t u = 0; u < masks_.size(); ++u) {
      auto& cells = cells_[u];
      cells.resize(domain);
      std::size_t count = outputs_;
      for (std::size_t j = 0; j < users_; ++j)
        if (!(masks_[u] >> j & 1U)) count *= sizes_[j];
      cell_count_[u] = count;
      for (std::size_t c = 0; c < domain; ++c) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < users_; ++j)
          if (!(masks_[u] >> j & 1U)) idx = idx * sizes_[j] + tuples_[c][j];
        cells[c] = idx * outputs_ + y0_[c];
      }
    }
  }

  std::size_t users() const { return users_; }
  std::size_t domain() const { return tuples_.size(); }
  const std::vector<std::uint32_t>& masks() const { return masks_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  void check(const ProductDistribution& inputs) const {
    if (inputs.size() != users_)
      throw UsageError("expected one input distribution per user (" + std::to_string(users_) +
                       "), got " + std::to_string(inputs.size()));
    for (std::size_t j = 0; j < users_; ++j)
      if (inputs[j].size() != sizes_[j])
        throw UsageError("input distribution of user " + std::to_string(j + 1) + " has " +
                         std::to_string(inputs[j].size()) + " entries, alphabet has " +
                         std::to_string(sizes_[j]));
  }

  std::vector<double> entropies(const std::vector<std::vector<double>>& p) const {
    const auto joint = tuple_mass(p);
    std::vector<double> hp(users_);
    for (std::size_t j = 0; j < users_; ++j) hp[j] = entropy_of(p[j]);
    const double cap = std::log2(static_cast<double>(outputs_));
    std::vector<double> h(masks_.size());
    std::vector<double> cell;
    for (std::size_t u = 0; u < masks_.size(); ++u) {
      cell.assign(cell_count_[u], 0.0);
      for (std::size_t c = 0; c < joint.size(); ++c) cell[cells_[u][c]] += joint[c];
      double v = entropy_of(cell);
      for (std::size_t j = 0; j < users_; ++j)
        if (!(masks_[u] >> j & 1U)) v -= hp[j];
      h[u] = std::clamp(v, 0.0, cap);
    }
    return h;
  }

  // Gradient of w.h with respect to user i's law, up to a per-user constant.
  std::vector<double> gradient(const std::vector<std::vector<double>>& p, std::size_t i,
                               const std::vector<double>& w) const {
    std::vector<double> rest(domain(), 1.0);  // product of the other users' masses
    std::vector<double> joint(domain());
    for (std::size_t c = 0; c < domain(); ++c) {
      for (std::size_t j = 0; j < users_; ++j)
        if (j != i) rest[c] *= p[j][tuples_[c][j]];
      joint[c] = rest[c] * p[i][tuples_[c][i]];
    }
    std::vector<double> g(sizes_[i], 0.0), cell;
    for (std::size_t u = 0; u < masks_.size(); ++u) {
      if (w[u] == 0.0) continue;
      const bool inside = masks_[u] >> i & 1U;
      // Inside U the cell mass is linear in p_i; outside, cells are split by
      // x_i and the conditional law given x_i = a is what matters.
      const auto& source = inside ? joint : rest;
      cell.assign(cell_count_[u], 0.0);
      for (std::size_t c = 0; c < domain(); ++c) cell[cells_[u][c]] += source[c];
      for (std::size_t c = 0; c < domain(); ++c)
        if (rest[c] > 0.0) g[tuples_[c][i]] -= w[u] * rest[c] * safe_log2(cell[cells_[u][c]]);
    }
    return g;
  }

 private:
  static double entropy_of(std::span<const double> m) {
    double h = 0.0;
    for (double x : m)
      if (x > 0.0) h -= x * std::log2(x);
    return h;
  }

  std::vector<double> tuple_mass(const std::vector<std::vector<double>>& p) const {
    std::vector<double> joint(domain());
    for (std::size_t c = 0; c < domain(); ++c) {
      double m = 1.0;
      for (std::size_t j = 0; j < users_; ++j) m *= p[j][tuples_[c][j]];
      joint[c] = m;
    }
    return joint;
  }

  std::size_t users_;
  std::vector<std::size_t> sizes_;
  std::size_t outputs_;
  std::vector<std::uint32_t> masks_;
  std::vector<std::vector<Symbol>> tuples_;
  std::vector<Symbol> y0_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<std::size_t> cell_count_;
};

std::vector<std::vector<double>> raw_product(const ProductDistribution& inputs) {
  std::vector<std::vector<double>> p;
  for (const auto& d : inputs) p.emplace_back(d.mass().begin(), d.mass().end());
  return p;
}

ProductDistribution to_product(const std::vector<std::vector<double>>& p) {
  ProductDistribution out;
  for (const auto& v : p) out.emplace_back(normalized(v));
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Block coordinate ascent on w.h(p). Each block is concave for w >= 0, and
// each block step is a pairwise conditional-gradient move with exact line
// search.
std::vector<std::vector<double>> ascend(const UplinkModel& model,
                                        std::vector<std::vector<double>> p,
                                        const std::vector<double>& w) {
  auto value = [&](const std::vector<std::vector<double>>& x) {
    return dot(w, model.entropies(x));
  };
  double current = value(p);
  for (int sweep = 0; sweep < 25; ++sweep) {
    const double before = current;
    for (std::size_t i = 0; i < model.users(); ++i) {
      for (int it = 0; it < 20; ++it) {
        const auto g = model.gradient(p, i, w);
        std::size_t to = 0, from = g.size();
        for (std::size_t a = 0; a < g.size(); ++a) {
          if (g[a] > g[to]) to = a;
          if (p[i][a] > 0.0 && (from == g.size() || g[a] < g[from])) from = a;
        }
        if (from == g.size() || to == from || g[to] - g[from] < 1e-12) break;
        const double room = p[i][from];
        auto trial = p;
        auto along = [&](double gamma) {
          trial[i] = p[i];
          trial[i][to] += gamma;
          trial[i][from] -= gamma;
          return value(trial);
        };
        const double gamma = golden_max(along, room);
        const double next = along(gamma);
        if (next <= current + 1e-15) break;
        p[i] = trial[i];
        p[i][from] = std::max(p[i][from], 0.0);
        if (gamma >= room) p[i][from] = 0.0;
        current = next;
      }
    }
    if (current - before < 1e-12) break;
  }
  return p;
}

std::vector<double> dirichlet(std::size_t k, double alpha, std::mt19937_64& eng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> v(k);
  double total = 0.0;
  for (auto& x : v) total += (x = gamma(eng));
  if (total <= 0.0) {
    v.assign(k, 0.0);
    v[std::uniform_int_distribution<std::size_t>(0, k - 1)(eng)] = 1.0;
    return v;
  }
  for (auto& x : v) x /= total;
  return v;
}

bool dominated_by(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > b[k] + 1e-12) return false;
  return true;
}

// Largest t with sum_k lambda_k h_k >= target + t for every coordinate.
lp::Solution domination_lp(const std::vector<const std::vector<double>*>& points,
                           const std::vector<double>& target) {
  const std::size_t k = points.size(), d = target.size();
  lp::Problem prob;
  prob.objective.assign(k + 2, 0.0);
  prob.objective[k] = 1.0;
  prob.objective[k + 1] = -1.0;
  for (std::size_t u = 0; u < d; ++u) {
    std::vector<double> row(k + 2, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[j] = (*points[j])[u];
    row[k] = -1.0;
    row[k + 1] = 1.0;
    prob.add_row(std::move(row), lp::Sense::GreaterEqual, target[u]);
  }
  std::vector<double> ones(k + 2, 0.0);
  std::fill(ones.begin(), ones.begin() + static_cast<std::ptrdiff_t>(k), 1.0);
  prob.add_row(std::move(ones), lp::Sense::Equal, 1.0);
  return lp::maximize(prob);
}

// Shrinks a mixture to at most L+1 components. Each hull point h_k is the rank
// function of a polymatroid, so the rates split as R = sum_k lambda_k r_k with
// r_k inside polymatroid k; Caratheodory on the r_k in R^L then finishes.
bool reduce_mixture(const UplinkHull& hull, const std::vector<std::uint32_t>& masks,
                    const RateTuple& rates, double margin,
                    std::vector<std::pair<std::size_t, double>>& mixture) {
  const std::size_t L = hull.num_users, m = mixture.size();
  if (m <= L + 1) return true;
  RateTuple target = rates;
  if (margin < 0.0)
    for (double& r : target) r = std::max(0.0, r + margin);

  // Variables z_{k,j} = lambda_k r_k(j) >= 0.
  lp::Problem prob;
  prob.objective.assign(m * L, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& h = hull.points[mixture[k].first].entropies;
    for (std::size_t u = 0; u < masks.size(); ++u) {
      std::vector<double> row(m * L, 0.0);
      for (std::size_t j = 0; j < L; ++j)
        if (masks[u] >> j & 1U) row[k * L + j] = 1.0;
      prob.add_row(std::move(row), lp::Sense::LessEqual, mixture[k].second * h[u] + 1e-12);
    }
  }
  for (std::size_t j = 0; j < L; ++j) {
    std::vector<double> row(m * L, 0.0);
    for (std::size_t k = 0; k < m; ++k) row[k * L + j] = 1.0;
    prob.add_row(std::move(row), lp::Sense::Equal, target[j]);
  }
  const auto sol = lp::maximize(prob);
  if (sol.status != lp::Status::Optimal) return false;

  std::vector<double> mu(m);
  Eigen::MatrixXd pts(L + 1, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    mu[k] = mixture[k].second;
    for (std::size_t j = 0; j < L; ++j)
      pts(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = sol.x[k * L + j] / mu[k];
    pts(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(k)) = 1.0;
  }
  std::vector<std::size_t> live(m);
  std::iota(live.begin(), live.end(), 0);
  while (live.size() > L + 1) {
    Eigen::MatrixXd sub(L + 1, static_cast<Eigen::Index>(live.size()));
    for (std::size_t c = 0; c < live.size(); ++c)
      sub.col(static_cast<Eigen::Index>(c)) = pts.col(static_cast<Eigen::Index>(live[c]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() == 0 || kernel.col(0).norm() == 0.0) return false;
    Eigen::VectorXd alpha = kernel.col(0);
    if (alpha.maxCoeff() <= 1e-14) alpha = -alpha;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < live.size(); ++c) {
      const double a = alpha(static_cast<Eigen::Index>(c));
      if (a > 1e-14) theta = std::min(theta, mu[live[c]] / a);
    }
    if (!std::isfinite(theta)) return false;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < live.size(); ++c) {
      double& v = mu[live[c]];
      v -= theta * alpha(static_cast<Eigen::Index>(c));
      if (v > 1e-13) keep.push_back(live[c]);
    }
    if (keep.size() == live.size()) return false;
    live = std::move(keep);
  }
  std::vector<std::pair<std::size_t, double>> out;
  double total = 0.0;
  for (std::size_t k : live) total += mu[k];
  for (std::size_t k : live) out.emplace_back(mixture[k].first, mu[k] / total);
  mixture = std::move(out);
  return true;
}

Membership classify_margin(double margin, double tolerance) {
  if (margin > tolerance) return Membership::In;
  if (margin < -tolerance) return Membership::Out;
  return Membership::Boundary;
}

}  // namespace

InputDistribution InputDistribution::uniform(const ChannelSpec& spec) {
  InputDistribution d;
  d.q_weights = Distribution::point_mass(1, 0);
  ProductDistribution users;
  for (std::size_t s : spec.user_alphabet_sizes) users.push_back(Distribution::uniform(s));
  d.user_conditionals.push_back(std::move(users));
  d.relay_input = Distribution::uniform(spec.relay_input_size);
  return d;
}

void validate_input_distribution(const ChannelSpec& spec, const InputDistribution& dist) {
  const std::size_t nq = dist.q_weights.size();
  if (nq == 0) throw UsageError("time-sharing law is empty");
  if (nq > spec.num_users + 1)
    throw UsageError("time-sharing alphabet of size " + std::to_string(nq) + " exceeds L+1 = " +
                     std::to_string(spec.num_users + 1));
  if (dist.user_conditionals.size() != nq)
    throw UsageError("expected one set of user conditionals per time-sharing symbol");
  for (const auto& row : dist.user_conditionals) {
    if (row.size() != spec.num_users) throw UsageError("expected one conditional per user");
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j].size() != spec.user_alphabet_sizes[j])
        throw UsageError("conditional of user " + std::to_string(j + 1) +
                         " does not match its alphabet");
  }
  if (dist.relay_input.size() != spec.relay_input_size)
    throw UsageError("relay input law does not match the relay alphabet");
}

std::vector<std::uint32_t> strict_subsets(std::size_t num_users) {
  if (num_users < 1 || num_users > 20) throw UsageError("user count out of range");
  std::vector<std::uint32_t> out;
  const std::uint32_t full = (std::uint32_t{1} << num_users) - 1;
  for (std::uint32_t m = 1; m < full; ++m) out.push_back(m);
  return out;
}

double subset_rate(const RateTuple& rates, std::uint32_t mask) {
  double s = 0.0;
  for (std::size_t j = 0; j < rates.size(); ++j)
    if (mask >> j & 1U) s += rates[j];
  return s;
}

std::string subset_label(std::uint32_t mask) {
  std::string s = "{";
  bool first = true;
  for (std::size_t j = 0; j < 32; ++j) {
    if (!(mask >> j & 1U)) continue;
    if (!first) s += ",";
    s += std::to_string(j + 1);
    first = false;
  }
  return s + "}";
}

std::vector<double> uplink_entropy_vector(const ChannelSpec& spec,
                                          const ProductDistribution& inputs) {
  require_valid(spec);
  const UplinkModel model(spec);
  model.check(inputs);
  return model.entropies(raw_product(inputs));
}

std::vector<double> downlink_mi_vector(const ChannelSpec& spec, const Distribution& relay_input) {
  require_valid(spec);
  if (relay_input.size() != spec.relay_input_size)
    throw UsageError("relay input law does not match the relay alphabet");
  std::vector<double> out, q;
  for (std::size_t i = 0; i < spec.num_users; ++i)
    out.push_back(mutual_info(relay_input.mass(), raw_rows(downlink_marginal(spec, i)), q));
  return out;
}

double ConstraintSlack::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double s : downlink) m = std::min(m, s);
  for (double s : uplink) m = std::min(m, s);
  return m;
}

ConstraintSlack constraint_slacks(const ChannelSpec& spec, const RateTuple& rates,
                                  const InputDistribution& dist) {
  require_valid(spec);
  check_rates(spec, rates);
  validate_input_distribution(spec, dist);
  ConstraintSlack out;
  const auto sums = downlink_sums(rates);
  const auto mi = downlink_mi_vector(spec, dist.relay_input);
  for (std::size_t i = 0; i < spec.num_users; ++i) out.downlink.push_back(mi[i] - sums[i]);

  const UplinkModel model(spec);
  std::vector<double> avg(model.masks().size(), 0.0);
  for (std::size_t q = 0; q < dist.q_weights.size(); ++q) {
    if (dist.q_weights[q] == 0.0) continue;
    const auto h = model.entropies(raw_product(dist.user_conditionals[q]));
    for (std::size_t u = 0; u < h.size(); ++u) avg[u] += dist.q_weights[q] * h[u];
  }
  for (std::size_t u = 0; u < avg.size(); ++u)
    out.uplink.push_back(avg[u] - subset_rate(rates, model.masks()[u]));
  return out;
}

DownlinkOptimum optimize_downlink(const ChannelSpec& spec, const RateTuple& rates,
                                  const DownlinkOptions& options) {
  require_valid(spec);
  check_rates(spec, rates);
  const std::size_t L = spec.num_users, nx = spec.relay_input_size;
  std::vector<std::vector<std::vector<double>>> w;
  for (std::size_t i = 0; i < L; ++i) w.push_back(raw_rows(downlink_marginal(spec, i)));
  const auto sums = downlink_sums(rates);

  std::vector<double> q;
  auto slacks_at = [&](const std::vector<double>& p) {
    std::vector<double> g(L);
    for (std::size_t i = 0; i < L; ++i) g[i] = mutual_info(p, w[i], q) - sums[i];
    return g;
  };
  auto min_of = [](const std::vector<double>& g) { return *std::min_element(g.begin(), g.end()); };
  // Smoothed minimum -tau ln sum exp(-g_i / tau); within tau ln L of the min.
  auto softmin = [&](const std::vector<double>& g, double tau, std::vector<double>* weights) {
    const double lo = min_of(g);
    double z = 0.0;
    std::vector<double> e(L);
    for (std::size_t i = 0; i < L; ++i) z += (e[i] = std::exp(-(g[i] - lo) / tau));
    if (weights) {
      weights->resize(L);
      for (std::size_t i = 0; i < L; ++i) (*weights)[i] = e[i] / z;
    }
    return lo - tau * std::log(z);
  };

  std::vector<double> p(nx, 1.0 / static_cast<double>(nx));
  DownlinkOptimum best;
  auto best_p = p;
  auto best_g = slacks_at(p);
  double best_min = min_of(best_g);
  std::size_t iterations = 0;
  bool converged = nx == 1;

  std::vector<double> pi, grad, gi;
  for (double tau = 0.1; tau >= 0.99e-8 && nx > 1; tau *= 0.1) {
    converged = false;
    while (iterations < options.max_iterations) {
      ++iterations;
      const auto g = slacks_at(p);
      softmin(g, tau, &pi);
      grad.assign(nx, 0.0);
      for (std::size_t i = 0; i < L; ++i) {
        if (pi[i] < 1e-300) continue;
        mutual_info(p, w[i], q);
        mutual_info_gradient(w[i], q, gi);
        for (std::size_t x = 0; x < nx; ++x) grad[x] += pi[i] * gi[x];
      }
      std::size_t to = 0, from = nx;
      double mean = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        mean += p[x] * grad[x];
        if (grad[x] > grad[to]) to = x;
        if (p[x] > 0.0 && (from == nx || grad[x] < grad[from])) from = x;
      }
      // Conditional-gradient gap bounds the suboptimality of the smoothed
      // objective.
      if (grad[to] - mean < options.tolerance * 1e-2 || to == from) {
        converged = true;
        break;
      }
      const double room = p[from];
      auto trial = p;
      auto along = [&](double gamma) {
        trial = p;
        trial[to] += gamma;
        trial[from] -= gamma;
        return softmin(slacks_at(trial), tau, nullptr);
      };
      const double f0 = along(0.0);
      const double gamma = golden_max(along, room);
      const double f1 = along(gamma);
      if (f1 <= f0) {
        converged = true;
        break;
      }
      p = trial;
      if (gamma >= room) p[from] = 0.0;
      const auto g1 = slacks_at(p);
      if (min_of(g1) > best_min) {
        best_min = min_of(g1);
        best_p = p;
        best_g = g1;
      }
      if (f1 - f0 < options.tolerance * 1e-6) {
        converged = true;
        break;
      }
    }
    if (iterations >= options.max_iterations) break;
  }

  best.relay_input = Distribution(normalized(best_p));
  best.slacks = slacks_at(std::vector<double>(best.relay_input.mass().begin(),
                                               best.relay_input.mass().end()));
  best.min_slack = min_of(best.slacks);
  best.iterations = iterations;
  best.converged = converged;
  return best;
}

double channel_capacity(const std::vector<Distribution>& rows, double tolerance,
                        std::size_t max_iterations) {
  if (rows.empty()) throw UsageError("channel has no inputs");
  const auto w = raw_rows(rows);
  const std::size_t nx = w.size();
  std::vector<double> p(nx, 1.0 / static_cast<double>(nx)), q, d(nx);
  double lower = 0.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    mutual_info(p, w, q);
    for (std::size_t x = 0; x < nx; ++x) {
      d[x] = 0.0;
      for (std::size_t y = 0; y < w[x].size(); ++y)
        if (w[x][y] > 0.0) d[x] += w[x][y] * std::log2(w[x][y] / q[y]);
    }
    double z = 0.0, upper = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < nx; ++x) {
      z += p[x] * std::exp2(d[x]);
      upper = std::max(upper, d[x]);
    }
    lower = std::log2(z);
    if (upper - lower < tolerance) break;
    for (std::size_t x = 0; x < nx; ++x) p[x] *= std::exp2(d[x]) / z;
  }
  return std::max(0.0, mutual_info(normalized(p), w, q));
}

UplinkHull achievable_uplink_hull(const ChannelSpec& spec, const HullOptions& options) {
  require_valid(spec);
  const UplinkModel model(spec);
  const std::size_t L = spec.num_users, corners = model.domain();
  if (options.sampling_budget < corners)
    throw UsageError("sampling budget " + std::to_string(options.sampling_budget) +
                     " is below the " + std::to_string(corners) + " deterministic corner points");

  UplinkHull hull;
  hull.num_users = L;
  auto add = [&](std::vector<std::vector<double>> p) {
    auto h = model.entropies(p);
    hull.points.push_back({to_product(p), std::move(h)});
  };

  for (std::size_t c = 0; c < corners; ++c) {
    const auto x = spec.uplink_tuple(c);
    std::vector<std::vector<double>> p(L);
    for (std::size_t j = 0; j < L; ++j) {
      p[j].assign(model.sizes()[j], 0.0);
      p[j][x[j]] = 1.0;
    }
    add(std::move(p));
  }
  {
    std::vector<std::vector<double>> p(L);
    for (std::size_t j = 0; j < L; ++j)
      p[j].assign(model.sizes()[j], 1.0 / static_cast<double>(model.sizes()[j]));
    add(std::move(p));
  }

  std::mt19937_64 eng(derive_seed(options.seed, 0x68756c6cULL));
  const std::size_t draws = options.sampling_budget > corners + 1 ? options.sampling_budget - corners - 1 : 0;
  for (std::size_t s = 0; s < draws; ++s) {
    // Alternate flat and sparse Dirichlet draws to reach faces of the simplex.
    const double alpha = s % 2 == 0 ? 1.0 : 0.3;
    std::vector<std::vector<double>> p(L);
    for (std::size_t j = 0; j < L; ++j) p[j] = dirichlet(model.sizes()[j], alpha, eng);
    add(std::move(p));
  }

  const std::size_t dims = model.masks().size();
  std::vector<std::vector<double>> directions;
  for (std::size_t u = 0; u < dims && directions.size() < options.refinement_steps; ++u) {
    std::vector<double> e(dims, 0.0);
    e[u] = 1.0;
    directions.push_back(std::move(e));
  }
  if (directions.size() < options.refinement_steps) directions.emplace_back(dims, 1.0);
  while (directions.size() < options.refinement_steps) directions.push_back(dirichlet(dims, 1.0, eng));

  for (const auto& w : directions) {
    std::size_t start = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < hull.points.size(); ++k) {
      const double v = dot(w, hull.points[k].entropies);
      if (v > best + 1e-12) { best = v; start = k; }
    }
    // Corners are stationary for most objectives; nudge toward the interior.
    auto p = raw_product(hull.points[start].inputs);
    for (std::size_t j = 0; j < L; ++j) {
      const double k = static_cast<double>(p[j].size());
      for (double& x : p[j]) x = 0.98 * x + 0.02 / k;
    }
    auto refined = ascend(model, std::move(p), w);
    if (dot(w, model.entropies(refined)) > best + 1e-12) add(std::move(refined));
  }

  // Keep points that no other point, or mixture of points, dominates.
  std::vector<std::size_t> pareto;
  for (std::size_t k = 0; k < hull.points.size(); ++k) {
    bool drop = false;
    for (std::size_t j = 0; j < hull.points.size() && !drop; ++j) {
      if (j == k) continue;
      const auto& a = hull.points[k].entropies;
      const auto& b = hull.points[j].entropies;
      if (dominated_by(a, b) && (!dominated_by(b, a) || j < k)) drop = true;
    }
    if (!drop) pareto.push_back(k);
  }
  for (std::size_t k : pareto) {
    std::vector<const std::vector<double>*> others;
    for (std::size_t j : hull.extreme) others.push_back(&hull.points[j].entropies);
    for (std::size_t j : pareto)
      if (j > k) others.push_back(&hull.points[j].entropies);
    if (!others.empty()) {
      const auto sol = domination_lp(others, hull.points[k].entropies);
      if (sol.status == lp::Status::Optimal && sol.value >= -1e-12) continue;
    }
    hull.extreme.push_back(k);
  }
  std::sort(hull.extreme.begin(), hull.extreme.end());
  return hull;
}

UplinkFit fit_uplink(const UplinkHull& hull, const RateTuple& rates) {
  if (hull.points.empty() || hull.extreme.empty()) throw UsageError("uplink hull is empty");
  if (rates.size() != hull.num_users) throw UsageError("rate tuple does not match the user count");
  const auto masks = strict_subsets(hull.num_users);
  std::vector<double> target;
  for (auto m : masks) target.push_back(subset_rate(rates, m));

  std::vector<const std::vector<double>*> pts;
  for (std::size_t k : hull.extreme) pts.push_back(&hull.points[k].entropies);
  const auto sol = domination_lp(pts, target);
  if (sol.status != lp::Status::Optimal) throw Error("uplink membership program did not solve");

  UplinkFit fit;
  double total = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (sol.x[j] > 1e-13) {
      fit.mixture.emplace_back(hull.extreme[j], sol.x[j]);
      total += sol.x[j];
    }
  for (auto& [k, lambda] : fit.mixture) lambda /= total;

  auto evaluate = [&] {
    fit.slacks.assign(masks.size(), 0.0);
    for (const auto& [k, lambda] : fit.mixture)
      for (std::size_t u = 0; u < masks.size(); ++u)
        fit.slacks[u] += lambda * hull.points[k].entropies[u];
    for (std::size_t u = 0; u < masks.size(); ++u) fit.slacks[u] -= target[u];
  };
  evaluate();
  fit.min_slack = *std::min_element(fit.slacks.begin(), fit.slacks.end());
  const double margin = fit.min_slack;

  if (fit.mixture.size() > hull.num_users + 1) {
    auto reduced = fit.mixture;
    fit.reduced = reduce_mixture(hull, masks, rates, margin, reduced);
    if (fit.reduced) {
      fit.mixture = std::move(reduced);
      evaluate();
    }
  }
  // The margin is a property of the hull; the slacks describe the witness.
  fit.min_slack = margin;
  return fit;
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::In: return "In";
    case Membership::Out: return "Out";
    case Membership::Boundary: return "Boundary";
  }
  return "?";
}

std::string Cut::id() const {
  if (kind == Kind::Downlink) return "downlink:" + std::to_string(index + 1);
  return "uplink:" + subset_label(index);
}

RegionSolver::RegionSolver(ChannelSpec spec, RegionOptions options)
    : spec_(std::move(spec)), options_(options) {
  require_valid(spec_);
  if (!(options_.tolerance >= 0.0) || !std::isfinite(options_.tolerance))
    throw UsageError("tolerance must be a finite non-negative number");
}

const UplinkHull& RegionSolver::hull() {
  if (!hull_) hull_ = achievable_uplink_hull(spec_, options_.hull);
  return *hull_;
}

MembershipVerdict RegionSolver::membership(const RateTuple& rates) {
  check_rates(spec_, rates);
  const auto& h = hull();
  const auto down = optimize_downlink(spec_, rates, options_.downlink);
  const auto up = fit_uplink(h, rates);

  MembershipVerdict v;
  v.downlink_slack = down.min_slack;
  v.uplink_slack = up.min_slack;
  v.min_slack = std::min(v.downlink_slack, v.uplink_slack);
  v.status = classify_margin(v.min_slack, options_.tolerance);
  v.downlink_converged = down.converged;
  v.slacks.downlink = down.slacks;
  v.slacks.uplink = up.slacks;

  // Ties are all reported. After a mixture reduction the witness slacks can
  // sit above the uplink margin, so fall back to the tightest uplink cut.
  const auto masks = strict_subsets(spec_.num_users);
  const double lowest = v.min_slack;
  for (std::size_t i = 0; i < down.slacks.size(); ++i)
    if (down.slacks[i] <= lowest + kTieWindow)
      v.binding.push_back({Cut::Kind::Downlink, static_cast<std::uint32_t>(i), down.slacks[i]});
  bool uplink_named = false;
  for (std::size_t u = 0; u < masks.size(); ++u)
    if (up.slacks[u] <= lowest + kTieWindow) {
      v.binding.push_back({Cut::Kind::Uplink, masks[u], up.slacks[u]});
      uplink_named = true;
    }
  if (!uplink_named && v.uplink_slack <= lowest + kTieWindow) {
    const auto it = std::min_element(up.slacks.begin(), up.slacks.end());
    v.binding.push_back({Cut::Kind::Uplink, masks[static_cast<std::size_t>(it - up.slacks.begin())],
                         v.uplink_slack});
  }

  if (v.status != Membership::Out) {
    InputDistribution w;
    std::vector<double> qw;
    for (const auto& [k, lambda] : up.mixture) {
      qw.push_back(lambda);
      w.user_conditionals.push_back(h.points[k].inputs);
    }
    w.q_weights = Distribution(normalized(qw));
    w.relay_input = down.relay_input;
    v.witness = std::move(w);
  }
  return v;
}

BoundaryPoint RegionSolver::boundary_trace(const RateTuple& direction) {
  if (direction.size() != spec_.num_users)
    throw UsageError("direction has " + std::to_string(direction.size()) + " entries for " +
                     std::to_string(spec_.num_users) + " users");
  double largest = 0.0;
  for (double d : direction) {
    if (!std::isfinite(d) || d < 0.0) throw UsageError("direction entries must be non-negative");
    largest = std::max(largest, d);
  }
  if (largest == 0.0) throw UsageError("direction must have a positive entry");

  const double tol = options_.tolerance;
  auto scaled = [&](double t) {
    RateTuple r(direction.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = t * direction[j];
    return r;
  };
  // Largest t whose point is In, i.e. clears every cut by more than tol.
  auto inside = [&](double t) { return membership(scaled(t)).status == Membership::In; };

  double lo = 0.0, hi = 1.0 / largest;
  for (int k = 0; inside(hi); ++k) {
    if (k > 60) throw Error("boundary search did not find an upper bracket");
    lo = hi;
    hi *= 2.0;
  }
  const double step = std::max(tol, 1e-12);
  while ((hi - lo) * largest > step) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  BoundaryPoint out;
  out.direction = direction;
  out.scale = lo;
  out.rates = scaled(lo);
  out.binding = membership(out.rates).binding;
  return out;
}

MembershipVerdict membership(const ChannelSpec& spec, const RateTuple& rates,
                             const RegionOptions& options) {
  return RegionSolver(spec, options).membership(rates);
}

BoundaryPoint boundary_trace(const ChannelSpec& spec, const RateTuple& direction,
                             const RegionOptions& options) {
  return RegionSolver(spec, options).boundary_trace(direction);
}

double CorollaryRegion::min_slack(const RateTuple& rates) const {
  return optimize_downlink(spec, rates, downlink).min_slack;
}

Membership CorollaryRegion::classify(const RateTuple& rates) const {
  return classify_margin(min_slack(rates), tolerance);
}

std::variant<CorollaryRegion, NotSpecialCase> corollary_region(const ChannelSpec& spec,
                                                               const RegionOptions& options) {
  auto report = check_special_case(spec);
  if (!report.applies()) return NotSpecialCase{std::move(report)};
  CorollaryRegion region;
  region.report = std::move(report);
  region.spec = spec;
  region.downlink = options.downlink;
  region.tolerance = options.tolerance;
  for (std::size_t i = 0; i < spec.num_users; ++i) {
    CorollaryCut cut;
    cut.user = i;
    for (std::size_t j = 0; j < spec.num_users; ++j)
      if (j != i) cut.senders.push_back(j);
    cut.capacity = channel_capacity(downlink_marginal(spec, i));
    region.cuts.push_back(std::move(cut));
  }
  return region;
}

}  // namespace mwrc
