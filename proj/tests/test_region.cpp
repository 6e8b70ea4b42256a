#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mwrc/region.hpp"

using namespace mwrc;

namespace {

double h2(double p) {
  if (p <= 0 || p >= 1) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

const double kBsc005 = 1.0 - h2(0.05);  // 0.713603...

ChannelSpec constant_uplink() {
  auto spec = make_xor_channel(0.0);
  spec.relay_output_size = 1;
  spec.uplink_table = {0, 0, 0, 0};
  return spec;
}

// Y_1 noiseless, Y_2 useless.
ChannelSpec lopsided() {
  auto spec = make_xor_channel(0.0);
  spec.downlink = MarginalDownlink{{symmetric_rows(2, 0.0), symmetric_rows(2, 0.5)}};
  return spec;
}

ChannelSpec xor3(double crossover) {
  ChannelSpec spec;
  spec.num_users = 3;
  spec.user_alphabet_sizes = {2, 2, 2};
  spec.relay_input_size = 2;
  spec.relay_output_size = 2;
  spec.user_output_sizes = {2, 2, 2};
  for (Symbol c = 0; c < 8; ++c) spec.uplink_table.push_back(((c >> 2) ^ (c >> 1) ^ c) & 1);
  const auto rows = symmetric_rows(2, crossover);
  spec.downlink = MarginalDownlink{{rows, rows, rows}};
  return spec;
}

// Ternary relay input with three different user channels.
ChannelSpec ternary_downlink() {
  ChannelSpec spec;
  spec.num_users = 2;
  spec.user_alphabet_sizes = {3, 3};
  spec.relay_input_size = 3;
  spec.relay_output_size = 3;
  spec.user_output_sizes = {3, 2};
  for (Symbol a = 0; a < 3; ++a)
    for (Symbol b = 0; b < 3; ++b) spec.uplink_table.push_back((a + b) % 3);
  const std::vector<std::vector<double>> y1{{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}};
  const std::vector<std::vector<double>> y2{{0.9, 0.1}, {0.5, 0.5}, {0.05, 0.95}};
  spec.downlink = MarginalDownlink{{y1, y2}};
  return spec;
}

// Mutual information by explicit double sum.
double mi_oracle(const std::vector<double>& px, const std::vector<std::vector<double>>& rows) {
  std::vector<double> py(rows[0].size(), 0.0);
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t y = 0; y < py.size(); ++y) py[y] += px[x] * rows[x][y];
  double s = 0;
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t y = 0; y < py.size(); ++y)
      if (px[x] * rows[x][y] > 0) s += px[x] * rows[x][y] * std::log2(rows[x][y] / py[y]);
  return s;
}

RegionOptions quick() {
  RegionOptions o;
  o.hull.sampling_budget = 64;
  o.hull.refinement_steps = 8;
  return o;
}

}  // namespace

TEST(Subsets, StrictMasksAndLabels) {
  EXPECT_EQ(strict_subsets(2), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(strict_subsets(3).size(), 6u);
  EXPECT_EQ(subset_label(5), "{1,3}");
  EXPECT_DOUBLE_EQ(subset_rate({0.1, 0.2, 0.4}, 6), 0.6000000000000001);
}

TEST(UplinkEntropy, Examples) {
  const auto x = make_xor_channel(0.0);
  const ProductDistribution uni{Distribution::uniform(2), Distribution::uniform(2)};
  auto h = uplink_entropy_vector(x, uni);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_NEAR(h[0], 1.0, 1e-12);  // U={1}: H(Y0|X2)
  EXPECT_NEAR(h[1], 1.0, 1e-12);

  const Distribution x2({0.3, 0.7});
  h = uplink_entropy_vector(x, {Distribution::point_mass(2, 0), x2});
  EXPECT_NEAR(h[0], 0.0, 1e-12);
  EXPECT_NEAR(h[1], h2(0.3), 1e-12);

  h = uplink_entropy_vector(make_pair_copy_channel(2, 0.0), uni);
  EXPECT_NEAR(h[0], 1.0, 1e-12);
  EXPECT_NEAR(h[1], 1.0, 1e-12);

  EXPECT_THROW(uplink_entropy_vector(x, {Distribution::uniform(2)}), UsageError);
  EXPECT_THROW(uplink_entropy_vector(x, {Distribution::uniform(3), Distribution::uniform(2)}), UsageError);
}

TEST(UplinkEntropy, WithinBounds) {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u(0, 1);
  const auto spec = ternary_downlink();
  for (int t = 0; t < 50; ++t) {
    ProductDistribution p;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> m{u(eng), u(eng), u(eng)};
      const double s = m[0] + m[1] + m[2];
      for (auto& v : m) v /= s;
      p.emplace_back(m);
    }
    for (double v : uplink_entropy_vector(spec, p)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, std::log2(3.0) + 1e-12);
    }
  }
}

TEST(DownlinkMi, Examples) {
  const auto u2 = Distribution::uniform(2);
  auto mi = downlink_mi_vector(make_xor_channel(0.0), u2);
  EXPECT_NEAR(mi[0], 1.0, 1e-12);
  EXPECT_NEAR(mi[1], 1.0, 1e-12);
  mi = downlink_mi_vector(make_xor_channel(0.5), u2);
  EXPECT_NEAR(mi[0], 0.0, 1e-12);
  EXPECT_NEAR(mi[1], 0.0, 1e-12);
  mi = downlink_mi_vector(make_xor_channel(0.05), u2);
  EXPECT_NEAR(mi[0], kBsc005, 1e-12);
  EXPECT_NEAR(mi[1], 0.713603, 1e-6);
}

TEST(DownlinkMi, MatchesSummationOracle) {
  const auto spec = ternary_downlink();
  const auto& users = std::get<MarginalDownlink>(spec.downlink).users;
  const std::vector<double> px{0.2, 0.5, 0.3};
  const auto mi = downlink_mi_vector(spec, Distribution(px));
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(mi[i], mi_oracle(px, users[i]), 1e-12);
}

TEST(ConstraintSlacks, Examples) {
  const auto spec = make_xor_channel(0.0);
  const auto uni = InputDistribution::uniform(spec);
  auto s = constraint_slacks(spec, {1, 1}, uni);
  for (double v : s.downlink) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : s.uplink) EXPECT_NEAR(v, 0.0, 1e-12);

  s = constraint_slacks(spec, {0, 0}, uni);
  EXPECT_EQ(s.downlink, downlink_mi_vector(spec, uni.relay_input));
  for (double v : s.uplink) EXPECT_GE(v, 0.0);

  s = constraint_slacks(spec, {1.2, 0}, uni);
  EXPECT_NEAR(s.uplink[0], -0.2, 1e-12);
}

TEST(ConstraintSlacks, AveragesOverQ) {
  const auto spec = make_xor_channel(0.0);
  InputDistribution d;
  d.q_weights = Distribution({0.25, 0.75});
  d.user_conditionals = {{Distribution::uniform(2), Distribution::uniform(2)},
                         {Distribution::point_mass(2, 0), Distribution::point_mass(2, 1)}};
  d.relay_input = Distribution::uniform(2);
  const auto s = constraint_slacks(spec, {0, 0}, d);
  EXPECT_NEAR(s.uplink[0], 0.25, 1e-12);
  EXPECT_NEAR(s.uplink[1], 0.25, 1e-12);
}

TEST(OptimizeDownlink, Examples) {
  auto r = optimize_downlink(make_xor_channel(0.0), {0.5, 0.5});
  EXPECT_NEAR(r.min_slack, 0.5, 1e-6);
  EXPECT_NEAR(r.relay_input[0], 0.5, 1e-3);

  r = optimize_downlink(make_xor_channel(0.5), {0.2, 0.4});
  EXPECT_NEAR(r.min_slack, -0.4, 1e-9);

  r = optimize_downlink(lopsided(), {0.3, 0.3});
  EXPECT_NEAR(r.min_slack, -0.3, 1e-9);
}

TEST(OptimizeDownlink, CertifiedAgainstGrid) {
  const auto spec = ternary_downlink();
  const auto& users = std::get<MarginalDownlink>(spec.downlink).users;
  for (const RateTuple& rates : {RateTuple{0.1, 0.2}, RateTuple{0.4, 0.0}, RateTuple{0.3, 0.5}}) {
    // 10^4-ish point simplex grid.
    double best = -1e9;
    const int k = 140;
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) {
        const std::vector<double> px{double(a) / k, double(b) / k, double(k - a - b) / k};
        best = std::max(best, std::min(mi_oracle(px, users[0]) - rates[1],
                                       mi_oracle(px, users[1]) - rates[0]));
      }
    const auto r = optimize_downlink(spec, rates);
    EXPECT_GE(r.min_slack, best - 1e-3);
    // The reported value is what the returned law actually achieves.
    const std::vector<double> px(r.relay_input.mass().begin(), r.relay_input.mass().end());
    EXPECT_NEAR(r.min_slack, std::min(mi_oracle(px, users[0]) - rates[1], mi_oracle(px, users[1]) - rates[0]), 1e-9);
  }
}

TEST(ChannelCapacity, BscOracle) {
  const auto rows = symmetric_rows(2, 0.11);
  std::vector<Distribution> d;
  for (const auto& r : rows) d.emplace_back(r);
  EXPECT_NEAR(channel_capacity(d), 1.0 - h2(0.11), 1e-9);
}

TEST(UplinkHull, Examples) {
  const auto hull = achievable_uplink_hull(make_xor_channel(0.0), {kDefaultSeed, 64, 8});
  bool top = false, bottom = false;
  for (const auto& p : hull.points) {
    top |= std::abs(p.entropies[0] - 1) < 1e-9 && std::abs(p.entropies[1] - 1) < 1e-9;
    bottom |= std::abs(p.entropies[0]) < 1e-9 && std::abs(p.entropies[1]) < 1e-9;
  }
  EXPECT_TRUE(top);
  EXPECT_TRUE(bottom);

  const auto flat = achievable_uplink_hull(constant_uplink(), {kDefaultSeed, 64, 8});
  for (const auto& p : flat.points)
    for (double v : p.entropies) EXPECT_NEAR(v, 0.0, 1e-12);

  const auto pc = achievable_uplink_hull(make_pair_copy_channel(2, 0.0), {kDefaultSeed, 64, 8});
  double m0 = 0, m1 = 0;
  for (const auto& p : pc.points) {
    m0 = std::max(m0, p.entropies[0]);
    m1 = std::max(m1, p.entropies[1]);
  }
  EXPECT_NEAR(m0, 1.0, 1e-9);
  EXPECT_NEAR(m1, 1.0, 1e-9);
}

TEST(UplinkHull, BudgetBelowCornerCountIsUsageError) {
  EXPECT_THROW(achievable_uplink_hull(make_xor_channel(0.0), {kDefaultSeed, 3, 8}), UsageError);
}

TEST(UplinkHull, SeedReproducible) {
  const auto a = achievable_uplink_hull(make_xor_channel(0.0), {7, 64, 8});
  const auto b = achievable_uplink_hull(make_xor_channel(0.0), {7, 64, 8});
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) EXPECT_EQ(a.points[k].entropies, b.points[k].entropies);
  EXPECT_EQ(a.extreme, b.extreme);
}

TEST(Membership, Examples) {
  RegionSolver solver(make_xor_channel(0.0), quick());
  auto v = solver.membership({0.999, 0.999});
  EXPECT_EQ(v.status, Membership::In);
  ASSERT_TRUE(v.witness.has_value());
  const auto s = constraint_slacks(solver.spec(), {0.999, 0.999}, *v.witness);
  EXPECT_GE(s.min(), -1e-6);

  v = solver.membership({1.05, 0});
  EXPECT_EQ(v.status, Membership::Out);
  EXPECT_FALSE(v.witness.has_value());
  EXPECT_LT(v.min_slack, 0.0);
  auto has = [&](const std::string& id) {
    return std::any_of(v.binding.begin(), v.binding.end(), [&](const Cut& c) { return c.id() == id; });
  };
  EXPECT_TRUE(has("uplink:{1}"));

  v = solver.membership({0, 1.05});
  EXPECT_EQ(v.status, Membership::Out);
  EXPECT_TRUE(has("downlink:1"));
  EXPECT_NEAR(v.min_slack, -0.05, 1e-6);

  v = solver.membership({1.0, 0.5});
  EXPECT_EQ(v.status, Membership::Boundary);
  EXPECT_TRUE(v.witness.has_value());
}

TEST(Membership, RejectsBadRates) {
  RegionSolver solver(make_xor_channel(0.0), quick());
  EXPECT_THROW(solver.membership({0.5}), UsageError);
  EXPECT_THROW(solver.membership({-0.1, 0.2}), UsageError);
}

TEST(Membership, MonotoneAndConvex) {
  RegionSolver solver(make_xor_channel(0.05), quick());
  std::mt19937_64 eng(21);
  std::uniform_real_distribution<double> u(0, 0.9);
  std::vector<RateTuple> inside;
  for (int t = 0; t < 40; ++t) {
    const RateTuple r{u(eng), u(eng)};
    const auto v = solver.membership(r);
    if (v.status != Membership::In) continue;
    inside.push_back(r);
    const RateTuple smaller{r[0] * u(eng) / 0.9, r[1] * u(eng) / 0.9};
    EXPECT_NE(solver.membership(smaller).status, Membership::Out);
  }
  ASSERT_GE(inside.size(), 4u);
  for (std::size_t k = 0; k + 1 < inside.size(); ++k) {
    const RateTuple mid{(inside[k][0] + inside[k + 1][0]) / 2, (inside[k][1] + inside[k + 1][1]) / 2};
    EXPECT_NE(solver.membership(mid).status, Membership::Out);
  }
}

TEST(Membership, WitnessMixtureIsSmallForThreeUsers) {
  RegionSolver solver(xor3(0.0), quick());
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0, 0.5);
  int witnessed = 0;
  for (int t = 0; t < 10; ++t) {
    const RateTuple r{u(eng), u(eng), u(eng)};
    const auto v = solver.membership(r);
    if (!v.witness) continue;
    ++witnessed;
    EXPECT_LE(v.witness->q_weights.size(), 4u);
    EXPECT_NO_THROW(validate_input_distribution(solver.spec(), *v.witness));
    EXPECT_GE(constraint_slacks(solver.spec(), r, *v.witness).min(), -1e-6);
  }
  EXPECT_GT(witnessed, 0);
}

TEST(BoundaryTrace, Examples) {
  RegionSolver solver(make_xor_channel(0.0), quick());
  auto b = solver.boundary_trace({1, 1});
  EXPECT_NEAR(b.rates[0], 1.0, 1e-5);
  EXPECT_NEAR(b.rates[1], 1.0, 1e-5);
  b = solver.boundary_trace({1, 0});
  EXPECT_NEAR(b.rates[0], 1.0, 1e-5);
  EXPECT_EQ(b.rates[1], 0.0);
  EXPECT_THROW(solver.boundary_trace({0, 0}), UsageError);

  RegionSolver flat(constant_uplink(), quick());
  b = flat.boundary_trace({0.3, 0.7});
  EXPECT_NEAR(b.rates[0], 0.0, 1e-9);
  EXPECT_NEAR(b.rates[1], 0.0, 1e-9);
}

TEST(Corollary, Examples) {
  auto c = corollary_region(make_pair_copy_channel(2, 0.0));
  ASSERT_TRUE(std::holds_alternative<CorollaryRegion>(c));
  const auto& r = std::get<CorollaryRegion>(c);
  ASSERT_EQ(r.cuts.size(), 2u);
  EXPECT_NEAR(r.cuts[0].capacity, 1.0, 1e-9);
  EXPECT_EQ(r.cuts[0].senders, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(r.cuts[1].capacity, 1.0, 1e-9);

  EXPECT_TRUE(std::holds_alternative<NotSpecialCase>(corollary_region(make_xor_channel(0.0))));

  c = corollary_region(make_pair_copy_channel(2, 0.05));
  const auto& noisy = std::get<CorollaryRegion>(c);
  EXPECT_NEAR(noisy.cuts[0].capacity, kBsc005, 1e-9);
  EXPECT_NEAR(noisy.cuts[1].capacity, 0.713603, 1e-6);
}

TEST(Corollary, AgreesWithMembershipOnSpecialCase) {
  const auto spec = make_pair_copy_channel(2, 0.05);
  const auto variant = corollary_region(spec);
  const auto& cor = std::get<CorollaryRegion>(variant);
  RegionSolver solver(spec, quick());
  std::mt19937_64 eng(33);
  std::uniform_real_distribution<double> u(0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const RateTuple r{u(eng), u(eng)};
    const auto v = solver.membership(r);
    EXPECT_EQ(v.status, cor.classify(r)) << r[0] << "," << r[1];
    EXPECT_NEAR(std::min(v.min_slack, 0.0), std::min(cor.min_slack(r), 0.0), 1e-6);
  }
}
