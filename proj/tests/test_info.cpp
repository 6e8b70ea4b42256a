#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mwrc/info.hpp"
#include "mwrc/random.hpp"

using namespace mwrc;

namespace {

// Independent oracle: plain summation, no library code.
double h_sum(std::initializer_list<double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x) / std::log(2.0);
  return h;
}

std::vector<double> random_simplex(std::mt19937_64& eng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double s = 0;
  for (auto& x : v) s += (x = e(eng));
  for (auto& x : v) x /= s;
  return v;
}

JointTable random_joint(std::mt19937_64& eng, std::vector<std::size_t> sizes) {
  std::size_t cells = 1;
  for (auto s : sizes) cells *= s;
  return JointTable(sizes, random_simplex(eng, cells));
}

}  // namespace

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(Distribution({0.5, 0.5})), 1.0, 1e-12);
  EXPECT_NEAR(entropy(Distribution({1.0, 0.0})), 0.0, 1e-12);
  EXPECT_NEAR(entropy(Distribution({0.25, 0.25, 0.25, 0.25})), 2.0, 1e-12);
}

TEST(Entropy, RejectsInvalidMass) {
  EXPECT_THROW(Distribution({0.6, 0.6}), ValidationError);
  EXPECT_THROW(Distribution({-0.1, 1.1}), ValidationError);
  const std::vector<double> bad{0.5, 0.4};
  EXPECT_THROW(entropy(std::span<const double>(bad)), ValidationError);
}

TEST(Entropy, WithinBounds) {
  std::mt19937_64 eng(1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 1 + t % 6;
    const Distribution p(random_simplex(eng, k));
    const double h = entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(k)) + 1e-12);
  }
}

TEST(Entropy, Concave) {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_simplex(eng, 4), q = random_simplex(eng, 4);
    const double lam = u(eng);
    std::vector<double> mix(4);
    for (int k = 0; k < 4; ++k) mix[k] = lam * p[k] + (1 - lam) * q[k];
    EXPECT_GE(entropy(Distribution(mix)) + 1e-12,
              lam * entropy(Distribution(p)) + (1 - lam) * entropy(Distribution(q)));
  }
}

TEST(ConditionalEntropy, Examples) {
  const JointTable indep({2, 2}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(conditional_entropy(indep, {0}, {1}), 1.0, 1e-12);
  const JointTable equal({2, 2}, {0.5, 0.0, 0.0, 0.5});
  EXPECT_NEAR(conditional_entropy(equal, {0}, {1}), 0.0, 1e-12);
  const double third = 1.0 / 3.0;
  const JointTable three({2, 2}, {third, third, third, 0.0});
  // H(A,B) - H(B) by direct summation: B=0 has mass 2/3 split evenly over A.
  const double oracle = h_sum({third, third, third}) - h_sum({2 * third, third});
  EXPECT_NEAR(conditional_entropy(three, {0}, {1}), oracle, 1e-12);
  EXPECT_NEAR(conditional_entropy(three, {0}, {1}), 2.0 / 3.0, 1e-9);
}

TEST(ConditionalEntropy, OverlapIsUsageError) {
  const JointTable j({2, 2}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW(conditional_entropy(j, {0}, {0}), UsageError);
  EXPECT_THROW(mutual_information(j, {0, 1}, {1}), UsageError);
}

TEST(ConditionalEntropy, ConditioningReducesAndChainRule) {
  std::mt19937_64 eng(3);
  for (int t = 0; t < 100; ++t) {
    const auto j = random_joint(eng, {3, 2, 2});
    EXPECT_LE(conditional_entropy(j, {0}, {1, 2}), conditional_entropy(j, {0}, {1}) + 1e-12);
    EXPECT_LE(conditional_entropy(j, {0}, {1}), joint_entropy(j, AxisSet{0}) + 1e-12);
    const double hab = joint_entropy(j, AxisSet{0, 1});
    EXPECT_NEAR(hab, joint_entropy(j, AxisSet{0}) + conditional_entropy(j, {1}, {0}), 1e-9);
  }
}

TEST(MutualInformation, Examples) {
  const JointTable indep({2, 2}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(mutual_information(indep, {0}, {1}), 0.0, 1e-12);
  const JointTable equal({2, 2}, {0.5, 0.0, 0.0, 0.5});
  EXPECT_NEAR(mutual_information(equal, {0}, {1}), 1.0, 1e-12);
  const double p = 0.11;
  const JointTable bsc({2, 2}, {0.5 * (1 - p), 0.5 * p, 0.5 * p, 0.5 * (1 - p)});
  const double oracle = 1.0 - h_sum({p, 1 - p});
  EXPECT_NEAR(mutual_information(bsc, {0}, {1}), oracle, 1e-12);
  EXPECT_NEAR(mutual_information(bsc, {0}, {1}), 0.500084, 1e-6);
}

TEST(MutualInformation, Symmetric) {
  std::mt19937_64 eng(4);
  for (int t = 0; t < 100; ++t) {
    const auto j = random_joint(eng, {3, 3});
    const double ab = mutual_information(j, {0}, {1});
    EXPECT_NEAR(ab, mutual_information(j, {1}, {0}), 1e-9);
    EXPECT_GE(ab, 0.0);
  }
}

TEST(EmpiricalType, Examples) {
  EXPECT_EQ(empirical_type(std::vector<Symbol>{0, 1, 0, 1}, 2).mass()[0], 0.5);
  const auto t2 = empirical_type(std::vector<Symbol>{2, 2, 2}, 3);
  EXPECT_EQ(std::vector<double>(t2.mass().begin(), t2.mass().end()), (std::vector<double>{0, 0, 1}));
  const auto t3 = empirical_type(std::vector<Symbol>{0, 0, 1, 2}, 3);
  EXPECT_EQ(std::vector<double>(t3.mass().begin(), t3.mass().end()), (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_THROW(empirical_type(std::vector<Symbol>{0, 3}, 3), ValidationError);
}

TEST(RobustTypicality, Examples) {
  const JointTable uni({2, 2}, {0.25, 0.25, 0.25, 0.25});
  // Exactly at the reference type.
  const std::vector<Sequence> exact{{0, 0, 1, 1}, {0, 1, 0, 1}};
  EXPECT_TRUE(is_robust_typical(exact, uni, 0.01));

  const JointTable diag({2, 2}, {0.5, 0.0, 0.0, 0.5});
  const std::vector<Sequence> off{{0, 1, 0, 1}, {0, 1, 1, 1}};
  EXPECT_FALSE(is_robust_typical(off, diag, 10.0));

  // 20 symbols with joint type [0.3, 0.2, 0.25, 0.25].
  Sequence a, b;
  auto push = [&](Symbol x, Symbol y, int k) {
    for (int i = 0; i < k; ++i) { a.push_back(x); b.push_back(y); }
  };
  push(0, 0, 6);
  push(0, 1, 4);
  push(1, 0, 5);
  push(1, 1, 5);
  const std::vector<Sequence> seqs{a, b};
  EXPECT_TRUE(is_robust_typical(seqs, uni, 0.25));
  EXPECT_FALSE(is_robust_typical(seqs, uni, 0.1));
}

TEST(RobustTypicality, LengthMismatchIsUsageError) {
  const JointTable uni({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const std::vector<Sequence> seqs{{0, 1}, {0}};
  EXPECT_THROW(is_robust_typical(seqs, uni, 0.1), UsageError);
}

TEST(RobustTypicality, PassRateGrowsWithLength) {
  const JointTable ref({2, 2}, {0.4, 0.1, 0.2, 0.3});
  const Sampler sampler(ref.mass());
  RandomStream rng(7);
  auto pass_rate = [&](std::size_t n) {
    int pass = 0;
    for (int t = 0; t < 400; ++t) {
      Sequence a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Symbol c = sampler.draw(rng);
        a[i] = c / 2;
        b[i] = c % 2;
      }
      const std::vector<Sequence> seqs{a, b};
      pass += is_robust_typical(seqs, ref, 0.1);
    }
    return pass / 400.0;
  };
  const double r100 = pass_rate(100), r1000 = pass_rate(1000);
  EXPECT_LT(r100, r1000);
  EXPECT_GT(r1000, 0.5);
}

TEST(WeakTypicality, RejectsZeroMassAndAcceptsReferenceType) {
  const JointTable diag({2, 2}, {0.5, 0.0, 0.0, 0.5});
  const std::vector<Sequence> good{{0, 1, 0, 1}, {0, 1, 0, 1}};
  const std::vector<Sequence> bad{{0, 1, 0, 1}, {0, 1, 1, 1}};
  EXPECT_TRUE(is_weakly_typical(good, diag, 0.01));
  EXPECT_FALSE(is_weakly_typical(bad, diag, 100.0));
}

TEST(JointTable, MarginalAndProduct) {
  const Distribution a({0.2, 0.8}), b({0.5, 0.25, 0.25});
  const std::vector<Distribution> f{a, b};
  const auto j = JointTable::product(f);
  const std::vector<std::size_t> axis1{1};
  const auto m = j.marginal(axis1);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(m.mass()[k], b[k], 1e-15);
  EXPECT_NEAR(mutual_information(j, {0}, {1}), 0.0, 1e-12);
}
