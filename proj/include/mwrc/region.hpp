#pragma once

// Capacity region of the restricted, separated multi-way relay channel with a
// deterministic uplink. A rate tuple R is in the region iff, for some
// p(q) prod_i p(x_i|q) p(x0),
//
//   sum_{j != i} R_j     <= I(X0; Y_i)                  for every user i
//   sum_{j in U} R_j     <= H(Y0 | X_{U^c}, Q)          for every non-empty strict U
//
// The downlink cuts depend on p(x0) alone and the uplink cuts on the user
// inputs alone, so membership splits into two independent problems: a max-min
// over the relay input simplex, and a domination test against the convex hull
// of achievable uplink entropy vectors (the hull is what time sharing buys).
//
// Subsets U are bitmasks over users (bit i is user i+1) and uplink vectors are
// ordered by mask value 1 .. 2^L - 2.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mwrc/channel.hpp"
#include "mwrc/info.hpp"

namespace mwrc {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;

using RateTuple = std::vector<double>;
// One distribution per user.
using ProductDistribution = std::vector<Distribution>;

struct InputDistribution {
  Distribution q_weights;
  std::vector<ProductDistribution> user_conditionals;  // [q][user]
  Distribution relay_input;

  static InputDistribution uniform(const ChannelSpec& spec);
};

void validate_input_distribution(const ChannelSpec& spec, const InputDistribution& dist);

std::vector<std::uint32_t> strict_subsets(std::size_t num_users);
double subset_rate(const RateTuple& rates, std::uint32_t mask);
std::string subset_label(std::uint32_t mask);  // "{1,3}"

// H(Y0 | X_{U^c}) for every strict subset U, under a product input law.
std::vector<double> uplink_entropy_vector(const ChannelSpec& spec,
                                          const ProductDistribution& inputs);

// I(X0; Y_i) for every user.
std::vector<double> downlink_mi_vector(const ChannelSpec& spec, const Distribution& relay_input);

struct ConstraintSlack {
  std::vector<double> downlink;  // per user: I(X0;Y_i) - sum_{j != i} R_j
  std::vector<double> uplink;    // per strict subset: H(Y0|X_{U^c},Q) - sum_{j in U} R_j
  double min() const;
};

ConstraintSlack constraint_slacks(const ChannelSpec& spec, const RateTuple& rates,
                                  const InputDistribution& dist);

struct DownlinkOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 10'000;
};

struct DownlinkOptimum {
  Distribution relay_input;
  double min_slack = 0.0;
  std::vector<double> slacks;
  std::size_t iterations = 0;
  bool converged = false;
};

// Maximises min_i [I(X0;Y_i) - sum_{j != i} R_j] over p(x0).
DownlinkOptimum optimize_downlink(const ChannelSpec& spec, const RateTuple& rates,
                                  const DownlinkOptions& options = {});

// Blahut-Arimoto capacity in bits of a channel given as rows p(y|x).
double channel_capacity(const std::vector<Distribution>& rows, double tolerance = 1e-12,
                        std::size_t max_iterations = 100'000);

struct HullOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t sampling_budget = 256;
  std::size_t refinement_steps = 32;
};

struct UplinkPoint {
  ProductDistribution inputs;
  std::vector<double> entropies;
};

struct UplinkHull {
  std::size_t num_users = 0;
  std::vector<UplinkPoint> points;
  // Points that are not dominated by any mixture of the others. Every
  // membership decision only needs these.
  std::vector<std::size_t> extreme;
};

UplinkHull achievable_uplink_hull(const ChannelSpec& spec, const HullOptions& options = {});

struct UplinkFit {
  double min_slack = 0.0;
  std::vector<double> slacks;  // per strict subset, at the mixture below
  std::vector<std::pair<std::size_t, double>> mixture;  // hull point index, weight
  bool reduced = true;  // mixture has at most L+1 components
};

// Best mixture of hull points for the rate-sum vector of `rates`.
UplinkFit fit_uplink(const UplinkHull& hull, const RateTuple& rates);

enum class Membership { In, Out, Boundary };
const char* to_string(Membership m);

struct Cut {
  enum class Kind { Downlink, Uplink };
  Kind kind = Kind::Downlink;
  std::uint32_t index = 0;  // 0-based user for downlink, subset mask for uplink
  double slack = 0.0;

  std::string id() const;  // "downlink:1", "uplink:{1,2}"
};

struct MembershipVerdict {
  Membership status = Membership::Out;
  double min_slack = 0.0;
  double downlink_slack = 0.0;
  double uplink_slack = 0.0;
  // Present for In and Boundary.
  std::optional<InputDistribution> witness;
  // Every cut whose slack is within 1e-9 of the smallest one.
  std::vector<Cut> binding;
  ConstraintSlack slacks;
  bool downlink_converged = true;
};

struct RegionOptions {
  double tolerance = 1e-6;
  HullOptions hull;
  DownlinkOptions downlink;
};

struct BoundaryPoint {
  RateTuple direction;
  RateTuple rates;
  double scale = 0.0;
  std::vector<Cut> binding;
};

// Caches the uplink hull so repeated queries against one channel are cheap.
class RegionSolver {
 public:
  RegionSolver(ChannelSpec spec, RegionOptions options = {});

  const ChannelSpec& spec() const noexcept { return spec_; }
  const RegionOptions& options() const noexcept { return options_; }
  const UplinkHull& hull();

  MembershipVerdict membership(const RateTuple& rates);
  BoundaryPoint boundary_trace(const RateTuple& direction);

 private:
  ChannelSpec spec_;
  RegionOptions options_;
  std::optional<UplinkHull> hull_;
};

MembershipVerdict membership(const ChannelSpec& spec, const RateTuple& rates,
                             const RegionOptions& options = {});
BoundaryPoint boundary_trace(const ChannelSpec& spec, const RateTuple& direction,
                             const RegionOptions& options = {});

struct CorollaryCut {
  std::size_t user = 0;             // 0-based receiver i
  std::vector<std::size_t> senders;  // every j != i
  double capacity = 0.0;            // max over p(x0) of I(X0;Y_i)
};

struct CorollaryRegion {
  SpecialCaseReport report;
  ChannelSpec spec;
  std::vector<CorollaryCut> cuts;
  DownlinkOptions downlink;
  double tolerance = 1e-6;

  // All L downlink cuts must hold for one common p(x0), so the per-cut
  // capacities alone only give an outer bound.
  double min_slack(const RateTuple& rates) const;
  Membership classify(const RateTuple& rates) const;
};

struct NotSpecialCase {
  SpecialCaseReport report;
};

std::variant<CorollaryRegion, NotSpecialCase> corollary_region(const ChannelSpec& spec,
                                                               const RegionOptions& options = {});

}  // namespace mwrc
