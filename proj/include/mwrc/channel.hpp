#pragma once

// Finite-alphabet multi-way relay channel: L users, one relay, a
// deterministic uplink y0 = f(x_1, ..., x_L) and a stochastic downlink
// p(y_1, ..., y_L | x0). Symbols are dense indices 0..size-1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mwrc/info.hpp"
#include "mwrc/random.hpp"

namespace mwrc {

// Largest number of table cells any desk-scale enumeration may touch.
inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

// Rows indexed by x0; each row is a flat law over (y_1, ..., y_L), row-major
// with y_1 varying slowest.
struct JointDownlink {
  std::vector<std::vector<double>> rows;
  friend bool operator==(const JointDownlink&, const JointDownlink&) = default;
};

// One table per user, rows indexed by x0, each row a law over Y_i. The
// users' outputs are independent given x0.
struct MarginalDownlink {
  std::vector<std::vector<std::vector<double>>> users;
  friend bool operator==(const MarginalDownlink&, const MarginalDownlink&) = default;
};

using Downlink = std::variant<JointDownlink, MarginalDownlink>;

struct ChannelSpec {
  std::size_t num_users = 0;
  std::vector<std::size_t> user_alphabet_sizes;
  std::size_t relay_input_size = 0;
  std::size_t relay_output_size = 0;
  std::vector<std::size_t> user_output_sizes;
  // Dense over X_1 x ... x X_L, row-major with user 1 varying slowest.
  std::vector<Symbol> uplink_table;
  Downlink downlink;

  std::size_t uplink_domain_size() const;
  std::size_t uplink_index(std::span<const Symbol> x) const;
  // Inverse of uplink_index.
  std::vector<Symbol> uplink_tuple(std::size_t index) const;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct ValidationIssue {
  std::string location;  // JSON-pointer style path into the channel document
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const noexcept { return issues.empty(); }
};

ValidationReport validate(const ChannelSpec& spec);
// Throws ValidationError naming the first issue.
void require_valid(const ChannelSpec& spec);

Symbol apply_uplink(const ChannelSpec& spec, std::span<const Symbol> x);

// Draws (y_1, ..., y_L) for one downlink use.
std::vector<Symbol> sample_downlink(const ChannelSpec& spec, Symbol x0, RandomStream& rng);

// p(y_i | x0) as one Distribution per x0. `user` is 0-based.
std::vector<Distribution> downlink_marginal(const ChannelSpec& spec, std::size_t user);

struct SpecialCaseReport {
  // |X_j| >= |X_0| for every user j.
  bool user_alphabets_cover_relay = false;
  // f is injective on X_1 x ... x X_L, so y0 reproduces the whole input tuple.
  bool uplink_injective = false;
  std::vector<std::string> witness;

  bool applies() const noexcept { return user_alphabets_cover_relay && uplink_injective; }
};

SpecialCaseReport check_special_case(const ChannelSpec& spec);

// Precomputed samplers for repeated downlink draws.
class DownlinkSampler {
 public:
  explicit DownlinkSampler(const ChannelSpec& spec);
  void draw(Symbol x0, RandomStream& rng, std::span<Symbol> out) const;

 private:
  std::size_t users_;
  std::vector<std::size_t> output_sizes_;
  bool joint_;
  std::vector<Sampler> joint_rows_;
  std::vector<std::vector<Sampler>> marginal_rows_;  // [user][x0]
};

// Canonical examples used by the tests and the bundled channel files.
ChannelSpec make_xor_channel(double downlink_crossover);
ChannelSpec make_pair_copy_channel(std::size_t relay_input_size, double downlink_crossover);
// Binary symmetric rows on a |X0| = |Y| alphabet: keep x0 w.p. 1-p, otherwise
// uniform over the other symbols.
std::vector<std::vector<double>> symmetric_rows(std::size_t size, double crossover);

}  // namespace mwrc
