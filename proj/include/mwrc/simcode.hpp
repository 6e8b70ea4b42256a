#pragma once

// Monte Carlo run of the two-phase random-coding scheme: users send random
// codewords, the relay maps the received sequence to an index and broadcasts
// that index's codeword, and every user decodes in two steps (relay index,
// then the other users' messages).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mwrc/channel.hpp"
#include "mwrc/info.hpp"
#include "mwrc/random.hpp"
#include "mwrc/region.hpp"

namespace mwrc {

struct SimConfig {
  ChannelSpec spec;
  InputDistribution dist;
  RateTuple rates;
  std::size_t block_length = 8;
  double epsilon = 0.2;
  std::size_t trials = 1000;
  std::uint64_t seed = kDefaultSeed;
  // B blocks carry B-1 messages; the default simulates one uplink/downlink pair.
  std::size_t blocks = 2;
  Typicality typicality = Typicality::Robust;
  bool share_codebook = false;
  bool distinct_codewords = false;
  std::size_t threads = 1;
  std::uint64_t enumeration_cap = kEnumerationCap;
};

// M_i = round(2^{n R_i}), at least 1.
std::vector<std::size_t> message_counts(const RateTuple& rates, std::size_t block_length);
std::vector<double> realized_rates(const std::vector<std::size_t>& counts, std::size_t block_length);

// True when every user that has something to decode faces an empty step-1
// typical set (robust windows with no admissible integer count). Each such
// user then misses the relay index in every trial whatever the codebooks, so
// no enumeration is needed and the enumeration cap does not apply.
bool step1_always_misses(const SimConfig& config);

// Throws UsageError or CapacityError.
void validate_config(const SimConfig& config);

// Bijection between induced relay sequences and indices 0..V-1, numbered in
// first-encounter order.
class RelayMap {
 public:
  std::size_t size() const noexcept { return inverse_.size(); }
  std::optional<std::size_t> find(const Sequence& y0) const;
  // Returns the existing index or appends a new one.
  std::size_t insert(const Sequence& y0);
  const Sequence& sequence(std::size_t index) const { return inverse_.at(index); }
  const std::map<Sequence, std::size_t>& forward() const noexcept { return forward_; }

 private:
  std::map<Sequence, std::size_t> forward_;
  std::vector<Sequence> inverse_;
};

struct Codebook {
  std::size_t block_length = 0;
  Sequence q_sequence;
  std::vector<std::vector<Sequence>> user_codewords;  // [user][message]
  // Enumerated mode: one codeword per relay index.
  std::vector<Sequence> relay_codewords;
  // Keyed mode, used when the message-tuple space is too large to enumerate:
  // the codeword of a relay sequence is a pseudorandom function of it, drawn
  // i.i.d. from p(x0) and independent of everything else in the trial.
  bool keyed = false;
  std::uint64_t relay_key = 0;
  std::vector<double> relay_law;
  Sampler relay_sampler;

  Sequence relay_codeword(std::size_t index, const RelayMap& map) const;
};

struct CodebookSet {
  Codebook codebook;
  RelayMap relay_map;
};

// Enumerates every message tuple when prod M_i * n fits the enumeration cap,
// otherwise returns a keyed codebook with an empty relay map that fills in as
// sequences are met.
CodebookSet generate_codebooks(const SimConfig& config, RandomStream& rng);

// Uplink output for one message tuple.
Sequence induced_sequence(const ChannelSpec& spec, const Codebook& codebook,
                          const std::vector<std::size_t>& messages);

struct Candidate {
  std::vector<std::size_t> messages;
  std::size_t relay_index = 0;
};

// Every message tuple with w_i = a_i and the relay index it induces.
std::vector<Candidate> enumerate_candidates(const ChannelSpec& spec, const Codebook& codebook,
                                            RelayMap& map, std::size_t user, std::size_t own);

// D_i(a_i): sorted distinct relay indices.
std::vector<std::size_t> candidate_indices(const ChannelSpec& spec, const Codebook& codebook,
                                           RelayMap& map, std::size_t user, std::size_t own);

enum class DecodeFailure { None, Miss, Ambiguous };

struct Step1Result {
  std::optional<std::size_t> index;
  std::vector<std::size_t> accepted;
  DecodeFailure failure = DecodeFailure::None;
};

struct Step2Result {
  std::optional<std::vector<std::size_t>> messages;
  std::vector<std::size_t> accepted;  // positions in the candidate list
  DecodeFailure failure = DecodeFailure::None;
};

// Reference laws for both decoding steps.
class DecoderLaws {
 public:
  DecoderLaws(const ChannelSpec& spec, const InputDistribution& dist, std::size_t block_length,
              double epsilon, Typicality flavor);

  // (x0, y_i) under p(x0) p(y_i | x0).
  bool step1_typical(std::size_t user, const Sequence& x0, const Sequence& yi) const;
  // (q, x_1, ..., x_L) under p(q) prod p(x_j | q).
  bool step2_typical(const ChannelSpec& spec, const Codebook& codebook,
                     const std::vector<std::size_t>& messages) const;

 private:
  std::vector<std::size_t> output_sizes_;
  std::size_t relay_input_size_;
  std::size_t domain_;
  std::vector<TypicalSet> step1_;
  std::optional<TypicalSet> step2_;
};

Step1Result decode_step1(const DecoderLaws& laws, std::size_t user, const Sequence& yi,
                         const std::vector<std::size_t>& candidates, const Codebook& codebook,
                         const RelayMap& map);

// Searches the candidates that induce relay sequence `index` exactly.
Step2Result decode_step2(const DecoderLaws& laws, const ChannelSpec& spec,
                         const Codebook& codebook, const std::vector<Candidate>& candidates,
                         std::size_t index);

struct UserEvents {
  bool e1 = false;  // step 1: true index not typical
  bool e2 = false;  // step 1: a wrong index typical
  bool e0 = false;  // step 2: true tuple not typical
  bool eu = false;  // step 2: a wrong tuple typical
  bool error = false;  // decoded messages differ from the truth
};

struct SimOutcome {
  std::vector<UserEvents> users;

  bool error() const;
  bool e1() const;
  bool e2() const;
  bool e0() const;
  bool eu() const;
  // error() == e1() || e2() || e0() || eu() per user.
  bool decomposition_holds() const;
};

class Simulator {
 public:
  explicit Simulator(SimConfig config);

  const SimConfig& config() const noexcept { return config_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  bool enumerated() const noexcept { return enumerated_; }

  SimOutcome run_trial(std::uint64_t trial) const;
  SimOutcome run_trial(std::uint64_t trial, const CodebookSet& shared) const;
  std::vector<SimOutcome> run_all() const;

 private:
  void run_block(const Codebook& codebook, RelayMap& map, RandomStream& rng,
                 SimOutcome& out) const;

  SimConfig config_;
  std::vector<std::size_t> counts_;
  bool enumerated_ = true;
  bool always_miss_ = false;
  DecoderLaws laws_;
  DownlinkSampler downlink_;
};

SimOutcome run_trial(const SimConfig& config, std::uint64_t trial);

struct ExperimentRow {
  std::size_t block_length = 0;
  RateTuple rates;
  std::vector<std::size_t> counts;
  std::vector<double> realized;
  double e1 = 0.0, e2 = 0.0, e0 = 0.0, eu = 0.0;
  double overall = 0.0;
  double half_width = 0.0;  // 95% normal approximation
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool enumerated = true;
  std::size_t decomposition_violations = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  bool strictly_decreasing = false;
  bool non_increasing = false;
};

ExperimentResult run_experiment(const SimConfig& base, const std::vector<std::size_t>& block_lengths);

}  // namespace mwrc
