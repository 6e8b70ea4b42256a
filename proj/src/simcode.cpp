#include "mwrc/simcode.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

namespace mwrc {

namespace {

constexpr std::uint64_t kCodebookTag = 0xc0deb00cULL;
constexpr std::size_t kMaxRejections = 1000;

double product_of(const std::vector<std::size_t>& v, std::size_t skip = SIZE_MAX) {
  double p = 1.0;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (j != skip) p *= static_cast<double>(v[j]);
  return p;
}

std::uint64_t sequence_hash(const Sequence& s) {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ s.size();
  for (Symbol x : s) h = mix64(h ^ (static_cast<std::uint64_t>(x) + 0x9e37ULL));
  return h;
}

// Odometer over message tuples with one coordinate pinned.
template <class F>
void for_each_tuple(const std::vector<std::size_t>& counts, std::size_t pinned, std::size_t value,
                    F&& visit) {
  std::vector<std::size_t> w(counts.size(), 0);
  if (pinned < counts.size()) w[pinned] = value;
  while (true) {
    visit(w);
    std::size_t j = counts.size();
    while (j-- > 0) {
      if (j == pinned) continue;
      if (++w[j] < counts[j]) break;
      w[j] = 0;
    }
    if (j == SIZE_MAX) return;
  }
}

std::vector<Sequence> draw_codewords(std::size_t count, std::size_t n, bool distinct,
                                     const std::function<Sequence()>& draw) {
  std::vector<Sequence> out;
  out.reserve(count);
  std::map<Sequence, bool> seen;
  for (std::size_t k = 0; k < count; ++k) {
    Sequence s = draw();
    if (distinct) {
      std::size_t attempts = 0;
      while (seen.count(s)) {
        if (++attempts > kMaxRejections * std::max<std::size_t>(count, 1))
          throw UsageError("cannot draw " + std::to_string(count) +
                           " distinct codewords of length " + std::to_string(n));
        s = draw();
      }
      seen.emplace(s, true);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t support_size(std::span<const double> mass) {
  return static_cast<std::size_t>(std::count_if(mass.begin(), mass.end(), [](double p) { return p > 0.0; }));
}

}  // namespace

std::vector<std::size_t> message_counts(const RateTuple& rates, std::size_t block_length) {
  if (block_length == 0) throw UsageError("block length must be positive");
  std::vector<std::size_t> counts;
  for (double r : rates) {
    if (!std::isfinite(r) || r < 0.0) throw UsageError("rates must be finite and non-negative");
    const double bits = r * static_cast<double>(block_length);
    if (bits > 60.0)
      throw CapacityError("2^(n R) = 2^" + std::to_string(bits) + " messages cannot be enumerated");
    counts.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::exp2(bits)))));
  }
  return counts;
}

std::vector<double> realized_rates(const std::vector<std::size_t>& counts, std::size_t block_length) {
  std::vector<double> out;
  for (std::size_t m : counts)
    out.push_back(std::log2(static_cast<double>(m)) / static_cast<double>(block_length));
  return out;
}

bool step1_always_misses(const SimConfig& config) {
  const auto counts = message_counts(config.rates, config.block_length);
  bool any = false;
  for (std::size_t i = 0; i < config.spec.num_users; ++i) {
    if (product_of(counts, i) <= 1.0) continue;
    any = true;
    const TypicalSet set(JointTable::from_conditional(config.dist.relay_input,
                                                      downlink_marginal(config.spec, i)),
                         config.block_length, config.epsilon, config.typicality);
    if (!set.provably_empty()) return false;
  }
  return any;
}

void validate_config(const SimConfig& config) {
  require_valid(config.spec);
  validate_input_distribution(config.spec, config.dist);
  if (config.rates.size() != config.spec.num_users)
    throw UsageError("rate tuple has " + std::to_string(config.rates.size()) + " entries for " +
                     std::to_string(config.spec.num_users) + " users");
  if (config.block_length == 0) throw UsageError("block length must be positive");
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon))
    throw UsageError("epsilon must be a positive number");
  if (config.trials == 0) throw UsageError("trial count must be positive");
  if (config.blocks < 2) throw UsageError("at least two blocks are needed to carry a message");
  if (config.threads == 0) throw UsageError("thread count must be positive");

  const auto counts = message_counts(config.rates, config.block_length);
  if (step1_always_misses(config)) return;
  const double n = static_cast<double>(config.block_length);
  const double cap = static_cast<double>(config.enumeration_cap);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double others = product_of(counts, i) * n;
    if (others > cap)
      throw CapacityError("decoding user " + std::to_string(i + 1) + " enumerates prod_{j != " +
                          std::to_string(i + 1) + "} M_j * n = " + std::to_string(others) +
                          " cells, above the cap of " + std::to_string(config.enumeration_cap));
  }
  const bool enumerated = product_of(counts) * n <= cap;
  if (config.distinct_codewords && !enumerated)
    throw UsageError("distinct relay codewords need an enumerable message-tuple space (prod M_i * n = " +
                     std::to_string(product_of(counts) * n) + ")");
}

std::optional<std::size_t> RelayMap::find(const Sequence& y0) const {
  const auto it = forward_.find(y0);
  if (it == forward_.end()) return std::nullopt;
  return it->second;
}

std::size_t RelayMap::insert(const Sequence& y0) {
  const auto [it, fresh] = forward_.try_emplace(y0, inverse_.size());
  if (fresh) inverse_.push_back(y0);
  return it->second;
}

Sequence Codebook::relay_codeword(std::size_t index, const RelayMap& map) const {
  if (!keyed) return relay_codewords.at(index);
  const Sequence& y0 = map.sequence(index);
  const std::uint64_t h = mix64(relay_key ^ sequence_hash(y0));
  Sequence x(block_length);
  for (std::size_t t = 0; t < block_length; ++t)
    x[t] = relay_sampler.draw(unit_interval(mix64(h + 0x9e3779b97f4a7c15ULL * (t + 1))));
  return x;
}

Sequence induced_sequence(const ChannelSpec& spec, const Codebook& codebook,
                          const std::vector<std::size_t>& messages) {
  const std::size_t n = codebook.block_length, L = spec.num_users;
  Sequence y0(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < L; ++j)
      idx = idx * spec.user_alphabet_sizes[j] + codebook.user_codewords[j][messages[j]][t];
    y0[t] = spec.uplink_table[idx];
  }
  return y0;
}

CodebookSet generate_codebooks(const SimConfig& config, RandomStream& rng) {
  validate_config(config);
  const auto& spec = config.spec;
  const std::size_t n = config.block_length, L = spec.num_users;
  const auto counts = message_counts(config.rates, n);
  const double stored = std::accumulate(counts.begin(), counts.end(), 0.0) * static_cast<double>(n);
  if (stored > static_cast<double>(config.enumeration_cap))
    throw CapacityError("user codebooks hold sum_i M_i * n = " + std::to_string(stored) +
                        " symbols, above the cap of " + std::to_string(config.enumeration_cap));

  CodebookSet set;
  Codebook& cb = set.codebook;
  cb.block_length = n;
  const Sampler q_sampler(config.dist.q_weights);
  cb.q_sequence.resize(n);
  for (auto& q : cb.q_sequence) q = q_sampler.draw(rng);

  for (std::size_t i = 0; i < L; ++i) {
    std::vector<Sampler> by_q;
    for (const auto& row : config.dist.user_conditionals) by_q.emplace_back(row[i]);
    if (config.distinct_codewords) {
      double room = 1.0;
      for (std::size_t t = 0; t < n; ++t)
        room *= static_cast<double>(support_size(config.dist.user_conditionals[cb.q_sequence[t]][i].mass()));
      if (room < static_cast<double>(counts[i]))
        throw UsageError("user " + std::to_string(i + 1) + " needs " + std::to_string(counts[i]) +
                         " distinct codewords but only " + std::to_string(room) + " are possible");
    }
    cb.user_codewords.push_back(draw_codewords(counts[i], n, config.distinct_codewords, [&] {
      Sequence s(n);
      for (std::size_t t = 0; t < n; ++t) s[t] = by_q[cb.q_sequence[t]].draw(rng);
      return s;
    }));
  }

  cb.relay_law.assign(config.dist.relay_input.mass().begin(), config.dist.relay_input.mass().end());
  cb.relay_sampler.reset(cb.relay_law);
  const double n_d = static_cast<double>(n);
  if (product_of(counts) * n_d > static_cast<double>(config.enumeration_cap)) {
    cb.keyed = true;
    cb.relay_key = rng.bits();
    return set;
  }

  for_each_tuple(counts, SIZE_MAX, 0, [&](const std::vector<std::size_t>& w) {
    set.relay_map.insert(induced_sequence(spec, cb, w));
  });
  const std::size_t v = set.relay_map.size();
  if (config.distinct_codewords &&
      std::pow(static_cast<double>(support_size(cb.relay_law)), n_d) < static_cast<double>(v))
    throw UsageError("relay needs " + std::to_string(v) + " distinct codewords of length " +
                     std::to_string(n));
  const Sampler relay(cb.relay_law);
  cb.relay_codewords = draw_codewords(v, n, config.distinct_codewords, [&] {
    Sequence s(n);
    for (auto& x : s) x = relay.draw(rng);
    return s;
  });
  return set;
}

std::vector<Candidate> enumerate_candidates(const ChannelSpec& spec, const Codebook& codebook,
                                            RelayMap& map, std::size_t user, std::size_t own) {
  std::vector<std::size_t> counts;
  for (const auto& words : codebook.user_codewords) counts.push_back(words.size());
  if (user >= counts.size()) throw UsageError("user index out of range");
  if (own >= counts[user]) throw UsageError("own message index out of range");
  std::vector<Candidate> out;
  for_each_tuple(counts, user, own, [&](const std::vector<std::size_t>& w) {
    const Sequence y0 = induced_sequence(spec, codebook, w);
    std::size_t index;
    if (codebook.keyed) {
      index = map.insert(y0);
    } else {
      const auto found = map.find(y0);
      if (!found) throw Error("relay map is missing an induced sequence");
      index = *found;
    }
    out.push_back({w, index});
  });
  return out;
}

std::vector<std::size_t> candidate_indices(const ChannelSpec& spec, const Codebook& codebook,
                                           RelayMap& map, std::size_t user, std::size_t own) {
  std::vector<std::size_t> idx;
  for (const auto& c : enumerate_candidates(spec, codebook, map, user, own))
    idx.push_back(c.relay_index);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

DecoderLaws::DecoderLaws(const ChannelSpec& spec, const InputDistribution& dist,
                         std::size_t block_length, double epsilon, Typicality flavor)
    : output_sizes_(spec.user_output_sizes),
      relay_input_size_(spec.relay_input_size),
      domain_(spec.uplink_domain_size()) {
  for (std::size_t i = 0; i < spec.num_users; ++i) {
    const auto rows = downlink_marginal(spec, i);
    step1_.emplace_back(JointTable::from_conditional(dist.relay_input, rows), block_length,
                        epsilon, flavor);
  }
  std::vector<double> mass;
  for (std::size_t q = 0; q < dist.q_weights.size(); ++q) {
    const auto table = JointTable::product(dist.user_conditionals[q]);
    for (double m : table.mass()) mass.push_back(dist.q_weights[q] * m);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  std::vector<std::size_t> axes{dist.q_weights.size()};
  axes.insert(axes.end(), spec.user_alphabet_sizes.begin(), spec.user_alphabet_sizes.end());
  step2_.emplace(JointTable(std::move(axes), std::move(mass)), block_length, epsilon, flavor);
}

bool DecoderLaws::step1_typical(std::size_t user, const Sequence& x0, const Sequence& yi) const {
  const std::size_t ny = output_sizes_[user];
  std::vector<std::uint32_t> counts(relay_input_size_ * ny, 0);
  for (std::size_t t = 0; t < x0.size(); ++t) ++counts[x0[t] * ny + yi[t]];
  return step1_[user].accepts(counts);
}

bool DecoderLaws::step2_typical(const ChannelSpec& spec, const Codebook& codebook,
                                const std::vector<std::size_t>& messages) const {
  std::vector<std::uint32_t> counts(step2_->cell_count(), 0);
  for (std::size_t t = 0; t < codebook.block_length; ++t) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < spec.num_users; ++j)
      idx = idx * spec.user_alphabet_sizes[j] + codebook.user_codewords[j][messages[j]][t];
    ++counts[codebook.q_sequence[t] * domain_ + idx];
  }
  return step2_->accepts(counts);
}

Step1Result decode_step1(const DecoderLaws& laws, std::size_t user, const Sequence& yi,
                         const std::vector<std::size_t>& candidates, const Codebook& codebook,
                         const RelayMap& map) {
  Step1Result r;
  for (std::size_t v : candidates)
    if (laws.step1_typical(user, codebook.relay_codeword(v, map), yi)) r.accepted.push_back(v);
  if (r.accepted.size() == 1) {
    r.index = r.accepted.front();
  } else {
    r.failure = r.accepted.empty() ? DecodeFailure::Miss : DecodeFailure::Ambiguous;
  }
  return r;
}

Step2Result decode_step2(const DecoderLaws& laws, const ChannelSpec& spec,
                         const Codebook& codebook, const std::vector<Candidate>& candidates,
                         std::size_t index) {
  Step2Result r;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].relay_index != index) continue;
    if (laws.step2_typical(spec, codebook, candidates[k].messages)) r.accepted.push_back(k);
  }
  if (r.accepted.size() == 1) {
    r.messages = candidates[r.accepted.front()].messages;
  } else {
    r.failure = r.accepted.empty() ? DecodeFailure::Miss : DecodeFailure::Ambiguous;
  }
  return r;
}

bool SimOutcome::error() const {
  return std::any_of(users.begin(), users.end(), [](const UserEvents& u) { return u.error; });
}
bool SimOutcome::e1() const {
  return std::any_of(users.begin(), users.end(), [](const UserEvents& u) { return u.e1; });
}
bool SimOutcome::e2() const {
  return std::any_of(users.begin(), users.end(), [](const UserEvents& u) { return u.e2; });
}
bool SimOutcome::e0() const {
  return std::any_of(users.begin(), users.end(), [](const UserEvents& u) { return u.e0; });
}
bool SimOutcome::eu() const {
  return std::any_of(users.begin(), users.end(), [](const UserEvents& u) { return u.eu; });
}
bool SimOutcome::decomposition_holds() const {
  return std::all_of(users.begin(), users.end(), [](const UserEvents& u) {
    return u.error == (u.e1 || u.e2 || u.e0 || u.eu);
  });
}

Simulator::Simulator(SimConfig config)
    : config_((validate_config(config), std::move(config))),
      counts_(message_counts(config_.rates, config_.block_length)),
      laws_(config_.spec, config_.dist, config_.block_length, config_.epsilon, config_.typicality),
      downlink_(config_.spec) {
  enumerated_ = product_of(counts_) * static_cast<double>(config_.block_length) <=
                static_cast<double>(config_.enumeration_cap);
  always_miss_ = step1_always_misses(config_);
}

void Simulator::run_block(const Codebook& codebook, RelayMap& map, RandomStream& rng,
                          SimOutcome& out) const {
  const auto& spec = config_.spec;
  const std::size_t n = config_.block_length, L = spec.num_users;
  std::vector<std::size_t> w(L);
  for (std::size_t i = 0; i < L; ++i) w[i] = rng.below(counts_[i]);

  // Uplink, relay mapping and downlink.
  const Sequence y0 = induced_sequence(spec, codebook, w);
  const std::size_t v = codebook.keyed ? map.insert(y0) : map.find(y0).value();
  const Sequence x0 = codebook.relay_codeword(v, map);
  std::vector<Sequence> y(L, Sequence(n));
  std::vector<Symbol> sym(L);
  for (std::size_t t = 0; t < n; ++t) {
    downlink_.draw(x0[t], rng, sym);
    for (std::size_t i = 0; i < L; ++i) y[i][t] = sym[i];
  }

  for (std::size_t i = 0; i < L; ++i) {
    UserEvents ev;
    const auto candidates = enumerate_candidates(spec, codebook, map, i, w[i]);
    // Only one tuple is consistent with the own message: nothing to decode.
    if (candidates.size() == 1) continue;
    std::vector<std::size_t> d;
    for (const auto& c : candidates) d.push_back(c.relay_index);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());

    const auto s1 = decode_step1(laws_, i, y[i], d, codebook, map);
    ev.e1 = std::find(s1.accepted.begin(), s1.accepted.end(), v) == s1.accepted.end();
    ev.e2 = std::any_of(s1.accepted.begin(), s1.accepted.end(), [&](std::size_t a) { return a != v; });

    std::optional<std::vector<std::size_t>> decoded;
    if (s1.index) {
      const auto s2 = decode_step2(laws_, spec, codebook, candidates, *s1.index);
      decoded = s2.messages;
      if (*s1.index == v) {
        bool truth_seen = false;
        for (std::size_t k : s2.accepted) {
          if (candidates[k].messages == w) truth_seen = true;
          else ev.eu = true;
        }
        ev.e0 = !truth_seen;
      }
    }
    ev.error = !decoded || *decoded != w;
    auto& acc = out.users[i];
    acc.e1 |= ev.e1;
    acc.e2 |= ev.e2;
    acc.e0 |= ev.e0;
    acc.eu |= ev.eu;
    acc.error |= ev.error;
  }
}

SimOutcome Simulator::run_trial(std::uint64_t trial) const {
  if (always_miss_) {
    SimOutcome out;
    out.users.resize(config_.spec.num_users);
    for (std::size_t i = 0; i < out.users.size(); ++i)
      if (product_of(counts_, i) > 1.0) out.users[i].e1 = out.users[i].error = true;
    return out;
  }
  RandomStream rng(derive_seed(config_.seed, config_.block_length, trial));
  CodebookSet set = generate_codebooks(config_, rng);
  SimOutcome out;
  out.users.resize(config_.spec.num_users);
  for (std::size_t b = 0; b + 1 < config_.blocks; ++b) run_block(set.codebook, set.relay_map, rng, out);
  return out;
}

SimOutcome Simulator::run_trial(std::uint64_t trial, const CodebookSet& shared) const {
  RandomStream rng(derive_seed(config_.seed, config_.block_length, trial));
  RelayMap local = shared.relay_map;
  SimOutcome out;
  out.users.resize(config_.spec.num_users);
  for (std::size_t b = 0; b + 1 < config_.blocks; ++b) run_block(shared.codebook, local, rng, out);
  return out;
}

std::vector<SimOutcome> Simulator::run_all() const {
  std::optional<CodebookSet> shared;
  if (config_.share_codebook && !always_miss_) {
    RandomStream rng(derive_seed(config_.seed, config_.block_length ^ kCodebookTag, ~std::uint64_t{0}));
    shared = generate_codebooks(config_, rng);
  }
  std::vector<SimOutcome> out(config_.trials);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < config_.trials; t += stride)
      out[t] = shared ? run_trial(t, *shared) : run_trial(t);
  };
  const std::size_t threads = std::min(config_.threads, config_.trials);
  if (threads <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex guard;
  for (std::size_t k = 0; k < threads; ++k)
    pool.emplace_back([&, k] {
      try {
        work(k, threads);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

SimOutcome run_trial(const SimConfig& config, std::uint64_t trial) {
  return Simulator(config).run_trial(trial);
}

ExperimentResult run_experiment(const SimConfig& base, const std::vector<std::size_t>& block_lengths) {
  if (block_lengths.empty()) throw UsageError("at least one block length is required");
  ExperimentResult result;
  for (std::size_t n : block_lengths) {
    SimConfig config = base;
    config.block_length = n;
    const Simulator sim(config);
    const auto outcomes = sim.run_all();

    ExperimentRow row;
    row.block_length = n;
    row.rates = config.rates;
    row.counts = sim.counts();
    row.realized = realized_rates(row.counts, n);
    row.trials = config.trials;
    row.seed = config.seed;
    row.enumerated = sim.enumerated();
    std::size_t e1 = 0, e2 = 0, e0 = 0, eu = 0, err = 0;
    for (const auto& o : outcomes) {
      e1 += o.e1();
      e2 += o.e2();
      e0 += o.e0();
      eu += o.eu();
      err += o.error();
      if (!o.decomposition_holds()) ++row.decomposition_violations;
    }
    const double t = static_cast<double>(config.trials);
    row.e1 = static_cast<double>(e1) / t;
    row.e2 = static_cast<double>(e2) / t;
    row.e0 = static_cast<double>(e0) / t;
    row.eu = static_cast<double>(eu) / t;
    row.overall = static_cast<double>(err) / t;
    row.half_width = 1.96 * std::sqrt(row.overall * (1.0 - row.overall) / t);
    result.rows.push_back(std::move(row));
  }
  result.strictly_decreasing = result.non_increasing = true;
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    if (!(result.rows[k].overall < result.rows[k - 1].overall)) result.strictly_decreasing = false;
    if (result.rows[k].overall > result.rows[k - 1].overall) result.non_increasing = false;
  }
  return result;
}

}  // namespace mwrc
