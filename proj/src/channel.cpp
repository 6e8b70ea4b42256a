#include "mwrc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mwrc {

namespace {

std::string path(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) out += "/" + p;
  return out;
}

void check_row(std::span<const double> row, std::size_t expected, const std::string& where,
               std::vector<ValidationIssue>& issues) {
  if (row.size() != expected) {
    issues.push_back({where, "row has " + std::to_string(row.size()) + " entries, expected " +
                                 std::to_string(expected)});
    return;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!std::isfinite(row[k]) || row[k] < 0.0) {
      issues.push_back({where + "/" + std::to_string(k), "negative or non-finite probability"});
      return;
    }
    total += row[k];
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "row sums to " << total << ", not 1";
    issues.push_back({where, msg.str()});
  }
}

std::size_t product(std::span<const std::size_t> sizes) {
  std::size_t p = 1;
  for (std::size_t s : sizes) p *= s;
  return p;
}

}  // namespace

std::size_t ChannelSpec::uplink_domain_size() const { return product(user_alphabet_sizes); }

std::size_t ChannelSpec::uplink_index(std::span<const Symbol> x) const {
  if (x.size() != num_users)
    throw UsageError("uplink input has " + std::to_string(x.size()) + " symbols for " +
                     std::to_string(num_users) + " users");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < num_users; ++i) {
    if (x[i] >= user_alphabet_sizes[i])
      throw UsageError("symbol " + std::to_string(x[i]) + " outside the alphabet of user " +
                       std::to_string(i + 1));
    idx = idx * user_alphabet_sizes[i] + x[i];
  }
  return idx;
}

std::vector<Symbol> ChannelSpec::uplink_tuple(std::size_t index) const {
  std::vector<Symbol> x(num_users);
  for (std::size_t i = num_users; i-- > 0;) {
    x[i] = static_cast<Symbol>(index % user_alphabet_sizes[i]);
    index /= user_alphabet_sizes[i];
  }
  return x;
}

ValidationReport validate(const ChannelSpec& spec) {
  ValidationReport report;
  auto& issues = report.issues;

  if (spec.num_users < 2) issues.push_back({"/users", "at least two users are required"});
  if (spec.num_users > 16) issues.push_back({"/users", "at most 16 users are supported"});
  if (spec.user_alphabet_sizes.size() != spec.num_users)
    issues.push_back({"/alphabets/users", "expected one alphabet size per user"});
  if (spec.user_output_sizes.size() != spec.num_users)
    issues.push_back({"/alphabets/user_outputs", "expected one output size per user"});
  for (std::size_t i = 0; i < spec.user_alphabet_sizes.size(); ++i)
    if (spec.user_alphabet_sizes[i] == 0)
      issues.push_back({path({"alphabets", "users", std::to_string(i)}), "alphabet size must be >= 1"});
  for (std::size_t i = 0; i < spec.user_output_sizes.size(); ++i)
    if (spec.user_output_sizes[i] == 0)
      issues.push_back({path({"alphabets", "user_outputs", std::to_string(i)}), "alphabet size must be >= 1"});
  if (spec.relay_input_size == 0) issues.push_back({"/alphabets/relay_input", "alphabet size must be >= 1"});
  if (spec.relay_output_size == 0) issues.push_back({"/alphabets/relay_output", "alphabet size must be >= 1"});
  if (!issues.empty()) return report;

  // Shapes are sane; check table sizes against the enumeration cap before
  // touching them.
  double domain = 1.0;
  for (std::size_t s : spec.user_alphabet_sizes) domain *= static_cast<double>(s);
  if (domain > static_cast<double>(kEnumerationCap)) {
    issues.push_back({"/uplink", "uplink domain exceeds the enumeration cap"});
    return report;
  }

  const std::size_t cells = spec.uplink_domain_size();
  if (spec.uplink_table.size() != cells) {
    issues.push_back({"/uplink", "uplink table has " + std::to_string(spec.uplink_table.size()) +
                                     " entries, expected " + std::to_string(cells)});
  } else {
    for (std::size_t c = 0; c < cells; ++c)
      if (spec.uplink_table[c] >= spec.relay_output_size)
        issues.push_back({path({"uplink", std::to_string(c)}),
                          "output " + std::to_string(spec.uplink_table[c]) +
                              " is outside the relay output alphabet of size " +
                              std::to_string(spec.relay_output_size)});
  }

  if (const auto* joint = std::get_if<JointDownlink>(&spec.downlink)) {
    const std::size_t width = product(spec.user_output_sizes);
    if (joint->rows.size() != spec.relay_input_size)
      issues.push_back({"/downlink/joint", "expected one row per relay input symbol"});
    for (std::size_t r = 0; r < joint->rows.size(); ++r)
      check_row(joint->rows[r], width, path({"downlink", "joint", std::to_string(r)}), issues);
  } else {
    const auto& marg = std::get<MarginalDownlink>(spec.downlink);
    if (marg.users.size() != spec.num_users)
      issues.push_back({"/downlink/marginals", "expected one table per user"});
    for (std::size_t i = 0; i < marg.users.size() && i < spec.num_users; ++i) {
      const auto& table = marg.users[i];
      const std::string where = path({"downlink", "marginals", std::to_string(i)});
      if (table.size() != spec.relay_input_size)
        issues.push_back({where, "expected one row per relay input symbol"});
      for (std::size_t r = 0; r < table.size(); ++r)
        check_row(table[r], spec.user_output_sizes[i], where + "/" + std::to_string(r), issues);
    }
  }
  return report;
}

void require_valid(const ChannelSpec& spec) {
  const auto report = validate(spec);
  if (!report.ok())
    throw ValidationError("invalid channel at " + report.issues.front().location + ": " +
                          report.issues.front().message);
}

Symbol apply_uplink(const ChannelSpec& spec, std::span<const Symbol> x) {
  return spec.uplink_table.at(spec.uplink_index(x));
}

std::vector<Distribution> downlink_marginal(const ChannelSpec& spec, std::size_t user) {
  if (user >= spec.num_users)
    throw UsageError("user index " + std::to_string(user + 1) + " outside [1:" +
                     std::to_string(spec.num_users) + "]");
  std::vector<Distribution> out;
  if (const auto* marg = std::get_if<MarginalDownlink>(&spec.downlink)) {
    for (const auto& row : marg->users.at(user)) out.emplace_back(row);
    return out;
  }
  const auto& joint = std::get<JointDownlink>(spec.downlink);
  const std::size_t width = product(spec.user_output_sizes);
  std::size_t stride = 1;  // how many flat cells share one y_user value run
  for (std::size_t j = user + 1; j < spec.num_users; ++j) stride *= spec.user_output_sizes[j];
  const std::size_t ysize = spec.user_output_sizes[user];
  for (const auto& row : joint.rows) {
    std::vector<double> m(ysize, 0.0);
    for (std::size_t c = 0; c < width; ++c) m[(c / stride) % ysize] += row[c];
    out.emplace_back(std::move(m));
  }
  return out;
}

DownlinkSampler::DownlinkSampler(const ChannelSpec& spec)
    : users_(spec.num_users),
      output_sizes_(spec.user_output_sizes),
      joint_(std::holds_alternative<JointDownlink>(spec.downlink)) {
  if (joint_) {
    for (const auto& row : std::get<JointDownlink>(spec.downlink).rows)
      joint_rows_.emplace_back(row);
  } else {
    for (const auto& table : std::get<MarginalDownlink>(spec.downlink).users) {
      auto& rows = marginal_rows_.emplace_back();
      for (const auto& row : table) rows.emplace_back(row);
    }
  }
}

void DownlinkSampler::draw(Symbol x0, RandomStream& rng, std::span<Symbol> out) const {
  if (joint_) {
    if (x0 >= joint_rows_.size()) throw UsageError("relay symbol outside its alphabet");
    std::size_t flat = joint_rows_[x0].draw(rng);
    for (std::size_t i = users_; i-- > 0;) {
      out[i] = static_cast<Symbol>(flat % output_sizes_[i]);
      flat /= output_sizes_[i];
    }
    return;
  }
  for (std::size_t i = 0; i < users_; ++i) {
    if (x0 >= marginal_rows_[i].size()) throw UsageError("relay symbol outside its alphabet");
    out[i] = marginal_rows_[i][x0].draw(rng);
  }
}

std::vector<Symbol> sample_downlink(const ChannelSpec& spec, Symbol x0, RandomStream& rng) {
  if (x0 >= spec.relay_input_size)
    throw UsageError("relay symbol " + std::to_string(x0) + " outside alphabet of size " +
                     std::to_string(spec.relay_input_size));
  std::vector<Symbol> y(spec.num_users);
  DownlinkSampler(spec).draw(x0, rng, y);
  return y;
}

SpecialCaseReport check_special_case(const ChannelSpec& spec) {
  require_valid(spec);
  SpecialCaseReport report;
  report.user_alphabets_cover_relay = true;
  for (std::size_t j = 0; j < spec.num_users; ++j) {
    if (spec.user_alphabet_sizes[j] < spec.relay_input_size) {
      report.user_alphabets_cover_relay = false;
      report.witness.push_back("|X_" + std::to_string(j + 1) + "| = " +
                               std::to_string(spec.user_alphabet_sizes[j]) + " < |X_0| = " +
                               std::to_string(spec.relay_input_size));
    }
  }

  report.uplink_injective = true;
  std::vector<std::size_t> first_preimage(spec.relay_output_size, spec.uplink_domain_size());
  for (std::size_t c = 0; c < spec.uplink_table.size(); ++c) {
    const Symbol y = spec.uplink_table[c];
    if (first_preimage[y] == spec.uplink_domain_size()) {
      first_preimage[y] = c;
      continue;
    }
    report.uplink_injective = false;
    auto show = [&](std::size_t idx) {
      std::string s = "(";
      const auto x = spec.uplink_tuple(idx);
      for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
      return s + ")";
    };
    report.witness.push_back("uplink not injective: " + show(first_preimage[y]) + " and " +
                             show(c) + " both map to " + std::to_string(y));
    break;
  }
  return report;
}

std::vector<std::vector<double>> symmetric_rows(std::size_t size, double crossover) {
  std::vector<std::vector<double>> rows(size, std::vector<double>(size, 0.0));
  for (std::size_t a = 0; a < size; ++a)
    for (std::size_t b = 0; b < size; ++b)
      rows[a][b] = a == b ? 1.0 - crossover
                          : (size > 1 ? crossover / static_cast<double>(size - 1) : 0.0);
  if (size == 1) rows[0][0] = 1.0;
  return rows;
}

ChannelSpec make_xor_channel(double downlink_crossover) {
  ChannelSpec spec;
  spec.num_users = 2;
  spec.user_alphabet_sizes = {2, 2};
  spec.relay_input_size = 2;
  spec.relay_output_size = 2;
  spec.user_output_sizes = {2, 2};
  spec.uplink_table = {0, 1, 1, 0};
  const auto rows = symmetric_rows(2, downlink_crossover);
  spec.downlink = MarginalDownlink{{rows, rows}};
  return spec;
}

ChannelSpec make_pair_copy_channel(std::size_t relay_input_size, double downlink_crossover) {
  ChannelSpec spec;
  spec.num_users = 2;
  spec.user_alphabet_sizes = {2, 2};
  spec.relay_input_size = relay_input_size;
  spec.relay_output_size = 4;
  spec.user_output_sizes = {relay_input_size, relay_input_size};
  spec.uplink_table = {0, 1, 2, 3};
  const auto rows = symmetric_rows(relay_input_size, downlink_crossover);
  spec.downlink = MarginalDownlink{{rows, rows}};
  return spec;
}

}  // namespace mwrc
