#include "mwrc/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mwrc {

using json = nlohmann::json;

std::string format_float(double x) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

json to_json(const ValidationReport& report) {
  json issues = json::array();
  for (const auto& i : report.issues) issues.push_back({{"location", i.location}, {"message", i.message}});
  return {{"valid", report.ok()}, {"issues", issues}};
}

json to_json(const SpecialCaseReport& report) {
  return {{"applies", report.applies()},
          {"user_alphabets_cover_relay", report.user_alphabets_cover_relay},
          {"uplink_injective", report.uplink_injective},
          {"witness", report.witness}};
}

json to_json(const InputDistribution& dist) {
  auto mass = [](const Distribution& d) { return std::vector<double>(d.mass().begin(), d.mass().end()); };
  json users = json::array();
  for (const auto& row : dist.user_conditionals) {
    json per_q = json::array();
    for (const auto& d : row) per_q.push_back(mass(d));
    users.push_back(per_q);
  }
  return {{"q_weights", mass(dist.q_weights)},
          {"user_conditionals", users},
          {"relay_input", mass(dist.relay_input)}};
}

json to_json(const MembershipVerdict& v, const RateTuple& rates, double tolerance) {
  json binding = json::array();
  for (const auto& c : v.binding) binding.push_back({{"cut", c.id()}, {"slack", c.slack}});
  json uplink = json::array();
  const auto masks = strict_subsets(rates.size());
  for (std::size_t u = 0; u < v.slacks.uplink.size(); ++u)
    uplink.push_back({{"subset", subset_label(masks[u])}, {"slack", v.slacks.uplink[u]}});
  json doc = {{"rates", rates},
              {"tolerance", tolerance},
              {"status", to_string(v.status)},
              {"min_slack", v.min_slack},
              {"downlink_slack", v.downlink_slack},
              {"uplink_slack", v.uplink_slack},
              {"downlink_converged", v.downlink_converged},
              {"binding", binding},
              {"slacks", {{"downlink", v.slacks.downlink}, {"uplink", uplink}}}};
  doc["witness"] = v.witness ? to_json(*v.witness) : json(nullptr);
  return doc;
}

json to_json(const BoundaryPoint& p) {
  std::vector<std::string> cuts;
  for (const auto& c : p.binding) cuts.push_back(c.id());
  return {{"direction", p.direction}, {"rates", p.rates}, {"scale", p.scale}, {"binding", cuts}};
}

json to_json(const ExperimentResult& result, const SimConfig& config) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"n", r.block_length},
                    {"rates", r.rates},
                    {"messages", r.counts},
                    {"realized", r.realized},
                    {"e1", r.e1},
                    {"e2", r.e2},
                    {"e0", r.e0},
                    {"eu", r.eu},
                    {"overall", r.overall},
                    {"half_width", r.half_width},
                    {"trials", r.trials},
                    {"relay_codebook", r.enumerated ? "enumerated" : "keyed"},
                    {"decomposition_violations", r.decomposition_violations}});
  const double b = static_cast<double>(config.blocks);
  return {{"rows", rows},
          {"strictly_decreasing", result.strictly_decreasing},
          {"non_increasing", result.non_increasing},
          {"epsilon", config.epsilon},
          {"typicality", config.typicality == Typicality::Robust ? "robust" : "weak"},
          {"blocks", config.blocks},
          {"rate_factor", (b - 1.0) / b},
          {"share_codebook", config.share_codebook},
          {"distinct_codewords", config.distinct_codewords},
          {"input", to_json(config.dist)}};
}

json result_document(const std::string& command, const json& arguments, const std::string& digest,
                     std::uint64_t seed, const json& payload) {
  return {{"schema", kResultSchema},
          {"command", command},
          {"arguments", arguments},
          {"spec_digest", digest},
          {"seed", seed},
          {"tool_version", kToolVersion},
          {"payload", payload}};
}

std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

std::string binding_field(const std::vector<Cut>& cuts) {
  std::string s = "\"";
  for (std::size_t k = 0; k < cuts.size(); ++k) s += (k ? ";" : "") + cuts[k].id();
  return s + "\"";
}

std::string region_csv(const std::vector<BoundaryPoint>& points, std::size_t num_users) {
  std::ostringstream out;
  for (std::size_t j = 0; j < num_users; ++j) out << "d_" << j + 1 << ",";
  for (std::size_t j = 0; j < num_users; ++j) out << "rate_" << j + 1 << ",";
  out << "binding\n";
  for (const auto& p : points) {
    for (double d : p.direction) out << format_float(d) << ",";
    for (double r : p.rates) out << format_float(r) << ",";
    out << binding_field(p.binding) << "\n";
  }
  return out.str();
}

std::string simulate_csv(const ExperimentResult& result, std::size_t num_users) {
  std::ostringstream out;
  out << "n,";
  for (std::size_t j = 0; j < num_users; ++j) out << "rate_" << j + 1 << ",";
  for (std::size_t j = 0; j < num_users; ++j) out << "realized_" << j + 1 << ",";
  out << "e1,e2,e0,eu,overall,half_width,trials,seed\n";
  for (const auto& r : result.rows) {
    out << r.block_length << ",";
    for (double x : r.rates) out << format_float(x) << ",";
    for (double x : r.realized) out << format_float(x) << ",";
    for (double x : {r.e1, r.e2, r.e0, r.eu, r.overall, r.half_width}) out << format_float(x) << ",";
    out << r.trials << "," << r.seed << "\n";
  }
  return out.str();
}

}  // namespace mwrc
