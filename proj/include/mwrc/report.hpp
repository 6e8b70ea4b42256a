#pragma once

// Machine-readable outputs: result documents (JSON) and CSV tables.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwrc/channel.hpp"
#include "mwrc/region.hpp"
#include "mwrc/simcode.hpp"

namespace mwrc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kResultSchema = "mwrc-result/1";

// 9 significant digits; negative zero prints as 0.
std::string format_float(double x);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const SpecialCaseReport& report);
nlohmann::json to_json(const InputDistribution& dist);
nlohmann::json to_json(const MembershipVerdict& verdict, const RateTuple& rates, double tolerance);
nlohmann::json to_json(const BoundaryPoint& point);
nlohmann::json to_json(const ExperimentResult& result, const SimConfig& config);

nlohmann::json result_document(const std::string& command, const nlohmann::json& arguments,
                               const std::string& digest, std::uint64_t seed,
                               const nlohmann::json& payload);
// Sorted keys, two-space indent, trailing newline.
std::string dump_document(const nlohmann::json& doc);

// Header: d_1..d_L, rate_1..rate_L, binding. The binding field lists cut ids
// separated by ';' and is always quoted.
std::string region_csv(const std::vector<BoundaryPoint>& points, std::size_t num_users);
// Header: n, rate_i, realized_i, e1, e2, e0, eu, overall, half_width, trials, seed.
std::string simulate_csv(const ExperimentResult& result, std::size_t num_users);

std::string binding_field(const std::vector<Cut>& cuts);

}  // namespace mwrc
