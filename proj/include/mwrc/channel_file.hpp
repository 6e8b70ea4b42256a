#pragma once

// JSON channel documents.
//
//   {
//     "users": 2,
//     "alphabets": {"users": [2, 2], "relay_input": 2, "relay_output": 2,
//                   "user_outputs": [2, 2]},
//     "uplink": [0, 1, 1, 0],
//     "downlink": {"marginals": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]},
//     "labels": {...}
//   }
//
// "uplink" is dense and row-major over (x_1, ..., x_L) with x_1 slowest.
// "downlink" holds either "marginals" (one table per user, rows by x0) or
// "joint" (one flat row per x0 over (y_1, ..., y_L), y_1 slowest). "labels"
// is optional and free-form. Any other key is rejected.

#include <string>
#include <string_view>

#include "mwrc/channel.hpp"

namespace mwrc {

struct ChannelFile {
  ChannelSpec spec;
  // Canonical JSON text of the labels object, empty when absent.
  std::string labels;
};

// Structural parse only: shapes and types. Semantic checks (row sums, table
// sizes) are left to validate(). Throws ParseError.
ChannelFile parse_channel_file(std::string_view text);
// Reads and parses; throws Error when the file cannot be opened.
ChannelFile load_channel_file(const std::string& path);

// Canonical form: sorted keys, two-space indent, trailing newline.
std::string serialize_channel(const ChannelFile& file);
std::string serialize_channel(const ChannelSpec& spec);

// Lowercase hex SHA-256 of the canonical serialization of the spec alone.
std::string spec_digest(const ChannelSpec& spec);

// Thrown by load_channel_file when the path cannot be read.
class InputFileError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwrc
