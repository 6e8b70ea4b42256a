#include "mwrc/channel_file.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mwrc {

namespace {

using json = nlohmann::json;

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ParseError("channel file: " + key + ": " + what, key);
}

const json& member(const json& obj, const std::string& path, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) fail(path + "/" + name, "missing required key");
  return *it;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      fail(path + "/" + k, "unknown key");
  }
}

std::size_t size_value(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected a non-negative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> size_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(size_value(v[k], path + "/" + std::to_string(k)));
  return out;
}

std::vector<double> number_row(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) fail(path + "/" + std::to_string(k), "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::vector<std::vector<double>> number_rows(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number_row(v[k], path + "/" + std::to_string(k)));
  return out;
}

json to_json(const ChannelSpec& spec) {
  json doc;
  doc["users"] = spec.num_users;
  doc["alphabets"] = {{"users", spec.user_alphabet_sizes},
                      {"relay_input", spec.relay_input_size},
                      {"relay_output", spec.relay_output_size},
                      {"user_outputs", spec.user_output_sizes}};
  doc["uplink"] = spec.uplink_table;
  if (const auto* joint = std::get_if<JointDownlink>(&spec.downlink))
    doc["downlink"] = {{"joint", joint->rows}};
  else
    doc["downlink"] = {{"marginals", std::get<MarginalDownlink>(spec.downlink).users}};
  return doc;
}

}  // namespace

ChannelFile parse_channel_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("channel file: line " + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)) +
                         ": " + e.what(),
                     "", line_of(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  only_keys(doc, "", {"users", "alphabets", "uplink", "downlink", "labels"});

  ChannelFile file;
  ChannelSpec& spec = file.spec;
  spec.num_users = size_value(member(doc, "", "users"), "/users");

  const json& alpha = member(doc, "", "alphabets");
  only_keys(alpha, "/alphabets", {"users", "relay_input", "relay_output", "user_outputs"});
  spec.user_alphabet_sizes = size_list(member(alpha, "/alphabets", "users"), "/alphabets/users");
  spec.relay_input_size = size_value(member(alpha, "/alphabets", "relay_input"), "/alphabets/relay_input");
  spec.relay_output_size = size_value(member(alpha, "/alphabets", "relay_output"), "/alphabets/relay_output");
  spec.user_output_sizes = size_list(member(alpha, "/alphabets", "user_outputs"), "/alphabets/user_outputs");

  const json& up = member(doc, "", "uplink");
  if (!up.is_array()) fail("/uplink", "expected an array of output symbols");
  for (std::size_t k = 0; k < up.size(); ++k) {
    const std::size_t y = size_value(up[k], "/uplink/" + std::to_string(k));
    if (y > 0xffffffffULL) fail("/uplink/" + std::to_string(k), "symbol too large");
    spec.uplink_table.push_back(static_cast<Symbol>(y));
  }

  const json& down = member(doc, "", "downlink");
  only_keys(down, "/downlink", {"marginals", "joint"});
  const bool has_marg = down.contains("marginals"), has_joint = down.contains("joint");
  if (has_marg == has_joint) fail("/downlink", "expected exactly one of \"marginals\" or \"joint\"");
  if (has_joint) {
    spec.downlink = JointDownlink{number_rows(down["joint"], "/downlink/joint")};
  } else {
    const json& m = down["marginals"];
    if (!m.is_array()) fail("/downlink/marginals", "expected one table per user");
    MarginalDownlink marg;
    for (std::size_t i = 0; i < m.size(); ++i)
      marg.users.push_back(number_rows(m[i], "/downlink/marginals/" + std::to_string(i)));
    spec.downlink = std::move(marg);
  }

  if (const auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_object()) fail("/labels", "expected an object");
    file.labels = it->dump();
  }
  return file;
}

ChannelFile load_channel_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFileError("cannot open channel file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw InputFileError("cannot read channel file '" + path + "'");
  return parse_channel_file(buf.str());
}

std::string serialize_channel(const ChannelFile& file) {
  json doc = to_json(file.spec);
  if (!file.labels.empty()) doc["labels"] = json::parse(file.labels);
  return doc.dump(2) + "\n";
}

std::string serialize_channel(const ChannelSpec& spec) { return to_json(spec).dump(2) + "\n"; }

std::string spec_digest(const ChannelSpec& spec) {
  const std::string text = serialize_channel(spec);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return hex.str();
}

}  // namespace mwrc
