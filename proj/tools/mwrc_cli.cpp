// mwrc: command-line front end over the C interface.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mwrc/mwrc.h"

namespace {

enum Exit : int {
  kOk = 0,
  kOut = 1,
  kBoundary = 2,
  kUsage = 64,
  kData = 65,
  kNoInput = 66,
  kCapacity = 69,
  kInternal = 70,
  kCantWrite = 73,
};

constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;

struct Failure {
  int code;
  std::string message;
};

int exit_for(mwrc_status s) {
  switch (s) {
    case MWRC_OK: return kOk;
    case MWRC_E_USAGE: return kUsage;
    case MWRC_E_PARSE:
    case MWRC_E_INVALID: return kData;
    case MWRC_E_CAPACITY: return kCapacity;
    case MWRC_E_IO: return kNoInput;
    case MWRC_E_INTERNAL: return kInternal;
  }
  return kInternal;
}

void ensure(mwrc_status s) {
  if (s != MWRC_OK) throw Failure{exit_for(s), std::string(mwrc_status_name(s)) + ": " + mwrc_last_error()};
}

struct BufferDeleter {
  void operator()(mwrc_buffer* b) const { mwrc_buffer_free(b); }
};
using Buffer = std::unique_ptr<mwrc_buffer, BufferDeleter>;

struct ChannelDeleter {
  void operator()(mwrc_channel* c) const { mwrc_channel_free(c); }
};
using Channel = std::unique_ptr<mwrc_channel, ChannelDeleter>;

std::string text_of(const Buffer& b) { return b ? std::string(mwrc_buffer_data(b.get()), mwrc_buffer_size(b.get())) : ""; }

Channel load(const std::string& path) {
  mwrc_channel* raw = nullptr;
  ensure(mwrc_channel_load(path.c_str(), &raw));
  spdlog::debug("loaded channel '{}' with {} users", path, mwrc_channel_users(raw));
  return Channel(raw);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{kCantWrite, "cannot write '" + path + "'"};
  out << text;
  out.flush();
  if (!out) throw Failure{kCantWrite, "cannot write '" + path + "'"};
  spdlog::info("wrote {}", path);
}

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Failure{kUsage, std::string("cannot read ") + what + " entry '" + item + "'"};
    }
  }
  if (out.empty()) throw Failure{kUsage, std::string(what) + " list is empty"};
  return out;
}

// Radical inverse in base b, for deterministic low-discrepancy directions.
double halton(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  for (std::size_t i = index; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

// "K" gives K directions: evenly spaced angles on the quarter circle for two
// users, otherwise the unit directions, the all-ones direction and Halton
// points. "a,b;c,d" lists directions explicitly.
std::vector<double> parse_directions(const std::string& text, std::size_t users) {
  std::vector<double> flat;
  if (text.find_first_not_of("0123456789") == std::string::npos) {
    const std::size_t k = std::stoul(text);
    if (k == 0) throw Failure{kUsage, "direction count must be positive"};
    if (users == 2) {
      for (std::size_t i = 0; i < k; ++i) {
        const double theta = k == 1 ? std::numbers::pi / 4 : std::numbers::pi / 2 * static_cast<double>(i) / static_cast<double>(k - 1);
        double c = std::cos(theta), s = std::sin(theta);
        if (std::abs(c) < 1e-15) c = 0.0;
        if (std::abs(s) < 1e-15) s = 0.0;
        flat.push_back(c);
        flat.push_back(s);
      }
      return flat;
    }
    static constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < users; ++j) {
        if (i < users) flat.push_back(i == j ? 1.0 : 0.0);
        else if (i == users) flat.push_back(1.0);
        else flat.push_back(0.05 + halton(i - users, kPrimes[j % 16]));
      }
    }
    return flat;
  }
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    const auto v = parse_numbers(row, "direction");
    if (v.size() != users)
      throw Failure{kUsage, "direction '" + row + "' has " + std::to_string(v.size()) + " entries for " +
                                std::to_string(users) + " users"};
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

std::string join(const nlohmann::json& arr) {
  std::string s;
  for (std::size_t k = 0; k < arr.size(); ++k) s += (k ? " " : "") + arr[k].get<std::string>();
  return s;
}

std::string numbers(const nlohmann::json& arr) {
  std::ostringstream out;
  out << "[";
  for (std::size_t k = 0; k < arr.size(); ++k) out << (k ? ", " : "") << arr[k].get<double>();
  return out.str() + "]";
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("mwrc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MWRC_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Multi-way relay channel toolkit: capacity region and coding simulations"};
  app.set_version_flag("--version", std::string(mwrc_version()));
  app.require_subcommand(1);

  std::string file, rates_text, out_path, doc_path, directions_text = "9", n_text = "8,16,32";
  std::string input_source = "uniform", typicality = "robust";
  double tolerance = 1e-6, epsilon = 0.2;
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = 1000, budget = 256, refinement = 32, blocks = 2, threads = 1;
  bool as_json = false, distinct = false, share = false;

  auto* check = app.add_subcommand("check", "validate a channel file and test the special case");
  auto* member = app.add_subcommand("member", "decide whether a rate tuple is in the capacity region");
  auto* region = app.add_subcommand("region", "trace the region boundary along directions (CSV)");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error rates of the coding scheme (CSV)");

  for (auto* sub : {check, member, region, simulate})
    sub->add_option("channel", file, "channel file (JSON)")->required();
  for (auto* sub : {member, simulate})
    sub->add_option("--rates", rates_text, "comma-separated rates, one per user")->required();
  for (auto* sub : {member, region}) {
    sub->add_option("--tolerance", tolerance, "membership tolerance")->capture_default_str();
    sub->add_option("--budget", budget, "uplink sampling budget")->capture_default_str();
    sub->add_option("--refine", refinement, "uplink refinement steps")->capture_default_str();
  }
  for (auto* sub : {member, region, simulate})
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
  for (auto* sub : {check, member}) {
    sub->add_option("--out", out_path, "write the JSON result document here");
    sub->add_flag("--json", as_json, "print the JSON result document instead of text");
  }
  for (auto* sub : {region, simulate}) {
    sub->add_option("--out", out_path, "CSV output path (default: stdout)");
    sub->add_option("--doc", doc_path, "also write the JSON result document here");
  }
  region->add_option("--directions", directions_text, "count K, or explicit list 'a,b;c,d'")->capture_default_str();
  simulate->add_option("--n", n_text, "comma-separated block lengths")->capture_default_str();
  simulate->add_option("--trials", trials, "trials per block length")->capture_default_str();
  simulate->add_option("--epsilon", epsilon, "typicality epsilon")->capture_default_str();
  simulate->add_option("--blocks", blocks, "blocks B (B-1 messages)")->capture_default_str();
  simulate->add_option("--threads", threads, "worker threads")->capture_default_str();
  simulate->add_option("--input", input_source, "input law: uniform or witness")
      ->check(CLI::IsMember({"uniform", "witness"}))->capture_default_str();
  simulate->add_option("--typicality", typicality, "robust or weak")
      ->check(CLI::IsMember({"robust", "weak"}))->capture_default_str();
  simulate->add_flag("--distinct", distinct, "draw distinct codewords");
  simulate->add_flag("--share-codebook", share, "one codebook for all trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  mwrc_region_options ropts;
  mwrc_region_options_init(&ropts);
  ropts.tolerance = tolerance;
  ropts.seed = seed;
  ropts.sampling_budget = budget;
  ropts.refinement_steps = refinement;

  try {
    if (check->parsed()) {
      const auto ch = load(file);
      int valid = 0, special = 0;
      mwrc_buffer* raw = nullptr;
      ensure(mwrc_check(ch.get(), &valid, &special, &raw));
      const Buffer doc(raw);
      if (!out_path.empty()) write_file(out_path, text_of(doc));
      const auto j = nlohmann::json::parse(text_of(doc));
      if (as_json) {
        std::cout << text_of(doc);
      } else {
        const auto& p = j["payload"];
        std::cout << "channel: " << file << "\n";
        std::cout << "digest: " << j["spec_digest"].get<std::string>() << "\n";
        std::cout << "valid: " << (valid ? "yes" : "no") << "\n";
        for (const auto& issue : p["issues"])
          std::cout << "  issue at " << issue["location"].get<std::string>() << ": "
                    << issue["message"].get<std::string>() << "\n";
        if (valid) {
          const auto& sc = p["special_case"];
          std::cout << "special case: " << (special ? "yes" : "no") << "\n";
          std::cout << "  user alphabets cover relay input: " << (sc["user_alphabets_cover_relay"].get<bool>() ? "yes" : "no") << "\n";
          std::cout << "  uplink injective: " << (sc["uplink_injective"].get<bool>() ? "yes" : "no") << "\n";
          for (const auto& w : sc["witness"]) std::cout << "  " << w.get<std::string>() << "\n";
        }
      }
      return valid ? kOk : kOut;
    }

    if (member->parsed()) {
      const auto ch = load(file);
      const auto rates = parse_numbers(rates_text, "rate");
      mwrc_verdict verdict = MWRC_OUT;
      double slack = 0.0;
      mwrc_buffer* raw = nullptr;
      ensure(mwrc_member(ch.get(), rates.data(), rates.size(), &ropts, &verdict, &slack, &raw));
      const Buffer doc(raw);
      if (!out_path.empty()) write_file(out_path, text_of(doc));
      if (as_json) {
        std::cout << text_of(doc);
      } else {
        const auto p = nlohmann::json::parse(text_of(doc))["payload"];
        std::cout << "status: " << p["status"].get<std::string>() << "\n";
        std::cout << "min slack: " << p["min_slack"].get<double>() << "\n";
        std::cout << "downlink slack: " << p["downlink_slack"].get<double>() << "\n";
        std::cout << "uplink slack: " << p["uplink_slack"].get<double>() << "\n";
        std::vector<std::string> cuts;
        for (const auto& c : p["binding"]) cuts.push_back(c["cut"].get<std::string>());
        std::cout << "binding: " << join(nlohmann::json(cuts)) << "\n";
        if (!p["witness"].is_null()) {
          const auto& w = p["witness"];
          std::cout << "witness:\n  p(q) = " << numbers(w["q_weights"]) << "\n";
          for (std::size_t q = 0; q < w["user_conditionals"].size(); ++q)
            for (std::size_t i = 0; i < w["user_conditionals"][q].size(); ++i)
              std::cout << "  p(x" << i + 1 << " | q=" << q << ") = " << numbers(w["user_conditionals"][q][i]) << "\n";
          std::cout << "  p(x0) = " << numbers(w["relay_input"]) << "\n";
        }
      }
      return verdict == MWRC_IN ? kOk : verdict == MWRC_OUT ? kOut : kBoundary;
    }

    if (region->parsed()) {
      const auto ch = load(file);
      const auto dirs = parse_directions(directions_text, mwrc_channel_users(ch.get()));
      const std::size_t count = dirs.size() / mwrc_channel_users(ch.get());
      spdlog::info("tracing {} directions", count);
      mwrc_buffer *csv_raw = nullptr, *doc_raw = nullptr;
      ensure(mwrc_region(ch.get(), dirs.data(), count, &ropts, &csv_raw, doc_path.empty() ? nullptr : &doc_raw));
      const Buffer csv(csv_raw), doc(doc_raw);
      if (!doc_path.empty()) write_file(doc_path, text_of(doc));
      if (out_path.empty()) std::cout << text_of(csv);
      else write_file(out_path, text_of(csv));
      return kOk;
    }

    if (simulate->parsed()) {
      const auto ch = load(file);
      const auto rates = parse_numbers(rates_text, "rate");
      std::vector<std::size_t> lengths;
      for (double n : parse_numbers(n_text, "block length")) {
        if (!(n >= 1) || n != std::floor(n)) throw Failure{kUsage, "block lengths must be positive integers"};
        lengths.push_back(static_cast<std::size_t>(n));
      }
      mwrc_sim_options sopts;
      mwrc_sim_options_init(&sopts);
      sopts.rates = rates.data();
      sopts.num_rates = rates.size();
      sopts.block_lengths = lengths.data();
      sopts.num_block_lengths = lengths.size();
      sopts.trials = trials;
      sopts.epsilon = epsilon;
      sopts.seed = seed;
      sopts.blocks = blocks;
      sopts.threads = threads;
      sopts.typicality = typicality == "weak" ? MWRC_TYPICAL_WEAK : MWRC_TYPICAL_ROBUST;
      sopts.share_codebook = share ? 1 : 0;
      sopts.distinct_codewords = distinct ? 1 : 0;
      sopts.input_source = input_source == "witness" ? MWRC_INPUT_WITNESS : MWRC_INPUT_UNIFORM;
      sopts.region.seed = seed;
      spdlog::info("simulating {} trials at {} block lengths", trials, lengths.size());
      mwrc_buffer *csv_raw = nullptr, *doc_raw = nullptr;
      ensure(mwrc_simulate(ch.get(), &sopts, &csv_raw, doc_path.empty() ? nullptr : &doc_raw));
      const Buffer csv(csv_raw), doc(doc_raw);
      if (!doc_path.empty()) write_file(doc_path, text_of(doc));
      if (out_path.empty()) std::cout << text_of(csv);
      else write_file(out_path, text_of(csv));
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "mwrc: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "mwrc: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
