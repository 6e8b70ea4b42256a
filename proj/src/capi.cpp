#include "mwrc/mwrc.h"

#include <cstring>
#include <new>
#include <string>

#include "mwrc/channel_file.hpp"
#include "mwrc/region.hpp"
#include "mwrc/report.hpp"
#include "mwrc/simcode.hpp"

struct mwrc_channel {
  mwrc::ChannelFile file;
  mwrc::ValidationReport report;
};

struct mwrc_buffer {
  std::string data;
};

namespace {

thread_local std::string g_last_error;

mwrc_status fail(mwrc_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
mwrc_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const mwrc::ParseError& e) {
    return fail(MWRC_E_PARSE, e.what());
  } catch (const mwrc::InputFileError& e) {
    return fail(MWRC_E_IO, e.what());
  } catch (const mwrc::ValidationError& e) {
    return fail(MWRC_E_INVALID, e.what());
  } catch (const mwrc::UsageError& e) {
    return fail(MWRC_E_USAGE, e.what());
  } catch (const mwrc::CapacityError& e) {
    return fail(MWRC_E_CAPACITY, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MWRC_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MWRC_E_INTERNAL, e.what());
  } catch (...) {
    return fail(MWRC_E_INTERNAL, "unknown failure");
  }
}

void emit(mwrc_buffer** out, std::string text) {
  if (out) *out = new mwrc_buffer{std::move(text)};
}

mwrc_status require_usable(const mwrc_channel* ch) {
  if (!ch) return fail(MWRC_E_USAGE, "channel handle is null");
  if (!ch->report.ok())
    return fail(MWRC_E_INVALID, "invalid channel at " + ch->report.issues.front().location + ": " +
                                    ch->report.issues.front().message);
  return MWRC_OK;
}

mwrc::RegionOptions region_options(const mwrc_region_options* o) {
  mwrc_region_options d;
  mwrc_region_options_init(&d);
  if (!o) o = &d;
  if (!(o->tolerance >= 0.0)) throw mwrc::UsageError("tolerance must be non-negative");
  mwrc::RegionOptions r;
  r.tolerance = o->tolerance;
  r.hull.seed = o->seed;
  r.hull.sampling_budget = o->sampling_budget;
  r.hull.refinement_steps = o->refinement_steps;
  r.downlink.max_iterations = o->max_iterations;
  return r;
}

nlohmann::json region_arguments(const mwrc::RegionOptions& r) {
  return {{"tolerance", r.tolerance},
          {"budget", r.hull.sampling_budget},
          {"refinement_steps", r.hull.refinement_steps},
          {"max_iterations", r.downlink.max_iterations}};
}

}  // namespace

extern "C" {

const char* mwrc_version(void) { return mwrc::kToolVersion; }

const char* mwrc_last_error(void) { return g_last_error.c_str(); }

const char* mwrc_status_name(mwrc_status status) {
  switch (status) {
    case MWRC_OK: return "ok";
    case MWRC_E_USAGE: return "usage error";
    case MWRC_E_PARSE: return "parse error";
    case MWRC_E_INVALID: return "invalid data";
    case MWRC_E_CAPACITY: return "capacity exceeded";
    case MWRC_E_IO: return "i/o error";
    case MWRC_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mwrc_buffer_data(const mwrc_buffer* buffer) { return buffer ? buffer->data.c_str() : nullptr; }
size_t mwrc_buffer_size(const mwrc_buffer* buffer) { return buffer ? buffer->data.size() : 0; }
void mwrc_buffer_free(mwrc_buffer* buffer) { delete buffer; }

mwrc_status mwrc_channel_parse(const char* text, size_t length, mwrc_channel** out) {
  return guarded([&] {
    if (!text || !out) return fail(MWRC_E_USAGE, "null argument");
    auto file = mwrc::parse_channel_file(std::string_view(text, length));
    auto report = mwrc::validate(file.spec);
    *out = new mwrc_channel{std::move(file), std::move(report)};
    return MWRC_OK;
  });
}

mwrc_status mwrc_channel_load(const char* path, mwrc_channel** out) {
  return guarded([&] {
    if (!path || !out) return fail(MWRC_E_USAGE, "null argument");
    auto file = mwrc::load_channel_file(path);
    auto report = mwrc::validate(file.spec);
    *out = new mwrc_channel{std::move(file), std::move(report)};
    return MWRC_OK;
  });
}

void mwrc_channel_free(mwrc_channel* channel) { delete channel; }

size_t mwrc_channel_users(const mwrc_channel* channel) { return channel ? channel->file.spec.num_users : 0; }

mwrc_status mwrc_channel_digest(const mwrc_channel* channel, char out[65]) {
  return guarded([&] {
    if (!channel || !out) return fail(MWRC_E_USAGE, "null argument");
    const auto d = mwrc::spec_digest(channel->file.spec);
    std::memcpy(out, d.c_str(), 65);
    return MWRC_OK;
  });
}

mwrc_status mwrc_channel_serialize(const mwrc_channel* channel, mwrc_buffer** out) {
  return guarded([&] {
    if (!channel || !out) return fail(MWRC_E_USAGE, "null argument");
    emit(out, mwrc::serialize_channel(channel->file));
    return MWRC_OK;
  });
}

void mwrc_region_options_init(mwrc_region_options* options) {
  if (!options) return;
  const mwrc::RegionOptions d;
  options->tolerance = d.tolerance;
  options->seed = d.hull.seed;
  options->sampling_budget = d.hull.sampling_budget;
  options->refinement_steps = d.hull.refinement_steps;
  options->max_iterations = d.downlink.max_iterations;
}

mwrc_status mwrc_check(const mwrc_channel* channel, int* valid, int* special, mwrc_buffer** doc) {
  return guarded([&] {
    if (!channel) return fail(MWRC_E_USAGE, "channel handle is null");
    const bool ok = channel->report.ok();
    nlohmann::json payload = mwrc::to_json(channel->report);
    payload["users"] = channel->file.spec.num_users;
    bool applies = false;
    if (ok) {
      const auto sc = mwrc::check_special_case(channel->file.spec);
      applies = sc.applies();
      payload["special_case"] = mwrc::to_json(sc);
    } else {
      payload["special_case"] = nullptr;
    }
    if (valid) *valid = ok ? 1 : 0;
    if (special) *special = applies ? 1 : 0;
    if (doc)
      emit(doc, mwrc::dump_document(mwrc::result_document(
                    "check", nlohmann::json::object(), mwrc::spec_digest(channel->file.spec), 0, payload)));
    return MWRC_OK;
  });
}

mwrc_status mwrc_member(const mwrc_channel* channel, const double* rates, size_t count,
                        const mwrc_region_options* options, mwrc_verdict* verdict, double* min_slack,
                        mwrc_buffer** doc) {
  return guarded([&] {
    if (const auto s = require_usable(channel); s != MWRC_OK) return s;
    if (!rates && count > 0) return fail(MWRC_E_USAGE, "rates pointer is null");
    const auto& spec = channel->file.spec;
    if (count != spec.num_users)
      return fail(MWRC_E_USAGE, "expected " + std::to_string(spec.num_users) + " rates, got " +
                                    std::to_string(count));
    const auto opts = region_options(options);
    const mwrc::RateTuple r(rates, rates + count);
    const auto v = mwrc::membership(spec, r, opts);
    if (verdict)
      *verdict = v.status == mwrc::Membership::In ? MWRC_IN
                 : v.status == mwrc::Membership::Out ? MWRC_OUT
                                                     : MWRC_BOUNDARY;
    if (min_slack) *min_slack = v.min_slack;
    if (doc) {
      auto args = region_arguments(opts);
      args["rates"] = r;
      emit(doc, mwrc::dump_document(mwrc::result_document("member", args, mwrc::spec_digest(spec),
                                                          opts.hull.seed, mwrc::to_json(v, r, opts.tolerance))));
    }
    return MWRC_OK;
  });
}

mwrc_status mwrc_region(const mwrc_channel* channel, const double* directions, size_t num_directions,
                        const mwrc_region_options* options, mwrc_buffer** csv, mwrc_buffer** doc) {
  return guarded([&] {
    if (const auto s = require_usable(channel); s != MWRC_OK) return s;
    if (num_directions == 0 || !directions) return fail(MWRC_E_USAGE, "at least one direction is required");
    const auto& spec = channel->file.spec;
    const std::size_t L = spec.num_users;
    const auto opts = region_options(options);
    mwrc::RegionSolver solver(spec, opts);
    std::vector<mwrc::BoundaryPoint> points;
    for (std::size_t k = 0; k < num_directions; ++k)
      points.push_back(solver.boundary_trace(mwrc::RateTuple(directions + k * L, directions + (k + 1) * L)));
    emit(csv, mwrc::region_csv(points, L));
    if (doc) {
      auto args = region_arguments(opts);
      nlohmann::json dirs = nlohmann::json::array();
      for (const auto& p : points) dirs.push_back(p.direction);
      args["directions"] = dirs;
      nlohmann::json payload = nlohmann::json::array();
      for (const auto& p : points) payload.push_back(mwrc::to_json(p));
      emit(doc, mwrc::dump_document(mwrc::result_document("region", args, mwrc::spec_digest(spec),
                                                          opts.hull.seed, {{"points", payload}})));
    }
    return MWRC_OK;
  });
}

void mwrc_sim_options_init(mwrc_sim_options* options) {
  if (!options) return;
  const mwrc::SimConfig d;
  options->rates = nullptr;
  options->num_rates = 0;
  options->block_lengths = nullptr;
  options->num_block_lengths = 0;
  options->trials = d.trials;
  options->epsilon = d.epsilon;
  options->seed = d.seed;
  options->blocks = d.blocks;
  options->typicality = MWRC_TYPICAL_ROBUST;
  options->share_codebook = 0;
  options->distinct_codewords = 0;
  options->input_source = MWRC_INPUT_UNIFORM;
  options->threads = 1;
  mwrc_region_options_init(&options->region);
}

mwrc_status mwrc_simulate(const mwrc_channel* channel, const mwrc_sim_options* options,
                          mwrc_buffer** csv, mwrc_buffer** doc) {
  return guarded([&] {
    if (const auto s = require_usable(channel); s != MWRC_OK) return s;
    if (!options) return fail(MWRC_E_USAGE, "options are null");
    const auto& spec = channel->file.spec;
    if (!options->rates || options->num_rates != spec.num_users)
      return fail(MWRC_E_USAGE, "expected " + std::to_string(spec.num_users) + " rates");
    if (!options->block_lengths || options->num_block_lengths == 0)
      return fail(MWRC_E_USAGE, "at least one block length is required");

    mwrc::SimConfig config;
    config.spec = spec;
    config.rates.assign(options->rates, options->rates + options->num_rates);
    config.trials = options->trials;
    config.epsilon = options->epsilon;
    config.seed = options->seed;
    config.blocks = options->blocks;
    config.typicality = options->typicality == MWRC_TYPICAL_WEAK ? mwrc::Typicality::Weak : mwrc::Typicality::Robust;
    config.share_codebook = options->share_codebook != 0;
    config.distinct_codewords = options->distinct_codewords != 0;
    config.threads = options->threads;
    if (options->input_source == MWRC_INPUT_WITNESS) {
      const auto v = mwrc::membership(spec, config.rates, region_options(&options->region));
      if (!v.witness)
        return fail(MWRC_E_USAGE, "rates are outside the region, so there is no witness input law");
      config.dist = *v.witness;
    } else {
      config.dist = mwrc::InputDistribution::uniform(spec);
    }
    const std::vector<std::size_t> lengths(options->block_lengths,
                                           options->block_lengths + options->num_block_lengths);
    const auto result = mwrc::run_experiment(config, lengths);
    emit(csv, mwrc::simulate_csv(result, spec.num_users));
    if (doc) {
      nlohmann::json args = {{"rates", config.rates},
                             {"n", lengths},
                             {"trials", config.trials},
                             {"epsilon", config.epsilon},
                             {"blocks", config.blocks},
                             {"input", options->input_source == MWRC_INPUT_WITNESS ? "witness" : "uniform"}};
      emit(doc, mwrc::dump_document(mwrc::result_document("simulate", args, mwrc::spec_digest(spec),
                                                          config.seed, mwrc::to_json(result, config))));
    }
    return MWRC_OK;
  });
}

}  // extern "C"
