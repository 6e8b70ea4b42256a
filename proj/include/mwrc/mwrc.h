#ifndef MWRC_MWRC_H
#define MWRC_MWRC_H

/* C interface to the multi-way relay channel toolkit.
 *
 * Every function returns an mwrc_status. On failure a message is available
 * from mwrc_last_error() on the calling thread until the next call. Output
 * buffers are owned by the caller and released with mwrc_buffer_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MWRC_API __declspec(dllexport)
#else
#define MWRC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mwrc_status {
  MWRC_OK = 0,
  MWRC_E_USAGE = 1,    /* bad argument or precondition */
  MWRC_E_PARSE = 2,    /* malformed channel document */
  MWRC_E_INVALID = 3,  /* channel or distribution fails validation */
  MWRC_E_CAPACITY = 4, /* request exceeds the enumeration cap */
  MWRC_E_IO = 5,       /* file cannot be opened or read */
  MWRC_E_INTERNAL = 6
} mwrc_status;

typedef enum mwrc_verdict { MWRC_IN = 0, MWRC_OUT = 1, MWRC_BOUNDARY = 2 } mwrc_verdict;

typedef enum mwrc_typicality { MWRC_TYPICAL_ROBUST = 0, MWRC_TYPICAL_WEAK = 1 } mwrc_typicality;

typedef enum mwrc_input_source {
  MWRC_INPUT_UNIFORM = 0, /* uniform p(x_i) and p(x0), no time sharing */
  MWRC_INPUT_WITNESS = 1  /* the membership witness at the requested rates */
} mwrc_input_source;

typedef struct mwrc_channel mwrc_channel;
typedef struct mwrc_buffer mwrc_buffer;

MWRC_API const char* mwrc_version(void);
MWRC_API const char* mwrc_last_error(void);
MWRC_API const char* mwrc_status_name(mwrc_status status);

MWRC_API const char* mwrc_buffer_data(const mwrc_buffer* buffer);
MWRC_API size_t mwrc_buffer_size(const mwrc_buffer* buffer);
MWRC_API void mwrc_buffer_free(mwrc_buffer* buffer);

/* Structural parse. A channel that parses but fails validation is still
 * returned so mwrc_check can report it; the other operations reject it with
 * MWRC_E_INVALID. */
MWRC_API mwrc_status mwrc_channel_parse(const char* text, size_t length, mwrc_channel** out);
MWRC_API mwrc_status mwrc_channel_load(const char* path, mwrc_channel** out);
MWRC_API void mwrc_channel_free(mwrc_channel* channel);
MWRC_API size_t mwrc_channel_users(const mwrc_channel* channel);
/* 64 hex characters plus a terminator. */
MWRC_API mwrc_status mwrc_channel_digest(const mwrc_channel* channel, char out[65]);
MWRC_API mwrc_status mwrc_channel_serialize(const mwrc_channel* channel, mwrc_buffer** out);

typedef struct mwrc_region_options {
  double tolerance;
  uint64_t seed;
  size_t sampling_budget;
  size_t refinement_steps;
  size_t max_iterations; /* downlink optimizer budget */
} mwrc_region_options;

MWRC_API void mwrc_region_options_init(mwrc_region_options* options);

/* Validation and special-case report. `valid` and `special` may be NULL;
 * `doc` receives the JSON payload when not NULL. */
MWRC_API mwrc_status mwrc_check(const mwrc_channel* channel, int* valid, int* special,
                                mwrc_buffer** doc);

MWRC_API mwrc_status mwrc_member(const mwrc_channel* channel, const double* rates, size_t count,
                                 const mwrc_region_options* options, mwrc_verdict* verdict,
                                 double* min_slack, mwrc_buffer** doc);

/* `directions` holds num_directions rows of L weights each. */
MWRC_API mwrc_status mwrc_region(const mwrc_channel* channel, const double* directions,
                                 size_t num_directions, const mwrc_region_options* options,
                                 mwrc_buffer** csv, mwrc_buffer** doc);

typedef struct mwrc_sim_options {
  const double* rates; /* L entries */
  size_t num_rates;
  const size_t* block_lengths;
  size_t num_block_lengths;
  size_t trials;
  double epsilon;
  uint64_t seed;
  size_t blocks;
  mwrc_typicality typicality;
  int share_codebook;
  int distinct_codewords;
  mwrc_input_source input_source;
  size_t threads;
  /* Used to find the witness when input_source is MWRC_INPUT_WITNESS. */
  mwrc_region_options region;
} mwrc_sim_options;

MWRC_API void mwrc_sim_options_init(mwrc_sim_options* options);

MWRC_API mwrc_status mwrc_simulate(const mwrc_channel* channel, const mwrc_sim_options* options,
                                   mwrc_buffer** csv, mwrc_buffer** doc);

#ifdef __cplusplus
}
#endif

#endif
