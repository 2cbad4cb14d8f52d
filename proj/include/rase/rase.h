/* Copyright 2026 The rase-echo Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the RASE simulation and analysis library. Every function
 * returns a rase_status; on failure rase_last_error() holds a message for
 * the calling thread until its next call into the library.
 */
#ifndef RASE_RASE_H
#define RASE_RASE_H

#include <stddef.h>
#include <stdint.h>

#if defined(RASE_BUILDING_LIBRARY)
#define RASE_API __attribute__((visibility("default")))
#else
#define RASE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rase_status {
  RASE_OK = 0,
  RASE_ERR_CONFIG = 1,   /* usage, configuration, domain, output I/O */
  RASE_ERR_FORMAT = 2,   /* malformed or unreadable input data */
  RASE_ERR_NUMERIC = 3,  /* numeric, calibration or convention failure */
  RASE_ERR_INTERNAL = 4
} rase_status;

/* Receives one line of human-readable output (no trailing newline). */
typedef void (*rase_line_fn)(const char* line, void* user);

typedef struct rase_config rase_config;
typedef struct rase_state rase_state;

RASE_API const char* rase_last_error(void);
RASE_API const char* rase_version(void);

/* Caps worker threads for this process; 0 restores the default. */
RASE_API void rase_set_threads(unsigned n);

RASE_API rase_status rase_config_load(const char* path, rase_config** out);
RASE_API rase_status rase_config_parse(const char* text, rase_config** out);
RASE_API rase_status rase_config_set_seed(rase_config* config, uint64_t seed);
RASE_API void rase_config_free(rase_config* config);

/* csv_path may be NULL. The manifest goes to `sink`. */
RASE_API rase_status rase_simulate(const rase_config* config, const char* out_path,
                                   const char* csv_path, rase_line_fn sink, void* user);

RASE_API rase_status rase_analyze(const char* shots_path, const rase_config* config,
                                  const char* out_dir, rase_line_fn sink, void* user);

/* Exactly one of eta / target_dip must be non-NULL. The CSV text goes to
 * out_path when non-NULL, otherwise line by line to `sink`. */
RASE_API rase_status rase_theory(double alpha_l, const double* eta, const double* target_dip,
                                 double excess, const char* out_path, rase_line_fn sink,
                                 void* user);

RASE_API rase_status rase_report(const char* dir, rase_line_fn sink, void* user);

/* Heterodyne-measured ASE/RASE state. */
RASE_API rase_status rase_state_create(double alpha_l, double eta, double excess,
                                       rase_state** out);
RASE_API void rase_state_free(rase_state* state);
/* Row-major 4x4 over (x1, p1, x2, p2). */
RASE_API rase_status rase_state_covariance(const rase_state* state, double out[16]);
RASE_API rase_status rase_state_inseparability(const rase_state* state, double b, double* s);
RASE_API rase_status rase_state_min(const rase_state* state, double* b_star, double* s_star);

RASE_API rase_status rase_calibrate_eta(double alpha_l, double target_dip, double* eta);

#ifdef __cplusplus
}
#endif

#endif /* RASE_RASE_H */
