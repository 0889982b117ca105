/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright (c) 2026 dacsfl contributors */

#ifndef DACSFL_H
#define DACSFL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DACSFL_API __attribute__((visibility("default")))
#else
#define DACSFL_API
#endif

typedef enum {
  DACSFL_OK = 0,
  DACSFL_ERR_PARSE = 1,
  DACSFL_ERR_UNKNOWN_IDENTIFIER = 2,
  DACSFL_ERR_SCHEMA = 3,
  DACSFL_ERR_DIMENSION = 4,
  DACSFL_ERR_CERTIFICATION = 5,
  DACSFL_ERR_SINGULAR = 6,
  DACSFL_ERR_NUMERICAL = 7,
  DACSFL_ERR_IO = 8,
  DACSFL_ERR_ARGUMENT = 9,
  DACSFL_ERR_NOT_SUPPORTED = 10,
  DACSFL_ERR_INTERNAL = 11
} dacsfl_status;

typedef enum { DACSFL_PASS = 0, DACSFL_FAIL = 1, DACSFL_UNDECIDED = 2 } dacsfl_verdict;

typedef enum { DACSFL_MODE_INTERNAL = 0, DACSFL_MODE_EXTERNAL = 1 } dacsfl_mode;

typedef struct dacsfl_system dacsfl_system;
typedef struct dacsfl_settings dacsfl_settings;
typedef struct dacsfl_report dacsfl_report;

/* Message of the last failed call on this thread, "" after a success. */
DACSFL_API const char* dacsfl_last_error(void);
DACSFL_API const char* dacsfl_status_name(dacsfl_status status);
DACSFL_API const char* dacsfl_version(void);

DACSFL_API dacsfl_status dacsfl_settings_create(dacsfl_settings** out);
DACSFL_API void dacsfl_settings_free(dacsfl_settings* s);
DACSFL_API dacsfl_status dacsfl_settings_set_seed(dacsfl_settings* s, uint64_t seed);
DACSFL_API dacsfl_status dacsfl_settings_set_radius(dacsfl_settings* s, double radius);
DACSFL_API dacsfl_status dacsfl_settings_set_tol_zero(dacsfl_settings* s, double tol);
DACSFL_API dacsfl_status dacsfl_settings_set_tol_rank(dacsfl_settings* s, double tol);
DACSFL_API dacsfl_status dacsfl_settings_set_step(dacsfl_settings* s, double step);
DACSFL_API dacsfl_status dacsfl_settings_set_horizon(dacsfl_settings* s, double horizon);

DACSFL_API dacsfl_status dacsfl_system_load(const char* path, dacsfl_system** out);
DACSFL_API dacsfl_status dacsfl_system_parse(const char* text, dacsfl_system** out);
DACSFL_API void dacsfl_system_free(dacsfl_system* sys);
DACSFL_API dacsfl_status dacsfl_system_dims(const dacsfl_system* sys, int* l, int* n, int* m);
/* Standard system file text; owned by the handle. */
DACSFL_API const char* dacsfl_system_text(const dacsfl_system* sys);

/* Reduction and (CR) at the working point. */
DACSFL_API dacsfl_status dacsfl_check(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out);
/* Text: reduction trace.  Document: the restriction as a system file. */
DACSFL_API dacsfl_status dacsfl_reduce(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out);
/* Document: explicitation of the restriction. */
DACSFL_API dacsfl_status dacsfl_explicitate(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_report** out);
DACSFL_API dacsfl_status dacsfl_distributions(const dacsfl_system* sys, const dacsfl_settings* s,
                                              dacsfl_report** out);
/* candidates_path may be NULL.  Document: JSON report. */
DACSFL_API dacsfl_status dacsfl_linearize(const dacsfl_system* sys, const dacsfl_settings* s, dacsfl_mode mode,
                                          const char* candidates_path, dacsfl_report** out);
/* Signals are expressions in t, the states and the parameters.  Document: CSV. */
DACSFL_API dacsfl_status dacsfl_simulate(const dacsfl_system* sys, const dacsfl_settings* s,
                                         const char* const* u_signals, size_t n_u, const char* const* v_signals,
                                         size_t n_v, dacsfl_report** out);
DACSFL_API dacsfl_status dacsfl_verify_equivalence(const dacsfl_system* a, const dacsfl_system* b,
                                                   const char* witness_path, const dacsfl_settings* s,
                                                   dacsfl_report** out);
/* Signals drive the canonical target.  Document: CSV of the lifted source trajectory. */
DACSFL_API dacsfl_status dacsfl_verify_correspondence(const dacsfl_system* sys, const dacsfl_settings* s,
                                                      const char* candidates_path, const char* const* u_signals,
                                                      size_t n_u, const char* const* v_signals, size_t n_v,
                                                      dacsfl_report** out);

DACSFL_API void dacsfl_report_free(dacsfl_report* r);
DACSFL_API dacsfl_verdict dacsfl_report_verdict(const dacsfl_report* r);
DACSFL_API const char* dacsfl_report_summary(const dacsfl_report* r);
DACSFL_API const char* dacsfl_report_text(const dacsfl_report* r);
DACSFL_API const char* dacsfl_report_document(const dacsfl_report* r);

#ifdef __cplusplus
}
#endif

#endif
