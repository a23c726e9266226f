#ifndef FLTORRENT_H
#define FLTORRENT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FLT_API __declspec(dllexport)
#else
#define FLT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  FLT_OK = 0,
  FLT_ERR_ARG = 1,     /* null pointer, bad key or index */
  FLT_ERR_CONFIG = 2,  /* invalid or infeasible configuration */
  FLT_ERR_IO = 3,
  FLT_ERR_AUDIT = 4,   /* round log rejected */
  FLT_ERR_INTERNAL = 5
} flt_status;

typedef struct flt_config flt_config;
typedef struct flt_report flt_report;

/* Message for the last failing call on this thread; never NULL. */
FLT_API const char* flt_last_error(void);
FLT_API const char* flt_version(void);

FLT_API flt_status flt_config_default(flt_config** out);
FLT_API flt_status flt_config_parse(const char* json, flt_config** out);
FLT_API flt_status flt_config_load(const char* path, flt_config** out);
/* value uses JSON syntax; bare words are taken as strings. */
FLT_API flt_status flt_config_set(flt_config* cfg, const char* key, const char* value);
/* Canonical JSON; caller frees with flt_string_free. */
FLT_API flt_status flt_config_json(const flt_config* cfg, char** out);
FLT_API void flt_config_free(flt_config* cfg);

/* attacks: "all", "none" or a comma list of sequential,amount_greedy,clustering. */
FLT_API flt_status flt_run(const flt_config* cfg, const char* attacks, int audit, flt_report** out);
/* values: comma list applied to config key `axis`; replicate r uses seed + r. */
FLT_API flt_status flt_sweep(const flt_config* cfg, const char* axis, const char* values, int replicates,
                             const char* attacks, int audit, int jobs, flt_report** out);

FLT_API size_t flt_report_count(const flt_report* rep);
/* Scalar metrics by name, e.g. "warmup_slots", "round_seconds", "warmup_share",
   "utilization", "asr_max:sequential", "asr_mean:clustering",
   "any_succeeds:sequential", "audit_accept". */
FLT_API flt_status flt_report_get(const flt_report* rep, size_t index, const char* name, double* out);
/* Empty string when accepted or not audited. Owned by the report. */
FLT_API const char* flt_report_audit_reason(const flt_report* rep, size_t index);
FLT_API flt_status flt_report_emit(const flt_report* rep, const char* dir);
/* Round log and observation CSV are kept only for single runs. */
FLT_API flt_status flt_report_write_log(const flt_report* rep, const char* path);
FLT_API flt_status flt_report_write_observations(const flt_report* rep, const char* path);
FLT_API void flt_report_free(flt_report* rep);

/* 64 hex digits plus terminator. */
FLT_API flt_status flt_commit_seed(uint64_t seed, char out[65]);
/* Parses a round log file and verifies it against cfg (whose seed is ignored).
   An empty commit means the one recorded in the log header. */
FLT_API flt_status flt_verify_log(const char* path, const flt_config* cfg, const char* commit, uint64_t seed);

FLT_API void flt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
