#ifndef CRYPTAUDIT_CRYPTAUDIT_H
#define CRYPTAUDIT_CRYPTAUDIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CA_API __declspec(dllexport)
#else
#define CA_API __attribute__((visibility("default")))
#endif

typedef enum ca_status {
  CA_OK = 0,
  CA_ERR_INVALID_ARGUMENT = 1,
  CA_ERR_CONFIG = 2,
  CA_ERR_IO = 3,
  CA_ERR_PARSE = 4,
  CA_ERR_PROVIDER = 5,
  CA_ERR_INCONSISTENT = 6,
  CA_ERR_STRUCTURED_OUTPUT = 7,
  CA_ERR_UNSCRIPTED_CALL = 8,
  CA_ERR_RETRIES_EXHAUSTED = 9,
  CA_ERR_BUDGET_EXCEEDED = 10,
  CA_ERR_INTERNAL = 11
} ca_status;

typedef struct ca_config ca_config;
typedef struct ca_engine ca_engine;

typedef struct ca_scan_counts {
  size_t samples;
  size_t vulnerable;
  size_t likely_vulnerable;
  size_t no_issue_found;
  size_t analysis_failed;
} ca_scan_counts;

CA_API const char* ca_version(void);

/* Message of the last failed call on this thread; never NULL. */
CA_API const char* ca_last_error(void);
/* Configuration key of the last CA_ERR_CONFIG failure on this thread, or "". */
CA_API const char* ca_last_error_key(void);

/* Frees any char* returned through an out parameter. */
CA_API void ca_string_free(char* s);

CA_API ca_status ca_config_create(ca_config** out);
CA_API void ca_config_destroy(ca_config* cfg);
CA_API ca_status ca_config_set(ca_config* cfg, const char* key, const char* value);
CA_API ca_status ca_config_get(const ca_config* cfg, const char* key, char** out_value);
/* INI file; later calls and ca_config_set override earlier values. */
CA_API ca_status ca_config_load_file(ca_config* cfg, const char* path);
/* JSON array of settable keys. */
CA_API ca_status ca_config_keys(char** out_json);
/* Writes a JSON array of {"key", "value", "constraint"} (empty when valid).
   command: NULL or "", "kb-build", "kb-index", "kb-query", "scan", "eval",
   "curve-check". */
CA_API ca_status ca_config_validate(const ca_config* cfg, const char* command, char** out_violations_json);

/* policy_path and index_out may be NULL. out_summary_json may be NULL. */
CA_API ca_status ca_kb_build(const ca_config* cfg, const char* sources_dir, const char* policy_path,
                             const char* corpus_out, const char* index_out, char** out_summary_json);
CA_API ca_status ca_kb_index(const ca_config* cfg, const char* corpus_path, const char* index_out,
                             char** out_summary_json);

/* command selects what is loaded: "kb-query" needs corpus and index only;
   "scan" and "eval" also connect the chat backend. */
CA_API ca_status ca_engine_create(const ca_config* cfg, const char* command, ca_engine** out);
CA_API void ca_engine_destroy(ca_engine* engine);

/* The numbered knowledge block for text under the config's k and tau. */
CA_API ca_status ca_engine_query(ca_engine* engine, const char* text, char** out_block);

/* format: "machine", "human" or "both". out_summary_json may be NULL. */
CA_API ca_status ca_engine_scan(ca_engine* engine, const char* input, const char* out_dir, const char* format,
                                ca_scan_counts* out_counts, char** out_summary_json);

/* pipeline: "full" or "echo". Writes the JSON aggregate to out_path and the
   table next to it (.txt); out_table may be NULL. */
CA_API ca_status ca_engine_eval(ca_engine* engine, const char* cases_path, const char* out_path,
                                const char* pipeline, char** out_table);

/* Decimal or 0x-hex parameters of y^2 = x^3 + ax + b over F_p. */
CA_API ca_status ca_curve_check(const ca_config* cfg, const char* p, const char* a, const char* b,
                                char** out_text);

#ifdef __cplusplus
}
#endif

#endif
