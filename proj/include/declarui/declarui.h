/* C API for the declarui pipeline library.
 *
 * Conventions:
 *   - every function returns a declarui_status; DECLARUI_OK (0) on success
 *   - on failure, declarui_last_error() returns a thread-local message
 *   - output strings are heap-allocated; release with declarui_string_free
 *   - declarui_ptg is an opaque handle; release with declarui_ptg_free
 */
#ifndef DECLARUI_H
#define DECLARUI_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum declarui_status {
  DECLARUI_OK = 0,
  DECLARUI_ERR_SCHEMA = 1,
  DECLARUI_ERR_INTEGRITY = 2,
  DECLARUI_ERR_EMPTY_PTG = 3,
  DECLARUI_ERR_UNKNOWN_PAGE = 4,
  DECLARUI_ERR_CLIENT = 5,
  DECLARUI_ERR_AUTH = 6,
  DECLARUI_ERR_BUDGET = 7,
  DECLARUI_ERR_REPLY_FORMAT = 8,
  DECLARUI_ERR_EMPTY_CODE = 9,
  DECLARUI_ERR_JSON_EXTRACT = 10,
  DECLARUI_ERR_NOTHING_TO_REPAIR = 11,
  DECLARUI_ERR_ATTACHMENT_CAP = 12,
  DECLARUI_ERR_IMAGE = 13,
  DECLARUI_ERR_DIMENSION = 14,
  DECLARUI_ERR_TOO_SMALL = 15,
  DECLARUI_ERR_TIMEOUT = 16,
  DECLARUI_ERR_SPAWN = 17,
  DECLARUI_ERR_MISSING_FILE = 18,
  DECLARUI_ERR_EMPTY_SET = 19,
  DECLARUI_ERR_NO_COMPILED_APPS = 20,
  DECLARUI_ERR_NO_FAILED_APPS = 21,
  DECLARUI_ERR_MISSING_TIMING = 22,
  DECLARUI_ERR_CONFIG = 23,
  DECLARUI_ERR_INTERNAL = 99
} declarui_status;

typedef struct declarui_ptg declarui_ptg;

const char* declarui_version(void);
const char* declarui_last_error(void);
void declarui_string_free(char* text);

/* --- Page Transition Graphs ------------------------------------------- */

declarui_status declarui_ptg_parse(const char* json, declarui_ptg** out);
/* Schema checks only; integrity problems surface via validate. */
declarui_status declarui_ptg_parse_lenient(const char* json,
                                           declarui_ptg** out);
declarui_status declarui_ptg_load(const char* path, declarui_ptg** out);
declarui_status declarui_ptg_serialize(const declarui_ptg* ptg,
                                       char** out_json);
/* out_violations_json: [{code, severity, message, element_id}, ...] */
declarui_status declarui_ptg_validate(const declarui_ptg* ptg,
                                      char** out_violations_json,
                                      int* out_error_count);
/* utg_json: {"edges":[{"from":str,"to":str}]}
 * result: {"pcr": fraction, "matched":[...], "missing":[...]} */
declarui_status declarui_ptg_coverage(const declarui_ptg* ptg,
                                      const char* utg_json,
                                      char** out_result_json);
void declarui_ptg_free(declarui_ptg* ptg);

declarui_status declarui_normalize_page_name(const char* name, char** out);

/* --- Navigation checks ------------------------------------------------- */

/* out_json: [{"target": str, "pattern": str, "line": int}, ...] */
declarui_status declarui_extract_navigation(const char* code,
                                            const char* framework,
                                            char** out_json);
declarui_status declarui_navcheck_page(const char* code, const char* page_id,
                                       const declarui_ptg* ptg,
                                       const char* framework,
                                       char** out_report_json);
/* Offline audit of an existing project directory against a PTG file. */
declarui_status declarui_navcheck_project(const char* project_dir,
                                          const char* ptg_path,
                                          const char* framework,
                                          char** out_report_json);
/* Shipped extraction patterns for auditing. */
declarui_status declarui_framework_patterns(const char* framework,
                                            char** out_json);

/* --- Metrics ------------------------------------------------------------ */

declarui_status declarui_ssim_files(const char* image_a, const char* image_b,
                                    double* out_value);
/* format: 0 = JSON, 1 = markdown table */
declarui_status declarui_eval(const char* runs_dir, const char* utg_dir,
                              const char* screenshots_dir, int pooled_pcr,
                              int format, char** out_report);

/* --- Pipeline stages ----------------------------------------------------- */

/* Full run per the config file; returns the persisted manifest JSON.
 * A CompilationFailed or Aborted run still returns DECLARUI_OK with the
 * outcome recorded in the manifest. */
declarui_status declarui_run_pipeline(const char* config_path,
                                      char** out_manifest_json);
/* PTG construction only: model builds ptg.json from the config's designs
 * directory; validation results are returned for human review. */
declarui_status declarui_ptg_build(const char* config_path,
                                   const char* out_path,
                                   char** out_violations_json);
/* Perception only: writes one PageDesign JSON bundle per page into out_dir. */
declarui_status declarui_annotate(const char* config_path, const char* out_dir,
                                  char** out_summary_json);
/* Compile-repair loop over an externally generated project. */
declarui_status declarui_compile_loop(const char* config_path,
                                      const char* project_dir,
                                      char** out_result_json);

#ifdef __cplusplus
}
#endif

#endif /* DECLARUI_H */
