#ifndef IOTBED_IOTBED_H
#define IOTBED_IOTBED_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef IOTBED_BUILDING
#    define IOTB_API __declspec(dllexport)
#  else
#    define IOTB_API __declspec(dllimport)
#  endif
#else
#  define IOTB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  IOTB_OK = 0,
  IOTB_E_INVALID_ARG = 1,
  IOTB_E_PARSE = 2,
  IOTB_E_VALIDATION = 3,
  IOTB_E_NOT_FOUND = 4,
  IOTB_E_IO = 5,
  IOTB_E_RUNTIME = 6
} iotb_status;

typedef enum { IOTB_BACKEND_MEMORY = 0, IOTB_BACKEND_LOOPBACK = 1 } iotb_backend;

/* Configuration plus seed; every operation runs against one. */
typedef struct iotb_session iotb_session;

IOTB_API const char* iotb_version(void);
/* Message of the last failed call on this thread; never NULL. */
IOTB_API const char* iotb_last_error(void);
/* Frees strings returned through char** out-parameters. */
IOTB_API void iotb_string_free(char* s);

/* config_path may be NULL: $IOTBED_CONFIG, then ./iotbed.conf, then defaults. */
IOTB_API iotb_status iotb_session_open(const char* config_path, iotb_session** out);
IOTB_API void iotb_session_close(iotb_session* s);
IOTB_API iotb_status iotb_session_set_backend(iotb_session* s, iotb_backend backend);
IOTB_API iotb_status iotb_session_set_seed(iotb_session* s, uint64_t seed);
IOTB_API iotb_status iotb_session_set_runs_dir(iotb_session* s, const char* dir);
IOTB_API iotb_status iotb_session_set_registry_dir(iotb_session* s, const char* dir);

IOTB_API iotb_status iotb_list_elements(iotb_session* s, char** out_text);

/* Parses, validates and executes a scenario file. exit_code follows the
   report: 0, 1, or 2 when a test errored. run_dir and report_text may be
   NULL. */
IOTB_API iotb_status iotb_run_scenario(iotb_session* s, const char* scenario_path, char** run_dir,
                                       char** report_text, int* exit_code);
IOTB_API iotb_status iotb_render_report(iotb_session* s, const char* run_id, char** out_text);

/* target: device spec path, or a device element id from the registry.
   ports and score_list may be NULL. */
IOTB_API iotb_status iotb_scan(iotb_session* s, const char* target, const char* ports, const char* score_list,
                               char** out_text, int* exit_code);

/* Capture paths in the labels file resolve against captures_dir (NULL: the
   labels file's directory). max_depth/min_leaf <= 0 select the defaults.
   summary gets the training set size and, with a holdout, the confusion
   matrix. */
IOTB_API iotb_status iotb_profile_train(iotb_session* s, const char* captures_dir, const char* labels_path,
                                        const char* model_out, int max_depth, int min_leaf, double holdout,
                                        char** summary);
IOTB_API iotb_status iotb_profile_test(iotb_session* s, const char* model_path, const char* const* captures,
                                       size_t n_captures, char** table);

/* Records the device's traffic for duration_s of virtual time. */
IOTB_API iotb_status iotb_capture(iotb_session* s, const char* target, double duration_s, const char* out_path,
                                  size_t* n_records);

#ifdef __cplusplus
}
#endif

#endif
