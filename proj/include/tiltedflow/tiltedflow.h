/*
   Copyright 2026 The tiltedflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#ifndef TILTEDFLOW_TILTEDFLOW_H_
#define TILTEDFLOW_TILTEDFLOW_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define TF_API __attribute__((visibility("default")))
#else
#define TF_API
#endif

typedef enum tf_status {
  TF_OK = 0,
  TF_INVALID_ARGUMENT,
  TF_EMPTY_CYLINDER,
  TF_NOT_ADMISSIBLE,
  TF_DEGENERATE_CHORD,
  TF_EMPTY_ARC,
  TF_INVALID_NETWORK,
  TF_TOO_LARGE,
  TF_OVERFLOW_RISK,
  TF_DOES_NOT_FIT,
  TF_BAD_TRIANGLE,
  TF_HYPOTHESIS_VIOLATION,
  TF_SHAPE_VIOLATION,
  TF_ZERO_VECTOR,
  TF_CONFIG_ERROR,
  TF_MISSING_MANIFEST,
  TF_IO_ERROR,
  TF_INTERNAL_ERROR,
} tf_status;

typedef struct tf_cylinder tf_cylinder;
typedef struct tf_field tf_field;

TF_API const char* tf_version(void);
TF_API const char* tf_status_name(tf_status status);
// Message of the last failing call on this thread; never NULL.
TF_API const char* tf_last_error(void);
// Releases strings returned through char** out-parameters.
TF_API void tf_string_free(char* s);

// Spec JSON: {"direction":[p,q], "a":[[num,den],[num,den]], "b":[...], "n":n, "h":[num,den]}.
TF_API tf_status tf_cylinder_create(const char* spec_json, tf_cylinder** out);
TF_API void tf_cylinder_destroy(tf_cylinder* cyl);
TF_API tf_status tf_cylinder_counts(const tf_cylinder* cyl, int64_t* vertices, int64_t* edges);
// JSON lines: one header line, then one line per vertex and per edge.
TF_API tf_status tf_cylinder_dump(const tf_cylinder* cyl, char** jsonl);

// Samples the edges of cyl with the distribution of an experiment config.
TF_API tf_status tf_field_sample(const tf_cylinder* cyl, const char* config_json, uint64_t seed,
                                 uint64_t replicate, tf_field** out);
TF_API tf_status tf_field_write(const tf_field* field, const char* path);
TF_API tf_status tf_field_read(const char* path, tf_field** out);
TF_API void tf_field_destroy(tf_field* field);
TF_API int64_t tf_field_size(const tf_field* field);

// mode is "tau" or "phi". Result JSON carries the value and the cut edge ids.
TF_API tf_status tf_flow_solve(const tf_cylinder* cyl, const tf_field* field, const char* mode, char** result_json);

// Duality reports as JSON lines; *failures counts replicates with unequal values.
TF_API tf_status tf_dual_check(const tf_cylinder* cyl, const char* dist_json, uint64_t seed, int64_t reps,
                               int threads, char** jsonl, int64_t* failures);

typedef struct tf_run_options {
  const char* overrides_json;  // JSON merge patch applied to the config, or NULL
  int has_seed;
  uint64_t seed;
  int threads;                 // 0 keeps the config value
  const char* out_dir;         // NULL keeps the config value
  int write_outputs;           // 0 runs without touching the file system
} tf_run_options;

typedef struct tf_run_summary {
  int64_t checks;
  int64_t failures;
  double seconds;
  char* config_hash;  // free with tf_string_free
  char* messages;     // newline separated failure messages; free with tf_string_free
} tf_run_summary;

TF_API tf_status tf_run(const char* config_json, const tf_run_options* opts, tf_run_summary* summary);
// Result rows of a run without writing files.
TF_API tf_status tf_run_rows(const char* config_json, const tf_run_options* opts, char** jsonl, int64_t* failures);
TF_API tf_status tf_report(const char* dir, char** text);
// Canonical serialization of a config after validation.
TF_API tf_status tf_config_canonical(const char* config_json, char** out);

#ifdef __cplusplus
}
#endif

#endif  // TILTEDFLOW_TILTEDFLOW_H_
