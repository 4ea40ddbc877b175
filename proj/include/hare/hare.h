#ifndef HARE_HARE_H
#define HARE_HARE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HARE_BUILDING)
#    define HARE_API __declspec(dllexport)
#  else
#    define HARE_API __declspec(dllimport)
#  endif
#else
#  define HARE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hare_status {
    HARE_OK = 0,
    HARE_ERR_CONFIG = 1,     /* invalid configuration; message names the field path */
    HARE_ERR_RUNTIME = 2,    /* simulation or I/O failure during a run */
    HARE_ERR_ARGUMENT = 3,   /* null handle, null output pointer, bad argument */
    HARE_ERR_PROTOCOL = 4,   /* malformed command or unknown target */
    HARE_ERR_PARSE = 5,      /* corrupt record; message starts with "line N:" */
    HARE_ERR_DIVERGENCE = 6, /* replay did not reproduce the record */
    HARE_ERR_IO = 7          /* file could not be read or written */
} hare_status;

typedef struct hare_sim hare_sim;
typedef struct hare_server hare_server;

/* Strings returned through char** outputs are owned by the caller. */
HARE_API void hare_string_free(char* s);

/* Message for the last failed call on this thread ("" after success). */
HARE_API const char* hare_last_error(void);
HARE_API const char* hare_version(void);

/* ---- single simulation ------------------------------------------------ */

/* config_json: run configuration; seed overrides its "seed" field. */
HARE_API hare_status hare_sim_create(const char* config_json, uint64_t seed, hare_sim** out);
HARE_API void hare_sim_destroy(hare_sim* sim);

/* Advances up to `ticks` ticks; *done (optional) is set when the configured duration is reached. */
HARE_API hare_status hare_sim_step(hare_sim* sim, int64_t ticks, int* done);
/* Runs to the configured duration and appends the summary. */
HARE_API hare_status hare_sim_run(hare_sim* sim);
HARE_API hare_status hare_sim_tick(const hare_sim* sim, int64_t* tick);

/* command_json: {"kind"?, "target", "delta", "client_tag"?}, delta in money units.
   Applied immediately, i.e. before the next tick's decisions. Rejections are
   HARE_OK with "accepted": false in the result. */
HARE_API hare_status hare_sim_submit(hare_sim* sim, const char* command_json, char** result_json);

HARE_API hare_status hare_sim_frame(const hare_sim* sim, int include_cars, char** frame_json);
HARE_API hare_status hare_sim_metrics(const hare_sim* sim, char** metrics_json);
/* Writes the record (JSON lines) as it stands. */
HARE_API hare_status hare_sim_write_record(const hare_sim* sim, const char* path);

/* ---- batch and analysis ----------------------------------------------- */

/* record_path and metrics_json may be NULL. */
HARE_API hare_status hare_run_headless(const char* config_json, uint64_t seed, const char* record_path,
                                       char** metrics_json);

/* matrix_json: config with a "matrix" object. out_dir may be NULL (no files).
   workers = 0 uses every core. summary_csv may be NULL. */
HARE_API hare_status hare_run_matrix(const char* matrix_json, const char* out_dir, unsigned workers,
                                     char** summary_csv);

/* HARE_ERR_DIVERGENCE when the replay differs; the report names the first tick. */
HARE_API hare_status hare_replay_check(const char* record_path, char** report_json);

/* Replays the record through a gateway session on `port` (0: any free port),
   paced at `speed` times real time, then compares it like hare_replay_check.
   `on_listening` (optional) receives the bound port before streaming starts. */
HARE_API hare_status hare_replay_stream(const char* record_path, double speed, uint16_t port,
                                        void (*on_listening)(uint16_t port, void* user), void* user,
                                        char** report_json);

/* Oracle optimum for a configuration: throughput (traffic) or welfare over the
   configured days (water). */
HARE_API hare_status hare_oracle(const char* config_json, char** result_json);

HARE_API hare_status hare_forecast_accuracy(const char* record_path, char** result_json);

/* ---- gateway ---------------------------------------------------------- */

/* options_json: {"host", "port", "config", "pacing": "realtime"|"free"|"manual", "frame_rate"};
   HARE_PORT / HARE_FRAME_RATE override. May be NULL. */
HARE_API hare_status hare_server_start(const char* options_json, hare_server** out);
HARE_API uint16_t hare_server_port(const hare_server* server);
/* Stops serving and releases the handle. */
HARE_API void hare_server_stop(hare_server* server);

#ifdef __cplusplus
}
#endif

#endif
