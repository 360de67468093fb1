/*
 * radarcal: temperature drift compensation for FMCW radar amplitude profiles.
 *
 * C interface over the C++ core. Every object is an opaque handle created by a
 * radarcal_*_read / _create / _load / compute call and released with the
 * matching _free function (NULL is accepted by every _free). Functions return
 * a radarcal_status; on failure radarcal_last_error() holds a message for the
 * calling thread until its next failing call.
 *
 * Indices are zero-based. Handles are immutable once created and may be read
 * from several threads concurrently.
 */
#ifndef RADARCAL_RADARCAL_H
#define RADARCAL_RADARCAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RADARCAL_BUILDING_LIBRARY)
#    define RADARCAL_API __declspec(dllexport)
#  else
#    define RADARCAL_API __declspec(dllimport)
#  endif
#else
#  define RADARCAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum radarcal_status {
  RADARCAL_OK = 0,
  RADARCAL_ERR_VALIDATION = 1,       /* malformed input, dimension mismatch, degenerate data */
  RADARCAL_ERR_IO = 2,               /* file could not be opened, read or written */
  RADARCAL_ERR_INVALID_ARGUMENT = 3, /* NULL handle or out-of-range index */
  RADARCAL_ERR_INTERNAL = 4
} radarcal_status;

/* Detail codes, finer than radarcal_status; see radarcal_last_error_code(). */
typedef enum radarcal_error_code {
  RADARCAL_E_NONE = 0,
  RADARCAL_E_BAD_MAGIC,
  RADARCAL_E_TRUNCATED,
  RADARCAL_E_TRAILING_DATA,
  RADARCAL_E_NON_FINITE,
  RADARCAL_E_BAD_DIMENSIONS,
  RADARCAL_E_BAD_HEADER,
  RADARCAL_E_PARSE,
  RADARCAL_E_MISSING_INDEX,
  RADARCAL_E_DUPLICATE_INDEX,
  RADARCAL_E_LENGTH_MISMATCH,
  RADARCAL_E_OUT_OF_RANGE,
  RADARCAL_E_DEGENERATE_TRAINING,
  RADARCAL_E_INSUFFICIENT_DATA,
  RADARCAL_E_UNDEFINED_CORRELATION,
  RADARCAL_E_MALFORMED,
  RADARCAL_E_VERSION_MISMATCH,
  RADARCAL_E_GAIN_NOT_POSITIVE,
  RADARCAL_E_IO,
  RADARCAL_E_OTHER
} radarcal_error_code;

RADARCAL_API const char* radarcal_version(void);
RADARCAL_API const char* radarcal_last_error(void);
RADARCAL_API radarcal_error_code radarcal_last_error_code(void);

typedef struct radarcal_radar_config {
  double start_freq_hz;
  double end_freq_hz;
  uint32_t num_antennas;
  uint32_t num_chirps;
  uint32_t num_samples;
} radarcal_radar_config;

/* Defaults: 58-63.5 GHz, 3 antennas, 2 chirps, 32 samples, train fraction 0.7. */
RADARCAL_API void radarcal_radar_config_default(radarcal_radar_config* out);

/* Key-value acquisition config (radar keys plus train_fraction). */
RADARCAL_API radarcal_status radarcal_config_load(const char* path, radarcal_radar_config* out_radar,
                                                  double* out_train_fraction);

/* ---- radar cube (RDC1) ---- */

typedef struct radarcal_cube radarcal_cube;

/* `iq` holds frames*A*C*N interleaved (I, Q) pairs in f, a, c, n order. */
RADARCAL_API radarcal_status radarcal_cube_create(const radarcal_radar_config* config, uint32_t num_frames,
                                                  const double* iq, size_t iq_len, radarcal_cube** out);
RADARCAL_API radarcal_status radarcal_cube_read(const char* path, radarcal_cube** out);
RADARCAL_API radarcal_status radarcal_cube_write(const radarcal_cube* cube, const char* path);
RADARCAL_API radarcal_status radarcal_cube_dims(const radarcal_cube* cube, uint32_t* frames, uint32_t* antennas,
                                                uint32_t* chirps, uint32_t* samples);
RADARCAL_API radarcal_status radarcal_cube_sample(const radarcal_cube* cube, uint32_t f, uint32_t a, uint32_t c,
                                                  uint32_t n, double* i, double* q);
RADARCAL_API void radarcal_cube_free(radarcal_cube* cube);

/* ---- temperature log (CSV) ---- */

typedef struct radarcal_temps radarcal_temps;

RADARCAL_API radarcal_status radarcal_temps_create(const double* temps, size_t count, radarcal_temps** out);
RADARCAL_API radarcal_status radarcal_temps_read(const char* path, radarcal_temps** out);
RADARCAL_API radarcal_status radarcal_temps_write(const radarcal_temps* temps, const char* path);
RADARCAL_API size_t radarcal_temps_size(const radarcal_temps* temps);
/* Copies min(size, capacity) values into `out`. */
RADARCAL_API radarcal_status radarcal_temps_copy(const radarcal_temps* temps, double* out, size_t capacity);
RADARCAL_API radarcal_status radarcal_temps_slice(const radarcal_temps* temps, size_t begin, size_t end,
                                                  radarcal_temps** out);
RADARCAL_API void radarcal_temps_free(radarcal_temps* temps);

/* ---- amplitude tensor (RAP1) ---- */

typedef struct radarcal_amplitudes radarcal_amplitudes;

/* Range-FFT pipeline. `threads` = 0 or 1 runs single-threaded; output is independent of it. */
RADARCAL_API radarcal_status radarcal_compute_profiles(const radarcal_cube* cube, unsigned threads,
                                                       radarcal_amplitudes** out);
RADARCAL_API radarcal_status radarcal_amplitudes_read(const char* path, radarcal_amplitudes** out);
RADARCAL_API radarcal_status radarcal_amplitudes_write(const radarcal_amplitudes* ap, const char* path);
RADARCAL_API radarcal_status radarcal_amplitudes_dims(const radarcal_amplitudes* ap, uint32_t* frames,
                                                      uint32_t* antennas, uint32_t* bins);
RADARCAL_API radarcal_status radarcal_amplitudes_get(const radarcal_amplitudes* ap, uint32_t f, uint32_t a,
                                                     uint32_t b, double* out);
RADARCAL_API radarcal_status radarcal_amplitudes_slice(const radarcal_amplitudes* ap, size_t begin, size_t end,
                                                       radarcal_amplitudes** out);
RADARCAL_API void radarcal_amplitudes_free(radarcal_amplitudes* ap);

/* ---- chronological split ---- */

/* floor(frames * train_fraction); train_fraction must lie in (0, 1). */
RADARCAL_API radarcal_status radarcal_split_boundary(size_t frames, double train_fraction, size_t* out_boundary);

/* ---- calibration model (JSON) ---- */

typedef struct radarcal_model radarcal_model;

typedef struct radarcal_fit_options {
  double epsilon;          /* division guard, > 0 */
  int has_t_ref;           /* nonzero: use t_ref instead of the mean training temperature */
  double t_ref;
  const uint32_t* bins;    /* NULL: every bin except DC */
  size_t num_bins;
} radarcal_fit_options;

RADARCAL_API void radarcal_fit_options_default(radarcal_fit_options* out);
/* Fits on the whole of `ap`/`temps`; slice first for a train split. */
RADARCAL_API radarcal_status radarcal_fit(const radarcal_amplitudes* ap, const radarcal_temps* temps,
                                          const radarcal_fit_options* options, radarcal_model** out);
RADARCAL_API radarcal_status radarcal_model_load(const char* path, radarcal_model** out);
RADARCAL_API radarcal_status radarcal_model_save(const radarcal_model* model, const char* path);

typedef struct radarcal_model_info {
  uint32_t num_antennas;
  uint32_t num_bins;
  double t_ref;
  double t_min;
  double t_max;
  double epsilon;
  size_t num_bin_models;
} radarcal_model_info;

RADARCAL_API radarcal_status radarcal_model_info_get(const radarcal_model* model, radarcal_model_info* out);
/* Fitted line for (antenna, bin); RADARCAL_ERR_INVALID_ARGUMENT if none was fitted. */
RADARCAL_API radarcal_status radarcal_model_line(const radarcal_model* model, uint32_t antenna, uint32_t bin,
                                                 double* slope, double* intercept);
/* clamp != 0 limits t to the training range before evaluating the line. */
RADARCAL_API radarcal_status radarcal_predict(const radarcal_model* model, uint32_t antenna, uint32_t bin, double t,
                                              int clamp, double* out);
RADARCAL_API void radarcal_model_free(radarcal_model* model);

/* ---- correction ---- */

typedef struct radarcal_flags radarcal_flags;

typedef struct radarcal_flag {
  uint32_t frame;
  uint32_t antenna;
  uint32_t bin;
} radarcal_flag;

RADARCAL_API radarcal_status radarcal_apply_correction(const radarcal_model* model, const radarcal_amplitudes* ap,
                                                       const radarcal_temps* temps, int clamp,
                                                       radarcal_amplitudes** out_tcap, radarcal_flags** out_flags);
RADARCAL_API size_t radarcal_flags_count(const radarcal_flags* flags);
RADARCAL_API radarcal_status radarcal_flags_get(const radarcal_flags* flags, size_t index, radarcal_flag* out);
/* CSV with header `frame,antenna,bin`. */
RADARCAL_API radarcal_status radarcal_flags_write(const radarcal_flags* flags, const char* path);
RADARCAL_API void radarcal_flags_free(radarcal_flags* flags);

/* ---- evaluation ---- */

typedef struct radarcal_report radarcal_report;

typedef struct radarcal_antenna_result {
  uint32_t antenna;
  uint32_t peak_bin;
  int has_pr_ap;
  double pr_ap;
  int has_pr_tcap;
  double pr_tcap;
  int has_reduction;
  double reduction;
} radarcal_antenna_result;

RADARCAL_API radarcal_status radarcal_pearson(const double* x, const double* y, size_t n, double* out);
/* `first_frame` is the absolute index of frame 0 of the inputs, used in series output. */
RADARCAL_API radarcal_status radarcal_evaluate(const radarcal_amplitudes* ap, const radarcal_amplitudes* tcap,
                                               const radarcal_temps* temps, size_t first_frame,
                                               radarcal_report** out);
RADARCAL_API size_t radarcal_report_num_antennas(const radarcal_report* report);
RADARCAL_API radarcal_status radarcal_report_antenna(const radarcal_report* report, uint32_t antenna,
                                                     radarcal_antenna_result* out);
/* `antenna,peak_bin,pr_ap,pr_tcap,reduction` */
RADARCAL_API radarcal_status radarcal_report_write(const radarcal_report* report, const char* path);
/* `antenna,bin,pr_ap,pr_tcap` for every bin */
RADARCAL_API radarcal_status radarcal_report_write_bins(const radarcal_report* report, const char* path);
/* `frame,temp_c,ap_peak,tcap_peak` for one antenna; inputs must be those passed to radarcal_evaluate. */
RADARCAL_API radarcal_status radarcal_report_write_series(const radarcal_report* report,
                                                          const radarcal_amplitudes* ap,
                                                          const radarcal_amplitudes* tcap,
                                                          const radarcal_temps* temps, uint32_t antenna,
                                                          const char* path);
RADARCAL_API void radarcal_report_free(radarcal_report* report);

/* ---- synthetic data ---- */

typedef struct radarcal_synth_spec radarcal_synth_spec;

RADARCAL_API radarcal_status radarcal_synth_spec_default(radarcal_synth_spec** out);
RADARCAL_API radarcal_status radarcal_synth_spec_load(const char* path, radarcal_synth_spec** out);
RADARCAL_API radarcal_status radarcal_synth_spec_save(const radarcal_synth_spec* spec, const char* path);
RADARCAL_API radarcal_status radarcal_synth_spec_set_seed(radarcal_synth_spec* spec, uint64_t seed);
RADARCAL_API radarcal_status radarcal_synth_spec_set_frames(radarcal_synth_spec* spec, uint32_t frames);
RADARCAL_API radarcal_status radarcal_synth_spec_radar(const radarcal_synth_spec* spec, radarcal_radar_config* out);
RADARCAL_API radarcal_status radarcal_synth_generate(const radarcal_synth_spec* spec, unsigned threads,
                                                     radarcal_cube** out_cube, radarcal_temps** out_temps);
RADARCAL_API void radarcal_synth_spec_free(radarcal_synth_spec* spec);

#ifdef __cplusplus
}
#endif

#endif /* RADARCAL_RADARCAL_H */
