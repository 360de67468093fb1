// Extern-C surface: opaque handles wrap core values, exceptions become status codes.

#include "radarcal/radarcal.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "core/binary_io.hpp"
#include "core/calibration.hpp"
#include "core/datacube.hpp"
#include "core/error.hpp"
#include "core/evaluate.hpp"
#include "core/preprocess.hpp"
#include "core/synth.hpp"

struct radarcal_cube {
  radarcal::RadarCube value;
};
struct radarcal_temps {
  radarcal::TemperatureLog value;
};
struct radarcal_amplitudes {
  radarcal::AmplitudeTensor value;
};
struct radarcal_model {
  radarcal::calibration::CalibrationModel value;
};
struct radarcal_flags {
  std::vector<radarcal::calibration::CorrectionFlag> value;
};
struct radarcal_report {
  radarcal::evaluate::EvaluationReport value;
};
struct radarcal_synth_spec {
  radarcal::synth::SynthSpec value;
};

namespace {

thread_local std::string g_last_error;
thread_local radarcal_error_code g_last_code = RADARCAL_E_NONE;

radarcal_error_code detail_code(radarcal::Errc e) {
  using radarcal::Errc;
  switch (e) {
    case Errc::bad_magic: return RADARCAL_E_BAD_MAGIC;
    case Errc::truncated: return RADARCAL_E_TRUNCATED;
    case Errc::trailing_data: return RADARCAL_E_TRAILING_DATA;
    case Errc::non_finite: return RADARCAL_E_NON_FINITE;
    case Errc::bad_dimensions: return RADARCAL_E_BAD_DIMENSIONS;
    case Errc::bad_header: return RADARCAL_E_BAD_HEADER;
    case Errc::parse: return RADARCAL_E_PARSE;
    case Errc::missing_index: return RADARCAL_E_MISSING_INDEX;
    case Errc::duplicate_index: return RADARCAL_E_DUPLICATE_INDEX;
    case Errc::length_mismatch: return RADARCAL_E_LENGTH_MISMATCH;
    case Errc::out_of_range: return RADARCAL_E_OUT_OF_RANGE;
    case Errc::degenerate_training: return RADARCAL_E_DEGENERATE_TRAINING;
    case Errc::insufficient_data: return RADARCAL_E_INSUFFICIENT_DATA;
    case Errc::undefined_correlation: return RADARCAL_E_UNDEFINED_CORRELATION;
    case Errc::malformed: return RADARCAL_E_MALFORMED;
    case Errc::version_mismatch: return RADARCAL_E_VERSION_MISMATCH;
    case Errc::gain_not_positive: return RADARCAL_E_GAIN_NOT_POSITIVE;
    case Errc::io: return RADARCAL_E_IO;
  }
  return RADARCAL_E_OTHER;
}

radarcal_status set_error(radarcal_status status, radarcal_error_code code, std::string message) {
  g_last_error = std::move(message);
  g_last_code = code;
  return status;
}

radarcal_status invalid(const char* message) {
  return set_error(RADARCAL_ERR_INVALID_ARGUMENT, RADARCAL_E_OTHER, message);
}

template <typename F>
radarcal_status guarded(F&& body) {
  try {
    body();
    return RADARCAL_OK;
  } catch (const radarcal::Error& e) {
    const auto status = e.category() == radarcal::ErrorCategory::io ? RADARCAL_ERR_IO : RADARCAL_ERR_VALIDATION;
    return set_error(status, detail_code(e.code()), e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(RADARCAL_ERR_INVALID_ARGUMENT, RADARCAL_E_OTHER, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RADARCAL_ERR_INTERNAL, RADARCAL_E_OTHER, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RADARCAL_ERR_INTERNAL, RADARCAL_E_OTHER, e.what());
  } catch (...) {
    return set_error(RADARCAL_ERR_INTERNAL, RADARCAL_E_OTHER, "unknown error");
  }
}

radarcal::RadarConfig to_core(const radarcal_radar_config& c) {
  return {c.start_freq_hz, c.end_freq_hz, c.num_antennas, c.num_chirps, c.num_samples};
}

radarcal_radar_config to_c(const radarcal::RadarConfig& c) {
  return {c.start_freq_hz, c.end_freq_hz, c.num_antennas, c.num_chirps, c.num_samples};
}

void fill(radarcal_antenna_result& out, const radarcal::evaluate::AntennaResult& r) {
  out.antenna = r.antenna;
  out.peak_bin = r.peak_bin;
  out.has_pr_ap = r.pr_ap.has_value();
  out.pr_ap = r.pr_ap.value_or(0.0);
  out.has_pr_tcap = r.pr_tcap.has_value();
  out.pr_tcap = r.pr_tcap.value_or(0.0);
  out.has_reduction = r.reduction.has_value();
  out.reduction = r.reduction.value_or(0.0);
}

}  // namespace

extern "C" {

const char* radarcal_version(void) { return RADARCAL_VERSION_STRING; }
const char* radarcal_last_error(void) { return g_last_error.c_str(); }
radarcal_error_code radarcal_last_error_code(void) { return g_last_code; }

void radarcal_radar_config_default(radarcal_radar_config* out) {
  if (out) *out = to_c(radarcal::RadarConfig{});
}

radarcal_status radarcal_config_load(const char* path, radarcal_radar_config* out_radar,
                                     double* out_train_fraction) {
  if (!path || !out_radar || !out_train_fraction) return invalid("radarcal_config_load: NULL argument");
  return guarded([&] {
    auto cfg = radarcal::RunConfig::load(path);
    *out_radar = to_c(cfg.radar);
    *out_train_fraction = cfg.train_fraction;
  });
}

// ---- cube ----

radarcal_status radarcal_cube_create(const radarcal_radar_config* config, uint32_t num_frames, const double* iq,
                                     size_t iq_len, radarcal_cube** out) {
  if (!config || !out || (iq_len > 0 && !iq)) return invalid("radarcal_cube_create: NULL argument");
  if (iq_len % 2 != 0) return invalid("radarcal_cube_create: iq length must be even");
  return guarded([&] {
    std::vector<radarcal::Complex> samples(iq_len / 2);
    for (size_t i = 0; i < samples.size(); ++i) samples[i] = {iq[2 * i], iq[2 * i + 1]};
    *out = new radarcal_cube{radarcal::RadarCube(to_core(*config), num_frames, std::move(samples))};
  });
}

radarcal_status radarcal_cube_read(const char* path, radarcal_cube** out) {
  if (!path || !out) return invalid("radarcal_cube_read: NULL argument");
  return guarded([&] { *out = new radarcal_cube{radarcal::read_cube(path)}; });
}

radarcal_status radarcal_cube_write(const radarcal_cube* cube, const char* path) {
  if (!cube || !path) return invalid("radarcal_cube_write: NULL argument");
  return guarded([&] { radarcal::write_cube(cube->value, path); });
}

radarcal_status radarcal_cube_dims(const radarcal_cube* cube, uint32_t* frames, uint32_t* antennas,
                                   uint32_t* chirps, uint32_t* samples) {
  if (!cube) return invalid("radarcal_cube_dims: NULL cube");
  const auto& c = cube->value.config();
  if (frames) *frames = static_cast<uint32_t>(cube->value.num_frames());
  if (antennas) *antennas = c.num_antennas;
  if (chirps) *chirps = c.num_chirps;
  if (samples) *samples = c.num_samples;
  return RADARCAL_OK;
}

radarcal_status radarcal_cube_sample(const radarcal_cube* cube, uint32_t f, uint32_t a, uint32_t c, uint32_t n,
                                     double* i, double* q) {
  if (!cube || !i || !q) return invalid("radarcal_cube_sample: NULL argument");
  const auto& cfg = cube->value.config();
  if (f >= cube->value.num_frames() || a >= cfg.num_antennas || c >= cfg.num_chirps || n >= cfg.num_samples)
    return invalid("radarcal_cube_sample: index out of range");
  const auto v = cube->value.at(f, a, c, n);
  *i = v.real();
  *q = v.imag();
  return RADARCAL_OK;
}

void radarcal_cube_free(radarcal_cube* cube) { delete cube; }

// ---- temps ----

radarcal_status radarcal_temps_create(const double* temps, size_t count, radarcal_temps** out) {
  if (!out || (count > 0 && !temps)) return invalid("radarcal_temps_create: NULL argument");
  return guarded([&] {
    *out = new radarcal_temps{radarcal::TemperatureLog(std::vector<double>(temps, temps + count))};
  });
}

radarcal_status radarcal_temps_read(const char* path, radarcal_temps** out) {
  if (!path || !out) return invalid("radarcal_temps_read: NULL argument");
  return guarded([&] { *out = new radarcal_temps{radarcal::read_temperature_log(path)}; });
}

radarcal_status radarcal_temps_write(const radarcal_temps* temps, const char* path) {
  if (!temps || !path) return invalid("radarcal_temps_write: NULL argument");
  return guarded([&] { radarcal::write_temperature_log(temps->value, path); });
}

size_t radarcal_temps_size(const radarcal_temps* temps) { return temps ? temps->value.size() : 0; }

radarcal_status radarcal_temps_copy(const radarcal_temps* temps, double* out, size_t capacity) {
  if (!temps || (capacity > 0 && !out)) return invalid("radarcal_temps_copy: NULL argument");
  const auto v = temps->value.values();
  for (size_t i = 0; i < v.size() && i < capacity; ++i) out[i] = v[i];
  return RADARCAL_OK;
}

radarcal_status radarcal_temps_slice(const radarcal_temps* temps, size_t begin, size_t end, radarcal_temps** out) {
  if (!temps || !out) return invalid("radarcal_temps_slice: NULL argument");
  if (begin > end || end > temps->value.size()) return invalid("radarcal_temps_slice: range out of bounds");
  return guarded([&] { *out = new radarcal_temps{temps->value.slice(begin, end)}; });
}

void radarcal_temps_free(radarcal_temps* temps) { delete temps; }

// ---- amplitudes ----

radarcal_status radarcal_compute_profiles(const radarcal_cube* cube, unsigned threads, radarcal_amplitudes** out) {
  if (!cube || !out) return invalid("radarcal_compute_profiles: NULL argument");
  return guarded([&] {
    *out = new radarcal_amplitudes{radarcal::preprocess::compute_amplitude_profiles(cube->value, threads)};
  });
}

radarcal_status radarcal_amplitudes_read(const char* path, radarcal_amplitudes** out) {
  if (!path || !out) return invalid("radarcal_amplitudes_read: NULL argument");
  return guarded([&] { *out = new radarcal_amplitudes{radarcal::read_amplitudes(path)}; });
}

radarcal_status radarcal_amplitudes_write(const radarcal_amplitudes* ap, const char* path) {
  if (!ap || !path) return invalid("radarcal_amplitudes_write: NULL argument");
  return guarded([&] { radarcal::write_amplitudes(ap->value, path); });
}

radarcal_status radarcal_amplitudes_dims(const radarcal_amplitudes* ap, uint32_t* frames, uint32_t* antennas,
                                         uint32_t* bins) {
  if (!ap) return invalid("radarcal_amplitudes_dims: NULL tensor");
  if (frames) *frames = static_cast<uint32_t>(ap->value.num_frames());
  if (antennas) *antennas = static_cast<uint32_t>(ap->value.num_antennas());
  if (bins) *bins = static_cast<uint32_t>(ap->value.num_bins());
  return RADARCAL_OK;
}

radarcal_status radarcal_amplitudes_get(const radarcal_amplitudes* ap, uint32_t f, uint32_t a, uint32_t b,
                                        double* out) {
  if (!ap || !out) return invalid("radarcal_amplitudes_get: NULL argument");
  if (f >= ap->value.num_frames() || a >= ap->value.num_antennas() || b >= ap->value.num_bins())
    return invalid("radarcal_amplitudes_get: index out of range");
  *out = ap->value.at(f, a, b);
  return RADARCAL_OK;
}

radarcal_status radarcal_amplitudes_slice(const radarcal_amplitudes* ap, size_t begin, size_t end,
                                          radarcal_amplitudes** out) {
  if (!ap || !out) return invalid("radarcal_amplitudes_slice: NULL argument");
  if (begin > end || end > ap->value.num_frames()) return invalid("radarcal_amplitudes_slice: range out of bounds");
  return guarded([&] { *out = new radarcal_amplitudes{ap->value.slice(begin, end)}; });
}

void radarcal_amplitudes_free(radarcal_amplitudes* ap) { delete ap; }

// ---- split ----

radarcal_status radarcal_split_boundary(size_t frames, double train_fraction, size_t* out_boundary) {
  if (!out_boundary) return invalid("radarcal_split_boundary: NULL argument");
  return guarded([&] { *out_boundary = radarcal::calibration::split_boundary(frames, train_fraction); });
}

// ---- model ----

void radarcal_fit_options_default(radarcal_fit_options* out) {
  if (!out) return;
  *out = radarcal_fit_options{radarcal::calibration::kDefaultEpsilon, 0, 0.0, nullptr, 0};
}

radarcal_status radarcal_fit(const radarcal_amplitudes* ap, const radarcal_temps* temps,
                             const radarcal_fit_options* options, radarcal_model** out) {
  if (!ap || !temps || !out) return invalid("radarcal_fit: NULL argument");
  if (options && options->num_bins > 0 && !options->bins) return invalid("radarcal_fit: NULL bin list");
  return guarded([&] {
    radarcal::calibration::FitOptions opt;
    if (options) {
      opt.epsilon = options->epsilon;
      if (options->has_t_ref) opt.t_ref = options->t_ref;
      if (options->bins) opt.bins = std::vector<uint32_t>(options->bins, options->bins + options->num_bins);
    }
    *out = new radarcal_model{radarcal::calibration::fit(ap->value, temps->value, opt)};
  });
}

radarcal_status radarcal_model_load(const char* path, radarcal_model** out) {
  if (!path || !out) return invalid("radarcal_model_load: NULL argument");
  return guarded([&] { *out = new radarcal_model{radarcal::calibration::load_model(path)}; });
}

radarcal_status radarcal_model_save(const radarcal_model* model, const char* path) {
  if (!model || !path) return invalid("radarcal_model_save: NULL argument");
  return guarded([&] { radarcal::calibration::save_model(model->value, path); });
}

radarcal_status radarcal_model_info_get(const radarcal_model* model, radarcal_model_info* out) {
  if (!model || !out) return invalid("radarcal_model_info_get: NULL argument");
  const auto& m = model->value;
  *out = {static_cast<uint32_t>(m.num_antennas()), static_cast<uint32_t>(m.num_bins()), m.t_ref(), m.t_min(),
          m.t_max(), m.epsilon(), m.bin_models().size()};
  return RADARCAL_OK;
}

radarcal_status radarcal_model_line(const radarcal_model* model, uint32_t antenna, uint32_t bin, double* slope,
                                    double* intercept) {
  if (!model || !slope || !intercept) return invalid("radarcal_model_line: NULL argument");
  const auto* m = model->value.find(antenna, bin);
  if (!m) return invalid("radarcal_model_line: no model for that antenna/bin");
  *slope = m->slope;
  *intercept = m->intercept;
  return RADARCAL_OK;
}

radarcal_status radarcal_predict(const radarcal_model* model, uint32_t antenna, uint32_t bin, double t, int clamp,
                                 double* out) {
  if (!model || !out) return invalid("radarcal_predict: NULL argument");
  if (!model->value.find(antenna, bin)) return invalid("radarcal_predict: no model for that antenna/bin");
  return guarded([&] {
    *out = model->value.predict(antenna, bin, t,
                                clamp ? radarcal::calibration::Extrapolation::clamp
                                      : radarcal::calibration::Extrapolation::linear);
  });
}

void radarcal_model_free(radarcal_model* model) { delete model; }

// ---- correction ----

radarcal_status radarcal_apply_correction(const radarcal_model* model, const radarcal_amplitudes* ap,
                                          const radarcal_temps* temps, int clamp, radarcal_amplitudes** out_tcap,
                                          radarcal_flags** out_flags) {
  if (!model || !ap || !temps || !out_tcap) return invalid("radarcal_apply_correction: NULL argument");
  return guarded([&] {
    auto result = radarcal::calibration::apply_correction(
        model->value, ap->value, temps->value,
        clamp ? radarcal::calibration::Extrapolation::clamp : radarcal::calibration::Extrapolation::linear);
    auto tcap = std::make_unique<radarcal_amplitudes>(radarcal_amplitudes{std::move(result.tcap)});
    if (out_flags) *out_flags = new radarcal_flags{std::move(result.flags)};
    *out_tcap = tcap.release();
  });
}

size_t radarcal_flags_count(const radarcal_flags* flags) { return flags ? flags->value.size() : 0; }

radarcal_status radarcal_flags_get(const radarcal_flags* flags, size_t index, radarcal_flag* out) {
  if (!flags || !out) return invalid("radarcal_flags_get: NULL argument");
  if (index >= flags->value.size()) return invalid("radarcal_flags_get: index out of range");
  const auto& f = flags->value[index];
  *out = {f.frame, f.antenna, f.bin};
  return RADARCAL_OK;
}

radarcal_status radarcal_flags_write(const radarcal_flags* flags, const char* path) {
  if (!flags || !path) return invalid("radarcal_flags_write: NULL argument");
  return guarded([&] { radarcal::calibration::write_flags_csv(flags->value, path); });
}

void radarcal_flags_free(radarcal_flags* flags) { delete flags; }

// ---- evaluation ----

radarcal_status radarcal_pearson(const double* x, const double* y, size_t n, double* out) {
  if (!x || !y || !out) return invalid("radarcal_pearson: NULL argument");
  return guarded([&] { *out = radarcal::evaluate::pearson({x, n}, {y, n}); });
}

radarcal_status radarcal_evaluate(const radarcal_amplitudes* ap, const radarcal_amplitudes* tcap,
                                  const radarcal_temps* temps, size_t first_frame, radarcal_report** out) {
  if (!ap || !tcap || !temps || !out) return invalid("radarcal_evaluate: NULL argument");
  return guarded([&] {
    *out = new radarcal_report{radarcal::evaluate::evaluate(ap->value, tcap->value, temps->value, first_frame)};
  });
}

size_t radarcal_report_num_antennas(const radarcal_report* report) {
  return report ? report->value.antennas.size() : 0;
}

radarcal_status radarcal_report_antenna(const radarcal_report* report, uint32_t antenna,
                                        radarcal_antenna_result* out) {
  if (!report || !out) return invalid("radarcal_report_antenna: NULL argument");
  if (antenna >= report->value.antennas.size()) return invalid("radarcal_report_antenna: antenna out of range");
  fill(*out, report->value.antennas[antenna]);
  return RADARCAL_OK;
}

radarcal_status radarcal_report_write(const radarcal_report* report, const char* path) {
  if (!report || !path) return invalid("radarcal_report_write: NULL argument");
  return guarded([&] { radarcal::evaluate::write_report_csv(report->value, path); });
}

radarcal_status radarcal_report_write_bins(const radarcal_report* report, const char* path) {
  if (!report || !path) return invalid("radarcal_report_write_bins: NULL argument");
  return guarded([&] { radarcal::evaluate::write_bin_table_csv(report->value, path); });
}

radarcal_status radarcal_report_write_series(const radarcal_report* report, const radarcal_amplitudes* ap,
                                             const radarcal_amplitudes* tcap, const radarcal_temps* temps,
                                             uint32_t antenna, const char* path) {
  if (!report || !ap || !tcap || !temps || !path) return invalid("radarcal_report_write_series: NULL argument");
  if (antenna >= report->value.antennas.size()) return invalid("radarcal_report_write_series: antenna out of range");
  return guarded([&] {
    radarcal::evaluate::write_series_csv(report->value, ap->value, tcap->value, temps->value, antenna, path);
  });
}

void radarcal_report_free(radarcal_report* report) { delete report; }

// ---- synth ----

radarcal_status radarcal_synth_spec_default(radarcal_synth_spec** out) {
  if (!out) return invalid("radarcal_synth_spec_default: NULL argument");
  return guarded([&] { *out = new radarcal_synth_spec{}; });
}

radarcal_status radarcal_synth_spec_load(const char* path, radarcal_synth_spec** out) {
  if (!path || !out) return invalid("radarcal_synth_spec_load: NULL argument");
  return guarded([&] { *out = new radarcal_synth_spec{radarcal::synth::SynthSpec::load(path)}; });
}

radarcal_status radarcal_synth_spec_save(const radarcal_synth_spec* spec, const char* path) {
  if (!spec || !path) return invalid("radarcal_synth_spec_save: NULL argument");
  return guarded([&] {
    auto text = spec->value.format();
    radarcal::io::write_text_file_atomic(path, text);
  });
}

radarcal_status radarcal_synth_spec_set_seed(radarcal_synth_spec* spec, uint64_t seed) {
  if (!spec) return invalid("radarcal_synth_spec_set_seed: NULL spec");
  spec->value.seed = seed;
  return RADARCAL_OK;
}

radarcal_status radarcal_synth_spec_set_frames(radarcal_synth_spec* spec, uint32_t frames) {
  if (!spec) return invalid("radarcal_synth_spec_set_frames: NULL spec");
  spec->value.num_frames = frames;
  return RADARCAL_OK;
}

radarcal_status radarcal_synth_spec_radar(const radarcal_synth_spec* spec, radarcal_radar_config* out) {
  if (!spec || !out) return invalid("radarcal_synth_spec_radar: NULL argument");
  *out = to_c(spec->value.config);
  return RADARCAL_OK;
}

radarcal_status radarcal_synth_generate(const radarcal_synth_spec* spec, unsigned threads, radarcal_cube** out_cube,
                                        radarcal_temps** out_temps) {
  if (!spec || !out_cube || !out_temps) return invalid("radarcal_synth_generate: NULL argument");
  return guarded([&] {
    auto temps = radarcal::synth::generate_temperatures(spec->value);
    auto cube = std::make_unique<radarcal_cube>(radarcal_cube{radarcal::synth::generate_cube(spec->value, temps, threads)});
    *out_temps = new radarcal_temps{std::move(temps)};
    *out_cube = cube.release();
  });
}

void radarcal_synth_spec_free(radarcal_synth_spec* spec) { delete spec; }

}  // extern "C"
