#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "radarcal/radarcal.h"
#include "support/tempdir.hpp"

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("Version and default config") {
  CHECK(std::strlen(radarcal_version()) > 0);
  radarcal_radar_config cfg;
  radarcal_radar_config_default(&cfg);
  CHECK(cfg.num_antennas == 3);
  CHECK(cfg.num_chirps == 2);
  CHECK(cfg.num_samples == 32);
  CHECK(cfg.start_freq_hz == 58e9);
}

TEST_CASE("NULL arguments are rejected") {
  CHECK(radarcal_cube_read(nullptr, nullptr) == RADARCAL_ERR_INVALID_ARGUMENT);
  radarcal_cube* cube = nullptr;
  CHECK(radarcal_cube_read(nullptr, &cube) == RADARCAL_ERR_INVALID_ARGUMENT);
  CHECK(cube == nullptr);
  CHECK(std::strlen(radarcal_last_error()) > 0);
  CHECK(radarcal_temps_size(nullptr) == 0);
  CHECK(radarcal_flags_count(nullptr) == 0);
  radarcal_cube_free(nullptr);
  radarcal_model_free(nullptr);
}

TEST_CASE("I/O and validation errors are distinguished") {
  radarcal_cube* cube = nullptr;
  CHECK(radarcal_cube_read("/nonexistent/cube.rdc", &cube) == RADARCAL_ERR_IO);
  CHECK(radarcal_last_error_code() == RADARCAL_E_IO);

  TempDir dir;
  {
    std::ofstream out(dir / "bad.rdc", std::ios::binary);
    out << "XXXX0000000000000000000";
  }
  CHECK(radarcal_cube_read(path_str(dir / "bad.rdc").c_str(), &cube) == RADARCAL_ERR_VALIDATION);
  CHECK(radarcal_last_error_code() == RADARCAL_E_BAD_MAGIC);
  CHECK(cube == nullptr);

  const double flat[] = {35.0, 35.0, 35.0};
  double r = 0;
  CHECK(radarcal_pearson(flat, flat, 3, &r) == RADARCAL_ERR_VALIDATION);
  CHECK(radarcal_last_error_code() == RADARCAL_E_UNDEFINED_CORRELATION);

  size_t boundary = 0;
  CHECK(radarcal_split_boundary(34700, 0.7, &boundary) == RADARCAL_OK);
  CHECK(boundary == 24290);
  CHECK(radarcal_split_boundary(10, 1.0, &boundary) == RADARCAL_ERR_VALIDATION);
  CHECK(radarcal_last_error_code() == RADARCAL_E_OUT_OF_RANGE);
}

TEST_CASE("Cube construction and access") {
  radarcal_radar_config cfg;
  radarcal_radar_config_default(&cfg);
  cfg.num_antennas = 1;
  cfg.num_chirps = 1;
  cfg.num_samples = 4;
  std::vector<double> iq = {1, 2, 3, 4, 5, 6, 7, 8};
  radarcal_cube* cube = nullptr;
  REQUIRE(radarcal_cube_create(&cfg, 1, iq.data(), iq.size(), &cube) == RADARCAL_OK);
  uint32_t f, a, c, n;
  CHECK(radarcal_cube_dims(cube, &f, &a, &c, &n) == RADARCAL_OK);
  CHECK(f == 1);
  CHECK(n == 4);
  double i = 0, q = 0;
  CHECK(radarcal_cube_sample(cube, 0, 0, 0, 2, &i, &q) == RADARCAL_OK);
  CHECK(i == 5.0);
  CHECK(q == 6.0);
  CHECK(radarcal_cube_sample(cube, 0, 0, 0, 4, &i, &q) == RADARCAL_ERR_INVALID_ARGUMENT);
  radarcal_cube_free(cube);

  radarcal_cube* bad = nullptr;
  CHECK(radarcal_cube_create(&cfg, 2, iq.data(), iq.size(), &bad) == RADARCAL_ERR_VALIDATION);
  CHECK(radarcal_last_error_code() == RADARCAL_E_LENGTH_MISMATCH);
}

TEST_CASE("End-to-end pipeline through the C API") {
  TempDir dir;
  radarcal_synth_spec* spec = nullptr;
  REQUIRE(radarcal_synth_spec_default(&spec) == RADARCAL_OK);
  REQUIRE(radarcal_synth_spec_set_frames(spec, 2000) == RADARCAL_OK);
  radarcal_cube* cube = nullptr;
  radarcal_temps* temps = nullptr;
  REQUIRE(radarcal_synth_generate(spec, 2, &cube, &temps) == RADARCAL_OK);
  CHECK(radarcal_temps_size(temps) == 2000);

  REQUIRE(radarcal_cube_write(cube, path_str(dir / "c.rdc").c_str()) == RADARCAL_OK);
  REQUIRE(radarcal_temps_write(temps, path_str(dir / "t.csv").c_str()) == RADARCAL_OK);
  CHECK(std::filesystem::file_size(dir / "c.rdc") == 24u + 2000u * 3 * 2 * 32 * 8);

  radarcal_amplitudes* ap = nullptr;
  REQUIRE(radarcal_compute_profiles(cube, 1, &ap) == RADARCAL_OK);
  uint32_t frames, antennas, bins;
  CHECK(radarcal_amplitudes_dims(ap, &frames, &antennas, &bins) == RADARCAL_OK);
  CHECK(bins == 16);

  size_t boundary = 0;
  REQUIRE(radarcal_split_boundary(frames, 0.7, &boundary) == RADARCAL_OK);
  radarcal_amplitudes *train_ap = nullptr, *test_ap = nullptr;
  radarcal_temps *train_t = nullptr, *test_t = nullptr;
  REQUIRE(radarcal_amplitudes_slice(ap, 0, boundary, &train_ap) == RADARCAL_OK);
  REQUIRE(radarcal_amplitudes_slice(ap, boundary, frames, &test_ap) == RADARCAL_OK);
  REQUIRE(radarcal_temps_slice(temps, 0, boundary, &train_t) == RADARCAL_OK);
  REQUIRE(radarcal_temps_slice(temps, boundary, frames, &test_t) == RADARCAL_OK);

  radarcal_fit_options opts;
  radarcal_fit_options_default(&opts);
  radarcal_model* model = nullptr;
  REQUIRE(radarcal_fit(train_ap, train_t, &opts, &model) == RADARCAL_OK);
  radarcal_model_info info;
  REQUIRE(radarcal_model_info_get(model, &info) == RADARCAL_OK);
  CHECK(info.num_bin_models == 3 * 15);
  CHECK(info.t_min <= info.t_ref);
  CHECK(info.t_ref <= info.t_max);
  double slope, intercept, pred;
  CHECK(radarcal_model_line(model, 0, 0, &slope, &intercept) == RADARCAL_ERR_INVALID_ARGUMENT);
  REQUIRE(radarcal_model_line(model, 0, 7, &slope, &intercept) == RADARCAL_OK);
  CHECK(slope > 0.0);
  REQUIRE(radarcal_predict(model, 0, 7, info.t_ref, 0, &pred) == RADARCAL_OK);
  CHECK(pred == doctest::Approx(slope * info.t_ref + intercept));
  CHECK(radarcal_predict(model, 0, 0, 35.0, 0, &pred) == RADARCAL_ERR_INVALID_ARGUMENT);
  CHECK(radarcal_predict(model, 9, 7, 35.0, 0, &pred) == RADARCAL_ERR_INVALID_ARGUMENT);

  REQUIRE(radarcal_model_save(model, path_str(dir / "m.json").c_str()) == RADARCAL_OK);
  radarcal_model* loaded = nullptr;
  REQUIRE(radarcal_model_load(path_str(dir / "m.json").c_str(), &loaded) == RADARCAL_OK);
  REQUIRE(radarcal_model_save(loaded, path_str(dir / "m2.json").c_str()) == RADARCAL_OK);
  CHECK(slurp(dir / "m.json") == slurp(dir / "m2.json"));

  radarcal_amplitudes* tcap = nullptr;
  radarcal_flags* flags = nullptr;
  REQUIRE(radarcal_apply_correction(loaded, test_ap, test_t, 0, &tcap, &flags) == RADARCAL_OK);
  CHECK(radarcal_flags_count(flags) == 0);
  REQUIRE(radarcal_flags_write(flags, path_str(dir / "flags.csv").c_str()) == RADARCAL_OK);
  CHECK(slurp(dir / "flags.csv") == "frame,antenna,bin\n");

  radarcal_report* report = nullptr;
  REQUIRE(radarcal_evaluate(test_ap, tcap, test_t, boundary, &report) == RADARCAL_OK);
  REQUIRE(radarcal_report_num_antennas(report) == 3);
  for (uint32_t k = 0; k < 3; ++k) {
    radarcal_antenna_result r;
    REQUIRE(radarcal_report_antenna(report, k, &r) == RADARCAL_OK);
    CHECK(r.peak_bin == 7);
    REQUIRE(r.has_pr_ap);
    REQUIRE(r.has_pr_tcap);
    CHECK(std::abs(r.pr_ap) >= 0.9);
    CHECK(std::abs(r.pr_tcap) < std::abs(r.pr_ap));
  }
  radarcal_antenna_result dummy;
  CHECK(radarcal_report_antenna(report, 3, &dummy) == RADARCAL_ERR_INVALID_ARGUMENT);
  CHECK(radarcal_report_write(report, path_str(dir / "r.csv").c_str()) == RADARCAL_OK);
  CHECK(radarcal_report_write_bins(report, path_str(dir / "b.csv").c_str()) == RADARCAL_OK);
  CHECK(radarcal_report_write_series(report, test_ap, tcap, test_t, 1, path_str(dir / "s.csv").c_str()) ==
        RADARCAL_OK);
  CHECK(slurp(dir / "s.csv").rfind("frame,temp_c,ap_peak,tcap_peak\n" + std::to_string(boundary) + ",", 0) == 0);

  radarcal_report_free(report);
  radarcal_flags_free(flags);
  radarcal_amplitudes_free(tcap);
  radarcal_model_free(loaded);
  radarcal_model_free(model);
  radarcal_amplitudes_free(train_ap);
  radarcal_amplitudes_free(test_ap);
  radarcal_temps_free(train_t);
  radarcal_temps_free(test_t);
  radarcal_amplitudes_free(ap);
  radarcal_temps_free(temps);
  radarcal_cube_free(cube);
  radarcal_synth_spec_free(spec);
}

TEST_CASE("Degenerate training reports the zero-variance cause") {
  std::vector<double> v(5 * 2, 1.0), t(5, 35.0);
  radarcal_temps* temps = nullptr;
  REQUIRE(radarcal_temps_create(t.data(), t.size(), &temps) == RADARCAL_OK);
  TempDir dir;
  // Hand-written RAP1 file (little-endian host).
  {
    std::ofstream out(dir / "a.rap", std::ios::binary);
    const char magic[] = {'R', 'A', 'P', '1'};
    out.write(magic, 4);
    const uint32_t hdr[] = {5, 1, 2, 0};
    out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  radarcal_amplitudes* ap = nullptr;
  REQUIRE(radarcal_amplitudes_read(path_str(dir / "a.rap").c_str(), &ap) == RADARCAL_OK);
  radarcal_model* model = nullptr;
  CHECK(radarcal_fit(ap, temps, nullptr, &model) == RADARCAL_ERR_VALIDATION);
  CHECK(radarcal_last_error_code() == RADARCAL_E_DEGENERATE_TRAINING);
  CHECK(std::string(radarcal_last_error()).find("zero temperature variance") != std::string::npos);
  CHECK(model == nullptr);
  radarcal_amplitudes_free(ap);
  radarcal_temps_free(temps);
}
