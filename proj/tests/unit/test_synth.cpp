#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/calibration.hpp"
#include "core/error.hpp"
#include "core/evaluate.hpp"
#include "core/preprocess.hpp"
#include "core/synth.hpp"

using namespace radarcal;
using namespace radarcal::synth;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected radarcal::Error");
  return Errc::io;
}

SynthSpec noiseless(double alpha, double beta, std::size_t frames = 64) {
  SynthSpec s;
  s.num_frames = frames;
  s.snr_db = std::numeric_limits<double>::infinity();
  s.drift.alpha.assign(s.config.num_antennas, alpha);
  s.drift.beta.assign(s.config.num_antennas, beta);
  return s;
}

std::vector<double> series(const AmplitudeTensor& ap, std::size_t a, std::size_t b) {
  std::vector<double> v(ap.num_frames());
  for (std::size_t f = 0; f < v.size(); ++f) v[f] = ap.at(f, a, b);
  return v;
}

// SNR implied by the per-chirp spectrum away from DC and the target bin.
double measured_snr_db(const SynthSpec& spec, const RadarCube& cube, double amp) {
  using namespace radarcal::preprocess;
  const std::size_t n = spec.config.num_samples;
  long double power = 0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < cube.num_frames(); ++f)
    for (std::size_t a = 0; a < spec.config.num_antennas; ++a)
      for (std::size_t c = 0; c < spec.config.num_chirps; ++c) {
        auto half = positive_spectrum(fft_normalized(remove_dc(cube.chirp(f, a, c))));
        for (std::size_t b = 1; b < half.size(); ++b) {
          if (b == spec.target_bin) continue;
          power += std::norm(half[b]);
          ++count;
        }
      }
  // A doubled, 1/N-normalized bin of white noise with total per-sample power P has E|X|^2 = 4 P / N.
  const double noise_power = static_cast<double>(power / count) * double(n) / 4.0;
  const double signal_power = spec.tone_mode == ToneMode::real ? 0.5 * amp * amp : amp * amp;
  return 10.0 * std::log10(signal_power / noise_power);
}

}  // namespace

TEST_CASE("Temperature profiles") {
  SynthSpec s;
  s.num_frames = 16;
  auto ramp = generate_temperatures(s);
  REQUIRE(ramp.size() == 16);
  for (std::size_t f = 0; f < 16; ++f) CHECK(ramp[f] == doctest::Approx(30.0 + double(f)).epsilon(1e-15));
  CHECK(ramp[0] == 30.0);
  CHECK(ramp[15] == 45.0);

  s.temp_profile = Sinusoid{37.5, 7.5, 100.0};
  s.num_frames = 100;
  auto sine = generate_temperatures(s);
  CHECK(sine[0] == 37.5);
  CHECK(sine[1] > 37.5);
  CHECK(sine[25] == doctest::Approx(45.0).epsilon(1e-15));
  CHECK(sine[75] == doctest::Approx(30.0).epsilon(1e-15));

  s.temp_profile = RandomWalk{37.5, 2.0, 30.0, 45.0};
  s.num_frames = 5000;
  auto walk = generate_temperatures(s);
  CHECK(walk == generate_temperatures(s));
  for (double t : walk.values()) {
    CHECK(t >= 30.0);
    CHECK(t <= 45.0);
  }
  s.seed = 2;
  CHECK_FALSE(walk == generate_temperatures(s));

  s.num_frames = 1;
  s.temp_profile = Ramp{30.0, 45.0};
  CHECK(generate_temperatures(s)[0] == 30.0);
  s.num_frames = 0;
  CHECK(generate_temperatures(s).empty());
}

TEST_CASE("Profile text round trip") {
  for (const TempProfile& p : {TempProfile{Ramp{30, 45}}, TempProfile{Sinusoid{37.5, 7.5, 1000}},
                               TempProfile{RandomWalk{37.5, 0.05, 30, 45}}, TempProfile{Ramp{-1.25, 80.5}}}) {
    auto text = format_profile(p);
    CAPTURE(text);
    CHECK(format_profile(parse_profile(text)) == text);
  }
  CHECK(std::get<Ramp>(parse_profile("ramp(30, 45)")).t_end == 45.0);
  CHECK(std::get<Sinusoid>(parse_profile(" sinusoid( 37.5 ,7.5, 100 ) ")).period_frames == 100.0);
  CHECK(error_of([] { parse_profile("ramp(30)"); }) == Errc::parse);
  CHECK(error_of([] { parse_profile("spiral(1, 2)"); }) == Errc::parse);
  CHECK(error_of([] { parse_profile("ramp 30 45"); }) == Errc::parse);
}

TEST_CASE("Spec text round trip and defaults") {
  SynthSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.config.num_antennas == 3);
  CHECK(s.drift.beta[0] > 0.0);
  CHECK(s.drift.beta[1] < 0.0);
  CHECK(s.drift.beta[2] < 0.0);
  auto text = s.format();
  auto back = SynthSpec::parse(text);
  CHECK(back.format() == text);
  CHECK(SynthSpec::parse("").format() == text);

  auto custom = SynthSpec::parse(
      "num_antennas = 4\nalpha_3 = 1.5\nbeta_3 = 0.01\ntone_mode = complex\nsnr_db = inf\n"
      "temp_profile = random_walk(35, 0.1, 32, 40)\nnum_frames = 10\nseed = 99\n");
  CHECK(custom.drift.alpha.size() == 4);
  CHECK(custom.drift.alpha[3] == 1.5);
  CHECK(custom.tone_mode == ToneMode::complex);
  CHECK(std::isinf(custom.snr_db));
  CHECK(SynthSpec::parse(custom.format()).format() == custom.format());
}

TEST_CASE("Spec validation") {
  CHECK(error_of([] { SynthSpec::parse("num_antennas = 4\n"); }) == Errc::malformed);
  CHECK(error_of([] { SynthSpec::parse("alpha_5 = 1\n"); }) == Errc::out_of_range);
  CHECK(error_of([] { SynthSpec::parse("target_bin = 16\n"); }) == Errc::out_of_range);
  CHECK(error_of([] { SynthSpec::parse("tone_mode = square\n"); }) == Errc::parse);
  CHECK(error_of([] { SynthSpec::parse("wavelength = 5\n"); }) == Errc::malformed);
  CHECK(error_of([] { SynthSpec::parse("num_samples = 31\n"); }) == Errc::bad_dimensions);
  // Gain 2 - 0.05 T crosses zero at 40 degC, inside the ramp.
  CHECK(error_of([] { SynthSpec::parse("alpha_0 = 2\nbeta_0 = -0.05\n"); }) == Errc::gain_not_positive);
  CHECK(error_of([] { noiseless(-1.0, 0.0).validate(); }) == Errc::gain_not_positive);

  // A log outside the spec's range is checked at generation time.
  auto s = noiseless(2.0, -0.01, 2);
  CHECK(error_of([&] { generate_cube(s, TemperatureLog({30.0, 300.0})); }) == Errc::gain_not_positive);
  CHECK(error_of([&] { generate_cube(s, TemperatureLog({30.0})); }) == Errc::length_mismatch);
}

TEST_CASE("Generation is deterministic and thread-independent") {
  SynthSpec s;
  s.num_frames = 300;
  auto temps = generate_temperatures(s);
  auto one = generate_cube(s, temps, 1);
  CHECK(one.same_data(generate_cube(s, temps, 1)));
  for (unsigned t : {2u, 5u, 16u}) CHECK(one.same_data(generate_cube(s, temps, t)));

  s.seed = 7;
  CHECK_FALSE(one.same_data(generate_cube(s, temps, 1)));
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
  CHECK(stream_seed(1, 5) == stream_seed(1, 5));
}

TEST_CASE("Noiseless unit tone gives unit amplitude") {
  auto s = noiseless(1.0, 0.0, 20);
  s.tone_amplitude = 1.0;
  auto ap = preprocess::compute_amplitude_profiles(generate_cube(s, generate_temperatures(s)));
  for (std::size_t f = 0; f < 20; ++f)
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(std::abs(ap.at(f, a, s.target_bin) - 1.0) < 1e-10);
      CHECK(evaluate::peak_bin(ap, a) == s.target_bin);
    }

  s.tone_mode = ToneMode::complex;
  auto complex_ap = preprocess::compute_amplitude_profiles(generate_cube(s, generate_temperatures(s)));
  CHECK(std::abs(complex_ap.at(3, 1, s.target_bin) - 2.0) < 1e-10);
}

TEST_CASE("Noiseless drift is recovered exactly") {
  auto s = noiseless(2.0, -0.01, 500);
  auto temps = generate_temperatures(s);
  auto ap = preprocess::compute_amplitude_profiles(generate_cube(s, temps));
  for (std::size_t f = 0; f < 500; f += 37)
    CHECK(ap.at(f, 0, s.target_bin) == doctest::Approx((2.0 - 0.01 * temps[f]) * 0.075).epsilon(1e-12));
  auto model = calibration::fit(ap, temps);
  for (std::size_t a = 0; a < 3; ++a) {
    const auto* m = model.find(a, s.target_bin);
    REQUIRE(m != nullptr);
    CHECK(std::abs(m->slope / (-0.01 * 0.075) - 1.0) < 1e-9);
    CHECK(std::abs(m->intercept / (2.0 * 0.075) - 1.0) < 1e-9);
  }
}

TEST_CASE("Configured SNR is realized") {
  for (ToneMode mode : {ToneMode::real, ToneMode::complex}) {
    for (double snr : {20.0, 5.0, 35.0}) {
      auto s = noiseless(1.0, 0.0, 1000);
      s.snr_db = snr;
      s.tone_mode = mode;
      auto cube = generate_cube(s, generate_temperatures(s));
      CAPTURE(snr);
      CHECK(std::abs(measured_snr_db(s, cube, 0.075) - snr) < 0.5);
    }
  }
}

TEST_CASE("Drift-free data shows no temperature correlation") {
  auto s = noiseless(1.0, 0.0, 5000);
  s.snr_db = 20.0;
  auto temps = generate_temperatures(s);
  auto ap = preprocess::compute_amplitude_profiles(generate_cube(s, temps));
  for (std::size_t a = 0; a < 3; ++a) {
    auto r = evaluate::pearson(temps.values(), series(ap, a, s.target_bin));
    CAPTURE(a);
    CHECK(std::abs(r) < 0.1);
  }
}

TEST_CASE("Default spec produces strong temperature correlation") {
  SynthSpec s;
  auto temps = generate_temperatures(s);
  auto ap = preprocess::compute_amplitude_profiles(generate_cube(s, temps));
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(evaluate::peak_bin(ap, a) == s.target_bin);
    CHECK(std::abs(evaluate::pearson(temps.values(), series(ap, a, s.target_bin))) >= 0.95);
  }
}
