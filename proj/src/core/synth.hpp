#pragma once

// Synthetic cube + temperature log with a known linear gain drift per antenna.
//
// Signal model, per frame f, antenna a, chirp c, sample n:
//   real mode:    r[n] = g_a(T_f) * A * cos(2 pi k n / N) + w[n]          (Q = 0)
//   complex mode: r[n] = g_a(T_f) * A * exp(+2 pi i k n / N) + w[n]
// with g_a(T) = alpha_a + beta_a * T, k the target bin and w white Gaussian
// noise whose variance gives the configured SNR against the tone power of that
// frame. A real tone yields AP = g * A at bin k; a complex tone yields 2 * g * A.
//
// Randomness: std::mt19937_64 per stream, seeded with
//   splitmix64(splitmix64(seed) + stream), stream = frame index for noise and
//   2^63 for the random-walk temperature profile,
// Gaussian deviates by Box-Muller on 53-bit uniforms, so output is
// bit-identical across platforms and thread counts.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "core/datacube.hpp"

namespace radarcal::synth {

struct DriftLaw {
  std::vector<double> alpha;  // baseline gain per antenna
  std::vector<double> beta;   // gain slope per degC per antenna

  double gain(std::size_t antenna, double t) const { return alpha[antenna] + beta[antenna] * t; }
};

struct Ramp {
  double t_start = 30.0;
  double t_end = 45.0;
};
struct Sinusoid {
  double mean = 37.5;
  double amplitude = 7.5;
  double period_frames = 1000.0;
};
struct RandomWalk {
  double start = 37.5;
  double step_sigma = 0.05;
  double lo = 30.0;
  double hi = 45.0;
};
using TempProfile = std::variant<Ramp, Sinusoid, RandomWalk>;

std::string format_profile(const TempProfile& profile);
TempProfile parse_profile(const std::string& text);

enum class ToneMode { real, complex };

struct SynthSpec {
  RadarConfig config;
  std::size_t num_frames = 5000;
  std::uint32_t target_bin = 7;  // about 20 cm at a 5.5 GHz sweep
  double tone_amplitude = 0.075;
  ToneMode tone_mode = ToneMode::real;
  DriftLaw drift = default_drift();
  TempProfile temp_profile = Ramp{};
  double snr_db = 20.0;  // +inf disables noise
  std::uint64_t seed = 1;

  /// Three antennas: one rising, two falling gains.
  static DriftLaw default_drift();

  void validate() const;
  static SynthSpec parse(const std::string& text);
  static SynthSpec load(const std::filesystem::path& path);
  std::string format() const;
};

/// Seed of an independent substream.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

TemperatureLog generate_temperatures(const SynthSpec& spec);
RadarCube generate_cube(const SynthSpec& spec, const TemperatureLog& temps, unsigned threads = 1);

}  // namespace radarcal::synth
