#pragma once

// Radar data cube, temperature log and amplitude tensor, with their on-disk
// formats:
//
//   RDC1  "RDC1" | u32 F, A, C, N, reserved=0 | F*A*C*N x (f32 I, f32 Q)
//   RAP1  "RAP1" | u32 F, A, B, reserved=0    | F*A*B x f64
//   CSV   "frame,temp_c" header, frames 0..F-1 ascending
//
// All integers and floats little-endian; samples ordered f, a, c, n.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace radarcal {

using Complex = std::complex<double>;

struct RadarConfig {
  double start_freq_hz = 58.0e9;
  double end_freq_hz = 63.5e9;
  std::uint32_t num_antennas = 3;
  std::uint32_t num_chirps = 2;
  std::uint32_t num_samples = 32;

  /// Throws Errc::bad_dimensions on any invariant violation.
  void validate() const;
  std::uint32_t num_bins() const { return num_samples / 2; }

  friend bool operator==(const RadarConfig&, const RadarConfig&) = default;
};

/// Acquisition config file: RadarConfig keys plus train_fraction.
struct RunConfig {
  RadarConfig radar;
  double train_fraction = 0.7;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& text);
};

class RadarCube {
 public:
  RadarCube() = default;
  /// Zero-filled cube.
  RadarCube(RadarConfig config, std::size_t num_frames);
  RadarCube(RadarConfig config, std::size_t num_frames, std::vector<Complex> samples);

  const RadarConfig& config() const { return config_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t chirp_stride() const { return config_.num_samples; }

  std::span<const Complex> chirp(std::size_t f, std::size_t a, std::size_t c) const {
    return {samples_.data() + offset(f, a, c), config_.num_samples};
  }
  std::span<Complex> chirp(std::size_t f, std::size_t a, std::size_t c) {
    return {samples_.data() + offset(f, a, c), config_.num_samples};
  }
  Complex at(std::size_t f, std::size_t a, std::size_t c, std::size_t n) const {
    return samples_[offset(f, a, c) + n];
  }
  std::span<const Complex> samples() const { return samples_; }

  /// Element-wise equality of dimensions and samples; band edges are ignored
  /// because the RDC1 header does not carry them.
  bool same_data(const RadarCube& other) const;

 private:
  std::size_t offset(std::size_t f, std::size_t a, std::size_t c) const {
    return ((f * config_.num_antennas + a) * config_.num_chirps + c) * config_.num_samples;
  }

  RadarConfig config_;
  std::size_t num_frames_ = 0;
  std::vector<Complex> samples_;
};

class TemperatureLog {
 public:
  TemperatureLog() = default;
  explicit TemperatureLog(std::vector<double> temps);

  std::size_t size() const { return temps_.size(); }
  bool empty() const { return temps_.empty(); }
  double operator[](std::size_t f) const { return temps_[f]; }
  std::span<const double> values() const { return temps_; }

  TemperatureLog slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const TemperatureLog&, const TemperatureLog&) = default;

 private:
  std::vector<double> temps_;
};

/// Real amplitudes indexed [f][a][b]; every value finite and non-negative.
class AmplitudeTensor {
 public:
  AmplitudeTensor() = default;
  AmplitudeTensor(std::size_t frames, std::size_t antennas, std::size_t bins);
  AmplitudeTensor(std::size_t frames, std::size_t antennas, std::size_t bins, std::vector<double> values);

  std::size_t num_frames() const { return frames_; }
  std::size_t num_antennas() const { return antennas_; }
  std::size_t num_bins() const { return bins_; }

  double at(std::size_t f, std::size_t a, std::size_t b) const { return values_[index(f, a, b)]; }
  double& at(std::size_t f, std::size_t a, std::size_t b) { return values_[index(f, a, b)]; }
  std::span<const double> profile(std::size_t f, std::size_t a) const {
    return {values_.data() + index(f, a, 0), bins_};
  }
  std::span<double> profile(std::size_t f, std::size_t a) { return {values_.data() + index(f, a, 0), bins_}; }
  std::span<const double> values() const { return values_; }

  AmplitudeTensor slice(std::size_t begin, std::size_t end) const;
  /// Throws on negative or non-finite entries.
  void validate() const;

  friend bool operator==(const AmplitudeTensor&, const AmplitudeTensor&) = default;

 private:
  std::size_t index(std::size_t f, std::size_t a, std::size_t b) const { return (f * antennas_ + a) * bins_ + b; }

  std::size_t frames_ = 0;
  std::size_t antennas_ = 0;
  std::size_t bins_ = 0;
  std::vector<double> values_;
};

inline constexpr std::size_t kCubeHeaderBytes = 24;
inline constexpr std::size_t kAmplitudeHeaderBytes = 20;

std::vector<unsigned char> encode_cube(const RadarCube& cube);
RadarCube decode_cube(std::span<const unsigned char> bytes);
RadarCube read_cube(const std::filesystem::path& path);
void write_cube(const RadarCube& cube, const std::filesystem::path& path);

std::vector<unsigned char> encode_amplitudes(const AmplitudeTensor& ap);
AmplitudeTensor decode_amplitudes(std::span<const unsigned char> bytes);
AmplitudeTensor read_amplitudes(const std::filesystem::path& path);
void write_amplitudes(const AmplitudeTensor& ap, const std::filesystem::path& path);

std::string format_temperature_log(const TemperatureLog& log);
TemperatureLog parse_temperature_log(const std::string& text);
TemperatureLog read_temperature_log(const std::filesystem::path& path);
void write_temperature_log(const TemperatureLog& log, const std::filesystem::path& path);

/// Throws Errc::length_mismatch unless the log covers exactly `num_frames`.
void require_paired(std::size_t num_frames, const TemperatureLog& log);

}  // namespace radarcal
