#include "core/datacube.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string_view>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/kvfile.hpp"

namespace radarcal {

namespace {

constexpr std::string_view kCubeMagic = "RDC1";
constexpr std::string_view kAmplitudeMagic = "RAP1";

// Product of dimensions, failing instead of wrapping.
std::size_t checked_product(std::initializer_list<std::uint64_t> dims) {
  std::uint64_t total = 1;
  for (auto d : dims) {
    if (d != 0 && total > std::numeric_limits<std::uint64_t>::max() / d)
      fail(Errc::bad_dimensions, "dimension product overflows");
    total *= d;
  }
  if (total > std::numeric_limits<std::size_t>::max()) fail(Errc::bad_dimensions, "dimension product too large");
  return static_cast<std::size_t>(total);
}

void check_payload(std::size_t actual, std::size_t header, std::size_t expected_payload, std::string_view fmt) {
  const std::size_t payload = actual - header;
  if (payload < expected_payload)
    fail(Errc::truncated, std::string(fmt) + ": header declares " + std::to_string(expected_payload) +
                              " payload bytes, file has " + std::to_string(payload));
  if (payload > expected_payload)
    fail(Errc::trailing_data, std::string(fmt) + ": " + std::to_string(payload - expected_payload) +
                                  " bytes beyond the declared payload");
}

void append_magic(std::vector<unsigned char>& out, std::string_view magic) {
  out.insert(out.end(), magic.begin(), magic.end());
}

bool has_magic(std::span<const unsigned char> bytes, std::string_view magic) {
  return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
}

}  // namespace

void RadarConfig::validate() const {
  if (!std::isfinite(start_freq_hz) || !std::isfinite(end_freq_hz) || !(end_freq_hz > start_freq_hz))
    fail(Errc::bad_dimensions, "end_freq_hz must exceed start_freq_hz");
  if (num_antennas < 1) fail(Errc::bad_dimensions, "num_antennas must be >= 1");
  if (num_chirps < 1) fail(Errc::bad_dimensions, "num_chirps must be >= 1");
  if (num_samples < 2 || num_samples % 2 != 0)
    fail(Errc::bad_dimensions, "num_samples must be even and >= 2, got " + std::to_string(num_samples));
}

RunConfig RunConfig::parse(const std::string& text) {
  auto kv = KeyValueFile::parse(text, "config");
  kv.reject_unknown([](const std::string& k) {
    return k == "start_freq_hz" || k == "end_freq_hz" || k == "num_antennas" || k == "num_chirps" ||
           k == "num_samples" || k == "train_fraction";
  });
  RunConfig cfg;
  cfg.radar.start_freq_hz = kv.get_double("start_freq_hz", cfg.radar.start_freq_hz);
  cfg.radar.end_freq_hz = kv.get_double("end_freq_hz", cfg.radar.end_freq_hz);
  cfg.radar.num_antennas = kv.get_u32("num_antennas", cfg.radar.num_antennas);
  cfg.radar.num_chirps = kv.get_u32("num_chirps", cfg.radar.num_chirps);
  cfg.radar.num_samples = kv.get_u32("num_samples", cfg.radar.num_samples);
  cfg.train_fraction = kv.get_double("train_fraction", cfg.train_fraction);
  cfg.radar.validate();
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    fail(Errc::out_of_range, "train_fraction must lie in (0, 1)");
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(io::read_text_file(path)); }

// --- RadarCube ---------------------------------------------------------------

RadarCube::RadarCube(RadarConfig config, std::size_t num_frames) : config_(config), num_frames_(num_frames) {
  config_.validate();
  samples_.assign(checked_product({num_frames, config_.num_antennas, config_.num_chirps, config_.num_samples}),
                  Complex{});
}

RadarCube::RadarCube(RadarConfig config, std::size_t num_frames, std::vector<Complex> samples)
    : config_(config), num_frames_(num_frames), samples_(std::move(samples)) {
  config_.validate();
  auto expected = checked_product({num_frames, config_.num_antennas, config_.num_chirps, config_.num_samples});
  if (samples_.size() != expected)
    fail(Errc::length_mismatch, "cube expects " + std::to_string(expected) + " samples, got " +
                                    std::to_string(samples_.size()));
  for (const auto& s : samples_)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) fail(Errc::non_finite, "cube sample is not finite");
}

bool RadarCube::same_data(const RadarCube& other) const {
  return num_frames_ == other.num_frames_ && config_.num_antennas == other.config_.num_antennas &&
         config_.num_chirps == other.config_.num_chirps && config_.num_samples == other.config_.num_samples &&
         samples_ == other.samples_;
}

// --- TemperatureLog ----------------------------------------------------------

TemperatureLog::TemperatureLog(std::vector<double> temps) : temps_(std::move(temps)) {
  for (std::size_t f = 0; f < temps_.size(); ++f)
    if (!std::isfinite(temps_[f])) fail(Errc::non_finite, "temperature at frame " + std::to_string(f) + " is not finite");
}

TemperatureLog TemperatureLog::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > temps_.size()) fail(Errc::out_of_range, "temperature slice out of range");
  return TemperatureLog(std::vector<double>(temps_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            temps_.begin() + static_cast<std::ptrdiff_t>(end)));
}

void require_paired(std::size_t num_frames, const TemperatureLog& log) {
  if (log.size() != num_frames)
    fail(Errc::length_mismatch, "temperature log has " + std::to_string(log.size()) + " rows but data has " +
                                    std::to_string(num_frames) + " frames");
}

// --- AmplitudeTensor ---------------------------------------------------------

AmplitudeTensor::AmplitudeTensor(std::size_t frames, std::size_t antennas, std::size_t bins)
    : frames_(frames), antennas_(antennas), bins_(bins), values_(checked_product({frames, antennas, bins}), 0.0) {}

AmplitudeTensor::AmplitudeTensor(std::size_t frames, std::size_t antennas, std::size_t bins,
                                 std::vector<double> values)
    : frames_(frames), antennas_(antennas), bins_(bins), values_(std::move(values)) {
  if (values_.size() != checked_product({frames, antennas, bins}))
    fail(Errc::length_mismatch, "amplitude tensor size does not match its dimensions");
  validate();
}

void AmplitudeTensor::validate() const {
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0) fail(Errc::non_finite, "amplitude values must be finite and non-negative");
}

AmplitudeTensor AmplitudeTensor::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > frames_) fail(Errc::out_of_range, "amplitude slice out of range");
  const auto stride = antennas_ * bins_;
  std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                        values_.begin() + static_cast<std::ptrdiff_t>(end * stride));
  AmplitudeTensor out;
  out.frames_ = end - begin;
  out.antennas_ = antennas_;
  out.bins_ = bins_;
  out.values_ = std::move(v);
  return out;
}

// --- RDC1 --------------------------------------------------------------------

std::vector<unsigned char> encode_cube(const RadarCube& cube) {
  const auto& cfg = cube.config();
  if (cube.num_frames() > std::numeric_limits<std::uint32_t>::max())
    fail(Errc::bad_dimensions, "frame count exceeds the RDC1 header range");
  std::vector<unsigned char> out;
  out.reserve(kCubeHeaderBytes + cube.samples().size() * 8);
  append_magic(out, kCubeMagic);
  io::put_u32(out, static_cast<std::uint32_t>(cube.num_frames()));
  io::put_u32(out, cfg.num_antennas);
  io::put_u32(out, cfg.num_chirps);
  io::put_u32(out, cfg.num_samples);
  io::put_u32(out, 0);
  for (const auto& s : cube.samples()) {
    const auto i = static_cast<float>(s.real());
    const auto q = static_cast<float>(s.imag());
    if (!std::isfinite(i) || !std::isfinite(q)) fail(Errc::non_finite, "sample does not fit a 32-bit float");
    io::put_f32(out, i);
    io::put_f32(out, q);
  }
  return out;
}

RadarCube decode_cube(std::span<const unsigned char> bytes) {
  if (!has_magic(bytes, kCubeMagic)) fail(Errc::bad_magic, "not an RDC1 file");
  if (bytes.size() < kCubeHeaderBytes) fail(Errc::truncated, "RDC1 header is incomplete");
  const auto* p = bytes.data() + 4;
  const std::uint32_t frames = io::get_u32(p);
  RadarConfig cfg;
  cfg.num_antennas = io::get_u32(p + 4);
  cfg.num_chirps = io::get_u32(p + 8);
  cfg.num_samples = io::get_u32(p + 12);
  if (io::get_u32(p + 16) != 0) fail(Errc::bad_header, "RDC1 reserved field must be zero");
  cfg.validate();

  const auto count = checked_product({frames, cfg.num_antennas, cfg.num_chirps, cfg.num_samples});
  check_payload(bytes.size(), kCubeHeaderBytes, checked_product({count, 8}), "RDC1");

  std::vector<Complex> samples(count);
  const auto* s = bytes.data() + kCubeHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, s += 8) {
    const double re = io::get_f32(s);
    const double im = io::get_f32(s + 4);
    if (!std::isfinite(re) || !std::isfinite(im))
      fail(Errc::non_finite, "RDC1 sample " + std::to_string(i) + " is not finite");
    samples[i] = {re, im};
  }
  return RadarCube(cfg, frames, std::move(samples));
}

RadarCube read_cube(const std::filesystem::path& path) { return decode_cube(io::read_file(path)); }

void write_cube(const RadarCube& cube, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_cube(cube));
}

// --- RAP1 --------------------------------------------------------------------

std::vector<unsigned char> encode_amplitudes(const AmplitudeTensor& ap) {
  constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
  if (ap.num_frames() > u32max || ap.num_antennas() > u32max || ap.num_bins() > u32max)
    fail(Errc::bad_dimensions, "tensor dimensions exceed the RAP1 header range");
  std::vector<unsigned char> out;
  out.reserve(kAmplitudeHeaderBytes + ap.values().size() * 8);
  append_magic(out, kAmplitudeMagic);
  io::put_u32(out, static_cast<std::uint32_t>(ap.num_frames()));
  io::put_u32(out, static_cast<std::uint32_t>(ap.num_antennas()));
  io::put_u32(out, static_cast<std::uint32_t>(ap.num_bins()));
  io::put_u32(out, 0);
  for (double v : ap.values()) io::put_f64(out, v);
  return out;
}

AmplitudeTensor decode_amplitudes(std::span<const unsigned char> bytes) {
  if (!has_magic(bytes, kAmplitudeMagic)) fail(Errc::bad_magic, "not a RAP1 file");
  if (bytes.size() < kAmplitudeHeaderBytes) fail(Errc::truncated, "RAP1 header is incomplete");
  const auto* p = bytes.data() + 4;
  const std::uint32_t frames = io::get_u32(p);
  const std::uint32_t antennas = io::get_u32(p + 4);
  const std::uint32_t bins = io::get_u32(p + 8);
  if (io::get_u32(p + 12) != 0) fail(Errc::bad_header, "RAP1 reserved field must be zero");
  if (antennas < 1 || bins < 1) fail(Errc::bad_dimensions, "RAP1 antennas and bins must be >= 1");

  const auto count = checked_product({frames, antennas, bins});
  check_payload(bytes.size(), kAmplitudeHeaderBytes, checked_product({count, 8}), "RAP1");
  std::vector<double> values(count);
  const auto* s = bytes.data() + kAmplitudeHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, s += 8) values[i] = io::get_f64(s);
  return AmplitudeTensor(frames, antennas, bins, std::move(values));
}

AmplitudeTensor read_amplitudes(const std::filesystem::path& path) { return decode_amplitudes(io::read_file(path)); }

void write_amplitudes(const AmplitudeTensor& ap, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_amplitudes(ap));
}

// --- temperature CSV ---------------------------------------------------------

std::string format_temperature_log(const TemperatureLog& log) {
  std::string out = "frame,temp_c\n";
  for (std::size_t f = 0; f < log.size(); ++f) {
    out += std::to_string(f);
    out += ',';
    out += io::format_double(log[f]);
    out += '\n';
  }
  return out;
}

TemperatureLog parse_temperature_log(const std::string& text) {
  std::string_view rest = text;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::vector<double> temps;
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    auto line = trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "frame,temp_c") fail(Errc::malformed, "temperature log must start with 'frame,temp_c'");
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      fail(Errc::parse, "temperature log line " + std::to_string(line_no) + ": expected two columns");
    const auto frame = parse_u64(line.substr(0, comma), "frame");
    const double temp = parse_double(line.substr(comma + 1), "temp_c");
    if (!std::isfinite(temp))
      fail(Errc::non_finite, "temperature log line " + std::to_string(line_no) + ": temperature is not finite");
    if (frame < temps.size())
      fail(Errc::duplicate_index, "temperature log: duplicate frame " + std::to_string(frame));
    if (frame != temps.size())
      fail(Errc::missing_index, "temperature log: expected frame " + std::to_string(temps.size()) + ", found " +
                                    std::to_string(frame));
    temps.push_back(temp);
  }
  if (!header_seen) fail(Errc::malformed, "temperature log is empty (no header)");
  return TemperatureLog(std::move(temps));
}

TemperatureLog read_temperature_log(const std::filesystem::path& path) {
  return parse_temperature_log(io::read_text_file(path));
}

void write_temperature_log(const TemperatureLog& log, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_temperature_log(log));
}

}  // namespace radarcal
