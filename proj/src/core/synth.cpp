#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/kvfile.hpp"

namespace radarcal::synth {

namespace {

constexpr std::uint64_t kTemperatureStream = std::uint64_t{1} << 63;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::pair<double, double> profile_range(const TempProfile& p) {
  return std::visit(
      [](const auto& v) -> std::pair<double, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ramp>) return std::minmax(v.t_start, v.t_end);
        else if constexpr (std::is_same_v<T, Sinusoid>) return {v.mean - std::abs(v.amplitude), v.mean + std::abs(v.amplitude)};
        else return {v.lo, v.hi};
      },
      p);
}

std::vector<double> parse_args(const std::string& text, std::size_t open, std::size_t expected) {
  const auto close = text.rfind(')');
  if (close == std::string::npos || close < open || !trim(std::string_view(text).substr(close + 1)).empty())
    fail(Errc::parse, "temp_profile: malformed '" + text + "'");
  std::vector<double> args;
  std::string_view inner = std::string_view(text).substr(open + 1, close - open - 1);
  while (true) {
    auto comma = inner.find(',');
    args.push_back(parse_double(inner.substr(0, comma), "temp_profile argument"));
    if (comma == std::string_view::npos) break;
    inner = inner.substr(comma + 1);
  }
  if (args.size() != expected)
    fail(Errc::parse, "temp_profile: expected " + std::to_string(expected) + " arguments in '" + text + "'");
  return args;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(splitmix64(seed) + stream); }

// --- profiles ------------------------------------------------------------------

std::string format_profile(const TempProfile& profile) {
  auto n = [](double v) { return io::format_double(v); };
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ramp>) return "ramp(" + n(v.t_start) + ", " + n(v.t_end) + ")";
        else if constexpr (std::is_same_v<T, Sinusoid>)
          return "sinusoid(" + n(v.mean) + ", " + n(v.amplitude) + ", " + n(v.period_frames) + ")";
        else return "random_walk(" + n(v.start) + ", " + n(v.step_sigma) + ", " + n(v.lo) + ", " + n(v.hi) + ")";
      },
      profile);
}

TempProfile parse_profile(const std::string& raw) {
  const std::string text(trim(raw));
  const auto open = text.find('(');
  if (open == std::string::npos) fail(Errc::parse, "temp_profile: expected name(args), got '" + text + "'");
  const std::string name(trim(std::string_view(text).substr(0, open)));
  if (name == "ramp") {
    auto a = parse_args(text, open, 2);
    return Ramp{a[0], a[1]};
  }
  if (name == "sinusoid") {
    auto a = parse_args(text, open, 3);
    return Sinusoid{a[0], a[1], a[2]};
  }
  if (name == "random_walk") {
    auto a = parse_args(text, open, 4);
    return RandomWalk{a[0], a[1], a[2], a[3]};
  }
  fail(Errc::parse, "temp_profile: unknown profile '" + name + "'");
}

// --- spec ------------------------------------------------------------------------

DriftLaw SynthSpec::default_drift() { return {{-1.3, 4.6, 2.6}, {0.07, -0.09, -0.04}}; }

void SynthSpec::validate() const {
  config.validate();
  if (target_bin >= config.num_bins())
    fail(Errc::out_of_range, "target_bin must be below N/2 = " + std::to_string(config.num_bins()));
  if (!std::isfinite(tone_amplitude) || tone_amplitude < 0.0) fail(Errc::out_of_range, "tone_amplitude must be >= 0");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    fail(Errc::out_of_range, "snr_db must be a number or +inf");
  if (drift.alpha.size() != config.num_antennas || drift.beta.size() != config.num_antennas)
    fail(Errc::bad_dimensions, "drift law needs alpha and beta for each of the " +
                                   std::to_string(config.num_antennas) + " antennas");

  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ramp>) {
          if (!std::isfinite(v.t_start) || !std::isfinite(v.t_end)) fail(Errc::non_finite, "ramp ends must be finite");
        } else if constexpr (std::is_same_v<T, Sinusoid>) {
          if (!std::isfinite(v.mean) || !std::isfinite(v.amplitude) || !(v.period_frames > 0.0))
            fail(Errc::out_of_range, "sinusoid needs finite mean/amplitude and a positive period");
        } else {
          if (!(v.lo <= v.hi) || !std::isfinite(v.lo) || !std::isfinite(v.hi) || !(v.step_sigma >= 0.0) ||
              !std::isfinite(v.start))
            fail(Errc::out_of_range, "random_walk needs lo <= hi, finite start and step_sigma >= 0");
        }
      },
      temp_profile);

  const auto [lo, hi] = profile_range(temp_profile);
  for (std::size_t a = 0; a < config.num_antennas; ++a) {
    if (!std::isfinite(drift.alpha[a]) || !std::isfinite(drift.beta[a]))
      fail(Errc::non_finite, "drift law must be finite");
    if (drift.gain(a, lo) <= 0.0 || drift.gain(a, hi) <= 0.0)
      fail(Errc::gain_not_positive, "gain of antenna " + std::to_string(a) + " is not positive over [" +
                                        io::format_double(lo) + ", " + io::format_double(hi) + "] degC");
  }
}

SynthSpec SynthSpec::parse(const std::string& text) {
  auto kv = KeyValueFile::parse(text, "synth spec");
  kv.reject_unknown([](const std::string& k) {
    static const char* known[] = {"start_freq_hz", "end_freq_hz", "num_antennas", "num_chirps", "num_samples",
                                  "num_frames", "target_bin", "tone_amplitude", "tone_mode", "temp_profile",
                                  "snr_db", "seed"};
    for (auto* name : known)
      if (k == name) return true;
    return k.rfind("alpha_", 0) == 0 || k.rfind("beta_", 0) == 0;
  });

  SynthSpec s;
  s.config.start_freq_hz = kv.get_double("start_freq_hz", s.config.start_freq_hz);
  s.config.end_freq_hz = kv.get_double("end_freq_hz", s.config.end_freq_hz);
  s.config.num_antennas = kv.get_u32("num_antennas", s.config.num_antennas);
  s.config.num_chirps = kv.get_u32("num_chirps", s.config.num_chirps);
  s.config.num_samples = kv.get_u32("num_samples", s.config.num_samples);
  s.num_frames = kv.get_u64("num_frames", s.num_frames);
  s.target_bin = kv.get_u32("target_bin", s.target_bin);
  s.tone_amplitude = kv.get_double("tone_amplitude", s.tone_amplitude);
  s.snr_db = kv.get_double("snr_db", s.snr_db);
  s.seed = kv.get_u64("seed", s.seed);
  if (auto mode = kv.get("tone_mode")) {
    if (*mode == "real") s.tone_mode = ToneMode::real;
    else if (*mode == "complex") s.tone_mode = ToneMode::complex;
    else fail(Errc::parse, "tone_mode must be 'real' or 'complex'");
  }
  if (auto p = kv.get("temp_profile")) s.temp_profile = parse_profile(*p);

  const auto defaults = default_drift();
  s.drift.alpha.resize(s.config.num_antennas);
  s.drift.beta.resize(s.config.num_antennas);
  for (std::size_t a = 0; a < s.config.num_antennas; ++a) {
    const auto ak = "alpha_" + std::to_string(a), bk = "beta_" + std::to_string(a);
    const bool has_default = a < defaults.alpha.size();
    if (!has_default && (!kv.contains(ak) || !kv.contains(bk)))
      fail(Errc::malformed, "synth spec: antenna " + std::to_string(a) + " needs " + ak + " and " + bk);
    s.drift.alpha[a] = has_default ? kv.get_double(ak, defaults.alpha[a]) : kv.get_double(ak);
    s.drift.beta[a] = has_default ? kv.get_double(bk, defaults.beta[a]) : kv.get_double(bk);
  }
  for (const auto& [k, v] : kv.entries()) {
    const auto idx_text = k.substr(k.find('_') + 1);
    if ((k.rfind("alpha_", 0) == 0 || k.rfind("beta_", 0) == 0) &&
        parse_u64(idx_text, k) >= s.config.num_antennas)
      fail(Errc::out_of_range, "synth spec: '" + k + "' refers to a missing antenna");
  }
  s.validate();
  return s;
}

SynthSpec SynthSpec::load(const std::filesystem::path& path) { return parse(io::read_text_file(path)); }

std::string SynthSpec::format() const {
  auto n = [](double v) { return io::format_double(v); };
  std::string s;
  s += "start_freq_hz = " + n(config.start_freq_hz) + "\n";
  s += "end_freq_hz = " + n(config.end_freq_hz) + "\n";
  s += "num_antennas = " + std::to_string(config.num_antennas) + "\n";
  s += "num_chirps = " + std::to_string(config.num_chirps) + "\n";
  s += "num_samples = " + std::to_string(config.num_samples) + "\n";
  s += "num_frames = " + std::to_string(num_frames) + "\n";
  s += "target_bin = " + std::to_string(target_bin) + "\n";
  s += "tone_amplitude = " + n(tone_amplitude) + "\n";
  s += std::string("tone_mode = ") + (tone_mode == ToneMode::real ? "real" : "complex") + "\n";
  for (std::size_t a = 0; a < drift.alpha.size(); ++a) {
    s += "alpha_" + std::to_string(a) + " = " + n(drift.alpha[a]) + "\n";
    s += "beta_" + std::to_string(a) + " = " + n(drift.beta[a]) + "\n";
  }
  s += "temp_profile = " + format_profile(temp_profile) + "\n";
  s += "snr_db = " + n(snr_db) + "\n";
  s += "seed = " + std::to_string(seed) + "\n";
  return s;
}

// --- generation ------------------------------------------------------------------

TemperatureLog generate_temperatures(const SynthSpec& spec) {
  const std::size_t frames = spec.num_frames;
  std::vector<double> t(frames);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ramp>) {
          for (std::size_t f = 0; f < frames; ++f)
            t[f] = frames == 1 ? v.t_start
                               : v.t_start + (v.t_end - v.t_start) * static_cast<double>(f) /
                                                 static_cast<double>(frames - 1);
        } else if constexpr (std::is_same_v<T, Sinusoid>) {
          for (std::size_t f = 0; f < frames; ++f)
            t[f] = v.mean + v.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(f) / v.period_frames);
        } else {
          Gaussian gauss(stream_seed(spec.seed, kTemperatureStream));
          double current = std::clamp(v.start, v.lo, v.hi);
          for (std::size_t f = 0; f < frames; ++f) {
            if (f > 0) current = std::clamp(current + v.step_sigma * gauss(), v.lo, v.hi);
            t[f] = current;
          }
        }
      },
      spec.temp_profile);
  return TemperatureLog(std::move(t));
}

RadarCube generate_cube(const SynthSpec& spec, const TemperatureLog& temps, unsigned threads) {
  spec.validate();
  require_paired(spec.num_frames, temps);
  const auto& cfg = spec.config;
  for (std::size_t f = 0; f < temps.size(); ++f)
    for (std::size_t a = 0; a < cfg.num_antennas; ++a)
      if (!(spec.drift.gain(a, temps[f]) > 0.0))
        fail(Errc::gain_not_positive, "gain of antenna " + std::to_string(a) + " is not positive at frame " +
                                          std::to_string(f) + " (" + io::format_double(temps[f]) + " degC)");

  RadarCube cube(cfg, spec.num_frames);
  const std::size_t n_samples = cfg.num_samples;
  // Unit tone, indexed by (k * n) mod N so every period is sampled identically.
  std::vector<Complex> tone(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>((spec.target_bin * n) % n_samples) /
                         static_cast<double>(n_samples);
    tone[n] = spec.tone_mode == ToneMode::real ? Complex{std::cos(phase), 0.0}
                                               : Complex{std::cos(phase), std::sin(phase)};
  }
  const bool noisy = std::isfinite(spec.snr_db);
  const double snr_linear = std::pow(10.0, spec.snr_db / 10.0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      Gaussian gauss(stream_seed(spec.seed, f));
      for (std::size_t a = 0; a < cfg.num_antennas; ++a) {
        const double amp = spec.drift.gain(a, temps[f]) * spec.tone_amplitude;
        // Tone power: amp^2 / 2 for a real cosine, amp^2 for a complex exponential.
        const double signal_power = spec.tone_mode == ToneMode::real ? 0.5 * amp * amp : amp * amp;
        const double noise_power = noisy ? signal_power / snr_linear : 0.0;
        const double sigma =
            spec.tone_mode == ToneMode::real ? std::sqrt(noise_power) : std::sqrt(0.5 * noise_power);
        for (std::size_t c = 0; c < cfg.num_chirps; ++c) {
          auto chirp = cube.chirp(f, a, c);
          for (std::size_t n = 0; n < n_samples; ++n) {
            Complex v = amp * tone[n];
            if (noisy) {
              if (spec.tone_mode == ToneMode::real) {
                v += Complex{sigma * gauss(), 0.0};
              } else {
                const double i = gauss();
                const double q = gauss();
                v += Complex{sigma * i, sigma * q};
              }
            }
            chirp[n] = v;
          }
        }
      }
    }
  };

  const std::size_t frames = spec.num_frames;
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(frames, 256))));
  if (threads == 1) {
    run(0, frames);
    return cube;
  }
  std::vector<std::jthread> workers;
  const std::size_t block = (frames + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(frames, t * block);
    const std::size_t end = std::min(frames, begin + block);
    if (begin < end) workers.emplace_back(run, begin, end);
  }
  workers.clear();
  return cube;
}

}  // namespace radarcal::synth
