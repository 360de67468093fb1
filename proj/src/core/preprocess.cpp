#include "core/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "core/error.hpp"

namespace radarcal::preprocess {

namespace {

void subtract_mean(std::span<Complex> x) {
  Complex sum{};
  for (const auto& v : x) sum += v;
  const Complex mean = sum / static_cast<double>(x.size());
  for (auto& v : x) v -= mean;
}

// Doubles and takes magnitudes of the first half of a normalized spectrum,
// adding them into `acc`.
void accumulate_half_magnitudes(std::span<const Complex> spectrum, std::span<double> acc) {
  for (std::size_t b = 0; b < acc.size(); ++b) acc[b] += std::abs(2.0 * spectrum[b]);
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), radix2_(n >= 1 && std::has_single_bit(n)) {
  if (n == 0) throw std::invalid_argument("FFT size must be positive");
  const std::size_t count = radix2_ ? n / 2 : n;
  twiddles_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  if (radix2_) {
    const int bits = std::countr_zero(n);
    bit_reverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bit_reverse_[i] = r;
    }
  }
}

void FftPlan::forward_normalized(std::span<Complex> data, std::vector<Complex>& scratch) const {
  const double scale = 1.0 / static_cast<double>(n_);
  if (radix2_) {
    for (std::size_t i = 0; i < n_; ++i)
      if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const Complex t = twiddles_[j * step] * data[start + j + half];
          const Complex u = data[start + j];
          data[start + j] = u + t;
          data[start + j + half] = u - t;
        }
      }
    }
    for (auto& v : data) v *= scale;
    return;
  }
  scratch.assign(n_, Complex{});
  for (std::size_t k = 0; k < n_; ++k) {
    Complex acc{};
    for (std::size_t n = 0; n < n_; ++n) acc += data[n] * twiddles_[(k * n) % n_];
    scratch[k] = acc * scale;
  }
  std::copy(scratch.begin(), scratch.end(), data.begin());
}

std::vector<Complex> remove_dc(std::span<const Complex> chirp) {
  std::vector<Complex> out(chirp.begin(), chirp.end());
  if (!out.empty()) subtract_mean(out);
  return out;
}

Spectrum fft_normalized(std::span<const Complex> chirp) {
  Spectrum s{{chirp.begin(), chirp.end()}, true};
  if (s.bins.empty()) return s;
  std::vector<Complex> scratch;
  FftPlan(chirp.size()).forward_normalized(s.bins, scratch);
  return s;
}

std::vector<Complex> positive_spectrum(const Spectrum& spectrum) {
  if (!spectrum.normalized) throw std::invalid_argument("positive_spectrum expects a normalized spectrum");
  if (spectrum.bins.size() % 2 != 0) fail(Errc::bad_dimensions, "positive_spectrum needs an even length");
  const std::size_t half = spectrum.bins.size() / 2;
  std::vector<Complex> out(half);
  for (std::size_t b = 0; b < half; ++b) out[b] = 2.0 * spectrum.bins[b];
  return out;
}

std::vector<double> amplitude(std::span<const Complex> half_spectrum) {
  std::vector<double> out(half_spectrum.size());
  std::transform(half_spectrum.begin(), half_spectrum.end(), out.begin(), [](Complex c) { return std::abs(c); });
  return out;
}

std::vector<double> chirp_average(std::span<const double> per_chirp, std::size_t rows) {
  if (rows == 0) throw std::invalid_argument("chirp_average needs at least one row");
  if (per_chirp.size() % rows != 0) throw std::invalid_argument("chirp_average: ragged matrix");
  const std::size_t cols = per_chirp.size() / rows;
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t b = 0; b < cols; ++b) out[b] += per_chirp[r * cols + b];
  for (auto& v : out) v /= static_cast<double>(rows);
  return out;
}

AmplitudeTensor compute_amplitude_profiles(const RadarCube& cube, unsigned threads) {
  const auto& cfg = cube.config();
  const std::size_t frames = cube.num_frames();
  const std::size_t bins = cfg.num_bins();
  AmplitudeTensor ap(frames, cfg.num_antennas, bins);
  if (frames == 0) return ap;

  const FftPlan plan(cfg.num_samples);
  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<Complex> buffer(cfg.num_samples);
    std::vector<Complex> scratch;
    for (std::size_t f = begin; f < end; ++f) {
      for (std::size_t a = 0; a < cfg.num_antennas; ++a) {
        auto out = ap.profile(f, a);
        for (std::size_t c = 0; c < cfg.num_chirps; ++c) {
          auto chirp = cube.chirp(f, a, c);
          std::copy(chirp.begin(), chirp.end(), buffer.begin());
          subtract_mean(buffer);
          plan.forward_normalized(buffer, scratch);
          accumulate_half_magnitudes(buffer, out);
        }
        for (auto& v : out) v /= static_cast<double>(cfg.num_chirps);
      }
    }
  };

  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::size_t>(frames, 256)));
  if (threads == 1) {
    run(0, frames);
    return ap;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t block = (frames + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(frames, t * block);
    const std::size_t end = std::min(frames, begin + block);
    if (begin < end) workers.emplace_back(run, begin, end);
  }
  workers.clear();
  return ap;
}

}  // namespace radarcal::preprocess
