#pragma once

// Range-FFT preprocessing: DC removal, normalized forward FFT, positive-half
// selection with x2 energy scaling, magnitude, and chirp averaging.

#include <cstddef>
#include <span>
#include <vector>

#include "core/datacube.hpp"

namespace radarcal::preprocess {

/// Output of fft_normalized. `normalized` records that the 1/N factor is applied.
struct Spectrum {
  std::vector<Complex> bins;
  bool normalized = false;
};

/// Forward DFT, X[k] = (1/N) sum_n x[n] exp(-2 pi i k n / N).
/// Radix-2 for power-of-two sizes, direct O(N^2) summation otherwise.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }
  bool is_radix2() const { return radix2_; }
  /// In-place transform of exactly size() values. `scratch` is used by the direct path.
  void forward_normalized(std::span<Complex> data, std::vector<Complex>& scratch) const;

 private:
  std::size_t n_;
  bool radix2_;
  std::vector<Complex> twiddles_;        // exp(-2 pi i k / N), k < N (N/2 for radix-2)
  std::vector<std::size_t> bit_reverse_;
};

std::vector<Complex> remove_dc(std::span<const Complex> chirp);
Spectrum fft_normalized(std::span<const Complex> chirp);
/// 2 * bins[0 .. N/2-1]; DC bin kept.
std::vector<Complex> positive_spectrum(const Spectrum& spectrum);
std::vector<double> amplitude(std::span<const Complex> half_spectrum);
/// Mean over rows of a row-major `rows x cols` matrix, accumulated in row order.
std::vector<double> chirp_average(std::span<const double> per_chirp, std::size_t rows);

/// Full pipeline over every (frame, antenna). Frames are split across
/// `threads` workers; the result does not depend on the thread count.
AmplitudeTensor compute_amplitude_profiles(const RadarCube& cube, unsigned threads = 1);

}  // namespace radarcal::preprocess
