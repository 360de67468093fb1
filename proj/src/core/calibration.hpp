#pragma once

// Per-(antenna, bin) linear temperature-to-amplitude models and the
// multiplicative correction that turns amplitude profiles into
// temperature-compensated amplitude profiles (TCAP).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/datacube.hpp"

namespace radarcal::calibration {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr int kModelFormatVersion = 1;

struct BinModel {
  std::uint32_t antenna = 0;
  std::uint32_t bin = 0;
  double slope = 0.0;      // amplitude per degC
  double intercept = 0.0;  // amplitude at 0 degC

  friend bool operator==(const BinModel&, const BinModel&) = default;
};

/// How predict() treats temperatures outside the training range.
enum class Extrapolation { linear, clamp };

class CalibrationModel {
 public:
  CalibrationModel() = default;
  CalibrationModel(std::size_t num_antennas, std::size_t num_bins, double t_ref, double t_min, double t_max,
                   double epsilon, std::vector<BinModel> models);

  std::size_t num_antennas() const { return num_antennas_; }
  std::size_t num_bins() const { return num_bins_; }
  double t_ref() const { return t_ref_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double epsilon() const { return epsilon_; }

  /// Fitted entries ordered by (antenna, bin). Bins outside the fitted subset have none.
  std::span<const BinModel> bin_models() const { return models_; }
  const BinModel* find(std::size_t antenna, std::size_t bin) const;

  double predict(std::size_t antenna, std::size_t bin, double t,
                 Extrapolation mode = Extrapolation::linear) const;

  friend bool operator==(const CalibrationModel&, const CalibrationModel&) = default;

 private:
  std::size_t num_antennas_ = 0;
  std::size_t num_bins_ = 0;
  double t_ref_ = 0.0;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
  double epsilon_ = kDefaultEpsilon;
  std::vector<BinModel> models_;
  std::vector<std::int32_t> lookup_;  // [antenna * num_bins + bin] -> index into models_, or -1
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept (centered two-pass sums).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct FitOptions {
  double epsilon = kDefaultEpsilon;
  std::optional<double> t_ref;                     // default: mean training temperature
  std::optional<std::vector<std::uint32_t>> bins;  // default: default_bins()
};

/// Bins fitted when no subset is requested: every bin except DC, which DC
/// removal forces to zero. A single-bin tensor keeps its only bin.
std::vector<std::uint32_t> default_bins(std::size_t num_bins);

CalibrationModel fit(const AmplitudeTensor& train_ap, const TemperatureLog& train_temps,
                     const FitOptions& options = {});

struct Split {
  std::size_t boundary = 0;  // first test frame
  AmplitudeTensor train_ap;
  TemperatureLog train_temps;
  AmplitudeTensor test_ap;
  TemperatureLog test_temps;
};

/// floor(frames * fraction), the first test frame of a chronological split.
std::size_t split_boundary(std::size_t frames, double train_fraction);
Split split_train_test(const AmplitudeTensor& ap, const TemperatureLog& temps, double train_fraction);

struct CorrectionFlag {
  std::uint32_t frame = 0;
  std::uint32_t antenna = 0;
  std::uint32_t bin = 0;

  friend bool operator==(const CorrectionFlag&, const CorrectionFlag&) = default;
};

struct Correction {
  AmplitudeTensor tcap;
  std::vector<CorrectionFlag> flags;  // (frame, antenna, bin) where the epsilon guard skipped correction
};

/// tcap = ap * M(t_ref) / M(T_f) per bin. Where either prediction is at or
/// below the model epsilon the amplitude passes through and a flag is recorded.
/// Bins without a fitted model pass through unflagged.
Correction apply_correction(const CalibrationModel& model, const AmplitudeTensor& ap, const TemperatureLog& temps,
                            Extrapolation mode = Extrapolation::linear);

std::string format_model_json(const CalibrationModel& model);
CalibrationModel parse_model_json(const std::string& text);
void save_model(const CalibrationModel& model, const std::filesystem::path& path);
CalibrationModel load_model(const std::filesystem::path& path);

std::string format_flags_csv(std::span<const CorrectionFlag> flags);
void write_flags_csv(std::span<const CorrectionFlag> flags, const std::filesystem::path& path);

}  // namespace radarcal::calibration
