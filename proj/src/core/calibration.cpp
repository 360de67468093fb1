#include "core/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace radarcal::calibration {

// --- CalibrationModel --------------------------------------------------------

CalibrationModel::CalibrationModel(std::size_t num_antennas, std::size_t num_bins, double t_ref, double t_min,
                                   double t_max, double epsilon, std::vector<BinModel> models)
    : num_antennas_(num_antennas),
      num_bins_(num_bins),
      t_ref_(t_ref),
      t_min_(t_min),
      t_max_(t_max),
      epsilon_(epsilon),
      models_(std::move(models)) {
  if (num_antennas_ < 1 || num_bins_ < 1) fail(Errc::bad_dimensions, "model grid must be at least 1x1");
  if (!std::isfinite(t_ref_) || !std::isfinite(t_min_) || !std::isfinite(t_max_))
    fail(Errc::non_finite, "model temperatures must be finite");
  if (!(t_min_ <= t_ref_ && t_ref_ <= t_max_))
    fail(Errc::out_of_range, "t_ref must lie within [t_min, t_max]");
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) fail(Errc::out_of_range, "epsilon must be positive");

  std::sort(models_.begin(), models_.end(), [](const BinModel& l, const BinModel& r) {
    return l.antenna != r.antenna ? l.antenna < r.antenna : l.bin < r.bin;
  });
  lookup_.assign(num_antennas_ * num_bins_, -1);
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const auto& m = models_[i];
    if (m.antenna >= num_antennas_ || m.bin >= num_bins_)
      fail(Errc::out_of_range, "bin model (" + std::to_string(m.antenna) + ", " + std::to_string(m.bin) +
                                   ") outside the model grid");
    if (!std::isfinite(m.slope) || !std::isfinite(m.intercept)) fail(Errc::non_finite, "bin model is not finite");
    auto& slot = lookup_[m.antenna * num_bins_ + m.bin];
    if (slot >= 0)
      fail(Errc::malformed, "duplicate bin model (" + std::to_string(m.antenna) + ", " + std::to_string(m.bin) + ")");
    slot = static_cast<std::int32_t>(i);
  }
}

const BinModel* CalibrationModel::find(std::size_t antenna, std::size_t bin) const {
  if (antenna >= num_antennas_ || bin >= num_bins_) return nullptr;
  const auto slot = lookup_[antenna * num_bins_ + bin];
  return slot < 0 ? nullptr : &models_[static_cast<std::size_t>(slot)];
}

double CalibrationModel::predict(std::size_t antenna, std::size_t bin, double t, Extrapolation mode) const {
  if (antenna >= num_antennas_ || bin >= num_bins_)
    fail(Errc::out_of_range, "predict: index (" + std::to_string(antenna) + ", " + std::to_string(bin) +
                                 ") outside the model grid");
  const BinModel* m = find(antenna, bin);
  if (!m) fail(Errc::out_of_range, "predict: no model fitted for antenna " + std::to_string(antenna) + " bin " +
                                       std::to_string(bin));
  if (mode == Extrapolation::clamp) t = std::clamp(t, t_min_, t_max_);
  return m->slope * t + m->intercept;
}

// --- fitting -----------------------------------------------------------------

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::length_mismatch, "fit_line: x and y differ in length");
  if (x.size() < 2) fail(Errc::insufficient_data, "fit_line: need at least 2 points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) fail(Errc::degenerate_training, "zero temperature variance: slope is undefined");

  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::vector<std::uint32_t> default_bins(std::size_t num_bins) {
  if (num_bins <= 1) return {0};
  std::vector<std::uint32_t> bins(num_bins - 1);
  for (std::size_t b = 1; b < num_bins; ++b) bins[b - 1] = static_cast<std::uint32_t>(b);
  return bins;
}

CalibrationModel fit(const AmplitudeTensor& ap, const TemperatureLog& temps, const FitOptions& options) {
  require_paired(ap.num_frames(), temps);
  const std::size_t frames = ap.num_frames();
  if (frames < 2) fail(Errc::insufficient_data, "training needs at least 2 frames, got " + std::to_string(frames));
  const auto t = temps.values();
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  if (*lo == *hi) fail(Errc::degenerate_training, "zero temperature variance in the training slice");

  auto bins = options.bins.value_or(default_bins(ap.num_bins()));
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  if (bins.empty()) fail(Errc::out_of_range, "bin subset is empty");
  if (bins.back() >= ap.num_bins())
    fail(Errc::out_of_range, "bin " + std::to_string(bins.back()) + " outside [0, " +
                                 std::to_string(ap.num_bins()) + ")");

  const double n = static_cast<double>(frames);
  double sum_t = 0.0;
  for (double v : t) sum_t += v;
  const double mean_t = sum_t / n;
  double sxx = 0.0;
  for (double v : t) sxx += (v - mean_t) * (v - mean_t);

  // Same centered two-pass sums as fit_line, accumulated for every (a, b) at
  // once so each pass streams the tensor in frame order.
  const std::size_t antennas = ap.num_antennas();
  const std::size_t nb = bins.size();
  std::vector<double> mean_y(antennas * nb, 0.0);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t a = 0; a < antennas; ++a) {
      auto row = ap.profile(f, a);
      for (std::size_t k = 0; k < nb; ++k) mean_y[a * nb + k] += row[bins[k]];
    }
  for (auto& v : mean_y) v /= n;

  std::vector<double> sxy(antennas * nb, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const double dx = t[f] - mean_t;
    for (std::size_t a = 0; a < antennas; ++a) {
      auto row = ap.profile(f, a);
      for (std::size_t k = 0; k < nb; ++k) sxy[a * nb + k] += dx * (row[bins[k]] - mean_y[a * nb + k]);
    }
  }

  std::vector<BinModel> models;
  models.reserve(antennas * nb);
  for (std::size_t a = 0; a < antennas; ++a)
    for (std::size_t k = 0; k < nb; ++k) {
      const double slope = sxy[a * nb + k] / sxx;
      models.push_back({static_cast<std::uint32_t>(a), bins[k], slope, mean_y[a * nb + k] - slope * mean_t});
    }

  double t_ref = options.t_ref.value_or(std::clamp(mean_t, *lo, *hi));
  return CalibrationModel(antennas, ap.num_bins(), t_ref, *lo, *hi, options.epsilon, std::move(models));
}

// --- split ---------------------------------------------------------------------

std::size_t split_boundary(std::size_t frames, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(Errc::out_of_range, "train fraction must lie strictly between 0 and 1");
  // The small offset keeps products such as 10 * 0.7 from landing one ulp below an integer.
  const double raw = static_cast<double>(frames) * train_fraction;
  return std::min(frames, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

Split split_train_test(const AmplitudeTensor& ap, const TemperatureLog& temps, double train_fraction) {
  require_paired(ap.num_frames(), temps);
  const auto boundary = split_boundary(ap.num_frames(), train_fraction);
  return {boundary, ap.slice(0, boundary), temps.slice(0, boundary), ap.slice(boundary, ap.num_frames()),
          temps.slice(boundary, temps.size())};
}

// --- correction ----------------------------------------------------------------

Correction apply_correction(const CalibrationModel& model, const AmplitudeTensor& ap, const TemperatureLog& temps,
                            Extrapolation mode) {
  require_paired(ap.num_frames(), temps);
  if (ap.num_antennas() != model.num_antennas() || ap.num_bins() != model.num_bins())
    fail(Errc::bad_dimensions, "model grid " + std::to_string(model.num_antennas()) + "x" +
                                   std::to_string(model.num_bins()) + " does not match amplitudes " +
                                   std::to_string(ap.num_antennas()) + "x" + std::to_string(ap.num_bins()));

  const std::size_t antennas = ap.num_antennas(), bins = ap.num_bins();
  std::vector<double> reference(antennas * bins, 0.0);
  for (const auto& m : model.bin_models())
    reference[m.antenna * bins + m.bin] = model.predict(m.antenna, m.bin, model.t_ref(), mode);

  Correction out{ap, {}};
  const double eps = model.epsilon();
  for (std::size_t f = 0; f < ap.num_frames(); ++f) {
    for (const auto& m : model.bin_models()) {
      const double ref = reference[m.antenna * bins + m.bin];
      const double now = model.predict(m.antenna, m.bin, temps[f], mode);
      if (now <= eps || ref <= eps) {
        out.flags.push_back({static_cast<std::uint32_t>(f), m.antenna, m.bin});
        continue;
      }
      out.tcap.at(f, m.antenna, m.bin) = ap.at(f, m.antenna, m.bin) * (ref / now);
    }
  }
  return out;
}

// --- persistence ---------------------------------------------------------------

std::string format_model_json(const CalibrationModel& model) {
  auto num = [](double v) { return io::format_double(v, 17); };
  std::string s = "{\n";
  s += "  \"format_version\": " + std::to_string(kModelFormatVersion) + ",\n";
  s += "  \"t_ref\": " + num(model.t_ref()) + ",\n";
  s += "  \"t_min\": " + num(model.t_min()) + ",\n";
  s += "  \"t_max\": " + num(model.t_max()) + ",\n";
  s += "  \"epsilon\": " + num(model.epsilon()) + ",\n";
  s += "  \"num_antennas\": " + std::to_string(model.num_antennas()) + ",\n";
  s += "  \"num_bins\": " + std::to_string(model.num_bins()) + ",\n";
  s += "  \"models\": [";
  bool first = true;
  for (const auto& m : model.bin_models()) {
    s += first ? "\n" : ",\n";
    first = false;
    s += "    {\"antenna\": " + std::to_string(m.antenna) + ", \"bin\": " + std::to_string(m.bin) +
         ", \"slope\": " + num(m.slope) + ", \"intercept\": " + num(m.intercept) + "}";
  }
  s += first ? "]\n" : "\n  ]\n";
  s += "}\n";
  return s;
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(Errc::malformed, std::string("model file: missing '") + key + "'");
  return *it;
}

double require_number(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number()) fail(Errc::malformed, std::string("model file: '") + key + "' must be a number");
  return v.get<double>();
}

std::uint32_t require_index(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
    fail(Errc::malformed, std::string("model file: '") + key + "' must be a non-negative integer");
  return v.get<std::uint32_t>();
}

}  // namespace

CalibrationModel parse_model_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::malformed, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::malformed, "model file must hold a JSON object");
  const auto& version = require(doc, "format_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kModelFormatVersion)
    fail(Errc::version_mismatch, "model file format_version " + version.dump() + " is not supported (expected " +
                                     std::to_string(kModelFormatVersion) + ")");

  const auto& list = require(doc, "models");
  if (!list.is_array()) fail(Errc::malformed, "model file: 'models' must be an array");
  std::vector<BinModel> models;
  models.reserve(list.size());
  for (const auto& entry : list) {
    if (!entry.is_object()) fail(Errc::malformed, "model file: each model must be an object");
    models.push_back({require_index(entry, "antenna"), require_index(entry, "bin"), require_number(entry, "slope"),
                      require_number(entry, "intercept")});
  }
  return CalibrationModel(require_index(doc, "num_antennas"), require_index(doc, "num_bins"),
                          require_number(doc, "t_ref"), require_number(doc, "t_min"), require_number(doc, "t_max"),
                          require_number(doc, "epsilon"), std::move(models));
}

void save_model(const CalibrationModel& model, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_model_json(model));
}

CalibrationModel load_model(const std::filesystem::path& path) {
  return parse_model_json(io::read_text_file(path));
}

std::string format_flags_csv(std::span<const CorrectionFlag> flags) {
  std::string s = "frame,antenna,bin\n";
  for (const auto& f : flags)
    s += std::to_string(f.frame) + "," + std::to_string(f.antenna) + "," + std::to_string(f.bin) + "\n";
  return s;
}

void write_flags_csv(std::span<const CorrectionFlag> flags, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_flags_csv(flags));
}

}  // namespace radarcal::calibration
