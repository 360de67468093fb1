#include "core/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace radarcal::evaluate {

namespace {

// Spread below this fraction of the largest magnitude counts as constant.
constexpr double kConstantTolerance = 1e-12;

struct CoMoments {
  double n = 0.0;
  double mean_x = 0.0, mean_y = 0.0;
  double m2x = 0.0, m2y = 0.0, cxy = 0.0;
  double max_abs_x = 0.0, max_abs_y = 0.0;

  void push(double x, double y) {
    n += 1.0;
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    mean_x += dx / n;
    mean_y += dy / n;
    m2x += dx * (x - mean_x);
    m2y += dy * (y - mean_y);
    cxy += dx * (y - mean_y);
    max_abs_x = std::max(max_abs_x, std::abs(x));
    max_abs_y = std::max(max_abs_y, std::abs(y));
  }
};

bool is_constant(double m2, double n, double max_abs) {
  return m2 <= 0.0 || std::sqrt(m2 / n) <= kConstantTolerance * max_abs;
}

std::string cell(const std::optional<double>& v, int digits) {
  return v ? io::format_double(*v, digits) : std::string("NA");
}

std::vector<double> column(const AmplitudeTensor& t, std::size_t antenna, std::size_t bin) {
  std::vector<double> out(t.num_frames());
  for (std::size_t f = 0; f < t.num_frames(); ++f) out[f] = t.at(f, antenna, bin);
  return out;
}

}  // namespace

std::optional<double> try_pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::length_mismatch, "pearson: inputs differ in length");
  if (x.size() < 2) fail(Errc::insufficient_data, "pearson: need at least 2 samples");
  CoMoments m;
  for (std::size_t i = 0; i < x.size(); ++i) m.push(x[i], y[i]);
  if (is_constant(m.m2x, m.n, m.max_abs_x) || is_constant(m.m2y, m.n, m.max_abs_y)) return std::nullopt;
  const double r = m.cxy / std::sqrt(m.m2x * m.m2y);
  if (!(std::abs(r) <= 1.0 + 1e-12)) throw std::logic_error("pearson: |r| exceeds 1");
  return std::clamp(r, -1.0, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  auto r = try_pearson(x, y);
  if (!r) fail(Errc::undefined_correlation, "pearson: zero variance input");
  return *r;
}

std::optional<double> reduction(double pr_ap, double pr_tcap) {
  if (pr_ap == 0.0) return std::nullopt;
  return 1.0 - std::abs(pr_tcap) / std::abs(pr_ap);
}

std::size_t peak_bin(const AmplitudeTensor& ap, std::size_t antenna) {
  if (ap.num_frames() == 0) fail(Errc::insufficient_data, "peak_bin: tensor has no frames");
  if (antenna >= ap.num_antennas()) fail(Errc::out_of_range, "peak_bin: antenna out of range");
  std::vector<double> mean(ap.num_bins(), 0.0);
  for (std::size_t f = 0; f < ap.num_frames(); ++f) {
    auto row = ap.profile(f, antenna);
    for (std::size_t b = 0; b < row.size(); ++b) mean[b] += row[b];
  }
  std::size_t best = 0;
  for (std::size_t b = 1; b < mean.size(); ++b)
    if (mean[b] > mean[best]) best = b;
  return best;
}

EvaluationReport evaluate(const AmplitudeTensor& ap, const AmplitudeTensor& tcap, const TemperatureLog& temps,
                          std::size_t first_frame) {
  if (ap.num_frames() != tcap.num_frames() || ap.num_antennas() != tcap.num_antennas() ||
      ap.num_bins() != tcap.num_bins())
    fail(Errc::bad_dimensions, "evaluate: AP and TCAP dimensions differ");
  require_paired(ap.num_frames(), temps);
  if (ap.num_frames() < 2) fail(Errc::insufficient_data, "evaluate: need at least 2 frames");

  EvaluationReport report;
  report.first_frame = first_frame;
  const auto t = temps.values();
  for (std::size_t a = 0; a < ap.num_antennas(); ++a) {
    for (std::size_t b = 0; b < ap.num_bins(); ++b) {
      report.bins.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                             try_pearson(t, column(ap, a, b)), try_pearson(t, column(tcap, a, b))});
    }
    const auto peak = peak_bin(ap, a);
    const auto& at_peak = report.bins[a * ap.num_bins() + peak];
    AntennaResult r{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(peak), at_peak.pr_ap, at_peak.pr_tcap,
                    std::nullopt};
    if (r.pr_ap && r.pr_tcap) r.reduction = reduction(*r.pr_ap, *r.pr_tcap);
    report.antennas.push_back(r);
  }
  return report;
}

std::string format_report_csv(const EvaluationReport& report) {
  std::string s = "antenna,peak_bin,pr_ap,pr_tcap,reduction\n";
  for (const auto& r : report.antennas)
    s += std::to_string(r.antenna) + "," + std::to_string(r.peak_bin) + "," + cell(r.pr_ap, 6) + "," +
         cell(r.pr_tcap, 6) + "," + cell(r.reduction, 6) + "\n";
  return s;
}

std::string format_bin_table_csv(const EvaluationReport& report) {
  std::string s = "antenna,bin,pr_ap,pr_tcap\n";
  for (const auto& r : report.bins)
    s += std::to_string(r.antenna) + "," + std::to_string(r.bin) + "," + cell(r.pr_ap, 6) + "," +
         cell(r.pr_tcap, 6) + "\n";
  return s;
}

std::string format_series_csv(const EvaluationReport& report, const AmplitudeTensor& ap,
                              const AmplitudeTensor& tcap, const TemperatureLog& temps, std::size_t antenna) {
  if (antenna >= report.antennas.size()) fail(Errc::out_of_range, "series: antenna out of range");
  if (ap.num_frames() != tcap.num_frames() || ap.num_frames() != temps.size())
    fail(Errc::length_mismatch, "series: inputs differ in frame count");
  const std::size_t bin = report.antennas[antenna].peak_bin;
  std::string s = "frame,temp_c,ap_peak,tcap_peak\n";
  for (std::size_t f = 0; f < ap.num_frames(); ++f)
    s += std::to_string(report.first_frame + f) + "," + io::format_double(temps[f], 17) + "," +
         io::format_double(ap.at(f, antenna, bin), 17) + "," + io::format_double(tcap.at(f, antenna, bin), 17) +
         "\n";
  return s;
}

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_report_csv(report));
}

void write_bin_table_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_bin_table_csv(report));
}

void write_series_csv(const EvaluationReport& report, const AmplitudeTensor& ap, const AmplitudeTensor& tcap,
                      const TemperatureLog& temps, std::size_t antenna, const std::filesystem::path& path) {
  io::write_text_file_atomic(path, format_series_csv(report, ap, tcap, temps, antenna));
}

}  // namespace radarcal::evaluate
