#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/datacube.hpp"

namespace radarcal::evaluate {

/// Sample Pearson correlation from streaming co-moments.
/// Throws Errc::undefined_correlation if either input is constant (to within
/// 1e-12 of its magnitude), Errc::length_mismatch / insufficient_data on bad input.
double pearson(std::span<const double> x, std::span<const double> y);
/// As pearson(), but a constant input yields nullopt instead of throwing.
std::optional<double> try_pearson(std::span<const double> x, std::span<const double> y);

/// 1 - |pr_tcap| / |pr_ap|; undefined when pr_ap is zero.
std::optional<double> reduction(double pr_ap, double pr_tcap);

/// Bin with the largest time-averaged amplitude; ties go to the lowest index.
std::size_t peak_bin(const AmplitudeTensor& ap, std::size_t antenna);

struct AntennaResult {
  std::uint32_t antenna = 0;
  std::uint32_t peak_bin = 0;
  std::optional<double> pr_ap;
  std::optional<double> pr_tcap;
  std::optional<double> reduction;  // 1 - |pr_tcap| / |pr_ap|
};

struct BinCorrelation {
  std::uint32_t antenna = 0;
  std::uint32_t bin = 0;
  std::optional<double> pr_ap;
  std::optional<double> pr_tcap;
};

struct EvaluationReport {
  std::size_t first_frame = 0;  // absolute index of the first evaluated frame
  std::vector<AntennaResult> antennas;
  std::vector<BinCorrelation> bins;  // ordered by (antenna, bin)
};

EvaluationReport evaluate(const AmplitudeTensor& ap, const AmplitudeTensor& tcap, const TemperatureLog& temps,
                          std::size_t first_frame = 0);

/// `antenna,peak_bin,pr_ap,pr_tcap,reduction`, 6 significant digits, NA when undefined.
std::string format_report_csv(const EvaluationReport& report);
/// `antenna,bin,pr_ap,pr_tcap`.
std::string format_bin_table_csv(const EvaluationReport& report);
/// `frame,temp_c,ap_peak,tcap_peak` for one antenna at its peak bin, full precision.
std::string format_series_csv(const EvaluationReport& report, const AmplitudeTensor& ap,
                              const AmplitudeTensor& tcap, const TemperatureLog& temps, std::size_t antenna);

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
void write_bin_table_csv(const EvaluationReport& report, const std::filesystem::path& path);
void write_series_csv(const EvaluationReport& report, const AmplitudeTensor& ap, const AmplitudeTensor& tcap,
                      const TemperatureLog& temps, std::size_t antenna, const std::filesystem::path& path);

}  // namespace radarcal::evaluate
