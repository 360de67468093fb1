#include <doctest.h>

#include <cmath>
#include <random>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/evaluate.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace radarcal;
using radarcal::evaluate::EvaluationReport;
using radarcal::evaluate::format_bin_table_csv;
using radarcal::evaluate::format_report_csv;
using radarcal::evaluate::format_series_csv;
using radarcal::evaluate::peak_bin;
using radarcal::evaluate::pearson;
using radarcal::evaluate::reduction;
using radarcal::evaluate::try_pearson;
using radarcal::evaluate::write_report_csv;


namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected radarcal::Error");
  return Errc::io;
}

std::vector<double> affine(const std::vector<double>& v, double scale, double shift) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i] + shift;
  return out;
}

}  // namespace

TEST_CASE("Pearson: worked examples") {
  std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> t, y;
  for (int i = 30; i <= 45; ++i) {
    t.push_back(i);
    y.push_back(5.0 - 0.1 * i);
  }
  CHECK(pearson(t, y) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("Pearson agrees with the two-pass oracle") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = oracle::random_real(rng, 1000, -5.0, 5.0);
    auto y = oracle::random_real(rng, 1000, 30.0, 45.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.3 * trial * x[i];
    CHECK(std::abs(pearson(x, y) - oracle::two_pass_pearson(x, y)) < 1e-12);
  }
}

TEST_CASE("Pearson: symmetry, affine invariance and bounds") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = oracle::random_real(rng, 300, 0.0, 1.0);
    auto y = oracle::random_real(rng, 300, 0.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += (trial % 5) * x[i];
    const double r = pearson(x, y);
    CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-15));
    CHECK(std::abs(pearson(y, x) - r) <= 1e-15);
    CHECK(std::abs(r) <= 1.0);
    CHECK(pearson(affine(x, 3.5, -2.0), y) == doctest::Approx(r).epsilon(1e-12));
    CHECK(pearson(x, affine(y, 0.01, 40.0)) == doctest::Approx(r).epsilon(1e-12));
    CHECK(pearson(affine(x, -2.0, 1.0), y) == doctest::Approx(-r).epsilon(1e-12));
  }
  // Perfectly collinear inputs stay within [-1, 1] despite rounding.
  auto x = oracle::random_real(rng, 10000, 30.0, 45.0);
  CHECK(std::abs(pearson(x, affine(x, 0.1, 3.0))) <= 1.0);
  CHECK(std::abs(pearson(x, affine(x, -7.0, 3.0))) <= 1.0);
}

TEST_CASE("Pearson: undefined and invalid inputs") {
  std::vector<double> flat(10, 3.0), ramp{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK_FALSE(try_pearson(flat, ramp).has_value());
  CHECK_FALSE(try_pearson(ramp, flat).has_value());
  CHECK(error_of([&] { pearson(flat, ramp); }) == Errc::undefined_correlation);
  CHECK(error_of([&] { pearson(std::vector<double>{1.0}, std::vector<double>{2.0}); }) == Errc::insufficient_data);
  CHECK(error_of([&] { pearson(ramp, std::vector<double>{1.0, 2.0}); }) == Errc::length_mismatch);
  std::vector<double> zeros(10, 0.0);
  CHECK_FALSE(try_pearson(zeros, ramp).has_value());
}

TEST_CASE("Reduction statistic on hardware-scale correlations") {
  CHECK(*reduction(-0.99, -0.16) == doctest::Approx(0.838).epsilon(1e-3));
  CHECK(*reduction(0.99, 0.64) == doctest::Approx(1.0 - 0.64 / 0.99));
  CHECK(*reduction(0.5, 0.5) == 0.0);
  CHECK(*reduction(-0.5, 0.5) == 0.0);
  CHECK_FALSE(reduction(0.0, 0.3).has_value());

  const double pairs[][2] = {{0.99, 0.64}, {-0.99, -0.16}, {-0.98, 0.64},
                             {0.98, 0.19}, {-0.98, -0.17}, {-0.96, 0.58}};
  double total = 0.0, best = 0.0;
  for (auto& p : pairs) {
    total += *reduction(p[0], p[1]);
    best = std::max(best, *reduction(p[0], p[1]));
  }
  CHECK(total / 6.0 == doctest::Approx(0.59).epsilon(0.01));
  CHECK(best == doctest::Approx(0.84).epsilon(0.01));
}

TEST_CASE("Peak bin") {
  AmplitudeTensor tone(3, 1, 8);
  for (std::size_t f = 0; f < 3; ++f) tone.at(f, 0, 4) = 1.0;
  CHECK(peak_bin(tone, 0) == 4);

  AmplitudeTensor flat(4, 2, 8, std::vector<double>(64, 0.5));
  CHECK(peak_bin(flat, 0) == 0);
  CHECK(peak_bin(flat, 1) == 0);

  AmplitudeTensor single(1, 1, 4, {0.1, 0.3, 0.7, 0.2});
  CHECK(peak_bin(single, 0) == 2);

  // The mean decides, not any single frame.
  AmplitudeTensor mixed(2, 1, 3, {0.0, 5.0, 0.0, 0.0, 0.0, 6.0});
  CHECK(peak_bin(mixed, 0) == 2);

  CHECK(error_of([&] { peak_bin(AmplitudeTensor(0, 1, 3), 0); }) == Errc::insufficient_data);
  CHECK(error_of([&] { peak_bin(single, 1); }) == Errc::out_of_range);
}

namespace {

struct Fixture {
  AmplitudeTensor ap, tcap;
  TemperatureLog temps;
};

// Antenna 0 drifts upward at bin 2 and is flattened in TCAP; antenna 1 has a
// constant TCAP at its peak so its correlation is undefined.
Fixture fixture() {
  const std::size_t frames = 20;
  std::vector<double> t(frames);
  for (std::size_t f = 0; f < frames; ++f) t[f] = 30.0 + 0.75 * double(f);
  Fixture fx{AmplitudeTensor(frames, 2, 4), AmplitudeTensor(frames, 2, 4), TemperatureLog(t)};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> small(0.0, 0.01);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t b = 0; b < 4; ++b) {
      fx.ap.at(f, 0, b) = small(rng);
      fx.ap.at(f, 1, b) = small(rng);
      fx.tcap.at(f, 0, b) = fx.ap.at(f, 0, b);
      fx.tcap.at(f, 1, b) = fx.ap.at(f, 1, b);
    }
    fx.ap.at(f, 0, 2) = 1.0 + 0.02 * t[f];
    fx.tcap.at(f, 0, 2) = 1.75 + ((f % 2) ? 0.001 : -0.001);
    fx.ap.at(f, 1, 1) = 3.0 - 0.03 * t[f];
    fx.tcap.at(f, 1, 1) = 2.0;
  }
  return fx;
}

}  // namespace

TEST_CASE("Evaluate report") {
  auto fx = fixture();
  auto report = evaluate::evaluate(fx.ap, fx.tcap, fx.temps, 100);
  CHECK(report.first_frame == 100);
  REQUIRE(report.antennas.size() == 2);
  CHECK(report.bins.size() == 8);

  const auto& a0 = report.antennas[0];
  CHECK(a0.peak_bin == 2);
  CHECK(*a0.pr_ap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(*a0.pr_tcap) < 0.2);
  CHECK(*a0.reduction == doctest::Approx(1.0 - std::abs(*a0.pr_tcap)));

  const auto& a1 = report.antennas[1];
  CHECK(a1.peak_bin == 1);
  CHECK(*a1.pr_ap == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(a1.pr_tcap.has_value());
  CHECK_FALSE(a1.reduction.has_value());

  for (const auto& row : report.bins) {
    if (row.pr_ap) CHECK(std::abs(*row.pr_ap) <= 1.0);
    if (row.pr_tcap) CHECK(std::abs(*row.pr_tcap) <= 1.0);
  }
  CHECK(report.bins[2].antenna == 0);
  CHECK(report.bins[2].bin == 2);
  CHECK(report.bins[2].pr_ap == a0.pr_ap);

  auto csv = format_report_csv(report);
  CHECK(csv.rfind("antenna,peak_bin,pr_ap,pr_tcap,reduction\n", 0) == 0);
  CHECK(csv.find("\n1,1,-1,NA,NA\n") != std::string::npos);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3);

  auto bins = format_bin_table_csv(report);
  CHECK(bins.rfind("antenna,bin,pr_ap,pr_tcap\n", 0) == 0);
  lines = 0;
  for (char c : bins) lines += c == '\n';
  CHECK(lines == 9);

  auto series = format_series_csv(report, fx.ap, fx.tcap, fx.temps, 0);
  CHECK(series.rfind("frame,temp_c,ap_peak,tcap_peak\n100,30,1.6000000000000001,", 0) == 0);
  CHECK(error_of([&] { format_series_csv(report, fx.ap, fx.tcap, fx.temps, 2); }) == Errc::out_of_range);
}

TEST_CASE("Evaluating AP against itself gives zero reduction") {
  auto fx = fixture();
  auto report = evaluate::evaluate(fx.ap, fx.ap, fx.temps);
  for (const auto& r : report.antennas) {
    REQUIRE(r.reduction.has_value());
    CHECK(*r.reduction == 0.0);
    CHECK(*r.pr_ap == *r.pr_tcap);
  }
}

TEST_CASE("Evaluate rejects mismatched inputs") {
  auto fx = fixture();
  CHECK(error_of([&] { evaluate::evaluate(fx.ap, AmplitudeTensor(20, 2, 3), fx.temps); }) == Errc::bad_dimensions);
  CHECK(error_of([&] { evaluate::evaluate(fx.ap, fx.tcap, fx.temps.slice(0, 19)); }) == Errc::length_mismatch);
  AmplitudeTensor one(1, 1, 2, {1.0, 2.0});
  CHECK(error_of([&] { evaluate::evaluate(one, one, TemperatureLog({35.0})); }) == Errc::insufficient_data);
}

TEST_CASE("Report files are deterministic") {
  auto fx = fixture();
  TempDir dir;
  auto report = evaluate::evaluate(fx.ap, fx.tcap, fx.temps);
  write_report_csv(report, dir / "r1.csv");
  write_report_csv(evaluate::evaluate(fx.ap, fx.tcap, fx.temps), dir / "r2.csv");
  CHECK(io::read_file(dir / "r1.csv") == io::read_file(dir / "r2.csv"));
  CHECK(io::read_text_file(dir / "r1.csv") == format_report_csv(report));
}
