#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "hnoise/sampler.hpp"
#include "hnoise/spectral.hpp"

namespace hnoise {
namespace {

constexpr double kDt = 296e-6;

std::vector<double> gaussian_series(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  auto s = SeedSpec(seed).stream(0, StreamPurpose::test);
  std::vector<double> x(n);
  for (double& v : x) v = sigma * s.normal();
  return x;
}

double rectangle_sum(const SpectrumEstimate& p) {
  double s = 0;
  for (double v : p.values) s += v;
  return s * p.frequency_step();
}

SampleMatrix quiet_degenerate(std::size_t n_qubits, std::size_t n_runs, std::uint64_t seed) {
  BackendProfile p;
  p.n_qubits = n_qubits;
  p.t_d = Duration::from_microseconds(295);
  p.alpha_table = {{Duration::from_microseconds(1), 25.0}};
  p.noise = {0.0, 0.5};
  return run_degenerate_protocol(SimulatedBackend(p), make_schedule(1e-6, 295e-6, n_runs), SeedSpec(seed));
}

TEST(Periodogram, ZeroSeriesGivesZeroSpectrum) {
  const std::vector<double> zeros(64, 0.0);
  const auto p = periodogram(zeros, kDt);
  ASSERT_EQ(p.size(), 33u);
  for (double v : p.values) EXPECT_EQ(v, 0.0);
}

TEST(Periodogram, FrequencyGrid) {
  const auto p = periodogram(gaussian_series(100, 1), kDt);
  ASSERT_EQ(p.size(), 51u);
  EXPECT_EQ(p.frequencies[0], 0.0);
  EXPECT_NEAR(p.frequencies.back(), 1.0 / (2 * kDt), 1e-9);
  for (std::size_t l = 1; l < p.size(); ++l) EXPECT_GT(p.frequencies[l], p.frequencies[l - 1]);
  EXPECT_NEAR(p.frequency_step(), 1.0 / (100 * kDt), 1e-9);
}

TEST(Periodogram, OnGridCosineConcentratesInOneBin) {
  const std::size_t n = 128, l0 = 9;
  const double c = 0.7;
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = c * std::cos(2 * std::numbers::pi * l0 * j / n);
  const auto p = periodogram(x, kDt, Window::rectangular, Detrend::none);
  const double expected = kDt * n * c * c / 2.0;
  EXPECT_NEAR(p.values[l0], expected, 1e-12 * expected);
  for (std::size_t l = 1; l < n / 2; ++l) {
    if (l != l0) EXPECT_LT(p.values[l], 1e-24) << "bin " << l;
  }
}

TEST(Periodogram, WhiteNoiseLevelIsTwiceDtTimesVariance) {
  std::vector<std::vector<double>> series;
  for (std::uint64_t s = 0; s < 50; ++s) series.push_back(gaussian_series(512, 10 + s, 0.5));
  const auto p = welch_psd(series, kDt, {0, 0.0, Window::hann, Detrend::constant});
  double mean = 0;
  for (std::size_t l = 5; l + 1 < p.size(); ++l) mean += p.values[l];
  mean /= static_cast<double>(p.size() - 6);
  EXPECT_NEAR(mean, 2 * kDt * 0.25, 0.05 * 2 * kDt * 0.25);
}

TEST(Periodogram, ParsevalWithRectangularWindow) {
  for (std::size_t n : {64u, 101u, 1000u}) {
    const auto x = gaussian_series(n, n);
    double ms = 0;
    for (double v : x) ms += v * v;
    ms /= static_cast<double>(n);
    const auto p = periodogram(x, kDt, Window::rectangular, Detrend::none);
    EXPECT_NEAR(rectangle_sum(p), ms, 1e-10 * ms) << "n = " << n;
  }
}

TEST(Periodogram, HannIsPowerNormalised) {
  std::vector<std::vector<double>> series;
  for (std::uint64_t s = 0; s < 40; ++s) series.push_back(gaussian_series(256, 100 + s));
  const auto p = welch_psd(series, kDt, {0, 0.0, Window::hann, Detrend::none});
  EXPECT_NEAR(rectangle_sum(p), 1.0, 0.03);
}

TEST(Periodogram, ScalesQuadratically) {
  auto x = gaussian_series(200, 2);
  const auto base = periodogram(x, kDt);
  for (double& v : x) v *= -3.0;
  const auto scaled = periodogram(x, kDt);
  for (std::size_t l = 0; l < base.size(); ++l) {
    EXPECT_NEAR(scaled.values[l], 9.0 * base.values[l], 1e-12 * (9.0 * base.values[l] + 1e-30));
  }
}

TEST(Periodogram, RejectsShortSeries) {
  const std::vector<double> x(7, 1.0);
  EXPECT_THROW(periodogram(x, kDt), std::invalid_argument);
}

TEST(Welch, FullLengthSingleSeriesEqualsPeriodogram) {
  const auto x = gaussian_series(300, 3);
  const std::vector<std::vector<double>> one{x};
  const auto w = welch_psd(one, kDt);
  const auto p = periodogram(x, kDt);
  EXPECT_EQ(w.values, p.values);
  EXPECT_EQ(w.n_segments, 1u);
}

TEST(Welch, SegmentsAndOverlap) {
  const std::vector<std::vector<double>> two{gaussian_series(256, 4), gaussian_series(256, 5)};
  const auto halves = welch_psd(two, kDt, {128, 0.0});
  EXPECT_EQ(halves.segment_length, 128u);
  EXPECT_EQ(halves.n_segments, 4u);
  EXPECT_EQ(halves.n_series, 2u);
  EXPECT_EQ(halves.size(), 65u);
  EXPECT_NEAR(halves.frequency_step(), 1.0 / (128 * kDt), 1e-9);
  EXPECT_EQ(welch_psd(two, kDt, {128, 0.5}).n_segments, 6u);
  EXPECT_THROW(welch_psd(two, kDt, {257, 0.0}), std::invalid_argument);
  EXPECT_THROW(welch_psd(two, kDt, {128, 1.0}), std::invalid_argument);
}

TEST(Welch, SegmentAverageIsMeanOfSegmentPeriodograms) {
  const auto x = gaussian_series(256, 6);
  const std::vector<std::vector<double>> one{x};
  const auto w = welch_psd(one, kDt, {128, 0.0});
  const auto a = periodogram(std::span<const double>(x).subspan(0, 128), kDt);
  const auto b = periodogram(std::span<const double>(x).subspan(128, 128), kDt);
  for (std::size_t l = 0; l < w.size(); ++l) {
    EXPECT_NEAR(w.values[l], 0.5 * (a.values[l] + b.values[l]), 1e-12 * w.values[l] + 1e-30);
  }
}

TEST(Welch, InvariantUnderQubitPermutation) {
  const auto m = quiet_degenerate(12, 200, 7);
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < m.n_qubits(); ++i) cols.push_back(m.column(i));
  const auto base = welch_psd(cols, kDt);
  std::reverse(cols.begin(), cols.end());
  std::swap(cols[2], cols[7]);
  const auto shuffled = welch_psd(cols, kDt);
  for (std::size_t l = 0; l < base.size(); ++l) {
    EXPECT_NEAR(shuffled.values[l], base.values[l], 1e-12 * base.values[l] + 1e-30);
  }
}

TEST(Welch, ConstantOffsetLeavesNoPowerAfterMeanAndDcRemoval) {
  auto x = gaussian_series(512, 8, 1e-3);
  for (double& v : x) v += 5.0;
  double total = 0;
  for (double v : x) total += v * v;
  total /= static_cast<double>(x.size());
  const auto p = remove_f0(periodogram(x, kDt));
  const std::vector<double> constant(512, 5.0);
  const auto flat = remove_f0(periodogram(constant, kDt));
  EXPECT_LT(rectangle_sum(flat), 1e-10 * 25.0);
  EXPECT_LT(rectangle_sum(p), 1e-6 * total);
}

TEST(ScaleToPhi, ArithmeticAndRoundTrip) {
  const auto beta = periodogram(gaussian_series(64, 9), kDt);
  const auto half = scale_to_phi(beta, 0.5);
  EXPECT_EQ(half.values, beta.values);
  EXPECT_EQ(half.level, Level::phi);
  ASSERT_TRUE(half.alpha.has_value());

  SpectrumEstimate unit = beta;
  unit.values.assign(unit.size(), 1e-4);
  EXPECT_NEAR(scale_to_phi(unit, 25.0).values[3], 4e-8, 1e-22);

  const auto phi = scale_to_phi(beta, 25.0);
  for (std::size_t l = 0; l < beta.size(); ++l) {
    const double back = phi.values[l] * (4.0 * 25.0 * 25.0);
    EXPECT_LE(std::abs(back - beta.values[l]), std::nextafter(beta.values[l], INFINITY) - beta.values[l]);
  }
  EXPECT_THROW(scale_to_phi(beta, 0.0), std::invalid_argument);
  EXPECT_THROW(scale_to_phi(phi, 2.0), std::invalid_argument);
}

TEST(RemoveF0, DropsDcOnceThenNoOp) {
  const auto p = periodogram(gaussian_series(64, 10), kDt);
  const auto once = remove_f0(p);
  EXPECT_EQ(once.size(), 32u);
  EXPECT_TRUE(once.f0_removed);
  EXPECT_GT(once.frequencies.front(), 0.0);
  EXPECT_TRUE(once.diagnostics.empty());
  const auto twice = remove_f0(once);
  EXPECT_EQ(twice.values, once.values);
  EXPECT_EQ(twice.frequencies, once.frequencies);
  EXPECT_EQ(twice.diagnostics.size(), 1u);
}

TEST(SumRule, BetaLevelIntegratesToOne) {
  const auto m = quiet_degenerate(64, 1000, 11);
  const auto p = welch_psd(m, {0, 0.0, Window::rectangular, Detrend::none});
  const auto r = check_sum_rule(p, 25.0, kDt);
  EXPECT_EQ(r.target, 1.0);
  EXPECT_NEAR(r.integral, 1.0, 0.02);
  EXPECT_LT(r.relative_error, 0.02);
}

TEST(SumRule, PhiLevelIntegratesToInverseFourAlphaSquared) {
  const double alpha = 12.0;
  const auto m = quiet_degenerate(64, 1000, 12);
  const auto p = remove_f0(scale_to_phi(welch_psd(m, {0, 0.0, Window::rectangular, Detrend::constant}), alpha));
  const auto r = check_sum_rule(p, alpha, kDt);
  EXPECT_DOUBLE_EQ(r.target, 1.0 / (4 * alpha * alpha));
  EXPECT_LT(r.relative_error, 0.05);
  EXPECT_LT(r.integral, r.target * 1.001);
}

TEST(SumRule, ZeroSpectrum) {
  auto p = scale_to_phi(periodogram(std::vector<double>(32, 0.0), kDt), 5.0);
  const auto r = check_sum_rule(p, 5.0, kDt);
  EXPECT_EQ(r.integral, 0.0);
  EXPECT_EQ(r.relative_error, 1.0);
}

TEST(LogLogSlope, ExactPowerLaw) {
  SpectrumEstimate p;
  for (int l = 1; l <= 100; ++l) {
    p.frequencies.push_back(l * 10.0);
    p.values.push_back(3e-6 * std::pow(l * 10.0, -0.63));
  }
  EXPECT_NEAR(loglog_slope(p, 50.0, 800.0), -0.63, 1e-12);
  EXPECT_THROW(loglog_slope(p, 2000.0, 3000.0), std::invalid_argument);
}

TEST(SpectrumExport, CsvAndMetadata) {
  const auto p = remove_f0(scale_to_phi(periodogram(gaussian_series(16, 13), kDt), 10.0));
  std::ostringstream csv;
  write_spectrum_csv(csv, p);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "f_hz,psd_seconds,psd_microseconds,level");
  std::getline(lines, line);
  EXPECT_NE(line.find(",phi"), std::string::npos);
  const auto meta = nlohmann::json::parse(spectrum_metadata_json(p));
  EXPECT_EQ(meta["window"], "hann");
  EXPECT_EQ(meta["alpha"], 10.0);
  EXPECT_EQ(meta["f0_removed"], true);
  EXPECT_EQ(meta["segment_length"], 16);
}

TEST(WindowNames, ParseAndPrint) {
  EXPECT_EQ(parse_window("hann"), Window::hann);
  EXPECT_EQ(parse_window("rectangular"), Window::rectangular);
  EXPECT_EQ(parse_detrend("none"), Detrend::none);
  EXPECT_THROW(parse_window("blackman"), std::invalid_argument);
  EXPECT_STREQ(to_string(Detrend::constant), "constant");
}

}  // namespace
}  // namespace hnoise
