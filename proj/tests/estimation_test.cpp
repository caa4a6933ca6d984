#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "hnoise/errors.hpp"
#include "hnoise/estimation.hpp"
#include "hnoise/sampler.hpp"

namespace hnoise {
namespace {

constexpr double kDt = 296e-6;

// Brute-force double loop over all pairs (j, j') with j - j' = k.
double brute_correlation(const std::vector<double>& x, std::size_t k) {
  double s = 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = 0; b < x.size(); ++b) {
      if (a == b + k) {
        s += x[a] * x[b];
        ++count;
      }
    }
  }
  return s / static_cast<double>(count);
}

CorrelationSeries hand_series(Level level, std::vector<double> values) {
  CorrelationSeries c;
  c.level = level;
  c.delta_t = kDt;
  for (std::size_t k = 0; k < values.size(); ++k) {
    c.lags.push_back(k);
    c.times.push_back(static_cast<double>(k) * kDt);
    c.counts.push_back(100 - k);
    c.stderrs.push_back(0.01);
  }
  c.values = std::move(values);
  return c;
}

SampleMatrix matrix_from_columns(const std::vector<std::vector<std::int8_t>>& columns) {
  const std::size_t n_runs = columns.front().size();
  std::vector<std::int8_t> data(n_runs * columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t j = 0; j < n_runs; ++j) data[j * columns.size() + i] = columns[i][j];
  }
  return SampleMatrix(make_schedule(1e-6, 295e-6, n_runs), columns.size(), data, SampleOrigin::simulated);
}

TEST(QubitCorrelation, HandEvaluatedExamples) {
  const std::vector<double> constant{1, 1, 1, 1};
  const std::vector<double> alternating{1, -1, 1, -1};
  const std::vector<double> pairs{1, 1, -1, -1};
  EXPECT_DOUBLE_EQ(qubit_correlation(constant, 1, kDt).values[1], 1.0);
  EXPECT_DOUBLE_EQ(qubit_correlation(alternating, 1, kDt).values[1], -1.0);
  const auto c = qubit_correlation(pairs, 2, kDt);
  EXPECT_DOUBLE_EQ(c.values[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.values[2], -1.0);
}

TEST(QubitCorrelation, MetadataAndLimits) {
  const std::vector<double> x{1, -1, 1, 1, -1, 1, 1, 1};
  const auto c = qubit_correlation(x, 4, kDt);
  ASSERT_EQ(c.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(c.lags[k], k);
    EXPECT_EQ(c.counts[k], 8 - k);
    EXPECT_DOUBLE_EQ(c.times[k], k * kDt);
  }
  EXPECT_EQ(c.level, Level::beta);
  EXPECT_DOUBLE_EQ(c.values[0], 1.0);
  EXPECT_THROW(qubit_correlation(x, 5, kDt), std::invalid_argument);
}

TEST(QubitCorrelation, MatchesBruteForceOnRandomSeries) {
  RandomStream rng = SeedSpec(1).stream(0, StreamPurpose::test);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + rng.below(61);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const auto c = qubit_correlation(x, n / 2, kDt);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      ASSERT_EQ(c.values[k], brute_correlation(x, k)) << "n=" << n << " k=" << k;
      ASSERT_LE(std::abs(c.values[k]), 1.0);
    }
  }
}

TEST(AveragedCorrelation, OppositeQubitsAverageToZero) {
  // Column 0 is constant (c = 1 at every lag), column 1 alternates (c = -1 at odd lags).
  const auto m = matrix_from_columns({{1, 1, 1, 1, 1, 1}, {1, -1, 1, -1, 1, -1}});
  const auto c = averaged_correlation(m, 1);
  EXPECT_DOUBLE_EQ(c.values[0], 1.0);
  EXPECT_DOUBLE_EQ(c.values[1], 0.0);
}

TEST(AveragedCorrelation, SingleQubitEqualsQubitCorrelation) {
  const auto m = matrix_from_columns({{1, -1, -1, 1, 1, 1, -1, 1, -1, -1}});
  const auto avg = averaged_correlation(m, 5);
  const auto one = qubit_correlation(m, 0, 5);
  EXPECT_EQ(avg.values, one.values);
  EXPECT_EQ(avg.counts, one.counts);
}

TEST(AveragedCorrelation, QuietBackendStaysWithinBinomialBound) {
  BackendProfile p;
  p.n_qubits = 100;
  p.t_d = Duration::from_microseconds(295);
  p.alpha_table = {{Duration::from_microseconds(1), 25.0}};
  p.noise = {0.0, 0.5};
  const auto m = run_degenerate_protocol(SimulatedBackend(p), make_schedule(1e-6, 295e-6, 1000), SeedSpec(2));
  const auto c = averaged_correlation(m);
  std::size_t outside = 0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    outside += std::abs(c.values[k]) >= 3.0 / std::sqrt(100.0 * static_cast<double>(1000 - k));
  }
  EXPECT_LE(outside, 5u);
}

TEST(AveragedCorrelation, InvariantUnderQubitPermutation) {
  RandomStream rng = SeedSpec(3).stream(0, StreamPurpose::test);
  std::vector<std::vector<std::int8_t>> cols(9, std::vector<std::int8_t>(64));
  for (auto& col : cols)
    for (auto& v : col) v = rng.uniform() < 0.6 ? 1 : -1;
  const auto base = averaged_correlation(matrix_from_columns(cols), 32);
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = cols.size() - 1; i > 0; --i) std::swap(cols[i], cols[rng.below(i + 1)]);
    const auto shuffled = averaged_correlation(matrix_from_columns(cols), 32);
    EXPECT_EQ(shuffled.values, base.values);
    for (std::size_t k = 0; k < base.size(); ++k) {
      EXPECT_NEAR(shuffled.stderrs[k], base.stderrs[k], 1e-12 * base.stderrs[k]);
    }
  }
}

TEST(AveragedCorrelation, JackknifeErrorsArePositive) {
  RandomStream rng = SeedSpec(4).stream(0, StreamPurpose::test);
  std::vector<std::vector<std::int8_t>> cols(6, std::vector<std::int8_t>(40));
  for (auto& col : cols)
    for (auto& v : col) v = rng.uniform() < 0.5 ? 1 : -1;
  const auto c = averaged_correlation(matrix_from_columns(cols), 20);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_GT(c.stderrs[k], 0.0);
}

TEST(FitAlpha, ExactLineGivesExactSlope) {
  const std::vector<SweepPoint> sweep{{0.002, 550, 1000}, {0.004, 600, 1000}, {0.008, 700, 1000}};
  const auto r = fit_alpha(sweep);
  EXPECT_NEAR(r.alpha, 25.0, 1e-10);
  EXPECT_NEAR(r.alpha_stderr, 0.0, 1e-10);
  EXPECT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r.linear_range_max, 0.008);
  EXPECT_TRUE(r.diagnostics.empty());
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_NEAR(r.points[2].stderr_p, std::sqrt(0.7 * 0.3 / 1000), 1e-15);
}

TEST(FitAlpha, SimulatedSweepRecoversAlpha) {
  BackendProfile p;
  p.n_qubits = 10;
  p.t_d = Duration::from_microseconds(295);
  p.alpha_table = {{Duration::from_microseconds(1), 25.0}};
  p.noise = {0.0, 0.5};
  const SimulatedBackend backend(p);
  const std::vector<double> grid{0.002, 0.004, 0.008};
  const auto sweep = run_bias_sweep(backend, make_schedule(1e-6, 295e-6, 1000), grid, 1000, SeedSpec(5));
  const auto r = fit_alpha(sweep.points);
  EXPECT_GT(r.alpha_stderr, 0.0);
  EXPECT_NEAR(r.alpha, 25.0, 3.0 * r.alpha_stderr);
}

TEST(FitAlpha, FlatSinglePointRaisesSignDiagnostic) {
  const std::vector<SweepPoint> sweep{{0.01, 500, 1000}};
  const auto r = fit_alpha(sweep);
  EXPECT_EQ(r.alpha, 0.0);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(FitAlpha, AllPointsOutsideLinearRange) {
  const std::vector<SweepPoint> sweep{{0.05, 900, 1000}, {-0.05, 100, 1000}};
  EXPECT_THROW(fit_alpha(sweep), CalibrationRangeError);
}

TEST(FitAlpha, OutOfRangePointsAreReportedButNotFitted) {
  const std::vector<SweepPoint> sweep{{0.004, 600, 1000}, {0.008, 700, 1000}, {0.05, 1000, 1000}};
  const auto r = fit_alpha(sweep);
  EXPECT_NEAR(r.alpha, 25.0, 1e-10);
  EXPECT_FALSE(r.points[2].used);
  EXPECT_EQ(r.points.size(), 3u);
}

TEST(BetaToPhi, ScalesByFourAlphaSquared) {
  const auto beta = hand_series(Level::beta, {1.0, 0.04, 0.01});
  const auto phi = beta_to_phi(beta, 5.0);
  EXPECT_EQ(phi.level, Level::phi);
  EXPECT_TRUE(phi.lag0_excluded);
  EXPECT_NEAR(phi.values[1], 4e-4, 1e-18);
  EXPECT_THROW(beta_to_phi(beta, 0.0), std::invalid_argument);
  EXPECT_THROW(beta_to_phi(phi, 5.0), std::invalid_argument);
}

TEST(BetaToPhi, HalfAlphaIsIdentityAndRoundTrip) {
  const auto beta = hand_series(Level::beta, {1.0, 0.3, -0.2, 0.05});
  const auto same = beta_to_phi(beta, 0.5);
  for (std::size_t k = 1; k < beta.size(); ++k) EXPECT_EQ(same.values[k], beta.values[k]);
  for (double alpha : {3.0, 12.5, 25.0}) {
    const auto phi = beta_to_phi(beta, alpha);
    for (std::size_t k = 1; k < beta.size(); ++k) {
      EXPECT_NEAR(phi.values[k] * 4 * alpha * alpha, beta.values[k], 1e-15);
    }
  }
}

TEST(RmsPhi, SquareRootOfLagOne) {
  EXPECT_NEAR(*rms_phi(hand_series(Level::phi, {0.0, 4e-4})), 2e-2, 1e-15);
  EXPECT_NEAR(*rms_phi(hand_series(Level::phi, {0.0, 16e-4})), 4e-2, 1e-15);
  EXPECT_EQ(*rms_phi(hand_series(Level::phi, {0.0, 0.0})), 0.0);
  EXPECT_FALSE(rms_phi(hand_series(Level::phi, {0.0, -1e-5})).has_value());
  EXPECT_THROW(rms_phi(hand_series(Level::beta, {1.0, 0.1})), std::invalid_argument);
}

TEST(CollapseAlphas, ConsistentAlphasStayPut) {
  std::vector<CorrelationSeries> curves;
  const std::vector<double> alphas{10.0, 12.0, 14.0};
  for (double a : alphas) {
    std::vector<double> v{1.0};
    for (int k = 1; k <= 50; ++k) v.push_back(4 * a * a * 1e-4 * std::pow(k, -0.3));
    curves.push_back(hand_series(Level::beta, v));
  }
  const std::vector<double> errs{1.0, 1.0, 1.0};
  const auto out = collapse_alphas(curves, alphas, errs);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[i], alphas[i], 1e-6);
}

TEST(CollapseAlphas, PerturbedAlphaMovesBackWithinItsError) {
  std::vector<CorrelationSeries> curves;
  const std::vector<double> truth{10.0, 12.0, 14.0};
  for (double a : truth) {
    std::vector<double> v{1.0};
    for (int k = 1; k <= 50; ++k) v.push_back(4 * a * a * 1e-4 * std::pow(k, -0.3));
    curves.push_back(hand_series(Level::beta, v));
  }
  const std::vector<double> given{10.0, 12.5, 14.0};
  const std::vector<double> errs{0.2, 0.8, 0.2};
  const auto out = collapse_alphas(curves, given, errs);
  EXPECT_LT(std::abs(out[1] - truth[1]), 0.5 * std::abs(given[1] - truth[1]));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(std::abs(out[i] - given[i]), errs[i] + 1e-12);
}

TEST(CorrelationCsv, HeaderAndRows) {
  const std::vector<double> x{1, 1, -1, -1};
  std::ostringstream out;
  write_correlation_csv(out, qubit_correlation(x, 2, kDt));
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "lag,t_seconds,value,count,stderr");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace hnoise
