#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hnoise/errors.hpp"
#include "hnoise/estimation.hpp"
#include "hnoise/sampler.hpp"

namespace hnoise {
namespace {

const Duration kOneMicro = Duration::from_microseconds(1);

BackendProfile quiet_profile(std::size_t n_qubits, double alpha = 25.0) {
  BackendProfile p;
  p.n_qubits = n_qubits;
  p.t_d = Duration::from_microseconds(295);
  p.alpha_table = {{kOneMicro, alpha}};
  p.noise = {0.0, 0.5};
  return p;
}

AnnealSchedule schedule_1us(std::size_t n_runs) { return make_schedule(1e-6, 295e-6, n_runs); }

double fraction_minus(const SampleMatrix& m, std::size_t qubit) {
  std::size_t minus = 0;
  for (std::size_t j = 0; j < m.n_runs(); ++j) minus += m.at(j, qubit) == -1;
  return static_cast<double>(minus) / static_cast<double>(m.n_runs());
}

TEST(SimulatedBackend, DegenerateQuietRunsAreFairCoins) {
  const SimulatedBackend backend(quiet_profile(4));
  const std::size_t n = 10000;
  const auto m = run_degenerate_protocol(backend, schedule_1us(n), SeedSpec(1));
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0;
    for (double b : m.column(i)) sum += b;
    EXPECT_LT(std::abs(sum / n), 3.0 / std::sqrt(static_cast<double>(n))) << "qubit " << i;
  }
}

TEST(SimulatedBackend, StaticBiasShiftsProbabilityLinearly) {
  const SimulatedBackend backend(quiet_profile(2));
  const std::size_t n = 10000;
  const auto m = backend.sample(BiasProgram({0.01, 0.0}), schedule_1us(n), SeedSpec(2));
  const double sigma = std::sqrt(0.75 * 0.25 / n);
  EXPECT_NEAR(fraction_minus(m, 0), 0.75, 3 * sigma);
  EXPECT_NEAR(fraction_minus(m, 1), 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(SimulatedBackend, LargeBiasClampsAndIsCounted) {
  const SimulatedBackend backend(quiet_profile(1));
  const auto run = backend.sample_detailed(BiasProgram({0.05}), schedule_1us(100), SeedSpec(3));
  EXPECT_EQ(run.clamp_events, 100u);
  EXPECT_DOUBLE_EQ(fraction_minus(run.samples, 0), 1.0);
}

TEST(SimulatedBackend, MissingAlphaIsConfigError) {
  const SimulatedBackend backend(quiet_profile(1));
  EXPECT_THROW(run_degenerate_protocol(backend, make_schedule(2e-6, 295e-6, 10), SeedSpec(1)),
               ConfigError);
}

TEST(SimulatedBackend, InvalidProfilesAreRejected) {
  auto p = quiet_profile(1);
  p.alpha_table[kOneMicro] = 0.0;
  EXPECT_THROW(SimulatedBackend{p}, ConfigError);
  EXPECT_THROW(SimulatedBackend{quiet_profile(0)}, ConfigError);
}

TEST(SimulatedBackend, ProgramWidthMustMatch) {
  const SimulatedBackend backend(quiet_profile(3));
  EXPECT_THROW(backend.sample(BiasProgram({0.0}), schedule_1us(10), SeedSpec(1)), std::invalid_argument);
}

TEST(SimulatedBackend, DeterministicGivenSeeds) {
  auto p = quiet_profile(8, 10.0);
  p.noise = {23.0, 0.7};
  const SimulatedBackend backend(p);
  const auto a = run_degenerate_protocol(backend, schedule_1us(500), SeedSpec(4));
  const auto b = run_degenerate_protocol(backend, schedule_1us(500), SeedSpec(4));
  const auto c = run_degenerate_protocol(backend, schedule_1us(500), SeedSpec(5));
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
}

TEST(SimulatedBackend, EntriesArePlusMinusOneForRandomConfigurations) {
  RandomStream rng = SeedSpec(6).stream(0, StreamPurpose::test);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    auto p = quiet_profile(n, 1.0 + 40.0 * rng.uniform());
    p.noise = {200.0 * rng.uniform(), 0.05 + 0.9 * rng.uniform()};
    std::vector<double> h(n);
    for (double& x : h) x = 0.04 * (rng.uniform() - 0.5);
    const SimulatedBackend backend(p);
    const auto m = backend.sample(BiasProgram(h), schedule_1us(8 + rng.below(200)), SeedSpec(trial));
    for (std::int8_t v : m.raw()) ASSERT_TRUE(v == 1 || v == -1);
  }
}

TEST(SimulatedBackend, EmpiricalRateConvergesToLinearRelation) {
  const SimulatedBackend backend(quiet_profile(1, 20.0));
  for (double h : {-0.02, -0.005, 0.0, 0.012}) {
    const std::size_t n = 40000;
    const auto m = backend.sample(BiasProgram({h}), schedule_1us(n), SeedSpec(7));
    const double p = 0.5 + 20.0 * h;
    EXPECT_NEAR(fraction_minus(m, 0), p, 3.5 * std::sqrt(p * (1 - p) / n)) << "h = " << h;
  }
}

TEST(DegenerateProtocol, QuietBackendGivesWhiteReadouts) {
  const SimulatedBackend backend(quiet_profile(100));
  const std::size_t n_runs = 1000;
  const auto c = averaged_correlation(run_degenerate_protocol(backend, schedule_1us(n_runs), SeedSpec(8)));
  std::size_t outside = 0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    outside += std::abs(c.values[k]) >= 3.0 / std::sqrt(100.0 * static_cast<double>(n_runs - k));
  }
  // 3-sigma bound: a handful of the 500 lags may exceed it by chance.
  EXPECT_LE(outside, 5u);
}

TEST(DegenerateProtocol, FluxNoiseLeavesSlowlyDecayingTail) {
  auto p = quiet_profile(256, 10.0);
  p.noise = {23.0, 0.7};
  const SimulatedBackend backend(p);
  const auto c = averaged_correlation(run_degenerate_protocol(backend, schedule_1us(1000), SeedSpec(9)));
  auto band_mean = [&](std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t k = lo; k <= hi; ++k) s += c.values[k];
    return s / static_cast<double>(hi - lo + 1);
  };
  const double near = band_mean(1, 5), mid = band_mean(20, 40), far = band_mean(200, 400);
  EXPECT_GT(near, 3.0 / std::sqrt(256.0 * 1000.0));
  EXPECT_GT(near, mid);
  EXPECT_GT(mid, far);
  EXPECT_GT(far, 0.0);
}

TEST(BiasSweep, ZeroPointIsHalfAndLinearPointMatches) {
  const SimulatedBackend backend(quiet_profile(10));
  const std::vector<double> grid{0.0, 0.008};
  const auto sweep = run_bias_sweep(backend, schedule_1us(1000), grid, 1000, SeedSpec(10));
  ASSERT_EQ(sweep.points.size(), 2u);
  const double n = 10000.0;
  EXPECT_EQ(sweep.points[0].count_total, 10000u);
  EXPECT_NEAR(sweep.points[0].fraction_minus(), 0.5, 3 * std::sqrt(0.25 / n));
  EXPECT_NEAR(sweep.points[1].fraction_minus(), 0.70, 3 * std::sqrt(0.21 / n));
  EXPECT_TRUE(sweep.warnings.empty());
}

TEST(BiasSweep, NegativeValuesMirrorPositive) {
  const SimulatedBackend backend(quiet_profile(10));
  const std::vector<double> grid{-0.006, 0.006};
  const auto sweep = run_bias_sweep(backend, schedule_1us(1000), grid, 2000, SeedSpec(11));
  const double sum = sweep.points[0].fraction_minus() + sweep.points[1].fraction_minus();
  EXPECT_NEAR(sum, 1.0, 3 * std::sqrt(2 * 0.15 * 0.85 / 20000.0));
}

TEST(BiasSweep, BeyondLinearRangeWarnsButRuns) {
  const SimulatedBackend backend(quiet_profile(2));
  const std::vector<double> grid{0.004, 0.05};
  const auto sweep = run_bias_sweep(backend, schedule_1us(100), grid, 100, SeedSpec(12));
  EXPECT_EQ(sweep.points.size(), 2u);
  ASSERT_FALSE(sweep.warnings.empty());
  EXPECT_NE(sweep.warnings.front().find("0.05"), std::string::npos);
}

TEST(BiasSweep, Preconditions) {
  const SimulatedBackend backend(quiet_profile(2));
  const std::vector<double> empty;
  const std::vector<double> too_big{1.5};
  const std::vector<double> ok{0.001};
  EXPECT_THROW(run_bias_sweep(backend, schedule_1us(10), empty, 10, SeedSpec(1)), std::invalid_argument);
  EXPECT_THROW(run_bias_sweep(backend, schedule_1us(10), too_big, 10, SeedSpec(1)), std::invalid_argument);
  EXPECT_THROW(run_bias_sweep(backend, schedule_1us(10), ok, 0, SeedSpec(1)), std::invalid_argument);
}

TEST(ReplayBackend, ReturnsRecordingUnchanged) {
  auto p = quiet_profile(5, 10.0);
  p.noise = {23.0, 0.7};
  const auto recorded = run_degenerate_protocol(SimulatedBackend(p), schedule_1us(64), SeedSpec(13));
  const ReplayBackend replay({recorded});
  EXPECT_EQ(run_degenerate_protocol(replay, schedule_1us(64), SeedSpec(999)), recorded);
  EXPECT_THROW(run_degenerate_protocol(replay, schedule_1us(65), SeedSpec(1)), FormatError);
  EXPECT_THROW(replay.sample(BiasProgram({0.01, 0, 0, 0, 0}), schedule_1us(64), SeedSpec(1)), ConfigError);
  EXPECT_THROW(replay.sample(BiasProgram::degenerate(4), schedule_1us(64), SeedSpec(1)), FormatError);
}

TEST(SamplesJsonl, RoundTripIsByteIdentical) {
  auto p = quiet_profile(3, 10.0);
  p.noise = {23.0, 0.7};
  const auto m = run_degenerate_protocol(SimulatedBackend(p), schedule_1us(20), SeedSpec(14));
  std::ostringstream first;
  write_samples_jsonl(first, m);
  std::istringstream in(first.str());
  const auto back = read_samples_jsonl(in);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.origin(), SampleOrigin::replayed);
  std::ostringstream second;
  write_samples_jsonl(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(SamplesJsonl, RecordLayout) {
  const auto s = make_schedule(1e-6, 295e-6, 4);
  const SampleMatrix m(s, 2, {1, -1, -1, -1, 1, 1, -1, 1}, SampleOrigin::simulated);
  std::ostringstream out;
  write_samples_jsonl(out, m);
  std::istringstream lines(out.str());
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, R"({"run": 0, "t_a_us": 1.0, "t_d_us": 295.0, "readout": [1, -1]})");
}

std::string read_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_samples_jsonl(in, "rec.jsonl");
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

TEST(SamplesJsonl, MalformedInputNamesFirstOffendingLine) {
  const std::string good0 = R"({"run": 0, "t_a_us": 1, "t_d_us": 295, "readout": [1, -1]})";
  const std::string good1 = R"({"run": 1, "t_a_us": 1, "t_d_us": 295, "readout": [1, 1]})";
  auto body = [&](const std::string& third) {
    return good0 + "\n" + good1 + "\n" + third + "\n" + good1 + "\n";
  };
  const std::vector<std::string> bad{
      "not json",
      R"({"run": 2, "t_a_us": 1, "t_d_us": 295})",
      R"({"run": 5, "t_a_us": 1, "t_d_us": 295, "readout": [1, 1]})",
      R"({"run": 2, "t_a_us": 2, "t_d_us": 295, "readout": [1, 1]})",
      R"({"run": 2, "t_a_us": 1, "t_d_us": 295, "readout": [1, 1, 1]})",
      R"({"run": 2, "t_a_us": 1, "t_d_us": 295, "readout": [1, 0]})",
      R"({"run": 2, "t_a_us": 1, "t_d_us": 295, "readout": [1, "x"]})",
  };
  for (const auto& line : bad) {
    const std::string err = read_error(body(line));
    EXPECT_NE(err.find("rec.jsonl:3:"), std::string::npos) << line << " -> " << err;
  }
  EXPECT_NE(read_error("").find("no records"), std::string::npos);
  // Fewer than four runs cannot form a schedule.
  EXPECT_FALSE(read_error(good0 + "\n").empty());
}

}  // namespace
}  // namespace hnoise
