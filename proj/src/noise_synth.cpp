#include "hnoise/noise_synth.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "fft.hpp"

namespace hnoise {

void FluxNoiseSpec::validate() const {
  if (!(amplitude_hz >= 0.0) || !std::isfinite(amplitude_hz)) {
    throw std::invalid_argument("amplitude_hz must be a finite non-negative number");
  }
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw std::invalid_argument("exponent must lie strictly inside (0, 1)");
  }
  if (!(common_mode_fraction >= 0.0 && common_mode_fraction <= 1.0)) {
    throw std::invalid_argument("common_mode_fraction must lie in [0, 1]");
  }
}

double model_psd(const FluxNoiseSpec& spec, double frequency_hz) {
  if (!(frequency_hz > 0.0)) {
    throw std::invalid_argument("model_psd diverges at f <= 0");
  }
  return std::pow(spec.amplitude_hz / frequency_hz, spec.exponent) * 1e-6;
}

double infrared_power(const FluxNoiseSpec& spec, double f_lo) {
  if (!(f_lo >= 0.0)) {
    throw std::invalid_argument("infrared_power needs f_lo >= 0");
  }
  const double a = spec.exponent;
  return std::pow(spec.amplitude_hz, a) * std::pow(f_lo, 1.0 - a) / (1.0 - a) * 1e-6;
}

NoiseTrace synthesize_trace(const FluxNoiseSpec& spec, std::size_t n_samples, double sample_period,
                            RandomStream& stream, InfraredMode infrared) {
  spec.validate();
  if (n_samples < 8) {
    throw std::invalid_argument("synthesize_trace needs at least 8 samples");
  }
  if (!(sample_period > 0.0)) {
    throw std::invalid_argument("sample_period must be positive");
  }

  const std::size_t n_long = kSynthesisOversample * n_samples;
  const double df = 1.0 / (static_cast<double>(n_long) * sample_period);

  std::vector<std::complex<double>> half(n_long / 2 + 1);
  for (std::size_t l = 1; l < half.size(); ++l) {
    const double power = model_psd(spec, static_cast<double>(l) * df) * df;
    if (2 * l == n_long) {
      half[l] = {std::sqrt(power / 2.0) * stream.normal(), 0.0};
    } else {
      const double sigma = std::sqrt(power / 4.0);
      const double re = stream.normal();
      const double im = stream.normal();
      half[l] = {sigma * re, sigma * im};
    }
  }

  std::vector<double> full = detail::hermitian_inverse(half, n_long);
  const auto offset = static_cast<std::ptrdiff_t>(stream.below(n_long - n_samples + 1));

  NoiseTrace trace;
  trace.sample_period = sample_period;
  trace.values.assign(full.begin() + offset, full.begin() + offset + static_cast<std::ptrdiff_t>(n_samples));
  if (infrared == InfraredMode::truncate) {
    const double mean =
        std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / static_cast<double>(n_samples);
    for (double& v : trace.values) v -= mean;
  } else {
    // Bin l = 1 stands for [df/2, 3df/2]; everything below is quasi-static here.
    const double offset = std::sqrt(infrared_power(spec, df / 2.0)) * stream.normal();
    for (double& v : trace.values) v += offset;
  }
  return trace;
}

std::vector<NoiseTrace> synthesize_ensemble(const FluxNoiseSpec& spec, std::size_t n_qubits,
                                            std::size_t n_samples, double sample_period,
                                            const SeedSpec& seeds, InfraredMode infrared) {
  spec.validate();
  if (n_qubits < 1) {
    throw std::invalid_argument("synthesize_ensemble needs at least one qubit");
  }
  const double c = spec.common_mode_fraction;

  NoiseTrace shared;
  if (c > 0.0) {
    RandomStream s = seeds.stream(0, StreamPurpose::common_mode);
    shared = synthesize_trace(spec, n_samples, sample_period, s, infrared);
  }

  std::vector<NoiseTrace> traces;
  traces.reserve(n_qubits);
  for (std::size_t i = 0; i < n_qubits; ++i) {
    if (c == 1.0) {
      traces.push_back(shared);
      continue;
    }
    RandomStream s = seeds.stream(i, StreamPurpose::noise);
    NoiseTrace own = synthesize_trace(spec, n_samples, sample_period, s, infrared);
    if (c > 0.0) {
      const double ws = std::sqrt(c);
      const double wi = std::sqrt(1.0 - c);
      for (std::size_t j = 0; j < n_samples; ++j) {
        own.values[j] = ws * shared.values[j] + wi * own.values[j];
      }
    }
    traces.push_back(std::move(own));
  }
  return traces;
}

}  // namespace hnoise
