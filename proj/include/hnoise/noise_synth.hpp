#pragma once

#include <cstddef>
#include <vector>

#include "hnoise/random.hpp"

namespace hnoise {

/// Intrinsic flux noise S(f) = (A/f)^a microseconds, optionally shared across qubits.
struct FluxNoiseSpec {
  double amplitude_hz = 0.0;
  double exponent = 0.5;
  /// Fraction of the noise power common to every qubit.
  double common_mode_fraction = 0.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const FluxNoiseSpec&) const = default;
};

/// What happens to model power below the lowest synthesized frequency.
enum class InfraredMode {
  /// Dropped; the returned window is shifted to exactly zero sample mean.
  truncate,
  /// The window keeps its own mean and the power below half the lowest
  /// synthesized frequency is added as a constant per-trace offset, so the
  /// trace variance matches the model integrated from f = 0.
  static_offset,
};

/// Dimensionless bias fluctuation phi sampled every sample_period seconds.
struct NoiseTrace {
  std::vector<double> values;
  double sample_period = 0.0;
};

/// Traces are synthesized on a grid this many times longer than requested and
/// then windowed, which hides the periodicity of circulant synthesis.
inline constexpr std::size_t kSynthesisOversample = 4;

/// One-sided PSD of the flux-noise model in seconds: (A/f)^a * 1e-6 s.
double model_psd(const FluxNoiseSpec& spec, double frequency_hz);

/// Stationary Gaussian trace with one-sided PSD model_psd over
/// [1/(M n dt), 1/(2 dt)]. With InfraredMode::truncate the sample mean is exactly zero.
NoiseTrace synthesize_trace(const FluxNoiseSpec& spec, std::size_t n_samples, double sample_period,
                            RandomStream& stream, InfraredMode infrared = InfraredMode::truncate);

/// Model power below f_lo: integral_0^f_lo (A/f)^a df * 1 us.
double infrared_power(const FluxNoiseSpec& spec, double f_lo);

/// One trace per qubit. Qubit i draws from seeds.stream(i, noise); the shared
/// component, if any, from seeds.stream(0, common_mode). Member i is
/// sqrt(c) * shared + sqrt(1 - c) * independent_i so each keeps the model PSD.
std::vector<NoiseTrace> synthesize_ensemble(const FluxNoiseSpec& spec, std::size_t n_qubits,
                                            std::size_t n_samples, double sample_period,
                                            const SeedSpec& seeds,
                                            InfraredMode infrared = InfraredMode::truncate);

}  // namespace hnoise
