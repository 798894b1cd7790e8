#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "autocorr/grid.hpp"

namespace autocorr {

/// Peak value of the simulated 16-bit detector.
inline constexpr double kSixteenBitPeak = 65535.0;

enum class ScenarioKind {
  BlurredAutocorr,        // chi_mu = (o ⋆ o) * H + eps
  BlurredObjectAutocorr,  // chi_mu = (o * h + eps') ⋆ (o * h + eps')
  BandLimitedFourier,     // chi_mu = F^-1{ |F o|^2 W + eps'' }
};

enum class WindowKind { Gaussian, HardCircular };

struct WindowSpec {
  WindowKind kind = WindowKind::Gaussian;
  /// Radial frequency in cycles/pixel: the standard deviation of a Gaussian
  /// window, the passband radius of a hard one.
  double cutoff = 0.0563;

  bool operator==(const WindowSpec&) const = default;
};

/// Measurement scenario and its kernel parameters. `sigma_px` is the width of
/// the object-space Gaussian h; for BlurredAutocorr the autocorrelation blur
/// is H = h ⋆ h. A sigma of 0 selects the identity kernel δ.
struct Scenario {
  ScenarioKind kind = ScenarioKind::BlurredAutocorr;
  double sigma_px = 2.0;
  WindowSpec window;

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& text);
std::string to_string(WindowKind kind);
WindowKind parse_window_kind(const std::string& text);

/// Constant noise contribution removed by preprocess_measurement: `uniform`
/// from every bin, `zero_shift` additionally from bin (0, 0).
struct MeanField {
  double uniform = 0.0;
  double zero_shift = 0.0;
};

struct Measurement {
  /// Preprocessed autocorrelation: non-negative, unit mass.
  Grid chi_mu;
  /// Autocorrelation-domain blur H, non-negative, unit mass, wrapped layout.
  Grid blur;
  Scenario scenario;
  double noise_lambda = 0.0;
  std::uint64_t seed = 0;
  /// SNR of the noisy measured quantity against its clean 16-bit version.
  double raw_snr_db = 0.0;
  /// SNR(chi_mu || normalized clean chi * H).
  double autocorr_snr_db = 0.0;

  /// Noiseless chi * H, normalized.
  Grid chi_clean;
  /// Noisy autocorrelation before mean removal and normalization.
  Grid chi_raw;
  /// Object embedded in the solver shape (the reconstruction reference).
  Grid object;
  /// Noisy blurred object o * h + eps' (BlurredObjectAutocorr only).
  std::optional<Grid> observed_object;
  /// Noiseless blurred object o * h, normalized (BlurredObjectAutocorr only).
  std::optional<Grid> blurred_object;
};

/// Returns g + eps with eps i.i.d. Poisson(lambda). lambda = 0 returns g.
Grid add_poisson_noise(const Grid& g, double lambda, std::uint64_t seed);

/// Peak-normalizes a non-negative grid to the 16-bit range.
Grid scale_to_16bit(const Grid& g);

/// normalize_total(|chi_raw - mean_field|).
Grid preprocess_measurement(const Grid& chi_raw, const MeanField& mean_field);
/// Uniform mean field of `lambda` per bin.
Grid preprocess_measurement(const Grid& chi_raw, double lambda);

/// Frequency-layout window in [0, 1] with W(0) = 1.
Grid make_window(WindowKind kind, double cutoff, Shape shape);

/// Kernel pair (h, H) for a scenario on the solver shape.
Grid object_blur(double sigma_px, Shape shape);
Grid autocorr_blur_from_object_blur(const Grid& h);

/// o is the object at native size; H defines the solver shape.
Measurement simulate_blurred_autocorr(const Grid& o, const Grid& blur, double lambda,
                                      std::uint64_t seed);
/// o at native size; h (object blur, wrapped layout) defines the solver shape.
Measurement simulate_blurred_object_autocorr(const Grid& o, const Grid& h, double lambda,
                                             std::uint64_t seed);
/// o at native size; W (frequency layout) defines the solver shape.
Measurement simulate_bandlimited(const Grid& o, const Grid& window, double lambda,
                                 std::uint64_t seed);

/// Dispatches on scenario.kind, building kernels on the doubled support of o.
/// The noise stream is derived from (seed, scenario kind).
Measurement simulate(const Grid& o, const Scenario& scenario, double lambda, std::uint64_t seed);

/// True when bin (0, 0) holds the global maximum, as it must for a valid
/// autocorrelation.
bool zero_shift_is_peak(const Grid& chi);

/// Seed of the noise stream used by simulate() for a scenario.
std::uint64_t noise_stream_seed(std::uint64_t seed, ScenarioKind kind);

}  // namespace autocorr
