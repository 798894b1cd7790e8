#include "autocorr/forward_models.hpp"

#include <array>
#include <cmath>
#include <random>

#include "autocorr/errors.hpp"
#include "autocorr/metrics.hpp"
#include "autocorr/spectral.hpp"

namespace autocorr {

void Scenario::validate() const {
  if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px)) {
    throw InvalidParamError("scenario sigma must be >= 0, got " + std::to_string(sigma_px));
  }
  if (kind == ScenarioKind::BandLimitedFourier && !(window.cutoff > 0.0)) {
    throw InvalidParamError("window cutoff must be > 0, got " + std::to_string(window.cutoff));
  }
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BlurredAutocorr: return "blurred-autocorr";
    case ScenarioKind::BlurredObjectAutocorr: return "blurred-object";
    case ScenarioKind::BandLimitedFourier: return "band-limited";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& text) {
  for (auto kind : {ScenarioKind::BlurredAutocorr, ScenarioKind::BlurredObjectAutocorr,
                    ScenarioKind::BandLimitedFourier}) {
    if (text == to_string(kind)) return kind;
  }
  throw InvalidParamError("unknown scenario '" + text +
                          "' (expected blurred-autocorr, blurred-object or band-limited)");
}

std::string to_string(WindowKind kind) {
  return kind == WindowKind::Gaussian ? "gaussian" : "hard-circular";
}

WindowKind parse_window_kind(const std::string& text) {
  if (text == "gaussian") return WindowKind::Gaussian;
  if (text == "hard-circular" || text == "hard_circular") return WindowKind::HardCircular;
  throw InvalidParamError("unknown window '" + text + "' (expected gaussian or hard-circular)");
}

Grid add_poisson_noise(const Grid& g, double lambda, std::uint64_t seed) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidParamError("poisson lambda must be >= 0, got " + std::to_string(lambda));
  }
  if (lambda == 0.0) return g;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<long long> counts(lambda);
  Grid out = g;
  for (double& v : out.values()) v += static_cast<double>(counts(rng));
  return out;
}

Grid scale_to_16bit(const Grid& g) {
  const double peak = g.max();
  if (!(peak > 0.0)) throw ZeroMassError("scale_to_16bit: grid has no positive value");
  return scaled(g, kSixteenBitPeak / peak);
}

Grid preprocess_measurement(const Grid& chi_raw, const MeanField& mean_field) {
  Grid out = chi_raw;
  for (double& v : out.values()) v -= mean_field.uniform;
  out(0, 0) -= mean_field.zero_shift;
  for (double& v : out.values()) v = std::abs(v);
  return normalize_total(out);
}

Grid preprocess_measurement(const Grid& chi_raw, double lambda) {
  return preprocess_measurement(chi_raw, MeanField{lambda, 0.0});
}

Grid make_window(WindowKind kind, double cutoff, Shape shape) {
  if (!(cutoff > 0.0)) {
    throw InvalidParamError("window cutoff must be > 0, got " + std::to_string(cutoff));
  }
  Grid w(shape);
  for (std::size_t r = 0; r < shape.height; ++r) {
    const double fy = static_cast<double>(signed_offset(r, shape.height)) /
                      static_cast<double>(shape.height);
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double fx = static_cast<double>(signed_offset(c, shape.width)) /
                        static_cast<double>(shape.width);
      const double f2 = fy * fy + fx * fx;
      if (kind == WindowKind::Gaussian) {
        w(r, c) = std::exp(-f2 / (2.0 * cutoff * cutoff));
      } else {
        w(r, c) = (std::sqrt(f2) <= cutoff) ? 1.0 : 0.0;
      }
    }
  }
  return w;
}

Grid object_blur(double sigma_px, Shape shape) {
  if (sigma_px == 0.0) return Grid::delta(shape);
  return gaussian_kernel(sigma_px, shape);
}

Grid autocorr_blur_from_object_blur(const Grid& h) {
  return normalize_total(clamp_below(cross_correlate(h, h), 0.0));
}

namespace {

void require_linear_support(const Grid& o, Shape padded, const char* context) {
  if (padded.height + 1 < 2 * o.height() || padded.width + 1 < 2 * o.width()) {
    throw ShapeError(std::string(context) + ": solver shape " + to_string(padded) +
                     " cannot hold the autocorrelation of a " + to_string(o.shape()) + " object");
  }
}

Measurement make_measurement(Grid chi_mu, Grid blur, ScenarioKind kind, double lambda,
                             std::uint64_t seed, Grid chi_clean, Grid chi_raw, Grid object) {
  Measurement m{std::move(chi_mu), std::move(blur), Scenario{}, lambda, seed, 0.0, 0.0,
                std::move(chi_clean), std::move(chi_raw), std::move(object), {}, {}};
  m.scenario.kind = kind;
  m.autocorr_snr_db = snr_db(m.chi_mu, m.chi_clean);
  return m;
}

}  // namespace

Measurement simulate_blurred_autocorr(const Grid& o, const Grid& blur, double lambda,
                                      std::uint64_t seed) {
  const Shape padded = blur.shape();
  require_linear_support(o, padded, "simulate_blurred_autocorr");
  const Grid clean = convolve(autocorrelation(o, padded), blur);
  const Grid clean16 = scale_to_16bit(clean);
  Grid noisy = add_poisson_noise(clean16, lambda, seed);
  const double raw_snr = snr_db(noisy, clean16);
  Grid chi_mu = preprocess_measurement(noisy, lambda);
  Measurement m = make_measurement(std::move(chi_mu), normalize_total(clamp_below(blur, 0.0)),
                                   ScenarioKind::BlurredAutocorr, lambda, seed,
                                   normalize_total(clean), std::move(noisy),
                                   normalize_total(embed_pad(o, padded)));
  m.raw_snr_db = raw_snr;
  return m;
}

Measurement simulate_blurred_object_autocorr(const Grid& o, const Grid& h, double lambda,
                                             std::uint64_t seed) {
  const Shape padded = h.shape();
  require_linear_support(o, padded, "simulate_blurred_object_autocorr");
  const Grid object = embed_pad(o, padded);
  const Grid blurred = convolve(object, h);
  const Grid blurred16 = scale_to_16bit(blurred);
  Grid noisy = add_poisson_noise(blurred16, lambda, seed);
  const double object_snr = snr_db(noisy, blurred16);

  // Remove the noise mean in the object domain; what is left of the noise in
  // the autocorrelation has mean Npix * lambda at zero shift (its variance).
  Grid centered = noisy;
  for (double& v : centered.values()) v -= lambda;
  const MeanField variance_spike{0.0, static_cast<double>(padded.size()) * lambda};
  Grid chi_mu = preprocess_measurement(autocorrelation(centered, padded), variance_spike);

  Measurement m = make_measurement(
      std::move(chi_mu), autocorr_blur_from_object_blur(h), ScenarioKind::BlurredObjectAutocorr,
      lambda, seed, normalize_total(autocorrelation(blurred, padded)),
      autocorrelation(noisy, padded), normalize_total(object));
  m.raw_snr_db = object_snr;
  m.observed_object = std::move(noisy);
  m.blurred_object = normalize_total(clamp_below(blurred, 0.0));
  return m;
}

Measurement simulate_bandlimited(const Grid& o, const Grid& window, double lambda,
                                 std::uint64_t seed) {
  const Shape padded = window.shape();
  require_linear_support(o, padded, "simulate_bandlimited");
  for (double v : window.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidParamError("window values must lie in [0, 1], got " + std::to_string(v));
    }
  }
  Grid detected = power_spectrum(o, padded);
  {
    auto dv = detected.values();
    auto wv = window.values();
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= wv[i];
  }
  const Grid detected16 = scale_to_16bit(detected);
  const Grid noisy = add_poisson_noise(detected16, lambda, seed);
  const double raw_snr = snr_db(noisy, detected16);

  // Constant detector noise transforms into lambda * δ at zero shift.
  Grid chi_raw = inverse_transform_real(noisy);
  Grid chi_mu = preprocess_measurement(chi_raw, MeanField{0.0, lambda});
  Grid blur = normalize_total(clamp_below(inverse_transform_real(window), 0.0));

  Measurement m = make_measurement(std::move(chi_mu), std::move(blur),
                                   ScenarioKind::BandLimitedFourier, lambda, seed,
                                   normalize_total(inverse_transform_real(detected)),
                                   std::move(chi_raw), normalize_total(embed_pad(o, padded)));
  m.raw_snr_db = raw_snr;
  return m;
}

bool zero_shift_is_peak(const Grid& chi) { return chi(0, 0) >= chi.max(); }

std::uint64_t noise_stream_seed(std::uint64_t seed, ScenarioKind kind) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Measurement simulate(const Grid& o, const Scenario& scenario, double lambda, std::uint64_t seed) {
  scenario.validate();
  const Shape padded = doubled(o.shape());
  const std::uint64_t stream = noise_stream_seed(seed, scenario.kind);
  Measurement m = [&] {
    switch (scenario.kind) {
      case ScenarioKind::BlurredAutocorr:
        return simulate_blurred_autocorr(
            o, autocorr_blur_from_object_blur(object_blur(scenario.sigma_px, padded)), lambda,
            stream);
      case ScenarioKind::BlurredObjectAutocorr:
        return simulate_blurred_object_autocorr(o, object_blur(scenario.sigma_px, padded),
                                                lambda, stream);
      case ScenarioKind::BandLimitedFourier:
        return simulate_bandlimited(
            o, make_window(scenario.window.kind, scenario.window.cutoff, padded), lambda, stream);
    }
    throw InvalidParamError("unknown scenario");
  }();
  m.scenario = scenario;
  m.seed = seed;
  return m;
}

}  // namespace autocorr
