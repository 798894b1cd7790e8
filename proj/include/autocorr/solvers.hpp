#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autocorr/forward_models.hpp"
#include "autocorr/grid.hpp"
#include "autocorr/metrics.hpp"
#include "autocorr/spectral.hpp"

namespace autocorr {

enum class UpdateRule {
  AnchorUpdate,               // λ1 only, kernel refreshed from the iterate
  FullModel,                  // λ1 + λ2 (complete variational derivative)
  Lambda2Only,                // λ2 only
  RichardsonLucyFixedKernel,  // classic RL with the blur as a fixed kernel
};

std::string to_string(UpdateRule rule);
UpdateRule parse_update_rule(const std::string& text);

struct SolverConfig {
  UpdateRule rule = UpdateRule::AnchorUpdate;
  std::size_t max_iters = 20000;
  bool stop_on_snr_drop = true;
  std::size_t snr_check_stride = 10;
  /// Consecutive SNR drops that end a run; 0 behaves like 1.
  std::size_t patience = 3;
  double epsilon_floor = 1e-12;
  std::uint64_t seed = 0;
  std::size_t record_stride = 10;
  /// Gaussian smoothing (px) of the random start; 0 keeps it i.i.d.
  double init_smoothing_px = 0.0;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

/// Iterate o^t (unit mass) and its kernel. For kernel-refreshing rules the
/// kernel is refresh_kernel(o^t, H); for the fixed-kernel rule it is the blur.
struct IterationState {
  Grid o;
  Grid kernel;
  std::size_t t = 0;
  /// Spectrum of `o`, kept so the next step does not transform it again.
  std::shared_ptr<const HalfSpectrum> o_spectrum;
};

/// Measurement-side operands of an update: chi_mu, the blur H (or the fixed
/// RL kernel) with its spectrum, and the ratio denominator floor.
class Problem {
 public:
  Problem(Grid chi_mu, Grid blur, double eps = 1e-12);

  const Grid& chi_mu() const noexcept { return chi_mu_; }
  const Grid& blur() const noexcept { return blur_; }
  const HalfSpectrum& blur_spectrum() const noexcept { return blur_spectrum_; }
  double eps() const noexcept { return eps_; }
  Shape shape() const noexcept { return chi_mu_.shape(); }

 private:
  Grid chi_mu_;
  Grid blur_;
  HalfSpectrum blur_spectrum_;
  double eps_;
};

enum class StopReason { MaxIters, SnrDrop, Diverged };
std::string to_string(StopReason reason);

struct ReconstructionReport {
  Grid final_o;
  /// Present when a reference object was supplied.
  std::optional<Alignment> alignment;
  /// SNR(reference || aligned estimate), when a reference was supplied.
  std::optional<double> object_snr_db;
  std::vector<SnrSample> history;
  StopReason stop_reason = StopReason::MaxIters;
  std::size_t iterations = 0;
  double wall_time_s = 0.0;
};

/// Strictly positive random start: i.i.d. uniform in [1e-6, 1), unit mass.
Grid init_guess(Shape shape, std::uint64_t seed);

/// init_guess blurred by a wrapped Gaussian of `sigma_px` and renormalized.
/// The pixel texture of an i.i.d. start lies where a blurred measurement
/// carries no information, and multiplicative updates never remove it.
Grid smoothed_init_guess(Shape shape, std::uint64_t seed, double sigma_px);

/// K = o ⋆ H floored at 0 and renormalized. Throws ZeroMassError if it vanishes.
Grid refresh_kernel(const Grid& o, const Grid& blur);

/// Initial state for `rule` from a starting object (normalized here).
IterationState make_state(const Grid& o, const Problem& problem, UpdateRule rule);

/// o^{t+1} = o^t [ (chi_mu / (o^t * K^t)) * reverse(K^t) ], K^t = o^t ⋆ H.
IterationState au_step(const IterationState& state, const Problem& problem);
IterationState au_step(const IterationState& state, const Grid& chi_mu, const Grid& blur,
                       double eps);

/// o^{t+1} ∝ o^t (λ1 + λ2) with λ2 = r ⋆ (H * o^t).
IterationState full_model_step(const IterationState& state, const Problem& problem);
IterationState full_model_step(const IterationState& state, const Grid& chi_mu, const Grid& blur,
                               double eps);

/// o^{t+1} ∝ o^t λ2.
IterationState lambda2_only_step(const IterationState& state, const Problem& problem);
IterationState lambda2_only_step(const IterationState& state, const Grid& chi_mu,
                                 const Grid& blur, double eps);

/// Richardson-Lucy with the problem's blur used as the fixed kernel.
IterationState rl_fixed_kernel_step(const IterationState& state, const Problem& problem);
IterationState rl_fixed_kernel_step(const IterationState& state, const Grid& chi_mu,
                                    const Grid& kernel, double eps);

IterationState step(UpdateRule rule, const IterationState& state, const Problem& problem);

/// Current autocorrelation estimate chi^t = o^t * K^t.
Grid forward_estimate(const IterationState& state);

/// Per-pixel multiplicative factors of one update (before renormalization).
struct UpdateTerms {
  Grid ratio;    // chi_mu / max(o * K, eps)
  Grid lambda1;  // ratio * reverse(K)
  Grid lambda2;  // ratio ⋆ (H * o)
};
UpdateTerms update_terms(const IterationState& state, const Problem& problem);

enum class GradientMode {
  FixedKernel,  // K = o ⋆ H held constant
  Complete,     // K = o ⋆ H differentiated as well
};

/// Gradient of I(chi_mu || o * (o ⋆ H)) with respect to each pixel of o.
/// The kernel is not renormalized, so the functional is exactly the
/// autocorrelation model (o ⋆ o) * H.
Grid i_div_gradient(const Grid& o, const Grid& chi_mu, const Grid& blur, GradientMode mode);

/// Runs `config.rule` from init_guess (or `initial`), recording SnrSample
/// entries of SNR(chi_mu || chi^t) and I(chi_mu || chi^t) every record_stride
/// iterations and at the last one.
ReconstructionReport run_solver(const SolverConfig& config, const Measurement& measurement,
                                const std::optional<Grid>& reference = std::nullopt,
                                const std::optional<Grid>& initial = std::nullopt);

ReconstructionReport run_solver(const SolverConfig& config, const Grid& chi_mu, const Grid& blur,
                                const std::optional<Grid>& reference = std::nullopt,
                                const std::optional<Grid>& initial = std::nullopt);

}  // namespace autocorr
