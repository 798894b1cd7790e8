#include "autocorr/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "autocorr/errors.hpp"

namespace autocorr {

std::string to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::AnchorUpdate: return "anchor-update";
    case UpdateRule::FullModel: return "full-model";
    case UpdateRule::Lambda2Only: return "lambda2-only";
    case UpdateRule::RichardsonLucyFixedKernel: return "rl-fixed-kernel";
  }
  return "unknown";
}

UpdateRule parse_update_rule(const std::string& text) {
  for (auto rule : {UpdateRule::AnchorUpdate, UpdateRule::FullModel, UpdateRule::Lambda2Only,
                    UpdateRule::RichardsonLucyFixedKernel}) {
    if (text == to_string(rule)) return rule;
  }
  if (text == "au") return UpdateRule::AnchorUpdate;
  if (text == "rl") return UpdateRule::RichardsonLucyFixedKernel;
  throw InvalidParamError("unknown update rule '" + text +
                          "' (expected anchor-update, full-model, lambda2-only or rl-fixed-kernel)");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxIters: return "max-iters";
    case StopReason::SnrDrop: return "snr-drop";
    case StopReason::Diverged: return "diverged";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw InvalidParamError("max_iters must be >= 1");
  if (snr_check_stride < 1) throw InvalidParamError("snr_check_stride must be >= 1");
  if (record_stride < 1) throw InvalidParamError("record_stride must be >= 1");
  if (!(epsilon_floor > 0.0)) throw InvalidParamError("epsilon_floor must be > 0");
  if (!(init_smoothing_px >= 0.0) || !std::isfinite(init_smoothing_px)) {
    throw InvalidParamError("init_smoothing_px must be >= 0");
  }
}

Problem::Problem(Grid chi_mu, Grid blur, double eps)
    : chi_mu_(std::move(chi_mu)), blur_(std::move(blur)), eps_(eps) {
  require_same_shape(chi_mu_, blur_, "Problem");
  if (!(eps_ > 0.0)) throw InvalidParamError("epsilon floor must be > 0");
  blur_spectrum_ = local_spectrum_cache().forward(blur_);
}

Grid init_guess(Shape shape, std::uint64_t seed) {
  constexpr double kFloor = 1e-6;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(kFloor, 1.0);
  Grid g(shape);
  for (double& v : g.values()) v = uniform(rng);
  return normalize_total(g);
}

Grid smoothed_init_guess(Shape shape, std::uint64_t seed, double sigma_px) {
  const Grid g = init_guess(shape, seed);
  if (sigma_px == 0.0) return g;
  // Averaging keeps every value near the mean, so the floor is never active
  // except against FFT round-off.
  const Grid blurred = convolve(g, gaussian_kernel(sigma_px, shape));
  return normalize_total(clamp_below(blurred, 1e-6 / static_cast<double>(shape.size())));
}

Grid refresh_kernel(const Grid& o, const Grid& blur) {
  return normalize_total(clamp_below(cross_correlate(o, blur), 0.0));
}

namespace {

Grid kernel_from_spectrum(const HalfSpectrum& o_spectrum, const HalfSpectrum& blur_spectrum) {
  Grid k = local_spectrum_cache().inverse(multiply_conj(o_spectrum, blur_spectrum));
  return normalize_total(clamp_below(k, 0.0));
}

IterationState state_from_object(Grid o, std::size_t t, const Problem& problem, bool refresh) {
  auto spectrum = std::make_shared<const HalfSpectrum>(local_spectrum_cache().forward(o));
  Grid kernel = refresh ? kernel_from_spectrum(*spectrum, problem.blur_spectrum()) : problem.blur();
  return IterationState{std::move(o), std::move(kernel), t, std::move(spectrum)};
}

bool refreshes_kernel(UpdateRule rule) { return rule != UpdateRule::RichardsonLucyFixedKernel; }

// Spectra shared by the update terms of one step.
struct StepWork {
  HalfSpectrum o_spec;
  HalfSpectrum k_spec;
  HalfSpectrum r_spec;
  Grid ratio;

  StepWork(const IterationState& state, const Problem& problem, bool fixed_kernel)
      : o_spec(state.o_spectrum && state.o_spectrum->shape == state.o.shape()
                   ? *state.o_spectrum
                   : local_spectrum_cache().forward(state.o)),
        k_spec(fixed_kernel ? problem.blur_spectrum() : local_spectrum_cache().forward(state.kernel)),
        ratio(problem.shape()) {
    require_same_shape(state.o, problem.chi_mu(), "update step");
    auto& cache = local_spectrum_cache();
    const Grid estimate = cache.inverse(multiply(o_spec, k_spec));
    auto rv = ratio.values();
    auto ev = estimate.values();
    auto cv = problem.chi_mu().values();
    const double eps = problem.eps();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = cv[i] / std::max(ev[i], eps);
    r_spec = cache.forward(ratio);
  }

  // ratio * reverse(K) = K ⋆ ratio
  Grid lambda1() const { return local_spectrum_cache().inverse(multiply_conj(k_spec, r_spec)); }

  // ratio ⋆ (H * o)
  Grid lambda2(const Problem& problem) const {
    return local_spectrum_cache().inverse(
        multiply_conj(r_spec, multiply(problem.blur_spectrum(), o_spec)));
  }
};

IterationState apply_factor(const IterationState& state, const Grid& factor,
                            const Problem& problem, bool refresh) {
  Grid next = state.o;
  auto nv = next.values();
  auto fv = factor.values();
  for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = std::max(nv[i] * fv[i], 0.0);
  require_finite(next, "update step");
  const double mass = next.sum();
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw DivergedError("update step: iterate lost all mass");
  }
  return state_from_object(scaled(next, 1.0 / mass), state.t + 1, problem, refresh);
}

Grid sum_of(const Grid& a, const Grid& b) {
  Grid out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += bv[i];
  return out;
}

}  // namespace

IterationState make_state(const Grid& o, const Problem& problem, UpdateRule rule) {
  require_same_shape(o, problem.chi_mu(), "make_state");
  return state_from_object(normalize_total(o), 0, problem, refreshes_kernel(rule));
}

IterationState au_step(const IterationState& state, const Problem& problem) {
  StepWork work(state, problem, false);
  return apply_factor(state, work.lambda1(), problem, true);
}

IterationState au_step(const IterationState& state, const Grid& chi_mu, const Grid& blur,
                       double eps) {
  return au_step(state, Problem(chi_mu, blur, eps));
}

IterationState full_model_step(const IterationState& state, const Problem& problem) {
  StepWork work(state, problem, false);
  // The complete derivative carries a factor 2 on both terms; the
  // renormalization in apply_factor absorbs it.
  return apply_factor(state, sum_of(work.lambda1(), work.lambda2(problem)), problem, true);
}

IterationState full_model_step(const IterationState& state, const Grid& chi_mu, const Grid& blur,
                               double eps) {
  return full_model_step(state, Problem(chi_mu, blur, eps));
}

IterationState lambda2_only_step(const IterationState& state, const Problem& problem) {
  StepWork work(state, problem, false);
  return apply_factor(state, work.lambda2(problem), problem, true);
}

IterationState lambda2_only_step(const IterationState& state, const Grid& chi_mu,
                                 const Grid& blur, double eps) {
  return lambda2_only_step(state, Problem(chi_mu, blur, eps));
}

IterationState rl_fixed_kernel_step(const IterationState& state, const Problem& problem) {
  StepWork work(state, problem, true);
  return apply_factor(state, work.lambda1(), problem, false);
}

IterationState rl_fixed_kernel_step(const IterationState& state, const Grid& chi_mu,
                                    const Grid& kernel, double eps) {
  return rl_fixed_kernel_step(state, Problem(chi_mu, kernel, eps));
}

IterationState step(UpdateRule rule, const IterationState& state, const Problem& problem) {
  switch (rule) {
    case UpdateRule::AnchorUpdate: return au_step(state, problem);
    case UpdateRule::FullModel: return full_model_step(state, problem);
    case UpdateRule::Lambda2Only: return lambda2_only_step(state, problem);
    case UpdateRule::RichardsonLucyFixedKernel: return rl_fixed_kernel_step(state, problem);
  }
  throw InvalidParamError("unknown update rule");
}

Grid forward_estimate(const IterationState& state) {
  auto& cache = local_spectrum_cache();
  const HalfSpectrum o_spec = state.o_spectrum && state.o_spectrum->shape == state.o.shape()
                                  ? *state.o_spectrum
                                  : cache.forward(state.o);
  return cache.inverse(multiply(o_spec, cache.forward(state.kernel)));
}

UpdateTerms update_terms(const IterationState& state, const Problem& problem) {
  StepWork work(state, problem, false);
  return UpdateTerms{work.ratio, work.lambda1(), work.lambda2(problem)};
}

Grid i_div_gradient(const Grid& o, const Grid& chi_mu, const Grid& blur, GradientMode mode) {
  require_same_shape(o, chi_mu, "i_div_gradient");
  require_same_shape(o, blur, "i_div_gradient");
  const Grid kernel = cross_correlate(o, blur);
  const Grid estimate = convolve(o, kernel);
  const double peak = estimate.max();
  if (!(peak > 0.0)) throw DomainError("i_div_gradient: model autocorrelation has no mass");
  const double floor = 1e-12 * peak;

  // residual = 1 - chi_mu / chi*
  Grid residual(o.shape());
  auto rv = residual.values();
  auto cv = chi_mu.values();
  auto ev = estimate.values();
  for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = 1.0 - cv[i] / std::max(ev[i], floor);

  Grid gradient = cross_correlate(kernel, residual);
  if (mode == GradientMode::Complete) {
    gradient = sum_of(gradient, cross_correlate(residual, convolve(blur, o)));
  }
  return gradient;
}

namespace {

SnrSample sample_of(const IterationState& state, const Problem& problem, double wall_s) {
  const Grid estimate = forward_estimate(state);
  return SnrSample{state.t, snr_db(problem.chi_mu(), estimate),
                   i_divergence(problem.chi_mu(), estimate), wall_s};
}

}  // namespace

ReconstructionReport run_solver(const SolverConfig& config, const Grid& chi_mu, const Grid& blur,
                                const std::optional<Grid>& reference,
                                const std::optional<Grid>& initial) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const Problem problem(chi_mu, blur, config.epsilon_floor);
  const Grid start_o =
      initial ? *initial
              : smoothed_init_guess(problem.shape(), config.seed, config.init_smoothing_px);
  IterationState state = make_state(start_o, problem, config.rule);

  ReconstructionReport report{state.o, std::nullopt, std::nullopt, {}, StopReason::MaxIters, 0,
                              0.0};
  const std::size_t drops_to_stop = std::max<std::size_t>(1, config.patience);
  std::size_t drops = 0;
  double last_checked = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 1; t <= config.max_iters; ++t) {
    try {
      state = step(config.rule, state, problem);
    } catch (const DivergedError&) {
      report.stop_reason = StopReason::Diverged;
      if (report.history.empty() || report.history.back().iteration != state.t) {
        report.history.push_back(sample_of(state, problem, elapsed()));
      }
      break;
    }
    const bool check = config.stop_on_snr_drop && t % config.snr_check_stride == 0;
    bool record = t % config.record_stride == 0 || t == config.max_iters;
    if (!check && !record) continue;

    const SnrSample sample = sample_of(state, problem, elapsed());
    if (check) {
      drops = sample.snr_db < last_checked ? drops + 1 : 0;
      last_checked = sample.snr_db;
      if (drops >= drops_to_stop) {
        report.stop_reason = StopReason::SnrDrop;
        record = true;
      }
    }
    if (record) report.history.push_back(sample);
    if (report.stop_reason == StopReason::SnrDrop) break;
  }

  report.final_o = state.o;
  report.iterations = state.t;
  if (reference) {
    const Grid ref = normalize_total(embed_pad(*reference, problem.shape()));
    report.alignment = align_to_reference(state.o, ref);
    report.object_snr_db = snr_db(ref, report.alignment->aligned);
  }
  report.wall_time_s = elapsed();
  return report;
}

ReconstructionReport run_solver(const SolverConfig& config, const Measurement& measurement,
                                const std::optional<Grid>& reference,
                                const std::optional<Grid>& initial) {
  return run_solver(config, measurement.chi_mu, measurement.blur, reference, initial);
}

}  // namespace autocorr
