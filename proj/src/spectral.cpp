#include "autocorr/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "autocorr/errors.hpp"

namespace autocorr {

namespace {

// The FFTW planner is not re-entrant; plan creation and destruction are
// serialized, execution is not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t half_width(const Shape& s) { return s.width / 2 + 1; }

}  // namespace

struct SpectrumCache::RealPlans {
  Shape shape;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit RealPlans(Shape s) : shape(s) {
    const std::size_t n_spec = s.height * half_width(s);
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(s.size());
    spectrum = fftw_alloc_complex(n_spec);
    const int h = static_cast<int>(s.height);
    const int w = static_cast<int>(s.width);
    // FFTW_ESTIMATE keeps plan selection deterministic from run to run.
    forward = fftw_plan_dft_r2c_2d(h, w, real, spectrum, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_2d(h, w, spectrum, real, FFTW_ESTIMATE);
  }
  ~RealPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spectrum);
  }
};

struct SpectrumCache::ComplexPlans {
  Shape shape;
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit ComplexPlans(Shape s) : shape(s) {
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(s.size());
    const int h = static_cast<int>(s.height);
    const int w = static_cast<int>(s.width);
    forward = fftw_plan_dft_2d(h, w, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_2d(h, w, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~ComplexPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(buffer);
  }
};

SpectrumCache::SpectrumCache() = default;
SpectrumCache::~SpectrumCache() = default;

SpectrumCache::RealPlans& SpectrumCache::real_plans(Shape shape) {
  auto& slot = real_[{shape.height, shape.width}];
  if (!slot) slot = std::make_unique<RealPlans>(shape);
  return *slot;
}

SpectrumCache::ComplexPlans& SpectrumCache::complex_plans(Shape shape) {
  auto& slot = complex_[{shape.height, shape.width}];
  if (!slot) slot = std::make_unique<ComplexPlans>(shape);
  return *slot;
}

HalfSpectrum SpectrumCache::forward(const Grid& g) {
  RealPlans& p = real_plans(g.shape());
  std::memcpy(p.real, g.values().data(), g.size() * sizeof(double));
  fftw_execute(p.forward);
  HalfSpectrum out{g.shape(), std::vector<Complex>(g.height() * half_width(g.shape()))};
  std::memcpy(static_cast<void*>(out.bins.data()), p.spectrum, out.bins.size() * sizeof(Complex));
  return out;
}

Grid SpectrumCache::inverse(const HalfSpectrum& spectrum) {
  RealPlans& p = real_plans(spectrum.shape);
  if (spectrum.bins.size() != spectrum.shape.height * half_width(spectrum.shape)) {
    throw ShapeError("half spectrum size does not match shape " + to_string(spectrum.shape));
  }
  // c2r overwrites its input, so the plan always reads from the work buffer.
  std::memcpy(p.spectrum, spectrum.bins.data(), spectrum.bins.size() * sizeof(Complex));
  fftw_execute(p.inverse);
  Grid out(spectrum.shape);
  const double norm = 1.0 / static_cast<double>(spectrum.shape.size());
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = p.real[i] * norm;
  return out;
}

FullSpectrum SpectrumCache::forward_full(const Grid& g) {
  ComplexPlans& p = complex_plans(g.shape());
  auto values = g.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    p.buffer[i][0] = values[i];
    p.buffer[i][1] = 0.0;
  }
  fftw_execute(p.forward);
  FullSpectrum out{g.shape(), std::vector<Complex>(g.size())};
  std::memcpy(static_cast<void*>(out.bins.data()), p.buffer, out.bins.size() * sizeof(Complex));
  return out;
}

std::vector<Complex> SpectrumCache::inverse_full(const FullSpectrum& spectrum) {
  if (spectrum.bins.size() != spectrum.shape.size()) {
    throw ShapeError("spectrum size does not match shape " + to_string(spectrum.shape));
  }
  ComplexPlans& p = complex_plans(spectrum.shape);
  std::memcpy(p.buffer, spectrum.bins.data(), spectrum.bins.size() * sizeof(Complex));
  fftw_execute(p.inverse);
  std::vector<Complex> out(spectrum.bins.size());
  const double norm = 1.0 / static_cast<double>(spectrum.shape.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Complex(p.buffer[i][0] * norm, p.buffer[i][1] * norm);
  }
  return out;
}

SpectrumCache& local_spectrum_cache() {
  thread_local SpectrumCache cache;
  return cache;
}

HalfSpectrum multiply(const HalfSpectrum& f, const HalfSpectrum& g) {
  if (f.shape != g.shape) throw ShapeError("spectrum product: shape mismatch");
  HalfSpectrum out{f.shape, std::vector<Complex>(f.bins.size())};
  for (std::size_t i = 0; i < out.bins.size(); ++i) out.bins[i] = f.bins[i] * g.bins[i];
  return out;
}

HalfSpectrum multiply_conj(const HalfSpectrum& f, const HalfSpectrum& g) {
  if (f.shape != g.shape) throw ShapeError("spectrum product: shape mismatch");
  HalfSpectrum out{f.shape, std::vector<Complex>(f.bins.size())};
  for (std::size_t i = 0; i < out.bins.size(); ++i) out.bins[i] = std::conj(f.bins[i]) * g.bins[i];
  return out;
}

Grid convolve(const Grid& f, const Grid& g) {
  require_same_shape(f, g, "convolve");
  auto& cache = local_spectrum_cache();
  return cache.inverse(multiply(cache.forward(f), cache.forward(g)));
}

Grid cross_correlate(const Grid& f, const Grid& g) {
  require_same_shape(f, g, "cross_correlate");
  auto& cache = local_spectrum_cache();
  return cache.inverse(multiply_conj(cache.forward(f), cache.forward(g)));
}

Grid autocorrelation(const Grid& o) { return autocorrelation(o, doubled(o.shape())); }

Grid autocorrelation(const Grid& o, Shape padded) {
  auto& cache = local_spectrum_cache();
  HalfSpectrum s = cache.forward(embed_pad(o, padded));
  for (Complex& b : s.bins) b = Complex(std::norm(b), 0.0);
  return cache.inverse(s);
}

Grid power_spectrum(const Grid& o) { return power_spectrum(o, doubled(o.shape())); }

Grid power_spectrum(const Grid& o, Shape padded) {
  FullSpectrum s = local_spectrum_cache().forward_full(embed_pad(o, padded));
  Grid out(padded);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::norm(s.bins[i]);
  return out;
}

Grid inverse_transform_real(const Grid& spectrum) {
  FullSpectrum s{spectrum.shape(), std::vector<Complex>(spectrum.size())};
  auto values = spectrum.values();
  for (std::size_t i = 0; i < values.size(); ++i) s.bins[i] = Complex(values[i], 0.0);
  std::vector<Complex> inv = local_spectrum_cache().inverse_full(s);
  Grid out(spectrum.shape());
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = inv[i].real();
  return out;
}

long signed_offset(std::size_t i, std::size_t n) {
  const long li = static_cast<long>(i);
  const long ln = static_cast<long>(n);
  return (2 * li <= ln) ? li : li - ln;
}

Grid gaussian_kernel(double sigma_px, Shape shape) {
  if (!(sigma_px > 0.0) || !std::isfinite(sigma_px)) {
    throw InvalidParamError("gaussian_kernel: sigma must be positive, got " +
                            std::to_string(sigma_px));
  }
  Grid k(shape);
  const double inv_two_var = 1.0 / (2.0 * sigma_px * sigma_px);
  for (std::size_t r = 0; r < shape.height; ++r) {
    const double dy = static_cast<double>(signed_offset(r, shape.height));
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double dx = static_cast<double>(signed_offset(c, shape.width));
      k(r, c) = std::exp(-(dy * dy + dx * dx) * inv_two_var);
    }
  }
  return normalize_total(k);
}

}  // namespace autocorr
