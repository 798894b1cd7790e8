#pragma once

#include <complex>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "autocorr/grid.hpp"

namespace autocorr {

using Complex = std::complex<double>;

/// Half-plane spectrum of a real grid (FFTW r2c layout: height x (width/2 + 1)).
struct HalfSpectrum {
  Shape shape;  // shape of the real-space grid
  std::vector<Complex> bins;
};

/// Full complex spectrum in unshifted frequency layout.
struct FullSpectrum {
  Shape shape;
  std::vector<Complex> bins;
};

/// Pointwise F{f} . F{g}: the spectrum of the circular convolution f * g.
HalfSpectrum multiply(const HalfSpectrum& f, const HalfSpectrum& g);

/// Pointwise conj(F{f}) . F{g}: the spectrum of the circular correlation f ⋆ g.
HalfSpectrum multiply_conj(const HalfSpectrum& f, const HalfSpectrum& g);

/// FFTW plans and aligned work buffers, keyed by shape. The forward transform
/// is unnormalized and the inverse carries the 1/N factor, so
/// inverse(forward(g)) = g. Not shareable across concurrent callers; each
/// thread uses its own cache (see local_spectrum_cache()).
class SpectrumCache {
 public:
  SpectrumCache();
  ~SpectrumCache();
  SpectrumCache(const SpectrumCache&) = delete;
  SpectrumCache& operator=(const SpectrumCache&) = delete;

  HalfSpectrum forward(const Grid& g);
  Grid inverse(const HalfSpectrum& spectrum);

  FullSpectrum forward_full(const Grid& g);
  /// Complex inverse transform of an arbitrary (not necessarily Hermitian) spectrum.
  std::vector<Complex> inverse_full(const FullSpectrum& spectrum);

 private:
  struct RealPlans;
  struct ComplexPlans;
  RealPlans& real_plans(Shape shape);
  ComplexPlans& complex_plans(Shape shape);

  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<RealPlans>> real_;
  std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<ComplexPlans>> complex_;
};

/// The calling thread's cache.
SpectrumCache& local_spectrum_cache();

/// Circular convolution f * g on the common shape.
Grid convolve(const Grid& f, const Grid& g);

/// Circular cross-correlation (f ⋆ g)(ξ) = Σ_x f(x) g(x + ξ).
Grid cross_correlate(const Grid& f, const Grid& g);

/// Linear autocorrelation o ⋆ o, computed on the doubled support of `o`.
/// The zero-shift bin sits at (0, 0).
Grid autocorrelation(const Grid& o);

/// Circular autocorrelation on `padded` after embedding `o` top-left.
Grid autocorrelation(const Grid& o, Shape padded);

/// |F{o}|^2 on the doubled support, unshifted frequency layout.
Grid power_spectrum(const Grid& o);
Grid power_spectrum(const Grid& o, Shape padded);

/// Real part of the inverse transform of a real frequency-layout grid.
Grid inverse_transform_real(const Grid& spectrum);

/// Isotropic Gaussian sampled at integer offsets around the zero-shift bin
/// (wrapped layout), normalized to unit sum. Throws InvalidParamError for
/// sigma_px <= 0.
Grid gaussian_kernel(double sigma_px, Shape shape);

/// Signed circular offset of index i on an axis of length n, in (-n/2, n/2].
long signed_offset(std::size_t i, std::size_t n);

}  // namespace autocorr
