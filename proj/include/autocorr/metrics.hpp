#pragma once

#include <cstddef>

#include "autocorr/grid.hpp"

namespace autocorr {

/// Value returned by snr_db when the residual vanishes.
inline constexpr double kSnrCapDb = 300.0;

/// One point of a reconstruction trajectory.
struct SnrSample {
  std::size_t iteration = 0;
  double snr_db = 0.0;
  double i_div = 0.0;
  double wall_s = 0.0;
};

/// 20 log10(||s_mu||_2 / ||s_mu - s||_2), capped at kSnrCapDb when the
/// residual norm falls below 1e-15 ||s_mu||_2. L2 norms replace the integral
/// ratio because a zero-mean residual would make that ratio degenerate.
double snr_db(const Grid& s_mu, const Grid& s);

/// Csiszár I-divergence Σ p ln(p/q) + q - p with 0 ln 0 = 0. q is floored at
/// 1e-12 max(q). Throws DomainError for negative/non-finite entries or an
/// all-zero q facing a p with mass.
double i_divergence(const Grid& p, const Grid& q);

struct Alignment {
  Grid aligned;
  long shift_y = 0;
  long shift_x = 0;
  bool mirrored = false;
  /// Cross-correlation peak of `aligned` with the reference.
  double peak = 0.0;
};

/// Circularly translates `rec` (or its axis reversal, when that correlates
/// better) onto `ref` at the peak of their cross-correlation. The returned
/// shift is the translation applied to the (possibly reversed) input, wrapped
/// into (-n/2, n/2].
Alignment align_to_reference(const Grid& rec, const Grid& ref);

}  // namespace autocorr
