#include "autocorr/metrics.hpp"

#include <cmath>
#include <limits>

#include "autocorr/errors.hpp"
#include "autocorr/spectral.hpp"

namespace autocorr {

double snr_db(const Grid& s_mu, const Grid& s) {
  require_same_shape(s_mu, s, "snr_db");
  auto a = s_mu.values();
  auto b = s.values();
  double signal = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    signal += a[i] * a[i];
    const double d = a[i] - b[i];
    residual += d * d;
  }
  signal = std::sqrt(signal);
  residual = std::sqrt(residual);
  if (!(signal > 0.0)) throw DegenerateSignalError("snr_db: reference signal has zero energy");
  if (residual < 1e-15 * signal) return kSnrCapDb;
  return std::min(kSnrCapDb, 20.0 * std::log10(signal / residual));
}

double i_divergence(const Grid& p, const Grid& q) {
  require_same_shape(p, q, "i_divergence");
  auto pv = p.values();
  auto qv = q.values();
  double q_max = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (!std::isfinite(pv[i]) || !std::isfinite(qv[i])) {
      throw DomainError("i_divergence: non-finite input");
    }
    if (pv[i] < 0.0) throw DomainError("i_divergence: p must be non-negative");
    q_max = std::max(q_max, qv[i]);
  }
  const double floor = 1e-12 * q_max;
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double qi = std::max(qv[i], floor);
    if (pv[i] > 0.0) {
      if (!(qi > 0.0)) throw DomainError("i_divergence: p has mass where q vanishes");
      total += pv[i] * std::log(pv[i] / qi);
    }
    total += qi - pv[i];
  }
  // Round-off may leave tiny negatives for p == q.
  return std::max(total, 0.0);
}

namespace {

struct Peak {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = -std::numeric_limits<double>::infinity();
};

Peak find_peak(const Grid& g) {
  Peak p;
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t c = 0; c < g.width(); ++c) {
      if (g(r, c) > p.value) p = {r, c, g(r, c)};
    }
  }
  return p;
}

Alignment align_one(const Grid& rec, const Grid& ref, bool mirrored) {
  // (rec ⋆ ref)(s) = Σ rec(y) ref(y + s) is the overlap after shifting rec by s.
  const Peak p = find_peak(cross_correlate(rec, ref));
  Alignment a{circular_shift(rec, static_cast<long>(p.row), static_cast<long>(p.col)),
              signed_offset(p.row, rec.height()), signed_offset(p.col, rec.width()), mirrored,
              p.value};
  return a;
}

}  // namespace

Alignment align_to_reference(const Grid& rec, const Grid& ref) {
  require_same_shape(rec, ref, "align_to_reference");
  Alignment direct = align_one(rec, ref, false);
  Alignment twin = align_one(reverse_axes(rec), ref, true);
  // The twin must win by more than transform round-off to count as mirrored.
  const double tol = 1e-12 * std::max(std::abs(direct.peak), std::abs(twin.peak));
  return (twin.peak > direct.peak + tol) ? twin : direct;
}

}  // namespace autocorr
