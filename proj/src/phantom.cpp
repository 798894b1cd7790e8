#include "autocorr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "autocorr/errors.hpp"

namespace autocorr {

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::TwoDeltas: return "two-deltas";
    case PhantomKind::Bars: return "bars";
    case PhantomKind::Disks: return "disks";
    case PhantomKind::SatelliteLike: return "satellite-like";
  }
  return "unknown";
}

PhantomKind parse_phantom_kind(const std::string& text) {
  for (auto kind : {PhantomKind::TwoDeltas, PhantomKind::Bars, PhantomKind::Disks,
                    PhantomKind::SatelliteLike}) {
    if (text == to_string(kind)) return kind;
  }
  throw InvalidParamError("unknown phantom '" + text +
                          "' (expected two-deltas, bars, disks or satellite-like)");
}

namespace {

// Feature coordinates are given on a 64x64 design canvas and scaled.
class Canvas {
 public:
  explicit Canvas(Shape shape) : grid_(shape) {}

  long y(double design) const { return scale(design, grid_.height()); }
  long x(double design) const { return scale(design, grid_.width()); }

  void rect(double y0, double x0, double y1, double x1, double value) {
    for (long r = y(y0); r <= std::max(y(y0), y(y1)); ++r) {
      for (long c = x(x0); c <= std::max(x(x0), x(x1)); ++c) set(r, c, value);
    }
  }

  void disk(double cy, double cx, double radius, double value) {
    const double sy = static_cast<double>(grid_.height()) / 64.0;
    const double sx = static_cast<double>(grid_.width()) / 64.0;
    const double ry = std::max(radius * sy, 0.5);
    const double rx = std::max(radius * sx, 0.5);
    for (long r = y(cy - radius) - 1; r <= y(cy + radius) + 1; ++r) {
      for (long c = x(cx - radius) - 1; c <= x(cx + radius) + 1; ++c) {
        const double dy = (static_cast<double>(r) - cy * sy) / ry;
        const double dx = (static_cast<double>(c) - cx * sx) / rx;
        if (dy * dy + dx * dx <= 1.0) set(r, c, value);
      }
    }
  }

  Grid take() && { return std::move(grid_); }

 private:
  static long scale(double design, std::size_t extent) {
    return std::lround(design * static_cast<double>(extent) / 64.0);
  }

  void set(long r, long c, double value) {
    if (r < 0 || c < 0 || r >= static_cast<long>(grid_.height()) ||
        c >= static_cast<long>(grid_.width())) {
      return;
    }
    grid_(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = value;
  }

  Grid grid_;
};

Grid satellite_like(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.9, 1.0);
  Canvas canvas(shape);
  // Long panel wing on the left, short one on the right.
  canvas.rect(28, 6, 35, 23, 0.45 * jitter(rng));
  for (double col = 9; col < 23; col += 4) canvas.rect(28, col, 35, col, 0.25);
  canvas.rect(29, 40, 34, 51, 0.55 * jitter(rng));
  canvas.rect(31, 23, 32, 26, 0.7);
  canvas.rect(31, 37, 32, 40, 0.7);
  // Body and its bright corner module.
  canvas.rect(25, 26, 39, 37, 0.8 * jitter(rng));
  canvas.rect(25, 26, 28, 29, 1.0);
  // Long antenna upwards, short stub downwards-right.
  canvas.rect(7, 31, 24, 31, 0.9 * jitter(rng));
  canvas.disk(7, 31, 1.5, 1.0);
  canvas.rect(40, 35, 47, 35, 0.7);
  // Dish below the body, off-center.
  canvas.disk(45, 28, 4, 0.6 * jitter(rng));
  return std::move(canvas).take();
}

Grid bars(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> level(0.5, 1.0);
  Canvas canvas(shape);
  canvas.rect(8, 8, 40, 10, level(rng));
  canvas.rect(14, 16, 52, 17, level(rng));
  canvas.rect(24, 24, 56, 28, level(rng));
  canvas.rect(8, 36, 20, 37, level(rng));
  canvas.rect(46, 34, 49, 56, level(rng));
  return std::move(canvas).take();
}

Grid disks(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(12.0, 52.0);
  std::uniform_real_distribution<double> radius(2.0, 8.0);
  std::uniform_real_distribution<double> level(0.3, 1.0);
  Canvas canvas(shape);
  for (int i = 0; i < 5; ++i) canvas.disk(pos(rng), pos(rng), radius(rng), level(rng));
  return std::move(canvas).take();
}

Grid two_deltas(Shape shape, std::mt19937_64& rng) {
  Grid g(shape);
  const std::size_t row = shape.height / 2;
  std::uniform_int_distribution<std::size_t> gap(1, std::max<std::size_t>(1, shape.width / 3));
  const std::size_t c0 = shape.width / 4;
  g(row, c0) = 1.0;
  g(row, c0 + gap(rng)) = 0.6;
  return g;
}

}  // namespace

Grid make_phantom(PhantomKind kind, Shape shape, std::uint64_t seed) {
  if (shape.height < 8 || shape.width < 8) {
    throw InvalidParamError("phantom shape must be at least 8x8, got " + to_string(shape));
  }
  std::mt19937_64 rng(seed);
  switch (kind) {
    case PhantomKind::TwoDeltas: return two_deltas(shape, rng);
    case PhantomKind::Bars: return bars(shape, rng);
    case PhantomKind::Disks: return disks(shape, rng);
    case PhantomKind::SatelliteLike: return satellite_like(shape, rng);
  }
  throw InvalidParamError("unknown phantom kind");
}

}  // namespace autocorr
