#include "autocorr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autocorr/errors.hpp"

namespace autocorr {

namespace {

std::size_t wrap(long index, std::size_t extent) {
  const long n = static_cast<long>(extent);
  long r = index % n;
  return static_cast<std::size_t>(r < 0 ? r + n : r);
}

}  // namespace

std::string to_string(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width);
}

Shape doubled(const Shape& shape) {
  return {2 * shape.height, 2 * shape.width};
}

Grid::Grid(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.height == 0 || shape.width == 0) {
    throw ShapeError("grid dimensions must be positive, got " + to_string(shape));
  }
}

Grid::Grid(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (shape.height == 0 || shape.width == 0) {
    throw ShapeError("grid dimensions must be positive, got " + to_string(shape));
  }
  if (data_.size() != shape.size()) {
    throw ShapeError("grid data length " + std::to_string(data_.size()) +
                     " does not match shape " + to_string(shape));
  }
}

Grid Grid::delta(Shape shape, std::size_t row, std::size_t col, double value) {
  Grid g(shape);
  if (row >= shape.height || col >= shape.width) {
    throw ShapeError("delta position outside grid " + to_string(shape));
  }
  g(row, col) = value;
  return g;
}

double Grid::sum() const {
  // Compensated summation: sums of 10^4-10^5 normalized bins are compared
  // against 1 at 1e-12.
  double total = 0.0;
  double carry = 0.0;
  for (double v : data_) {
    const double y = v - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return total;
}

double Grid::min() const { return *std::min_element(data_.begin(), data_.end()); }

double Grid::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool Grid::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Grid normalize_total(const Grid& g) {
  const double total = g.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ZeroMassError("cannot normalize grid with total mass " + std::to_string(total));
  }
  return scaled(g, 1.0 / total);
}

Grid embed_pad(const Grid& g, Shape target) {
  if (target.height < g.height() || target.width < g.width()) {
    throw ShapeError("cannot pad " + to_string(g.shape()) + " into smaller " +
                     to_string(target));
  }
  Grid out(target);
  for (std::size_t r = 0; r < g.height(); ++r) {
    std::copy_n(g.values().begin() + static_cast<long>(r * g.width()), g.width(),
                out.values().begin() + static_cast<long>(r * target.width));
  }
  return out;
}

namespace {

Grid crop_at(const Grid& g, Shape target, std::size_t row0, std::size_t col0) {
  Grid out(target);
  for (std::size_t r = 0; r < target.height; ++r) {
    for (std::size_t c = 0; c < target.width; ++c) {
      out(r, c) = g(row0 + r, col0 + c);
    }
  }
  return out;
}

void require_fits(const Grid& g, Shape target) {
  if (target.height > g.height() || target.width > g.width()) {
    throw ShapeError("cannot crop " + to_string(g.shape()) + " to larger " + to_string(target));
  }
}

}  // namespace

Grid crop_center(const Grid& g, Shape target) {
  require_fits(g, target);
  return crop_at(g, target, (g.height() - target.height) / 2, (g.width() - target.width) / 2);
}

Grid crop_top_left(const Grid& g, Shape target) {
  require_fits(g, target);
  return crop_at(g, target, 0, 0);
}

Grid reverse_axes(const Grid& g) {
  Grid out(g.shape());
  const std::size_t h = g.height();
  const std::size_t w = g.width();
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t rr = (h - r) % h;
    for (std::size_t c = 0; c < w; ++c) {
      out(rr, (w - c) % w) = g(r, c);
    }
  }
  return out;
}

Grid circular_shift(const Grid& g, long dy, long dx) {
  Grid out(g.shape());
  for (std::size_t r = 0; r < g.height(); ++r) {
    const std::size_t rr = wrap(static_cast<long>(r) + dy, g.height());
    for (std::size_t c = 0; c < g.width(); ++c) {
      out(rr, wrap(static_cast<long>(c) + dx, g.width())) = g(r, c);
    }
  }
  return out;
}

Grid center_origin(const Grid& g) {
  return circular_shift(g, static_cast<long>(g.height() / 2), static_cast<long>(g.width() / 2));
}

Grid clamp_below(const Grid& g, double floor) {
  Grid out = g;
  for (double& v : out.values()) v = std::max(v, floor);
  return out;
}

Grid scaled(const Grid& g, double factor) {
  Grid out = g;
  for (double& v : out.values()) v *= factor;
  return out;
}

Grid difference(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "difference");
  Grid out = a;
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= bv[i];
  return out;
}

double max_abs_difference(const Grid& a, const Grid& b) {
  require_same_shape(a, b, "max_abs_difference");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

void require_finite(const Grid& g, const char* context) {
  if (!g.all_finite()) throw DivergedError(std::string(context) + ": non-finite value in grid");
}

void require_same_shape(const Grid& a, const Grid& b, const char* context) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(context) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

}  // namespace autocorr
