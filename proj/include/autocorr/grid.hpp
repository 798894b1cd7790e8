#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace autocorr {

/// Raster dimensions in pixels. Both must be positive for a usable grid.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return height * width; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Shape doubled along both axes: the support needed for circular FFT
/// products to reproduce linear correlations of a grid of `shape`.
Shape doubled(const Shape& shape);

/// Dense row-major raster of doubles. Index (0, 0) is the top-left pixel and,
/// for correlation-space grids, the zero-shift bin.
class Grid {
 public:
  explicit Grid(Shape shape, double fill = 0.0);
  Grid(Shape shape, std::vector<double> data);

  static Grid delta(Shape shape, std::size_t row = 0, std::size_t col = 0,
                    double value = 1.0);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * shape_.width + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return data_[row * shape_.width + col];
  }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  double sum() const;
  double min() const;
  double max() const;
  bool all_finite() const;

  bool operator==(const Grid&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Scales a non-negative grid to unit total mass.
/// Throws ZeroMassError when the sum is not positive.
Grid normalize_total(const Grid& g);

/// Copies `g` into the top-left corner of a zero grid of shape `target`.
Grid embed_pad(const Grid& g, Shape target);

/// Central window of `g`, offset floor((dim - target) / 2) on each axis.
Grid crop_center(const Grid& g, Shape target);

/// Top-left window of `g` (inverse of embed_pad).
Grid crop_top_left(const Grid& g, Shape target);

/// Circular reversal fixing index 0: result(i, j) = g(-i mod H, -j mod W).
Grid reverse_axes(const Grid& g);

/// Circular translation: result(i, j) = g(i - dy mod H, j - dx mod W).
Grid circular_shift(const Grid& g, long dy, long dx);

/// Swaps quadrants so the zero-shift bin moves to the grid center.
Grid center_origin(const Grid& g);

/// Replaces values below `floor` by `floor`.
Grid clamp_below(const Grid& g, double floor);

Grid scaled(const Grid& g, double factor);

/// Elementwise a - b; shapes must agree.
Grid difference(const Grid& a, const Grid& b);

/// Maximum absolute elementwise difference; shapes must agree.
double max_abs_difference(const Grid& a, const Grid& b);

/// Throws DivergedError naming `context` if any value is NaN or infinite.
void require_finite(const Grid& g, const char* context);

void require_same_shape(const Grid& a, const Grid& b, const char* context);

}  // namespace autocorr
