#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eyevis {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Axis-aligned pixel rectangle, half-open: [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool empty() const noexcept { return width() <= 0 || height() <= 0; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Row-major grid of values with strictly positive dimensions.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{});
  Grid(int width, int height, std::vector<T> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& at(int x, int y) { return values_[index(x, y)]; }
  const T& at(int x, int y) const { return values_[index(x, y)]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

void check_grid_dims(int width, int height, std::size_t value_count);

template <typename T>
Grid<T>::Grid(int width, int height, T fill)
    : width_(width), height_(height) {
  check_grid_dims(width, height, static_cast<std::size_t>(width > 0 ? width : 0) *
                                     static_cast<std::size_t>(height > 0 ? height : 0));
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

template <typename T>
Grid<T>::Grid(int width, int height, std::vector<T> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_grid_dims(width, height, values_.size());
}

// 8-bit sRGB image.
using RasterImage = Grid<Rgb>;
// 8-bit luma image.
using GrayImage = Grid<std::uint8_t>;

// Binary mask; 1 = set. Stored as bytes so it can be spanned and hashed.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;

  bool test(int x, int y) const { return at(x, y) != 0; }
  void set(int x, int y, bool on = true) { at(x, y) = on ? 1 : 0; }
  std::size_t count() const noexcept;
};

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);

}  // namespace eyevis
