// include/forager/geometry.hpp
//
// Frame-space primitives. Positions are continuous cell coordinates: cell
// (i, j) covers [i, i+1) x [j, j+1) and its centre is (i + 0.5, j + 0.5).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace forager {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

/// Symmetric 2x2 matrix.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  static Mat2 identity(double s = 1.0) { return {s, 0.0, s}; }
  friend bool operator==(Mat2, Mat2) = default;
};

/// Dense row-major field over the frame.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Clamp a continuous position into [0, width) x [0, height).
inline Vec2 clamp_to_frame(Vec2 p, int width, int height) {
  const double max_x = std::nextafter(static_cast<double>(width), 0.0);
  const double max_y = std::nextafter(static_cast<double>(height), 0.0);
  return {std::clamp(p.x, 0.0, max_x), std::clamp(p.y, 0.0, max_y)};
}

inline int cell_of(double coord, int extent) {
  const int c = static_cast<int>(std::floor(coord));
  return c < 0 ? 0 : (c >= extent ? extent - 1 : c);
}

}  // namespace forager
