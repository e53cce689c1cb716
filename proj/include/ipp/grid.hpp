#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipp {

/// Raised for contract violations and unrecoverable failures throughout the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A grid location addressed as (row, col).
struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline double distance(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

/// Dense H x W field of finite reals, stored row-major.
class GridField {
 public:
  GridField() = default;
  GridField(int height, int width, double fill = 0.0);
  GridField(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int row, int col) { return values_[index(row, col)]; }
  double operator()(int row, int col) const { return values_[index(row, col)]; }
  double& operator[](Cell c) { return (*this)(c.row, c.col); }
  double operator[](Cell c) const { return (*this)(c.row, c.col); }

  bool contains(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Root mean-squared error over all cells. Throws on dimension mismatch.
double rmse(const GridField& pred, const GridField& truth);

}  // namespace ipp
