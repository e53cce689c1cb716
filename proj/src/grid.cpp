#include "ipp/grid.hpp"

#include <algorithm>

namespace ipp {

GridField::GridField(int height, int width, double fill)
    : GridField(height, width, std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                                       static_cast<std::size_t>(std::max(width, 0)),
                                                   fill)) {}

GridField::GridField(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 1 || width < 1) {
    throw Error("GridField: dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error("GridField: value count does not match dimensions");
  }
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double rmse(const GridField& pred, const GridField& truth) {
  if (pred.height() != truth.height() || pred.width() != truth.width()) {
    throw Error("rmse: dimension mismatch");
  }
  if (truth.size() == 0) {
    throw Error("rmse: empty field");
  }
  double sum = 0.0;
  const auto& a = pred.values();
  const auto& b = truth.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace ipp
