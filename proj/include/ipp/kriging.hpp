#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ipp/grid.hpp"
#include "ipp/rng.hpp"

namespace ipp {

/// Spherical variogram model. Units: partial_sill and nugget in squared attribute units, range in
/// cells (or meters when kriging raw sensor coordinates).
struct VariogramParams {
  double partial_sill = 0.0;
  double range = 1.0;
  double nugget = 0.0;
};

/// gamma(0) = 0 regardless of nugget, so kriging interpolates observations exactly.
double spherical_gamma(double h, const VariogramParams& params);

struct EmpiricalVariogram {
  std::vector<double> lag_centers;   // mean pair distance per non-empty bin
  std::vector<double> semivariances;
  std::vector<long> pair_counts;
};

struct Point {
  double row = 0.0;
  double col = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.row - b.row, a.col - b.col); }

/// Ordered observations: locations visited so far and the values read there.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(std::vector<Cell> locations, std::vector<double> values);

  /// Throws if loc was already sampled.
  void add(Cell loc, double value);
  bool contains(Cell loc) const;

  std::size_t size() const { return locations_.size(); }
  bool empty() const { return locations_.empty(); }
  const std::vector<Cell>& locations() const { return locations_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<Point> points() const;

 private:
  std::vector<Cell> locations_;
  std::vector<double> values_;
};

struct PredictionMap {
  GridField mean;
  GridField variance;
};

/// Matheron estimator with n_lags equal-width distance bins up to the maximum pair distance.
EmpiricalVariogram empirical_semivariogram(std::span<const Point> points, std::span<const double> values,
                                           int n_lags = 6);
EmpiricalVariogram empirical_semivariogram(const SampleSet& samples, int n_lags = 6);

/// Pair-count weighted least-squares fit of the spherical model, with p, n >= 0 and the range
/// bounded to [first lag, 2 * last lag]. A single bin falls back to (semivariance, lag, 0).
VariogramParams fit_spherical(const EmpiricalVariogram& emp);

/// Fit used by missions: fewer than two samples yields (0, 1, 0); the mean is unaffected.
VariogramParams fit_variogram(const SampleSet& samples, int n_lags = 6);

struct OkWeights {
  std::vector<double> weights;
  double lagrange = 0.0;
};

struct PointPrediction {
  double mean = 0.0;
  double kv = 0.0;      // clamped at 0
  double raw_kv = 0.0;  // before clamping
};

/// Factorized ordinary-kriging system for a fixed sample set and variogram; solving for many
/// targets reuses the factorization. Const methods are safe to call concurrently.
class OrdinaryKriging {
 public:
  OrdinaryKriging(std::vector<Point> points, std::vector<double> values, const VariogramParams& params);
  OrdinaryKriging(const SampleSet& samples, const VariogramParams& params);

  OkWeights solve(Point target) const;
  PointPrediction predict(Point target) const;

  /// True when the unjittered system was singular and 1e-10 diagonal jitter was applied.
  bool jittered() const { return jittered_; }

 private:
  void factorize();
  Eigen::VectorXd rhs(Point target) const;

  std::vector<Point> points_;
  std::vector<double> values_;
  VariogramParams params_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
  bool jittered_ = false;
};

OkWeights solve_ok_weights(const SampleSet& samples, Cell target, const VariogramParams& params);
PointPrediction predict_point(const SampleSet& samples, Cell target, const VariogramParams& params);

/// Mean and kriging variance for every cell. workers > 1 splits rows across threads.
PredictionMap predict_map(const SampleSet& samples, int h, int w, const VariogramParams& params, int workers = 1);

/// Adds i.i.d. N(0, 1e-12) noise per cell.
GridField noisy_kv(const GridField& variance, Rng& rng);

}  // namespace ipp
