#include "ipp/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

namespace ipp {

double spherical_gamma(double h, const VariogramParams& params) {
  if (h <= 0.0) {
    return 0.0;
  }
  if (h > params.range) {
    return params.partial_sill + params.nugget;
  }
  const double u = h / params.range;
  return params.partial_sill * (1.5 * u - 0.5 * u * u * u) + params.nugget;
}

SampleSet::SampleSet(std::vector<Cell> locations, std::vector<double> values) {
  if (locations.size() != values.size()) {
    throw Error("SampleSet: locations and values differ in length");
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    add(locations[i], values[i]);
  }
}

void SampleSet::add(Cell loc, double value) {
  if (contains(loc)) {
    throw Error("SampleSet: location sampled twice");
  }
  locations_.push_back(loc);
  values_.push_back(value);
}

bool SampleSet::contains(Cell loc) const {
  return std::find(locations_.begin(), locations_.end(), loc) != locations_.end();
}

std::vector<Point> SampleSet::points() const {
  std::vector<Point> out;
  out.reserve(locations_.size());
  for (const Cell& c : locations_) {
    out.push_back({static_cast<double>(c.row), static_cast<double>(c.col)});
  }
  return out;
}

EmpiricalVariogram empirical_semivariogram(std::span<const Point> points, std::span<const double> values,
                                           int n_lags) {
  if (points.size() != values.size()) {
    throw Error("empirical_semivariogram: points and values differ in length");
  }
  if (points.size() < 2) {
    throw Error("empirical_semivariogram: need at least two samples");
  }
  if (n_lags < 1) {
    throw Error("empirical_semivariogram: n_lags must be positive");
  }
  double max_dist = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      max_dist = std::max(max_dist, distance(points[i], points[j]));
    }
  }
  if (max_dist <= 0.0) {
    throw Error("empirical_semivariogram: all samples share one location");
  }

  const double width = max_dist / n_lags;
  std::vector<double> dist_sum(n_lags, 0.0);
  std::vector<double> semi_sum(n_lags, 0.0);
  std::vector<long> counts(n_lags, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = distance(points[i], points[j]);
      if (d <= 0.0) {
        continue;
      }
      // Bins are (k*width, (k+1)*width].
      int bin = static_cast<int>(std::ceil(d / width)) - 1;
      bin = std::clamp(bin, 0, n_lags - 1);
      const double diff = values[i] - values[j];
      dist_sum[bin] += d;
      semi_sum[bin] += 0.5 * diff * diff;
      ++counts[bin];
    }
  }

  EmpiricalVariogram emp;
  for (int k = 0; k < n_lags; ++k) {
    if (counts[k] == 0) {
      continue;
    }
    emp.lag_centers.push_back(dist_sum[k] / counts[k]);
    emp.semivariances.push_back(semi_sum[k] / counts[k]);
    emp.pair_counts.push_back(counts[k]);
  }
  return emp;
}

EmpiricalVariogram empirical_semivariogram(const SampleSet& samples, int n_lags) {
  const auto pts = samples.points();
  return empirical_semivariogram(pts, samples.values(), n_lags);
}

namespace {

double spherical_shape(double h, double range) {
  if (h >= range) {
    return 1.0;
  }
  const double u = h / range;
  return 1.5 * u - 0.5 * u * u * u;
}

struct LinearFit {
  double sill = 0.0;
  double nugget = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

// For a fixed range the model is linear in (sill, nugget); solve the non-negative weighted
// least-squares problem by enumerating the active sets of the 2-variable problem.
LinearFit fit_linear_part(const EmpiricalVariogram& emp, double range) {
  const std::size_t m = emp.lag_centers.size();
  std::vector<double> shape(m);
  double sw = 0.0, ss = 0.0, s1 = 0.0, sg = 0.0, sgs = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double c = static_cast<double>(emp.pair_counts[k]);
    shape[k] = spherical_shape(emp.lag_centers[k], range);
    sw += c;
    ss += c * shape[k] * shape[k];
    s1 += c * shape[k];
    sg += c * emp.semivariances[k];
    sgs += c * emp.semivariances[k] * shape[k];
  }
  auto cost_of = [&](double p, double n) {
    double cost = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r = p * shape[k] + n - emp.semivariances[k];
      cost += static_cast<double>(emp.pair_counts[k]) * r * r;
    }
    return cost;
  };

  LinearFit best;
  auto consider = [&](double p, double n) {
    if (p < 0.0 || n < 0.0) {
      return;
    }
    const double cost = cost_of(p, n);
    if (cost < best.cost) {
      best = {p, n, cost};
    }
  };

  const double det = ss * sw - s1 * s1;
  if (det > 1e-12 * ss * sw) {
    consider((sgs * sw - s1 * sg) / det, (ss * sg - s1 * sgs) / det);
  }
  if (ss > 0.0) {
    consider(std::max(0.0, sgs / ss), 0.0);
  }
  consider(0.0, std::max(0.0, sg / sw));
  return best;
}

}  // namespace

VariogramParams fit_spherical(const EmpiricalVariogram& emp) {
  const std::size_t m = emp.lag_centers.size();
  if (m == 0 || emp.semivariances.size() != m || emp.pair_counts.size() != m) {
    throw Error("fit_spherical: empirical variogram is empty or inconsistent");
  }
  if (m == 1) {
    return {std::max(0.0, emp.semivariances[0]), emp.lag_centers[0], 0.0};
  }

  const double r_lo = emp.lag_centers.front();
  const double r_hi = 2.0 * emp.lag_centers.back();
  auto cost_at = [&](double r) { return fit_linear_part(emp, r).cost; };

  // Coarse log-spaced scan, then golden-section refinement around the best grid point.
  constexpr int kGrid = 200;
  const double log_lo = std::log(r_lo);
  const double log_step = (std::log(r_hi) - log_lo) / (kGrid - 1);
  int best_i = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double c = cost_at(std::exp(log_lo + i * log_step));
    if (c < best_cost) {
      best_cost = c;
      best_i = i;
    }
  }
  double a = std::exp(log_lo + std::max(0, best_i - 1) * log_step);
  double b = std::exp(log_lo + std::min(kGrid - 1, best_i + 1) * log_step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = cost_at(x1);
  double f2 = cost_at(x2);
  while (b - a > 1e-12 * b) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = cost_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = cost_at(x2);
    }
  }
  double range = 0.5 * (a + b);
  if (best_cost < cost_at(range)) {
    range = std::exp(log_lo + best_i * log_step);
  }
  const LinearFit lin = fit_linear_part(emp, range);
  return {lin.sill, range, lin.nugget};
}

VariogramParams fit_variogram(const SampleSet& samples, int n_lags) {
  if (samples.size() < 2) {
    return {0.0, 1.0, 0.0};
  }
  return fit_spherical(empirical_semivariogram(samples, n_lags));
}

OrdinaryKriging::OrdinaryKriging(std::vector<Point> points, std::vector<double> values,
                                 const VariogramParams& params)
    : points_(std::move(points)), values_(std::move(values)), params_(params) {
  if (points_.empty()) {
    throw Error("OrdinaryKriging: no samples");
  }
  if (points_.size() != values_.size()) {
    throw Error("OrdinaryKriging: points and values differ in length");
  }
  factorize();
}

OrdinaryKriging::OrdinaryKriging(const SampleSet& samples, const VariogramParams& params)
    : OrdinaryKriging(samples.points(), samples.values(), params) {}

void OrdinaryKriging::factorize() {
  const auto t = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd a(t + 1, t + 1);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) {
      a(i, j) = spherical_gamma(distance(points_[i], points_[j]), params_);
    }
    a(i, t) = 1.0;
    a(t, i) = 1.0;
  }
  a(t, t) = 0.0;

  lu_.compute(a);
  if (lu_.isInvertible()) {
    return;
  }
  for (Eigen::Index i = 0; i < t; ++i) {
    a(i, i) += 1e-10;
  }
  jittered_ = true;
  lu_.compute(a);
  if (!lu_.isInvertible()) {
    throw Error("OrdinaryKriging: singular system persists after jitter");
  }
}

Eigen::VectorXd OrdinaryKriging::rhs(Point target) const {
  const auto t = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd b(t + 1);
  for (Eigen::Index i = 0; i < t; ++i) {
    b(i) = spherical_gamma(distance(points_[i], target), params_);
  }
  b(t) = 1.0;
  return b;
}

OkWeights OrdinaryKriging::solve(Point target) const {
  const Eigen::VectorXd x = lu_.solve(rhs(target));
  const auto t = static_cast<Eigen::Index>(points_.size());
  OkWeights out;
  out.weights.assign(x.data(), x.data() + t);
  out.lagrange = x(t);
  return out;
}

PointPrediction OrdinaryKriging::predict(Point target) const {
  const Eigen::VectorXd b = rhs(target);
  const Eigen::VectorXd x = lu_.solve(b);
  const auto t = static_cast<Eigen::Index>(points_.size());
  PointPrediction out;
  double kv = x(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    out.mean += x(i) * values_[static_cast<std::size_t>(i)];
    kv += x(i) * b(i);
  }
  out.raw_kv = kv;
  out.kv = std::max(0.0, kv);
  return out;
}

OkWeights solve_ok_weights(const SampleSet& samples, Cell target, const VariogramParams& params) {
  return OrdinaryKriging(samples, params).solve({static_cast<double>(target.row), static_cast<double>(target.col)});
}

PointPrediction predict_point(const SampleSet& samples, Cell target, const VariogramParams& params) {
  return OrdinaryKriging(samples, params)
      .predict({static_cast<double>(target.row), static_cast<double>(target.col)});
}

PredictionMap predict_map(const SampleSet& samples, int h, int w, const VariogramParams& params, int workers) {
  const OrdinaryKriging ok(samples, params);
  PredictionMap map{GridField(h, w), GridField(h, w)};
  auto fill_rows = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      for (int c = 0; c < w; ++c) {
        const PointPrediction p = ok.predict({static_cast<double>(r), static_cast<double>(c)});
        map.mean(r, c) = p.mean;
        map.variance(r, c) = p.kv;
      }
    }
  };
  workers = std::clamp(workers, 1, h);
  if (workers == 1) {
    fill_rows(0, h);
    return map;
  }
  std::vector<std::jthread> pool;
  const int chunk = (h + workers - 1) / workers;
  for (int begin = 0; begin < h; begin += chunk) {
    pool.emplace_back(fill_rows, begin, std::min(h, begin + chunk));
  }
  pool.clear();
  return map;
}

GridField noisy_kv(const GridField& variance, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1e-6);
  GridField out = variance;
  for (double& v : out.values()) {
    v += noise(rng);
  }
  return out;
}

}  // namespace ipp
