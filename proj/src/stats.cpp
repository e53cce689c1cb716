#include "ipp/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>

#include "ipp/grid.hpp"

namespace ipp {

double mean(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) {
    return 0.0;
  }
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double student_t_two_tailed_p(double t, int df) {
  if (df < 1) {
    throw Error("student_t_two_tailed_p: df must be positive");
  }
  if (std::isinf(t)) {
    return 0.0;
  }
  const double nu = static_cast<double>(df);
  // P(|T| > |t|) = I_{nu / (nu + t^2)}(nu / 2, 1 / 2)
  return boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + t * t));
}

TTestResult pooled_t_test(double ma, double sa, int n_a, double mb, double sb, int n_b) {
  if (n_a < 2 || n_b < 2) {
    throw Error("two_sample_t_test: each sample needs at least two values");
  }
  const double na = n_a;
  const double nb = n_b;
  TTestResult r;
  r.df = n_a + n_b - 2;
  const double pooled = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / r.df;
  const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  if (se == 0.0) {
    r.degenerate = true;
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? INFINITY : -INFINITY;
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / se;
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b) {
  return pooled_t_test(mean(a), stddev(a), static_cast<int>(a.size()), mean(b), stddev(b),
                       static_cast<int>(b.size()));
}

}  // namespace ipp
