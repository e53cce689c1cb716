#pragma once

#include <span>

namespace ipp {

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;  // two-tailed
  bool degenerate = false;  // zero pooled variance
};

/// Student's pooled two-sample t-test.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b);

/// Pooled t-test from per-group mean, sample standard deviation and size.
TTestResult pooled_t_test(double mean_a, double sd_a, int n_a, double mean_b, double sd_b, int n_b);

/// Two-tailed p-value of Student's t distribution, via the regularized incomplete beta function.
double student_t_two_tailed_p(double t, int df);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

}  // namespace ipp
