// stats.hpp
//
// Small statistics helpers shared by the experiments.

#pragma once

#include <span>
#include <vector>

namespace incstat {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y ~ a + b x. Needs at least two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Sum that does not depend on the order of the inputs: values are sorted
// and then added pairwise, so any permutation gives identical bits.
double order_free_sum(std::vector<double> values);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

// Mean and standard error of the mean; order independent.
MeanStderr mean_stderr(std::span<const double> values);

}  // namespace incstat
