#pragma once

#include <vector>

namespace planner {

// Piecewise-linear function over strictly increasing breakpoints. Evaluation
// outside the breakpoint range clamps to the end values (constant extension),
// which also makes an empty function a plain zero.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  // One-sided from the right; zero on the constant extensions.
  double derivative(double x) const;

  bool empty() const { return x_.empty(); }
  double x_min() const { return x_.empty() ? 0.0 : x_.front(); }
  double x_max() const { return x_.empty() ? 0.0 : x_.back(); }
  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::size_t segment(double x) const;
  std::vector<double> x_;
  std::vector<double> y_;
};

}  // namespace planner
