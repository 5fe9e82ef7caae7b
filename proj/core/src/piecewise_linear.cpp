#include "planner/piecewise_linear.hpp"

#include <algorithm>
#include <stdexcept>

namespace planner {

PiecewiseLinear::PiecewiseLinear(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw std::invalid_argument("PiecewiseLinear: size mismatch");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (x_[i] <= x_[i - 1]) {
      throw std::invalid_argument("PiecewiseLinear: breakpoints must be strictly increasing");
    }
  }
}

std::size_t PiecewiseLinear::segment(double x) const {
  // Index of the segment [x_i, x_{i+1}] containing x, clamped to valid range.
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto idx = static_cast<std::size_t>(std::distance(x_.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, x_.size() - 2);
}

double PiecewiseLinear::operator()(double x) const {
  if (x_.empty()) return 0.0;
  if (x_.size() == 1 || x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = segment(x);
  const double t = (x - x_[i]) / (x_[i + 1] - x_[i]);
  return y_[i] + t * (y_[i + 1] - y_[i]);
}

double PiecewiseLinear::derivative(double x) const {
  if (x_.size() < 2 || x < x_.front() || x >= x_.back()) return 0.0;
  const std::size_t i = segment(x);
  return (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
}

}  // namespace planner
