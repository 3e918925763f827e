#pragma once

#include <cmath>
#include <limits>

namespace fpp {

// Streaming log-sum-exp: value() = ln(sum_i e^{x_i}). Stable for terms far
// below double range (e.g. x ~ -800). Floating-point accumulation order is
// part of the determinism contract: callers add and merge in a fixed order.
class LogSumAccumulator {
 public:
  void add(double x) {
    if (x == -kInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }

  void merge(const LogSumAccumulator& o) {
    if (o.sum_ == 0.0) return;
    if (o.max_ <= max_) {
      sum_ += o.sum_ * std::exp(o.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - o.max_) + o.sum_;
      max_ = o.max_;
    }
  }

  // ln of the accumulated sum; -inf when nothing was added.
  double value() const { return sum_ == 0.0 ? -kInf : max_ + std::log(sum_); }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  double max_ = -kInf;
  double sum_ = 0.0;
};

}  // namespace fpp
