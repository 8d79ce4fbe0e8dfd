#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace robustdet {

// Neumaier-compensated accumulator; summation order is the caller's loop order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_mean(const Eigen::Ref<const Eigen::VectorXd>& x) {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s.add(x[i]);
  return s.value() / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = compensated_mean(x);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s.add((x[i] - m) * (x[i] - m));
  return x.size() > 1 ? s.value() / static_cast<double>(x.size() - 1) : 0.0;
}

// log(mean(exp(scale * x))) with a max shift.
inline double log_mean_exp(const Eigen::Ref<const Eigen::VectorXd>& x, double scale = 1.0) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  const double shift = scale >= 0.0 ? scale * x.maxCoeff() : scale * x.minCoeff();
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s.add(std::exp(scale * x[i] - shift));
  return shift + std::log(s.value() / static_cast<double>(x.size()));
}

}  // namespace robustdet
