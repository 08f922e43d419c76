#pragma once

#include <cmath>
#include <cstdint>

#include "kflow/circle.hpp"
#include "kflow/rotation.hpp"

namespace kflow {

/// Which derivative of the roof a Birkhoff sum accumulates.
enum class Order : int { value = 0, first = 1, second = 2 };

/// The roof f(x) = scale * (x^gamma + (1-x)^gamma) on (0,1), gamma in (-1,0).
///
/// f is symmetric about 1/2, so f(||x||) = f(x) and A1 = B1 = scale. With
/// `normalize` the scale is (1+gamma)/2 and the mean is exactly 1.
class RoofFunction {
 public:
  static RoofFunction make(double gamma, bool normalize);

  double gamma() const noexcept { return gamma_; }
  double abs_gamma() const noexcept { return -gamma_; }
  double scale() const noexcept { return scale_; }
  double a1() const noexcept { return scale_; }
  double b1() const noexcept { return scale_; }
  double mean() const noexcept { return mean_; }
  /// min f = f(1/2).
  double minimum() const noexcept;

  /// Evaluation at a real x in (0,1).
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  double eval(double x, Order order) const;

  /// Evaluation at a circle point; both x and 1-x are formed exactly before
  /// rounding. Throws SingularityError(0) at x = 0.
  double eval(CirclePoint x, Order order) const;
  double value(CirclePoint x) const { return eval(x, Order::value); }

  /// Mass of [0, x] under f / mean (a distribution function on [0,1]).
  double cdf(double x) const;
  /// Inverse of cdf by bisection.
  double inverse_cdf(double u) const;

 private:
  RoofFunction(double gamma, double scale);
  double eval_split(double x, double one_minus_x, Order order) const;

  double gamma_;
  double scale_;
  double mean_;
};

/// f^{(n)}(x) (or f'^{(n)}, f''^{(n)}) together with the closest approach to
/// the singularity along the summed orbit segment.
struct BirkhoffSum {
  std::int64_t n = 0;
  double value = 0.0;
  CircleDistance min_distance{0.5};
  /// Iterate index j (inside the summation range) attaining min_distance.
  std::int64_t argmin = 0;
};

/// Neumaier-compensated running sum; supports removal of terms.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void subtract(double v) noexcept { add(-v); }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Signed Birkhoff sum over the rotation:
///   n > 0: f(x) + ... + f(x + (n-1) alpha)
///   n = 0: 0
///   n < 0: -(f(x + n alpha) + ... + f(x - alpha))
/// Throws SingularityError naming j when x + j alpha is exactly 0.
BirkhoffSum birkhoff_sum(const RoofFunction& f, const Rotation& rot, CirclePoint x, std::int64_t n,
                         Order order = Order::value);

}  // namespace kflow
