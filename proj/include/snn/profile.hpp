#pragma once

#include <functional>
#include <limits>
#include <string>

namespace snn {

/// Warping function f of a rotationally symmetric metric dt^2 + f(t)^2 dtheta^2,
/// defined on [0, T].
class ProfileFunction {
public:
  struct Values {
    double f = 0.0;
    double df = 0.0;
    double d2f = 0.0;
  };

  ProfileFunction() = default;
  ProfileFunction(std::function<Values(double)> eval, double domain_end, std::string name,
                  double plateau = std::numeric_limits<double>::quiet_NaN(),
                  double plateau_start = std::numeric_limits<double>::quiet_NaN());

  static ProfileFunction sine(double domain_end);
  static ProfileFunction linear(double domain_end);
  static ProfileFunction constant(double a, double domain_end);

  /// Throws PreconditionError for t outside [0, T].
  Values operator()(double t) const;
  double f(double t) const { return (*this)(t).f; }

  double domain_end() const { return T_; }
  /// Plateau height a and start t0 (NaN when the profile has no plateau).
  double plateau() const { return a_; }
  double plateau_start() const { return t0_; }
  const std::string& name() const { return name_; }

private:
  std::function<Values(double)> eval_;
  double T_ = 0.0;
  std::string name_;
  double a_ = std::numeric_limits<double>::quiet_NaN();
  double t0_ = std::numeric_limits<double>::quiet_NaN();
};

/// Odd smooth concave profile with f'(0) = 1, f'' <= 0, and f == a on [t0, T].
/// f' = 1 - sigma((t/t0)^p) with sigma a smooth monotone step; the exponent
/// p is found by bisection so that the integral of f' over [0, t0] is a.
/// Requires 0 < a < t0 < T.
ProfileFunction make_profile(double a, double t0, double T);

} // namespace snn
