#include "snn/profile.hpp"

#include "snn/linalg.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <utility>

namespace snn {

ProfileFunction::ProfileFunction(std::function<Values(double)> eval, double domain_end, std::string name,
                                 double plateau, double plateau_start)
    : eval_(std::move(eval)), T_(domain_end), name_(std::move(name)), a_(plateau), t0_(plateau_start) {}

ProfileFunction::Values ProfileFunction::operator()(double t) const {
  if (!(t >= 0.0 && t <= T_)) {
    throw PreconditionError("profile '" + name_ + "' evaluated outside its domain [0, " + std::to_string(T_) + "]");
  }
  return eval_(t);
}

ProfileFunction ProfileFunction::sine(double domain_end) {
  return {[](double t) { return Values{std::sin(t), std::cos(t), -std::sin(t)}; }, domain_end, "sin"};
}

ProfileFunction ProfileFunction::linear(double domain_end) {
  return {[](double t) { return Values{t, 1.0, 0.0}; }, domain_end, "linear"};
}

ProfileFunction ProfileFunction::constant(double a, double domain_end) {
  return {[a](double) { return Values{a, 0.0, 0.0}; }, domain_end, "constant", a, 0.0};
}

namespace {

double psi(double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; }
double dpsi(double y) { return y > 0.0 ? std::exp(-1.0 / y) / (y * y) : 0.0; }

// Smooth monotone step on [0,1]: 0 near 0, 1 near 1, all derivatives flat at both ends.
double step(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double a = psi(y), b = psi(1.0 - y);
  return a / (a + b);
}

double dstep(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  const double a = psi(y), b = psi(1.0 - y);
  const double den = a + b;
  if (den == 0.0) return 0.0;
  return (dpsi(y) * b + a * dpsi(1.0 - y)) / (den * den);
}

double integrate(const std::function<double(double)>& g, double lo, double hi) {
  if (hi <= lo) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(g, lo, hi, 10, 1e-13);
}

} // namespace

ProfileFunction make_profile(double a, double t0, double T) {
  if (!(a > 0.0)) throw PreconditionError("make_profile: plateau a must be positive");
  if (!(t0 > a)) {
    throw PreconditionError("make_profile: infeasible profile, need t0 > a since f' <= 1 and f' decreases to 0");
  }
  if (!(T > t0)) throw PreconditionError("make_profile: need T > t0");

  const double target = a / t0;
  const auto mean_slope = [](double p) {
    return integrate([p](double x) { return 1.0 - step(std::pow(x, p)); }, 0.0, 1.0);
  };
  // The mean slope increases with p; bracket the target starting from p = 1.
  double lo = 0.0, hi = 0.0;
  if (mean_slope(1.0) < target) {
    while (mean_slope(std::exp(hi)) < target && hi < std::log(1e8)) hi += std::log(2.0);
    lo = hi - std::log(2.0);
  } else {
    while (mean_slope(std::exp(lo)) >= target && lo > std::log(1e-8)) lo -= std::log(2.0);
    hi = lo + std::log(2.0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_slope(std::exp(mid)) < target) lo = mid; else hi = mid;
  }
  const double p = std::exp(0.5 * (lo + hi));

  const auto slope = [p, t0](double t) { return 1.0 - step(std::pow(t / t0, p)); };
  auto eval = [=](double t) -> ProfileFunction::Values {
    if (t >= t0) return {a, 0.0, 0.0};
    const double x = t / t0;
    const double y = std::pow(x, p);
    const double ds = dstep(y);
    const double d2f = ds == 0.0 ? 0.0 : -ds * p * std::pow(x, p - 1.0) / t0;
    return {integrate(slope, 0.0, t), slope(t), d2f};
  };
  return {eval, T, "plateau", a, t0};
}

} // namespace snn
