#pragma once

// Finite-difference curvature from metric components in a chart: Christoffel
// symbols by central differences, then the Riemann tensor.

#include "snn/cohom1.hpp"

#include <functional>
#include <string>
#include <vector>

namespace snn {

struct MetricChart {
  std::string name;
  int dim = 0;
  std::function<Mat(const Vec&)> metric;
  Vec lo, hi;       ///< coordinate box
  double h = 1e-3;  ///< recommended step
};

/// R_{lijk} = <R(d_i, d_j) d_k, d_l>, R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
class FdRiemann {
public:
  FdRiemann(int d, std::vector<double> r) : d_(d), r_(std::move(r)) {}
  int dim() const { return d_; }
  double operator()(int l, int i, int j, int k) const {
    return r_[static_cast<std::size_t>(((l * d_ + i) * d_ + j) * d_ + k)];
  }

private:
  int d_;
  std::vector<double> r_;
};

/// Throws PreconditionError when the stencil leaves the chart box or the
/// metric is singular on it.
FdRiemann fd_riemann(const MetricChart& chart, const Vec& x, double h = 0.0);

/// <R(X,Y)Y, X> / |X ^ Y|^2 with second-order central differences (h = 0
/// selects chart.h).
double fd_sectional(const MetricChart& chart, const Vec& x, const Vec& X, const Vec& Y, double h = 0.0);

MetricChart euclidean_chart(int d);

/// Exponential chart x -> exp(x) of a left-invariant metric with Gram `metric`.
MetricChart group_chart(const LieAlgebra& g, const Mat& metric, double radius = 0.5);

struct HalfChart {
  MetricChart chart;
  Vec origin;
  Mat lifts;   ///< horizontal lifts of the coordinate vectors at the origin (coordinates g + V)
  Mat metric;  ///< ambient Gram matrix at the origin
};

/// Chart (x_m, theta, r) -> [exp(x_m), r rho(exp(theta . p)) v0] of G x_K V
/// around pi(e, t v0), metric L + dr^2 + f(r)^2 dtheta^2 pushed down by
/// horizontal projection.
HalfChart chart_for_half(const GroupTriple& tr, double p_scale, const ProfileFunction& f, double t,
                         double t_floor = 1e-3);

} // namespace snn
