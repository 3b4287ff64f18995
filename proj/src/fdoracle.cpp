#include "snn/fdoracle.hpp"

#include <cmath>

namespace snn {

namespace {

void check_inside(const MetricChart& c, const Vec& x, double reach) {
  if (x.size() != c.dim) throw PreconditionError("fd oracle: point has wrong dimension for chart '" + c.name + "'");
  for (int i = 0; i < c.dim; ++i) {
    if (x(i) - reach < c.lo(i) || x(i) + reach > c.hi(i)) {
      throw PreconditionError("fd oracle: stencil leaves the domain of chart '" + c.name + "'");
    }
  }
}

// dg[k](i,j) = d_k g_ij.
std::vector<Mat> metric_derivatives(const MetricChart& c, const Vec& x, double h) {
  std::vector<Mat> dg;
  for (int k = 0; k < c.dim; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg.push_back((c.metric(xp) - c.metric(xm)) / (2.0 * h));
  }
  return dg;
}

// gamma[(l*d + i)*d + j] = Gamma^l_ij.
std::vector<double> christoffel(const MetricChart& c, const Vec& x, double h) {
  const int d = c.dim;
  const Mat g = c.metric(x);
  const Eigen::LDLT<Mat> ldlt(g);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().cwiseAbs().minCoeff() > 1e-14)) {
    throw PreconditionError("fd oracle: singular metric in chart '" + c.name + "'");
  }
  const Mat ginv = ldlt.solve(Mat::Identity(d, d));
  const std::vector<Mat> dg = metric_derivatives(c, x, h);
  std::vector<double> gamma(static_cast<std::size_t>(d * d * d), 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Vec low(d);
      for (int m = 0; m < d; ++m) {
        low(m) = 0.5 * (dg[static_cast<std::size_t>(i)](m, j) + dg[static_cast<std::size_t>(j)](m, i) -
                        dg[static_cast<std::size_t>(m)](i, j));
      }
      const Vec up = ginv * low;
      for (int l = 0; l < d; ++l) gamma[static_cast<std::size_t>((l * d + i) * d + j)] = up(l);
    }
  return gamma;
}

// Left-trivialized differential of exp: sum_k (-1)^k ad_x^k / (k+1)!.
Mat dexp(const Mat& ad) {
  const int n = static_cast<int>(ad.rows());
  Mat out = Mat::Identity(n, n), term = Mat::Identity(n, n);
  for (int k = 1; k < 40; ++k) {
    term = -(term * ad) / static_cast<double>(k + 1);
    out += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return out;
}

// Same series for matrix groups: exp(A)^{-1} d/ds exp(A + sB).
Mat dexp_matrix(const Mat& a, const Mat& b) {
  Mat out = b, term = b;
  for (int k = 1; k < 40; ++k) {
    term = -(a * term - term * a) / static_cast<double>(k + 1);
    out += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  return out;
}

} // namespace

FdRiemann fd_riemann(const MetricChart& chart, const Vec& x, double h) {
  if (h <= 0.0) h = chart.h;
  if (!(h > 0.0)) throw PreconditionError("fd oracle: step must be positive");
  check_inside(chart, x, 2.0 * h);
  const int d = chart.dim;
  const std::vector<double> gamma = christoffel(chart, x, h);
  std::vector<std::vector<double>> dgamma;
  for (int k = 0; k < d; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    const std::vector<double> gp = christoffel(chart, xp, h), gm = christoffel(chart, xm, h);
    std::vector<double> dk(gp.size());
    for (std::size_t i = 0; i < gp.size(); ++i) dk[i] = (gp[i] - gm[i]) / (2.0 * h);
    dgamma.push_back(std::move(dk));
  }
  const auto G = [&](int l, int i, int j) { return gamma[static_cast<std::size_t>((l * d + i) * d + j)]; };
  const auto dG = [&](int m, int l, int i, int j) {
    return dgamma[static_cast<std::size_t>(m)][static_cast<std::size_t>((l * d + i) * d + j)];
  };

  // R^l_{kij}: R(d_i, d_j) d_k = R^l_{kij} d_l.
  std::vector<double> up(static_cast<std::size_t>(d * d * d * d), 0.0);
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double v = dG(i, l, j, k) - dG(j, l, i, k);
          for (int m = 0; m < d; ++m) v += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
          up[static_cast<std::size_t>(((l * d + k) * d + i) * d + j)] = v;
        }
  const Mat g = chart.metric(x);
  std::vector<double> r(up.size(), 0.0);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double v = 0.0;
          for (int m = 0; m < d; ++m) v += g(l, m) * up[static_cast<std::size_t>(((m * d + k) * d + i) * d + j)];
          r[static_cast<std::size_t>(((l * d + i) * d + j) * d + k)] = v;
        }
  return {d, std::move(r)};
}

double fd_sectional(const MetricChart& chart, const Vec& x, const Vec& X, const Vec& Y, double h) {
  if (X.size() != chart.dim || Y.size() != chart.dim) throw PreconditionError("fd_sectional: vector dimension mismatch");
  const Mat g = chart.metric(x);
  const double area = X.dot(g * X) * Y.dot(g * Y) - std::pow(X.dot(g * Y), 2);
  if (!(area > 1e-14 * X.squaredNorm() * Y.squaredNorm())) throw PreconditionError("fd_sectional: degenerate plane");
  const FdRiemann r = fd_riemann(chart, x, h);
  const int d = chart.dim;
  double num = 0.0;
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) num += r(l, i, j, k) * X(i) * Y(j) * Y(k) * X(l);
  return num / area;
}

MetricChart euclidean_chart(int d) {
  MetricChart c;
  c.name = "euclidean";
  c.dim = d;
  c.metric = [d](const Vec&) { return Mat(Mat::Identity(d, d)); };
  c.lo = Vec::Constant(d, -1e3);
  c.hi = Vec::Constant(d, 1e3);
  return c;
}

MetricChart group_chart(const LieAlgebra& g, const Mat& metric, double radius) {
  const int n = g.dim();
  if (metric.rows() != n || metric.cols() != n) throw PreconditionError("group_chart: metric has wrong size");
  MetricChart c;
  c.name = "exp(" + g.name() + ")";
  c.dim = n;
  c.metric = [g, metric](const Vec& x) {
    const Mat j = dexp(g.ad_of(x));
    return Mat(linalg::symmetrized(j.transpose() * metric * j));
  };
  c.lo = Vec::Constant(n, -radius);
  c.hi = Vec::Constant(n, radius);
  return c;
}

HalfChart chart_for_half(const GroupTriple& tr, double p_scale, const ProfileFunction& f, double t, double t_floor) {
  if (!(t > t_floor)) throw PreconditionError("chart_for_half: t must exceed the chart floor");
  const int n = tr.g.dim(), s = tr.slice_dim;
  const int dm = tr.m.dim(), dp = tr.p.dim();
  const Mat L = invariant_metric(tr, p_scale);
  const Mat mb = tr.m.basis(), pb = tr.p.basis(), kb = tr.k.basis();
  std::vector<Mat> rp;
  for (int j = 0; j < dp; ++j) rp.push_back(tr.rho(pb.col(j)));
  std::vector<Mat> rk;
  for (int j = 0; j < kb.cols(); ++j) rk.push_back(tr.rho(kb.col(j)));
  const int d = dm + dp + 1;

  // Tangent vectors of the coordinate curves at x, left-trivialized, and the ambient metric there.
  const auto lift = [=](const Vec& x, Mat& tangents, Mat& gram, Mat& vertical) {
    const Vec xm = mb * x.head(dm);
    const double r = x(d - 1);
    Mat a = Mat::Zero(s, s);
    for (int j = 0; j < dp; ++j) a += x(dm + j) * rp[static_cast<std::size_t>(j)];
    const Mat ea = linalg::expm(a);
    const Vec u = ea * tr.v0;
    const Vec v = r * u;
    tangents = Mat::Zero(n + s, d);
    tangents.topLeftCorner(n, dm) = dexp(tr.g.ad_of(xm)) * mb;
    for (int j = 0; j < dp; ++j)
      tangents.col(dm + j).tail(s) = r * ea * dexp_matrix(a, rp[static_cast<std::size_t>(j)]) * tr.v0;
    tangents.col(d - 1).tail(s) = u;
    const ProfileFunction::Values fv = f(r);
    const double hh = fv.f * fv.f / (r * r);
    const Vec uh = u / u.norm();
    gram = Mat::Zero(n + s, n + s);
    gram.topLeftCorner(n, n) = L;
    gram.bottomRightCorner(s, s) = hh * Mat::Identity(s, s) + (1.0 - hh) * uh * uh.transpose();
    vertical = Mat::Zero(n + s, kb.cols());
    for (int j = 0; j < kb.cols(); ++j) vertical.col(j) << -kb.col(j), rk[static_cast<std::size_t>(j)] * v;
  };
  const auto horizontal = [](const Mat& x, const Mat& gram, const Mat& vert) {
    const Eigen::LDLT<Mat> vg(vert.transpose() * gram * vert);
    return Mat(x - vert * vg.solve(vert.transpose() * gram * x));
  };

  HalfChart out;
  out.chart.name = "half(" + tr.name + ")";
  out.chart.dim = d;
  out.chart.metric = [=](const Vec& x) {
    Mat tg, gram, vert;
    lift(x, tg, gram, vert);
    const Mat hor = horizontal(tg, gram, vert);
    return Mat(linalg::symmetrized(hor.transpose() * gram * hor));
  };
  const double reach = 0.5 * std::min(1.0, t - t_floor);
  out.chart.lo = Vec::Constant(d, -0.5);
  out.chart.hi = Vec::Constant(d, 0.5);
  out.chart.lo(d - 1) = t - reach;
  out.chart.hi(d - 1) = std::min(t + reach, f.domain_end());
  out.chart.h = 1e-3 * std::min(1.0, t);
  out.origin = Vec::Zero(d);
  out.origin(d - 1) = t;
  Mat tg, gram, vert;
  lift(out.origin, tg, gram, vert);
  out.lifts = horizontal(tg, gram, vert);
  out.metric = gram;
  return out;
}

} // namespace snn
