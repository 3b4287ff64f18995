#include "snn/curvature.hpp"

#include <cmath>
#include <string>

namespace snn {

namespace {

// 1/4 metric([F_a,F_b],[F_c,F_d]) over frame bivectors; the curvature of a
// bi-invariant (possibly indefinite) metric evaluated on the frame F.
Mat bracket_gram(const LieAlgebra& g, const Mat& frame, const Mat& metric) {
  const int m = static_cast<int>(frame.cols());
  Mat b(g.dim(), m * (m - 1) / 2);
  int c = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) b.col(c++) = g.bracket(frame.col(i), frame.col(j));
  return 0.25 * b.transpose() * metric * b;
}

// The subalgebra spanned by the Q-orthonormal columns of s, as an abstract
// Lie algebra with identity form; `sign` = -1 gives the opposite algebra.
LieAlgebra subalgebra_of(const LieAlgebra& g, const Mat& s, double sign) {
  const int d = static_cast<int>(s.cols());
  std::vector<double> c(static_cast<std::size_t>(d * d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const Vec br = s.transpose() * g.q() * g.bracket(s.col(i), s.col(j));
      for (int k = 0; k < d; ++k) c[static_cast<std::size_t>((i * d + j) * d + k)] = sign * br(k);
    }
  return LieAlgebra::from_structure_constants(d, c, Mat::Identity(d, d), {}, 1e-9);
}

Mat q_orthonormal_basis(const LieAlgebra& g, const Subspace& sub) {
  return linalg::orthonormalize(sub.basis(), g.q());
}

void require_positive(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError(std::string(what) + ": t must be positive");
}

} // namespace

BivectorOp biinvariant_R(const LieAlgebra& g) {
  const Mat frame = linalg::orthonormalize(Mat::Identity(g.dim(), g.dim()), g.q());
  return {BivectorFrame(g.dim()), bracket_gram(g, frame, g.q()), "biinvariant"};
}

Mat scaled_frame(const LieAlgebra& g, const Subspace& sub, double t) {
  require_positive(t, "scaled_frame");
  const int n = g.dim();
  const Mat s = q_orthonormal_basis(g, sub);
  const Mat proj = s * s.transpose() * g.q();
  const Mat comp = linalg::orthonormalize(Mat::Identity(n, n) - proj, g.q(), 1e-8);
  if (comp.cols() + s.cols() != n) throw InvariantError("scaled_frame: complement has the wrong dimension");
  Mat frame(n, n);
  frame << comp, s / std::sqrt(t);
  return frame;
}

Mat scaled_metric(const LieAlgebra& g, const Subspace& sub, double t) {
  const Mat s = q_orthonormal_basis(g, sub);
  const Mat qs = g.q() * s;
  return g.q() + (t - 1.0) * qs * qs.transpose();
}

// ---------------------------------------------------------------------------

ATensor::ATensor(int m, int ambient_dim)
    : m_(m), n_(ambient_dim), v_(static_cast<std::size_t>(m * m), Vec::Zero(ambient_dim)) {}

void ATensor::set(int a, int b, const Vec& value) {
  v_[static_cast<std::size_t>(a * m_ + b)] = value;
  v_[static_cast<std::size_t>(b * m_ + a)] = -value;
}

double ATensor::antisymmetry_residual() const {
  double r = 0.0;
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) r = std::max(r, (at(a, b) + at(b, a)).cwiseAbs().maxCoeff());
  return r;
}

ATensor canonical_A(const LieAlgebra& g, const Mat& vertical, const Mat& metric, const Mat& horizontal) {
  const int m = static_cast<int>(horizontal.cols());
  ATensor a(m, g.dim());
  if (vertical.cols() == 0) return a;
  const Mat gv = vertical.transpose() * metric * vertical;
  const Eigen::FullPivLU<Mat> lu(gv);
  if (!lu.isInvertible()) throw PreconditionError("canonical_A: degenerate vertical metric");
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const Vec br = g.bracket(horizontal.col(i), horizontal.col(j));
      const Vec coeff = lu.solve(vertical.transpose() * metric * br);
      a.set(i, j, 0.5 * vertical * coeff);
    }
  return a;
}

ATensor canonical_A(const LieAlgebra& g, const Subspace& vertical, const Mat& metric, const Mat& horizontal) {
  return canonical_A(g, vertical.basis(), metric, horizontal);
}

SubmersionResult submersion_R(const SubmersionSpec& spec) {
  const int n = spec.ambient_R.dim();
  const Mat& gm = spec.metric;
  const Mat& v = spec.vertical;
  const Mat& h = spec.horizontal;
  const int m = static_cast<int>(h.cols());
  if (gm.rows() != n || gm.cols() != n || v.rows() != n || h.rows() != n || spec.A.ambient_dim() != n ||
      spec.A.size() != m) {
    throw PreconditionError("submersion_R: frame mismatch between ambient data");
  }
  if (spec.ambient_omega && spec.ambient_omega->dim() != n) {
    throw PreconditionError("submersion_R: ambient 4-form lives on a different frame");
  }
  if (m > 0 && linalg::max_abs(h.transpose() * gm * h - Mat::Identity(m, m)) > 1e-9) {
    throw PreconditionError("submersion_R: horizontal frame is not orthonormal");
  }
  if (v.cols() > 0 && m > 0 && linalg::max_abs(v.transpose() * gm * h) > 1e-9) {
    throw PreconditionError("submersion_R: horizontal frame is not orthogonal to the vertical space");
  }
  if (spec.ambient && v.cols() > 1) {
    const Mat gv = v.transpose() * gm * v;
    const Mat proj = v * gv.inverse() * v.transpose() * gm;
    double r = 0.0;
    for (int i = 0; i < v.cols(); ++i)
      for (int j = i + 1; j < v.cols(); ++j) {
        const Vec br = spec.ambient->bracket(v.col(i), v.col(j));
        r = std::max(r, (br - proj * br).cwiseAbs().maxCoeff());
      }
    if (r > 1e-9) throw PreconditionError("submersion_R: vertical space is not a subalgebra");
  }
  if (spec.A.antisymmetry_residual() > 1e-12) throw PreconditionError("submersion_R: A is not antisymmetric");

  const BivectorFrame frame(m);
  const Mat w = wedge_matrix(h);
  const Mat restricted = w.transpose() * spec.ambient_R.matrix() * w;

  Mat avals(n, frame.size());
  for (int c = 0; c < frame.size(); ++c) {
    const auto [i, j] = frame.pair(c);
    avals.col(c) = spec.A.at(i, j);
  }
  const BivectorOp alpha(frame, avals.transpose() * gm * avals, "alpha");
  const FourForm balpha = bianchi(alpha);
  const Mat r = restricted + 3.0 * alpha.matrix() - 3.0 * fourform_to_operator(balpha).matrix();

  FourForm omega = balpha * 3.0;
  if (spec.ambient_omega) omega = omega + pull_back(*spec.ambient_omega, h);
  return {BivectorOp(frame, r, "submersion"), alpha, omega};
}

SubmersionSpec homogeneous_submersion(const LieAlgebra& g, const BivectorOp& R_G, const Mat& frame,
                                      const Subspace& h, const Mat& quotient_frame,
                                      std::optional<FourForm> omega_G) {
  const int n = g.dim();
  if (frame.rows() != n || frame.cols() != n || R_G.dim() != n) {
    throw PreconditionError("homogeneous_submersion: frame does not match the algebra");
  }
  if (h.closure_residual(g) > 1e-9) throw PreconditionError("homogeneous_submersion: h is not a subalgebra");
  const Mat finv = frame.inverse();
  const Mat metric_g = finv.transpose() * finv;
  const ATensor a_g = canonical_A(g, h.basis(), metric_g, quotient_frame);

  SubmersionSpec spec;
  spec.ambient_R = R_G;
  spec.metric = Mat::Identity(n, n);
  spec.vertical = finv * h.basis();
  spec.horizontal = finv * quotient_frame;
  spec.A = ATensor(a_g.size(), n);
  for (int i = 0; i < a_g.size(); ++i)
    for (int j = i + 1; j < a_g.size(); ++j) spec.A.set(i, j, finv * a_g.at(i, j));
  spec.ambient_omega = std::move(omega_G);
  return spec;
}

// ---------------------------------------------------------------------------

ScaleUpResult subgroup_scaled_R(const LieAlgebra& g, const Subspace& sub, double t) {
  require_positive(t, "subgroup_scaled_R");
  if (sub.closure_residual(g) > 1e-10) throw PreconditionError("subgroup_scaled_R: not a subalgebra");
  const int n = g.dim();
  const Mat frame = scaled_frame(g, sub, t);
  const BivectorFrame bf(n);

  if (t == 1.0) {
    return {BivectorOp(bf, bracket_gram(g, frame, g.q()), "scaled_up"), FourForm::zero(bf),
            BivectorOp::zero(bf), t, frame};
  }

  const Mat s = q_orthonormal_basis(g, sub);
  const int d = static_cast<int>(s.cols());
  const double lambda = t / (1.0 - t);
  const LieAlgebra ambient = direct_sum({g, subalgebra_of(g, s, 1.0)}, {1.0, 1.0});

  Mat metric = Mat::Zero(n + d, n + d);
  metric.topLeftCorner(n, n) = g.q();
  metric.bottomRightCorner(d, d) = lambda * Mat::Identity(d, d);

  Mat vertical(n + d, d);
  vertical << s, Mat::Identity(d, d);

  Mat lifts(n + d, n);
  for (int c = 0; c < n; ++c) {
    const Vec x = frame.col(c);
    const Vec y = s.transpose() * g.q() * x;
    const Vec xn = x - s * y;
    lifts.col(c) << xn + t * (s * y), (t - 1.0) * y;
  }

  SubmersionSpec spec;
  spec.ambient = ambient;
  spec.ambient_R = BivectorOp(BivectorFrame(n + d), bracket_gram(ambient, Mat::Identity(n + d, n + d), metric),
                              "product_ambient");
  spec.metric = metric;
  spec.vertical = vertical;
  spec.horizontal = lifts;
  spec.A = canonical_A(ambient, vertical, metric, lifts);
  const SubmersionResult res = submersion_R(spec);
  return {res.R.with_origin("scaled_up"), res.omega, res.alpha, t, frame};
}

ScaleUpResult scaled_up_R(const LieAlgebra& g, const Subspace& a, double t) {
  require_positive(t, "scaled_up_R");
  if (!a.is_abelian(g)) throw PreconditionError("scaled_up_R: subalgebra is not abelian");
  return subgroup_scaled_R(g, a, t);
}

ScaleUpDecomposition scale_up_decomposition(const LieAlgebra& g, const Subspace& a, double t) {
  require_positive(t, "scale_up_decomposition");
  if (!a.is_abelian(g)) throw PreconditionError("scale_up_decomposition: subalgebra is not abelian");
  const int n = g.dim();
  const Mat frame = scaled_frame(g, a, t);
  const Mat s = q_orthonormal_basis(g, a);
  const Mat pa = s * s.transpose() * g.q();
  const Mat pn = Mat::Identity(n, n) - pa;
  const BivectorFrame bf(n);
  Mat nn_a(n, bf.size()), nn_n(n, bf.size()), mixed(n, bf.size());
  for (int c = 0; c < bf.size(); ++c) {
    const auto [i, j] = bf.pair(c);
    const Vec x = frame.col(i), y = frame.col(j);
    const Vec bn = g.bracket(pn * x, pn * y);
    nn_a.col(c) = pa * bn;
    nn_n.col(c) = pn * bn;
    mixed.col(c) = g.bracket(pn * x, pa * y) + g.bracket(pa * x, pn * y);
  }
  const Mat& q = g.q();
  const Mat sq = nn_n + t * mixed;
  ScaleUpDecomposition d;
  d.abelian_part = BivectorOp(bf, (4.0 - 3.0 * t) / 4.0 * nn_a.transpose() * q * nn_a, "scale_up_abelian_part");
  d.square_part = BivectorOp(bf, 0.25 * sq.transpose() * q * sq, "scale_up_square_part");
  d.displayed = BivectorOp(bf,
                           (4.0 - 3.0 * t) / 4.0 * nn_a.transpose() * q * nn_a + 0.25 * nn_n.transpose() * q * nn_n +
                               t * t * mixed.transpose() * q * mixed,
                           "scale_up_displayed");
  return d;
}

BivectorOp cheeger_R(const LieAlgebra& g, const Subspace& sub, double t) {
  if (!(t > 0.0 && t < 1.0)) throw PreconditionError("cheeger_R: needs 0 < t < 1");
  if (sub.closure_residual(g) > 1e-10) throw PreconditionError("cheeger_R: not a subalgebra");
  const int n = g.dim();
  const Mat frame = scaled_frame(g, sub, t);
  const Mat s = q_orthonormal_basis(g, sub);
  const int d = static_cast<int>(s.cols());
  const double mu = t / (1.0 - t);
  // Right-trivialized second factor: its bracket is the opposite one.
  const LieAlgebra ambient = direct_sum({g, subalgebra_of(g, s, -1.0)}, {1.0, 1.0});

  Mat metric = Mat::Zero(n + d, n + d);
  metric.topLeftCorner(n, n) = g.q();
  metric.bottomRightCorner(d, d) = mu * Mat::Identity(d, d);

  // (g, s) -> g s; the fibre through the identity is {(s^{-1}, s)}.
  Mat vertical(n + d, d);
  vertical << -s, Mat::Identity(d, d);

  // Horizontal lift of X: U + S W = X and mu W = S^T Q U.
  const Mat sys = Mat::Identity(n, n) + s * s.transpose() * g.q() / mu;
  const Eigen::PartialPivLU<Mat> lu(sys);
  Mat lifts(n + d, n);
  for (int c = 0; c < n; ++c) {
    const Vec u = lu.solve(frame.col(c));
    lifts.col(c) << u, s.transpose() * g.q() * u / mu;
  }

  SubmersionSpec spec;
  spec.ambient = ambient;
  spec.ambient_R = BivectorOp(BivectorFrame(n + d), bracket_gram(ambient, Mat::Identity(n + d, n + d), metric),
                              "product_ambient");
  spec.metric = metric;
  spec.vertical = vertical;
  spec.horizontal = lifts;
  spec.A = canonical_A(ambient, vertical, metric, lifts);
  return submersion_R(spec).R.with_origin("cheeger");
}

BivectorOp product_R(const BivectorOp& r1, const BivectorOp& r2) {
  const int n1 = r1.dim(), n2 = r2.dim();
  const BivectorFrame f(n1 + n2);
  Mat m = Mat::Zero(f.size(), f.size());
  const auto place = [&](const BivectorOp& r, int off) {
    const BivectorFrame& rf = r.frame();
    for (int a = 0; a < rf.size(); ++a) {
      const auto [i, j] = rf.pair(a);
      for (int b = 0; b < rf.size(); ++b) {
        const auto [k, l] = rf.pair(b);
        m(f.index(i + off, j + off), f.index(k + off, l + off)) = r(a, b);
      }
    }
  };
  place(r1, 0);
  place(r2, n1);
  return {f, m, "product"};
}

BivectorOp rotsym_R(const ProfileFunction::Values& v, int k) {
  if (k < 2) throw PreconditionError("rotsym_R: slice dimension must be >= 2");
  if (!(v.f > 0.0)) throw PreconditionError("rotsym_R: profile must be positive");
  const BivectorFrame f(k);
  Mat m = Mat::Zero(f.size(), f.size());
  const double radial = -v.d2f / v.f;
  const double angular = (1.0 - v.df * v.df) / (v.f * v.f);
  for (int a = 0; a < f.size(); ++a) m(a, a) = f.pair(a).first == 0 ? radial : angular;
  return {f, m, "rotsym"};
}

BivectorOp rotsym_R(const ProfileFunction& f, double t, int k) {
  if (!(t > 0.0)) throw PreconditionError("rotsym_R: t must be positive");
  return rotsym_R(f(t), k);
}

Mat orbit_metric_C(const Mat& L, int dim_m, const Mat& B, double f) {
  const int n = static_cast<int>(L.rows());
  const int dp = n - dim_m;
  if (B.rows() != dp || B.cols() != dp) throw PreconditionError("orbit_metric_C: B has the wrong size");
  const Mat id = Mat::Identity(dp, dp);
  const Mat shifted = id + f * f * B;
  const Eigen::FullPivLU<Mat> lu(shifted);
  if (!lu.isInvertible()) throw InvariantError("orbit_metric_C: Id + f^2 B is singular");
  Mat c = Mat::Identity(n, n);
  c.bottomRightCorner(dp, dp) = f * f * B * lu.inverse();
  return linalg::symmetrized(L * c);
}

Mat orbit_metric_C(const Mat& L, int dim_m, const Mat& B, const ProfileFunction& f, double t) {
  if (!(t > 0.0)) throw PreconditionError("orbit_metric_C: t must be positive");
  return orbit_metric_C(L, dim_m, B, f.f(t));
}

double scale_down_D(double b, double f) {
  const double x = f * f * b;
  if (!(x > 1.0)) throw PreconditionError("scale_down_D: requires f(t)^2 > 1/b");
  return x / (x - 1.0);
}

double scale_down_D(double b, const ProfileFunction& f, double t) { return scale_down_D(b, f.f(t)); }

double scale_up_E(double a, double b) {
  const double x = a * a * b;
  if (!(x > 1.0)) throw PreconditionError("scale_up_E: requires a^2 b > 1");
  return x / (x - 1.0);
}

Mat block_automorphism(const std::vector<int>& dims, const std::vector<double>& factors) {
  if (dims.size() != factors.size()) throw PreconditionError("block_automorphism: one factor per block");
  int n = 0;
  for (int d : dims) n += d;
  Mat e = Mat::Zero(n, n);
  int off = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    e.block(off, off, dims[i], dims[i]) = factors[i] * Mat::Identity(dims[i], dims[i]);
    off += dims[i];
  }
  return e;
}

} // namespace snn
