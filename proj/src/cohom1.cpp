#include "snn/cohom1.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace snn {

namespace {

// Real 2d x 2d form of a complex d x d block acting on (Re v, Im v).
Mat realify(const CMat& m) {
  const auto d = m.rows();
  Mat r(2 * d, 2 * d);
  r << m.real(), -m.imag(), m.imag(), m.real();
  return r;
}

CMat block(const CMat& m, const std::vector<int>& idx) {
  const int d = static_cast<int>(idx.size());
  CMat b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return b;
}

// Null space (in g coordinates) of the entries (a, b) of the matrix realization.
Mat vanishing_entries(const LieAlgebra& g, const std::vector<std::pair<int, int>>& entries) {
  Mat c(2 * static_cast<Eigen::Index>(entries.size()), g.dim());
  for (int i = 0; i < g.dim(); ++i) {
    const CMat& mi = g.matrices()[static_cast<std::size_t>(i)];
    for (std::size_t e = 0; e < entries.size(); ++e) {
      c(static_cast<Eigen::Index>(2 * e), i) = mi(entries[e].first, entries[e].second).real();
      c(static_cast<Eigen::Index>(2 * e + 1), i) = mi(entries[e].first, entries[e].second).imag();
    }
  }
  return linalg::null_space(c);
}

// Triple from a matrix algebra: K preserves the coordinate block `s`, H acts
// trivially on it, and the slice is that block (realified when complex).
GroupTriple block_triple(const std::string& name, const LieAlgebra& g, const std::vector<int>& s, bool complex_slice) {
  const int dim = static_cast<int>(g.matrices().front().rows());
  std::vector<bool> in_s(static_cast<std::size_t>(dim), false);
  for (int i : s) in_s[static_cast<std::size_t>(i)] = true;
  std::vector<std::pair<int, int>> off, touching;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const bool sa = in_s[static_cast<std::size_t>(a)], sb = in_s[static_cast<std::size_t>(b)];
      if (sa != sb) off.emplace_back(a, b);
      if (sa || sb) touching.emplace_back(a, b);
    }
  TripleData d;
  d.name = name;
  d.g = g;
  d.k = vanishing_entries(g, off);
  d.h = vanishing_entries(g, touching);
  for (int c = 0; c < d.k.cols(); ++c) {
    const CMat b = block(g.to_matrix(d.k.col(c)), s);
    d.slice_generators.push_back(complex_slice ? realify(b) : Mat(b.real()));
  }
  const int vdim = complex_slice ? 2 * static_cast<int>(s.size()) : static_cast<int>(s.size());
  d.v0 = Vec::Unit(vdim, 0);
  return make_triple(d);
}

int parse_rank(const std::string& name, const std::string& prefix) {
  const std::string rest = name.substr(prefix.size());
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(rest, &used);
  } catch (const std::exception&) {
    throw PreconditionError("make_triple: cannot parse rank in '" + name + "'");
  }
  if (used != rest.size() || n < 2) throw PreconditionError("make_triple: '" + name + "' needs n >= 2");
  return n;
}

// L-orthonormal basis of the L-complement of `sub` inside span(within).
Mat l_complement(const Mat& sub, const Mat& within, const Mat& L) {
  Mat w = within;
  if (sub.cols() > 0) {
    const Mat s = linalg::orthonormalize(sub, L);
    w -= s * (s.transpose() * L * within);
  }
  return linalg::orthonormalize(w, L, 1e-8);
}

Mat slice_metric_gv(const Vec& v0, double f, double t) {
  const int s = static_cast<int>(v0.size());
  const double h = f * f / (t * t);
  return h * Mat::Identity(s, s) + (1.0 - h) * v0 * v0.transpose();
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat m = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

} // namespace

Mat GroupTriple::rho(const Vec& z) const {
  const Vec c = k.basis().transpose() * g.q() * z;
  if ((z - k.basis() * c).cwiseAbs().maxCoeff() > 1e-9) throw PreconditionError("rho: vector is not in k");
  Mat r = Mat::Zero(slice_dim, slice_dim);
  for (int i = 0; i < c.size(); ++i) r += c(i) * slice_generators[static_cast<std::size_t>(i)];
  return r;
}

GroupTriple make_triple(const TripleData& d) {
  const LieAlgebra& g = d.g;
  if (d.k.rows() != g.dim() || (d.h.cols() > 0 && d.h.rows() != g.dim())) {
    throw InvariantError("make_triple: k and h must be given in g coordinates");
  }
  if (static_cast<Eigen::Index>(d.slice_generators.size()) != d.k.cols()) {
    throw InvariantError("make_triple: one slice generator per column of k");
  }
  GroupTriple tr;
  tr.name = d.name;
  tr.g = g;
  tr.k = Subspace(g, d.k);
  tr.h = Subspace(g, d.h.cols() > 0 ? d.h : Mat(g.dim(), 0));
  tr.slice_dim = static_cast<int>(d.v0.size());
  if (tr.k.dim() != d.k.cols()) throw InvariantError("make_triple: k columns are dependent");
  if (std::abs(d.v0.norm() - 1.0) > 1e-12) throw InvariantError("make_triple: v0 must be a unit vector");

  // Generators for the orthonormalized basis of k.
  const Mat coeff = d.k.colPivHouseholderQr().solve(tr.k.basis());
  for (int j = 0; j < tr.k.dim(); ++j) {
    Mat r = Mat::Zero(tr.slice_dim, tr.slice_dim);
    for (int i = 0; i < d.k.cols(); ++i) {
      const Mat& gi = d.slice_generators[static_cast<std::size_t>(i)];
      if (gi.rows() != tr.slice_dim || gi.cols() != tr.slice_dim) throw InvariantError("make_triple: slice generator size");
      r += coeff(i, j) * gi;
    }
    tr.slice_generators.push_back(r);
  }
  tr.v0 = d.v0;

  const Mat eye = Mat::Identity(g.dim(), g.dim());
  tr.p = Subspace(g, l_complement(tr.h.basis(), tr.k.basis(), g.q()));
  tr.m = Subspace(g, l_complement(tr.k.basis(), eye, g.q()));

  if (tr.k.closure_residual(g) > 1e-10) throw InvariantError("make_triple: k is not a subalgebra");
  if (tr.h.closure_residual(g) > 1e-10) throw InvariantError("make_triple: h is not a subalgebra");
  if (tr.h.dim() > 0 && linalg::max_abs(tr.h.basis() - tr.k.projector() * tr.h.basis()) > 1e-10) {
    throw InvariantError("make_triple: h is not contained in k");
  }
  if (tr.p.dim() != tr.k.dim() - tr.h.dim() || tr.m.dim() != g.dim() - tr.k.dim()) {
    throw InvariantError("make_triple: complements have the wrong dimension");
  }
  for (const Mat& r : tr.slice_generators) {
    if (linalg::max_abs(r + r.transpose()) > 1e-12) throw InvariantError("make_triple: slice action is not orthogonal");
  }
  for (int i = 0; i < tr.k.dim(); ++i)
    for (int j = 0; j < tr.k.dim(); ++j) {
      const Mat lhs = tr.rho(g.bracket(tr.k.basis().col(i), tr.k.basis().col(j)));
      const Mat& a = tr.slice_generators[static_cast<std::size_t>(i)];
      const Mat& b = tr.slice_generators[static_cast<std::size_t>(j)];
      if (linalg::max_abs(lhs - (a * b - b * a)) > 1e-10) {
        throw InvariantError("make_triple: slice action is not a representation");
      }
    }
  for (int i = 0; i < tr.h.dim(); ++i) {
    if ((tr.rho(tr.h.basis().col(i)) * tr.v0).cwiseAbs().maxCoeff() > 1e-10) {
      throw InvariantError("make_triple: h does not fix v0");
    }
  }
  Mat speeds(tr.slice_dim, tr.p.dim());
  for (int i = 0; i < tr.p.dim(); ++i) speeds.col(i) = tr.rho(tr.p.basis().col(i)) * tr.v0;
  if (linalg::rank(speeds) != tr.slice_dim - 1) {
    throw InvariantError("make_triple: p is not transitive on the unit sphere of V");
  }
  return tr;
}

GroupTriple make_triple(const std::string& name) {
  if (name.rfind("CP_", 0) == 0) {
    const int n = parse_rank(name, "CP_");
    return block_triple(name, make_algebra(Family::U, n), {n - 1}, true);
  }
  if (name.rfind("HP_", 0) == 0) {
    const int n = parse_rank(name, "HP_");
    return block_triple(name, make_algebra(Family::SP, n), {n - 1, 2 * n - 1}, true);
  }
  if (name == "stiefel") {
    return block_triple(name, make_algebra(Family::SO, 4), {2, 3}, false);
  }
  if (name == "toy") {
    TripleData d;
    d.name = "toy";
    d.g = make_algebra(Family::Abelian, 2);
    d.k = Vec::Unit(2, 0);
    d.h = Mat(2, 0);
    Mat j(2, 2);
    j << 0, -1, 1, 0;
    d.slice_generators = {j};
    d.v0 = Vec::Unit(2, 0);
    return make_triple(d);
  }
  throw PreconditionError("make_triple: unknown triple '" + name + "'");
}

Mat invariant_metric(const GroupTriple& tr, double p_scale) {
  if (!(p_scale > 0.0)) throw PreconditionError("invariant_metric: p-scale must be positive");
  return scaled_metric(tr.g, tr.p, p_scale);
}

double adk_residual(const GroupTriple& tr, const Mat& L) { return tr.g.ad_invariance_residual(L, tr.k.basis()); }

SliceMetric compute_slice_b(const GroupTriple& tr, const Mat& L) {
  if (linalg::min_eigenvalue(linalg::symmetrized(L)) <= 0.0) {
    throw PreconditionError("compute_slice_b: L is not positive-definite");
  }
  SliceMetric sm;
  sm.basis = l_complement(tr.h.basis(), tr.k.basis(), L);
  const int dp = static_cast<int>(sm.basis.cols());
  Mat speeds(tr.slice_dim, dp);
  for (int i = 0; i < dp; ++i) speeds.col(i) = tr.rho(sm.basis.col(i)) * tr.v0;
  sm.B = speeds.transpose() * speeds;
  if (dp == 0 || linalg::min_eigenvalue(sm.B) <= 1e-12) {
    throw PreconditionError("compute_slice_b: degenerate slice, some X in p does not move v0");
  }
  sm.b = sm.B.trace() / dp;
  sm.schur_residual = linalg::max_abs(sm.B - sm.b * Mat::Identity(dp, dp));
  sm.scalar = sm.schur_residual <= 1e-10;
  return sm;
}

SliceMetric compute_slice_b(const GroupTriple& tr, double p_scale) {
  return compute_slice_b(tr, invariant_metric(tr, p_scale));
}

VHSplit vh_split(const GroupTriple& tr, const Mat& L, const ProfileFunction& f, double t) {
  if (!(t > 0.0)) throw PreconditionError("vh_split: t must be positive");
  if (adk_residual(tr, L) > 1e-10) throw PreconditionError("vh_split: L is not Ad_K-invariant");
  const int n = tr.g.dim(), s = tr.slice_dim;
  const double fv = f.f(t);
  const SliceMetric sm = compute_slice_b(tr, L);
  const Mat m = l_complement(tr.k.basis(), Mat::Identity(n, n), L);
  const Mat h = tr.h.dim() > 0 ? linalg::orthonormalize(tr.h.basis(), L) : Mat(n, 0);
  const int dp = static_cast<int>(sm.basis.cols());

  VHSplit vh;
  vh.metric = block_diag(L, slice_metric_gv(tr.v0, fv, t));
  vh.vertical = Mat::Zero(n + s, h.cols() + dp);
  for (int i = 0; i < h.cols(); ++i) vh.vertical.col(i).head(n) = h.col(i);
  for (int j = 0; j < dp; ++j) {
    const Vec y = sm.basis.col(j);
    vh.vertical.col(h.cols() + j) << -y, tr.rho(y) * (t * tr.v0);
  }
  vh.horizontal = Mat::Zero(n + s, m.cols() + dp + 1);
  for (int i = 0; i < m.cols(); ++i) vh.horizontal.col(i).head(n) = m.col(i);
  for (int j = 0; j < dp; ++j) {
    const Vec y = sm.basis.col(j);
    vh.horizontal.col(m.cols() + j) << fv * fv * (sm.basis * sm.B.col(j)), tr.rho(y) * (t * tr.v0);
  }
  vh.horizontal.col(m.cols() + dp).tail(s) = tr.v0;
  vh.orthogonality_residual = linalg::max_abs(vh.vertical.transpose() * vh.metric * vh.horizontal);
  return vh;
}

HomogeneousQuotient homogeneous_quotient(const GroupTriple& tr, double p_scale) {
  HomogeneousQuotient hq;
  hq.p_scale = p_scale;
  hq.group = subgroup_scaled_R(tr.g, tr.p, p_scale);
  hq.group_frame = hq.group.frame;
  hq.quotient_frame.resize(tr.g.dim(), tr.m.dim() + tr.p.dim());
  hq.quotient_frame << tr.m.basis(), tr.p.basis() / std::sqrt(p_scale);
  hq.quotient = submersion_R(
      homogeneous_submersion(tr.g, hq.group.R, hq.group_frame, tr.h, hq.quotient_frame, hq.group.omega));
  return hq;
}

RoundMetric make_round_L(const GroupTriple& tr, std::uint64_t seed, int samples) {
  const int dm = tr.m.dim(), dp = tr.p.dim();
  const int d = dm + dp;
  if (d < 2) throw PreconditionError("make_round_L: principal orbit has dimension < 2");
  const auto plane_gap = [&](double s) {
    const BivectorOp r = homogeneous_quotient(tr, s).quotient.R;
    return sectional_curvature(r, Vec::Unit(d, 0), Vec::Unit(d, 1)) -
           sectional_curvature(r, Vec::Unit(d, 0), Vec::Unit(d, dm));
  };

  std::vector<double> candidates;
  if (dm >= 2 && dp >= 1) {
    const int grid = 80;
    double prev_s = 1e-3, prev = plane_gap(prev_s);
    for (int i = 1; i <= grid; ++i) {
      const double s = 1e-3 * std::pow(4.0 / 1e-3, static_cast<double>(i) / grid);
      const double cur = plane_gap(s);
      if (prev == 0.0) candidates.push_back(prev_s);
      if ((prev < 0.0) != (cur < 0.0) && cur != 0.0) {
        double lo = prev_s, hi = s, flo = prev;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = plane_gap(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        candidates.push_back(0.5 * (lo + hi));
      }
      prev_s = s;
      prev = cur;
    }
  } else {
    candidates.push_back(1.0);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double s : candidates) {
    const BivectorOp r = homogeneous_quotient(tr, s).quotient.R;
    RoundMetric rm;
    rm.p_scale = s;
    rm.samples = samples;
    std::vector<double> secs;
    for (int i = 0; i < samples; ++i) {
      Vec x(d), y(d);
      for (int j = 0; j < d; ++j) x(j) = nd(rng);
      for (int j = 0; j < d; ++j) y(j) = nd(rng);
      secs.push_back(sectional_curvature(r, x, y));
    }
    double mean = 0.0;
    for (double v : secs) mean += v;
    mean /= samples;
    double var = 0.0;
    for (double v : secs) var += (v - mean) * (v - mean);
    var /= samples;
    const auto [lo, hi] = std::minmax_element(secs.begin(), secs.end());
    rm.mean_sec = mean;
    rm.variance = var;
    rm.spread = *hi - *lo;
    if (var <= 1e-9 * std::abs(mean) + 1e-24) return rm;
  }
  throw InvariantError("make_round_L: no p-scale makes the principal orbit constant-curvature for '" + tr.name + "'");
}

DiskBundleResult disk_bundle_R(const GroupTriple& tr, const HomogeneousQuotient& boundary, const FourForm& omega_GH,
                               const ProfileFunction& f, double t, const DiskBundleOptions& opts) {
  const int n = tr.g.dim(), s = tr.slice_dim;
  const int dq = static_cast<int>(boundary.quotient_frame.cols());
  if (omega_GH.dim() != dq) throw PreconditionError("disk_bundle_R: boundary 4-form lives on a different frame");
  const Mat L = invariant_metric(tr, boundary.p_scale);
  const VHSplit vh = vh_split(tr, L, f, t);
  const ProfileFunction::Values fv = f(t);
  const Vec p0 = t * tr.v0;

  // Horizontal orthonormalization, carried along to the first-order jets
  // (value c, derivative C) of the V-components of the extensions.
  const int nh = static_cast<int>(vh.horizontal.cols());
  const Eigen::LLT<Mat> llt(vh.horizontal.transpose() * vh.metric * vh.horizontal);
  if (llt.info() != Eigen::Success) throw InvariantError("disk_bundle_R: degenerate horizontal frame");
  const Mat T = llt.matrixL().transpose().solve(Mat::Identity(nh, nh));
  const Mat H = vh.horizontal * T;

  const SliceMetric sm = compute_slice_b(tr, L);
  const int dm = nh - 1 - static_cast<int>(sm.basis.cols());
  std::vector<Mat> raw_jets(static_cast<std::size_t>(nh), Mat::Zero(s, s));
  for (int j = 0; j < sm.basis.cols(); ++j) raw_jets[static_cast<std::size_t>(dm + j)] = tr.rho(sm.basis.col(j));
  raw_jets.back() = (Mat::Identity(s, s) - tr.v0 * tr.v0.transpose()) / t;
  std::vector<Mat> jets(static_cast<std::size_t>(nh), Mat::Zero(s, s));
  for (int b = 0; b < nh; ++b)
    for (int a = 0; a < nh; ++a) jets[static_cast<std::size_t>(b)] += T(a, b) * raw_jets[static_cast<std::size_t>(a)];
  if (opts.extension_perturbation != 0) {
    std::mt19937_64 rng(opts.extension_perturbation);
    std::normal_distribution<double> nd;
    for (Mat& c : jets)
      for (int i = 0; i < s * s; ++i) c(i) += nd(rng);
  }

  // A via Killing vertical fields U = (w, rho(-w) v):
  // <A(X,Y),U> = 1/2 <U,[X,Y]> - 1/2 X<U,Y> + 1/2 Y<U,X>.
  const Mat& U = vh.vertical;
  const Mat gv = slice_metric_gv(tr.v0, fv.f, t);
  const double hh = fv.f * fv.f / (t * t);
  const double dh = 2.0 * fv.f * fv.df / (t * t) - 2.0 * fv.f * fv.f / (t * t * t);
  const Eigen::LDLT<Mat> vgram(U.transpose() * vh.metric * U);
  ATensor a_amb(nh, n + s);
  for (int i = 0; i < nh; ++i)
    for (int j = i + 1; j < nh; ++j) {
      const Vec x1 = H.col(i).head(n), y1 = H.col(j).head(n);
      const Vec cx = H.col(i).tail(s), cy = H.col(j).tail(s);
      const Mat& Cx = jets[static_cast<std::size_t>(i)];
      const Mat& Cy = jets[static_cast<std::size_t>(j)];
      const Vec xy = tr.g.bracket(x1, y1);
      Vec rhs(U.cols());
      for (int u = 0; u < U.cols(); ++u) {
        const Vec w = U.col(u).head(n);
        const Mat rz = tr.rho(-w);
        const Vec zp = rz * p0;
        const double bracket_term = w.dot(L * xy) + zp.dot(gv * (Cy * cx - Cx * cy));
        const auto dphi = [&](const Vec& along, const Vec& c_other, const Mat& C_other) {
          return dh * tr.v0.dot(along) * zp.dot(c_other) + hh * (rz * along).dot(c_other) + hh * zp.dot(C_other * along);
        };
        rhs(u) = 0.5 * bracket_term - 0.5 * dphi(cx, cy, Cy) + 0.5 * dphi(cy, cx, Cx);
      }
      a_amb.set(i, j, U * vgram.solve(rhs));
    }

  // Ambient frame: L-orthonormal frame of g, then d/dt and unit angular vectors.
  const Mat w = linalg::null_space(tr.v0.transpose());
  Mat fvf(s, s);
  fvf << tr.v0, w * (t / fv.f);
  const Mat famb = block_diag(boundary.group_frame, fvf);
  const Mat finv = famb.inverse();

  SubmersionSpec spec;
  spec.ambient_R = product_R(boundary.group.R, rotsym_R(fv, s));
  spec.metric = Mat::Identity(n + s, n + s);
  spec.vertical = finv * U;
  spec.horizontal = finv * H;
  spec.A = ATensor(nh, n + s);
  for (int i = 0; i < nh; ++i)
    for (int j = i + 1; j < nh; ++j) spec.A.set(i, j, finv * a_amb.at(i, j));
  const SubmersionResult res = submersion_R(spec);

  DiskBundleResult out;
  out.t = t;
  out.R = res.R.with_origin("disk_bundle");
  out.alpha = res.alpha;
  out.A = spec.A;
  out.horizontal = H;
  out.metric = vh.metric;
  out.orthogonality_residual = vh.orthogonality_residual;
  out.P = boundary.quotient_frame.transpose() * L * H.topRows(n);
  const FourForm b_alpha_gh = bianchi(boundary.quotient.alpha);
  out.omega = pull_back(omega_GH, out.P) + bianchi(res.alpha) * 3.0 - pull_back(b_alpha_gh, out.P) * 3.0;
  const BivectorOp modified = out.R + fourform_to_operator(out.omega);
  out.margin = modified.min_eigenvalue();

  const BivectorOp base = boundary.quotient.R + fourform_to_operator(omega_GH);
  const Mat wp = wedge_matrix(out.P);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  out.chain_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.chain_samples; ++k) {
    Vec beta(out.R.size());
    for (int i = 0; i < beta.size(); ++i) beta(i) = nd(rng);
    beta.normalize();
    const Vec b1 = wp * beta;
    out.chain_slack = std::min(out.chain_slack, modified.quadratic(beta) - base.quadratic(b1));
  }
  if (opts.chain_samples <= 0) out.chain_slack = 0.0;
  return out;
}

Mat principal_orbit_metric(const GroupTriple& tr, double p_scale, const ProfileFunction& f, double t) {
  const int n = tr.g.dim(), s = tr.slice_dim;
  const VHSplit vh = vh_split(tr, invariant_metric(tr, p_scale), f, t);
  const Mat& U = vh.vertical;
  const Eigen::LDLT<Mat> vgram(U.transpose() * vh.metric * U);
  Mat x = Mat::Zero(n + s, tr.m.dim() + tr.p.dim());
  x.topRows(n) << tr.m.basis(), tr.p.basis();
  const Mat hor = x - U * vgram.solve(U.transpose() * vh.metric * x);
  return linalg::symmetrized(hor.transpose() * vh.metric * hor);
}

GZHalfReport assemble_gz_half(const GroupTriple& tr, double a, const GZHalfOptions& opts) {
  if (tr.p.dim() != 1) throw PreconditionError("assemble_gz_half: needs dim p = 1");
  if (!tr.p.is_abelian(tr.g)) throw InvariantError("assemble_gz_half: p is not abelian");
  GZHalfReport rep;
  const SliceMetric sm = compute_slice_b(tr, 1.0);
  rep.b = sm.b;
  rep.a = a;
  if (!(a * a * sm.b >= 4.0 * (1.0 - 1e-12))) throw PreconditionError("assemble_gz_half: needs a >= 2/sqrt(b)");
  rep.e = scale_up_E(a, sm.b);

  const Mat lp = invariant_metric(tr, rep.e);
  rep.adk_residual = adk_residual(tr, lp);
  if (rep.adk_residual > 1e-12) rep.failures.push_back("L' is not Ad_K-invariant");

  const ScaleUpResult su = scaled_up_R(tr.g, tr.p, rep.e);
  CertifyOptions co = opts.cert;
  co.warm_start = su.omega;
  rep.group_cert = certify(su.R, co);
  std::string why;
  rep.group_cert_valid = validate_certificate(su.R, rep.group_cert, &why);
  if (!rep.group_cert_valid) rep.failures.push_back("group certificate invalid: " + why);
  if (rep.group_cert.verdict != Verdict::Feasible) rep.failures.push_back("(G, L') not certified");

  const double t0 = opts.t0_factor * a;
  const ProfileFunction prof = make_profile(a, t0, t0 + opts.tail);
  const int dm = tr.m.dim(), dp = tr.p.dim();
  const Mat id = Mat::Identity(dm + dp, dm + dp);
  Mat lmp = id;
  lmp.bottomRightCorner(dp, dp) *= rep.e;
  const Mat bq = compute_slice_b(tr, Mat(tr.g.q())).B;  // Q-orthonormal p basis equals tr.p up to sign
  for (int i = 0; i < opts.plateau_samples; ++i) {
    const double t = opts.plateau_samples > 1 ? t0 + opts.tail * i / (opts.plateau_samples - 1) : t0;
    rep.plateau_ts.push_back(t);
    rep.boundary_metric_deviation =
        std::max(rep.boundary_metric_deviation, linalg::max_abs(principal_orbit_metric(tr, rep.e, prof, t) - id));
    rep.boundary_formula_deviation =
        std::max(rep.boundary_formula_deviation, linalg::max_abs(orbit_metric_C(lmp, dm, bq / rep.e, prof, t) - id));
  }
  if (rep.boundary_metric_deviation > 1e-10 || rep.boundary_formula_deviation > 1e-10) {
    rep.failures.push_back("plateau orbit metric differs from Q on m + p");
  }
  rep.passed = rep.failures.empty();
  return rep;
}

CheegerHalfReport assemble_cheeger_half(const GroupTriple& tr, const CheegerHalfOptions& opts) {
  CheegerHalfReport rep;
  rep.round = make_round_L(tr, opts.seed);
  const double s = rep.round.p_scale;
  const SliceMetric sm = compute_slice_b(tr, s);
  rep.b = sm.b;
  if (!sm.scalar) {
    rep.failures.push_back("slice metric is not a multiple of L on p");
    return rep;
  }

  std::optional<HomogeneousQuotient> chosen;
  FourForm omega_gh;
  for (double c : opts.ladder) {
    LadderRung rung;
    rung.a = c / std::sqrt(rep.b);
    rung.e = scale_up_E(rung.a, rep.b);
    HomogeneousQuotient hq = homogeneous_quotient(tr, s * rung.e);
    CertifyOptions co = opts.cert;
    co.warm_start = hq.quotient.omega;
    rung.cert = certify(hq.quotient.R, co);
    rung.valid = validate_certificate(hq.quotient.R, rung.cert);
    rung.strict = rung.valid && rung.cert.verdict == Verdict::Feasible && rung.cert.margin > rung.cert.eps;
    if (rung.strict && !chosen) {
      chosen = std::move(hq);
      omega_gh = rung.cert.omega;
      rep.a = rung.a;
    }
    rep.ladder.push_back(std::move(rung));
  }
  if (!chosen) {
    rep.failures.push_back("no rung of the ladder certifies strictly positive boundary curvature");
    return rep;
  }

  rep.t0 = opts.t0_factor * rep.a;
  const ProfileFunction prof = make_profile(rep.a, rep.t0, rep.t0 + opts.tail);
  std::vector<double> ts;
  for (int i = 0; i < opts.geometric_points; ++i) {
    const double x = opts.geometric_points > 1 ? static_cast<double>(i) / (opts.geometric_points - 1) : 1.0;
    ts.push_back(rep.t0 * std::pow(opts.t_min_fraction, 1.0 - x));
  }
  for (int i = 1; i <= opts.plateau_points; ++i) ts.push_back(rep.t0 + opts.tail * i / opts.plateau_points);

  rep.min_margin = std::numeric_limits<double>::infinity();
  std::optional<Mat> plateau_ref;
  const int dm = tr.m.dim(), dp = tr.p.dim();
  Mat lmp = Mat::Identity(dm + dp, dm + dp);
  lmp.bottomRightCorner(dp, dp) *= s;
  DiskBundleOptions dopts;
  dopts.seed = opts.seed;
  for (double t : ts) {
    const DiskBundleResult d = disk_bundle_R(tr, *chosen, omega_gh, prof, t, dopts);
    rep.sweep.push_back({t, d.margin, d.chain_slack, d.orthogonality_residual});
    rep.min_margin = std::min(rep.min_margin, d.margin);
    if (t >= rep.t0) {
      const Mat op = (d.R + fourform_to_operator(d.omega)).matrix();
      if (!plateau_ref) plateau_ref = op;
      rep.plateau_deviation = std::max(rep.plateau_deviation, linalg::max_abs(op - *plateau_ref));
      rep.orbit_metric_deviation = std::max(
          rep.orbit_metric_deviation, linalg::max_abs(principal_orbit_metric(tr, chosen->p_scale, prof, t) - lmp));
    }
    if (d.chain_slack < -1e-8) rep.failures.push_back("estimate chain violated at t = " + std::to_string(t));
    if (d.orthogonality_residual > 1e-10) rep.failures.push_back("vertical/horizontal not orthogonal");
  }
  if (rep.min_margin < -1e-8) rep.failures.push_back("modified operator not PSD along the sweep");
  if (rep.plateau_deviation > 1e-9) rep.failures.push_back("plateau operators depend on t");
  if (rep.orbit_metric_deviation > 1e-9) rep.failures.push_back("plateau orbit metric is not the round one");
  rep.passed = rep.failures.empty();
  return rep;
}

} // namespace snn
