#include "snn/lie.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace snn {

using cd = std::complex<double>;

Family parse_family(const std::string& name) {
  if (name == "so") return Family::SO;
  if (name == "su") return Family::SU;
  if (name == "sp") return Family::SP;
  if (name == "u") return Family::U;
  if (name == "abelian") return Family::Abelian;
  if (name == "direct_sum") return Family::DirectSum;
  throw PreconditionError("unknown Lie algebra family '" + name + "'");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::SO: return "so";
    case Family::SU: return "su";
    case Family::SP: return "sp";
    case Family::U: return "u";
    case Family::Abelian: return "abelian";
    case Family::DirectSum: return "direct_sum";
  }
  return "?";
}

// ---------------------------------------------------------------------------

void LieAlgebra::build_ad(const std::vector<double>& c) {
  ad_.assign(static_cast<std::size_t>(n_), Mat::Zero(n_, n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        ad_[static_cast<std::size_t>(i)](k, j) = c[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
}

LieAlgebra LieAlgebra::from_structure_constants(int n, const std::vector<double>& c, const Mat& q,
                                                std::vector<std::string> labels, double tol) {
  if (n < 0 || c.size() != static_cast<std::size_t>(n * n * n)) {
    throw PreconditionError("structure constants must have n^3 entries");
  }
  if (q.rows() != n || q.cols() != n) throw PreconditionError("Q must be n x n");
  if (n > 0 && linalg::min_eigenvalue(linalg::symmetrized(q)) <= 0.0) {
    throw PreconditionError("Q must be positive-definite");
  }
  LieAlgebra g;
  g.n_ = n;
  g.name_ = "explicit";
  g.labels_ = std::move(labels);
  g.q_ = linalg::symmetrized(q);
  g.build_ad(c);
  g.validate(tol);
  return g;
}

LieAlgebra LieAlgebra::from_matrices(const std::vector<CMat>& generators, double scale, std::string name) {
  if (!(scale > 0.0)) throw PreconditionError("Lie algebra scale must be positive");
  const auto form = [scale](const CMat& a, const CMat& b) { return -0.5 * scale * (a * b).trace().real(); };
  const int m = static_cast<int>(generators.size());
  Mat gram(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) gram(a, b) = form(generators[a], generators[b]);
  const Mat coeff = linalg::orthonormalize(Mat::Identity(m, m), gram, 1e-12);
  const int n = static_cast<int>(coeff.cols());

  std::vector<CMat> basis;
  for (int k = 0; k < n; ++k) {
    CMat e = CMat::Zero(generators[0].rows(), generators[0].cols());
    for (int a = 0; a < m; ++a) e += coeff(a, k) * generators[a];
    basis.push_back(e);
  }

  std::vector<double> c(static_cast<std::size_t>(n * n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const CMat br = basis[i] * basis[j] - basis[j] * basis[i];
      CMat rest = br;
      for (int k = 0; k < n; ++k) {
        const double ck = form(br, basis[k]);
        c[static_cast<std::size_t>((i * n + j) * n + k)] = ck;
        rest -= ck * basis[k];
      }
      if (rest.cwiseAbs().maxCoeff() > 1e-10) {
        throw InvariantError("generators of " + name + " are not closed under the commutator");
      }
    }
  }

  LieAlgebra g;
  g.n_ = n;
  g.name_ = std::move(name);
  g.q_ = Mat::Identity(n, n);
  g.build_ad(c);
  g.matrices_ = std::move(basis);
  for (int k = 0; k < n; ++k) g.labels_.push_back("e" + std::to_string(k + 1));
  g.validate();
  return g;
}

Mat LieAlgebra::ad_of(const Vec& x) const {
  Mat out = Mat::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    if (x(i) != 0.0) out += x(i) * ad_[static_cast<std::size_t>(i)];
  return out;
}

double LieAlgebra::antisymmetry_residual() const {
  double r = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) r = std::max(r, std::abs(structure(i, j, k) + structure(j, i, k)));
  return r;
}

double LieAlgebra::jacobi_residual() const {
  double r = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      Mat lhs = ad(i) * ad(j) - ad(j) * ad(i);
      for (int k = 0; k < n_; ++k) lhs -= structure(i, j, k) * ad(k);
      r = std::max(r, linalg::max_abs(lhs));
    }
  }
  return r;
}

double LieAlgebra::ad_invariance_residual(const Mat& form) const {
  return ad_invariance_residual(form, Mat::Identity(n_, n_));
}

double LieAlgebra::ad_invariance_residual(const Mat& form, const Mat& k) const {
  double r = 0.0;
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    const Mat a = ad_of(k.col(c));
    r = std::max(r, linalg::max_abs(a.transpose() * form + form * a));
  }
  return r;
}

void LieAlgebra::validate(double tol) const {
  if (double r = antisymmetry_residual(); r > tol)
    throw InvariantError("structure constants not antisymmetric (residual " + std::to_string(r) + ")");
  if (double r = jacobi_residual(); r > tol)
    throw InvariantError("Jacobi identity fails (residual " + std::to_string(r) + ")");
  if (double r = ad_invariance_residual(); r > tol)
    throw InvariantError("Q is not ad-invariant (residual " + std::to_string(r) + ")");
}

Mat LieAlgebra::center(double tol) const {
  Mat stacked(n_ * n_, n_);
  for (int i = 0; i < n_; ++i) stacked.middleRows(i * n_, n_) = ad(i);
  const Mat ns = linalg::null_space(stacked, tol);
  return linalg::orthonormalize(ns, q_);
}

Vec LieAlgebra::coords(const CMat& m, double tol) const {
  if (matrices_.empty()) throw PreconditionError("Lie algebra has no matrix realization");
  const auto sz = m.size();
  Mat a(2 * sz, n_);
  Vec rhs(2 * sz);
  for (int k = 0; k < n_; ++k) {
    const CMat& e = matrices_[static_cast<std::size_t>(k)];
    for (Eigen::Index p = 0; p < sz; ++p) {
      a(p, k) = e.data()[p].real();
      a(sz + p, k) = e.data()[p].imag();
    }
  }
  for (Eigen::Index p = 0; p < sz; ++p) {
    rhs(p) = m.data()[p].real();
    rhs(sz + p) = m.data()[p].imag();
  }
  const Vec x = a.colPivHouseholderQr().solve(rhs);
  if ((a * x - rhs).cwiseAbs().maxCoeff() > tol * std::max(1.0, rhs.cwiseAbs().maxCoeff())) {
    throw PreconditionError("matrix does not lie in the Lie algebra");
  }
  return x;
}

CMat LieAlgebra::to_matrix(const Vec& x) const {
  if (matrices_.empty()) throw PreconditionError("Lie algebra has no matrix realization");
  CMat out = CMat::Zero(matrices_[0].rows(), matrices_[0].cols());
  for (int k = 0; k < n_; ++k) out += x(k) * matrices_[static_cast<std::size_t>(k)];
  return out;
}

// ---------------------------------------------------------------------------

namespace {

CMat unit(int n, int i, int j) {
  CMat e = CMat::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

std::vector<CMat> so_generators(int n) {
  std::vector<CMat> gens;
  if (n == 3) {
    // L_i = -sum_jk eps_ijk E_jk, so that [L_i, L_j] = eps_ijk L_k.
    gens.push_back(unit(3, 2, 1) - unit(3, 1, 2));
    gens.push_back(unit(3, 0, 2) - unit(3, 2, 0));
    gens.push_back(unit(3, 1, 0) - unit(3, 0, 1));
    return gens;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) gens.push_back(unit(n, i, j) - unit(n, j, i));
  return gens;
}

std::vector<CMat> offdiag_unitary(int n) {
  const cd I(0.0, 1.0);
  std::vector<CMat> gens;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      gens.push_back(unit(n, i, j) - unit(n, j, i));
      gens.push_back(I * (unit(n, i, j) + unit(n, j, i)));
    }
  }
  return gens;
}

std::vector<CMat> u_generators(int n) {
  const cd I(0.0, 1.0);
  std::vector<CMat> gens;
  for (int k = 0; k < n; ++k) gens.push_back(I * unit(n, k, k));
  auto off = offdiag_unitary(n);
  gens.insert(gens.end(), off.begin(), off.end());
  return gens;
}

std::vector<CMat> su_generators(int n) {
  const cd I(0.0, 1.0);
  std::vector<CMat> gens;
  for (int k = 0; k + 1 < n; ++k) gens.push_back(I * (unit(n, k, k) - unit(n, k + 1, k + 1)));
  auto off = offdiag_unitary(n);
  gens.insert(gens.end(), off.begin(), off.end());
  return gens;
}

// sp(n) inside u(2n) as [[A, -conj(B)], [B, conj(A)]], A in u(n), B complex symmetric.
std::vector<CMat> sp_generators(int n) {
  const cd I(0.0, 1.0);
  std::vector<CMat> gens;
  auto embed = [n](const CMat& a, const CMat& b) {
    CMat x = CMat::Zero(2 * n, 2 * n);
    x.topLeftCorner(n, n) = a;
    x.topRightCorner(n, n) = -b.conjugate();
    x.bottomLeftCorner(n, n) = b;
    x.bottomRightCorner(n, n) = a.conjugate();
    return x;
  };
  const CMat zero = CMat::Zero(n, n);
  for (const CMat& a : u_generators(n)) gens.push_back(embed(a, zero));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      CMat s = unit(n, i, j);
      if (i != j) s += unit(n, j, i);
      gens.push_back(embed(zero, s));
      gens.push_back(embed(zero, I * s));
    }
  }
  return gens;
}

std::vector<CMat> abelian_generators(int n) {
  const cd I(0.0, 1.0);
  std::vector<CMat> gens;
  for (int k = 0; k < n; ++k) gens.push_back(I * unit(n, k, k));
  return gens;
}

} // namespace

LieAlgebra make_algebra(Family family, int n, double scale) {
  if (n < 1) throw PreconditionError("Lie algebra rank parameter must be >= 1");
  if (!(scale > 0.0)) throw PreconditionError("Lie algebra scale must be positive");
  const std::string tag = to_string(family) + "(" + std::to_string(n) + ")";
  switch (family) {
    case Family::SO:
      if (n < 2) throw PreconditionError("so(n) needs n >= 2");
      return LieAlgebra::from_matrices(so_generators(n), scale, tag);
    case Family::SU:
      if (n < 2) throw PreconditionError("su(n) needs n >= 2");
      return LieAlgebra::from_matrices(su_generators(n), scale, tag);
    case Family::SP: return LieAlgebra::from_matrices(sp_generators(n), scale, tag);
    case Family::U: return LieAlgebra::from_matrices(u_generators(n), scale, tag);
    case Family::Abelian: return LieAlgebra::from_matrices(abelian_generators(n), scale, tag);
    case Family::DirectSum:
      throw PreconditionError("direct_sum needs explicit parts; use direct_sum()");
  }
  throw PreconditionError("unknown family");
}

LieAlgebra make_algebra(const std::string& family, int n, double scale) {
  return make_algebra(parse_family(family), n, scale);
}

LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts, const std::vector<double>& scales) {
  if (parts.size() != scales.size()) throw PreconditionError("direct_sum: one scale per block");
  int n = 0;
  int msize = 0;
  bool with_matrices = true;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (!(scales[p] > 0.0)) throw PreconditionError("direct_sum: scales must be positive");
    n += parts[p].dim();
    with_matrices = with_matrices && parts[p].has_matrices();
    if (parts[p].has_matrices()) msize += static_cast<int>(parts[p].matrices()[0].rows());
  }

  LieAlgebra g;
  g.n_ = n;
  g.q_ = Mat::Zero(n, n);
  g.ad_.assign(static_cast<std::size_t>(n), Mat::Zero(n, n));
  std::string name;
  int off = 0;
  int moff = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const LieAlgebra& part = parts[p];
    const int d = part.dim();
    // Rescaling Q by s: an orthonormal basis for s*Q is e/sqrt(s), and the
    // structure constants scale by 1/sqrt(s). Keep Q-orthonormality by
    // also carrying the part's own Gram matrix.
    const double s = scales[p];
    const double f = 1.0 / std::sqrt(s);
    g.q_.block(off, off, d, d) = part.q();
    for (int i = 0; i < d; ++i) g.ad_[static_cast<std::size_t>(off + i)].block(off, off, d, d) = f * part.ad(i);
    for (int i = 0; i < d; ++i) g.labels_.push_back(part.name() + "." + (i < static_cast<int>(part.labels().size()) ? part.labels()[static_cast<std::size_t>(i)] : std::to_string(i)));
    if (with_matrices) {
      const int ms = static_cast<int>(part.matrices()[0].rows());
      for (int i = 0; i < d; ++i) {
        CMat e = CMat::Zero(msize, msize);
        e.block(moff, moff, ms, ms) = f * part.matrices()[static_cast<std::size_t>(i)];
        g.matrices_.push_back(e);
      }
      moff += ms;
    }
    name += (p ? "+" : "") + part.name();
    off += d;
  }
  g.name_ = name;
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------

Subspace::Subspace(const LieAlgebra& parent, const Mat& vectors, std::optional<Mat> gram) {
  gram_ = gram ? *gram : parent.q();
  if (vectors.rows() != parent.dim()) throw PreconditionError("Subspace: vectors must live in the parent");
  basis_ = linalg::orthonormalize(vectors, gram_);
}

Subspace Subspace::zero(const LieAlgebra& parent) { return {parent, Mat(parent.dim(), 0)}; }

Subspace Subspace::full(const LieAlgebra& parent) {
  return {parent, Mat::Identity(parent.dim(), parent.dim())};
}

Subspace Subspace::from_matrices(const LieAlgebra& parent, const std::vector<CMat>& mats) {
  Mat v(parent.dim(), static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = parent.coords(mats[i]);
  return {parent, v};
}

Mat Subspace::projector() const { return basis_ * basis_.transpose() * gram_; }

double Subspace::gram_residual() const {
  if (dim() == 0) return 0.0;
  return linalg::max_abs(basis_.transpose() * gram_ * basis_ - Mat::Identity(dim(), dim()));
}

double Subspace::closure_residual(const LieAlgebra& g) const {
  const Mat p = projector();
  double r = 0.0;
  for (int a = 0; a < dim(); ++a)
    for (int b = a + 1; b < dim(); ++b) {
      const Vec br = g.bracket(basis_.col(a), basis_.col(b));
      r = std::max(r, (br - p * br).cwiseAbs().maxCoeff());
    }
  return r;
}

double Subspace::abelian_residual(const LieAlgebra& g) const {
  double r = 0.0;
  for (int a = 0; a < dim(); ++a)
    for (int b = a + 1; b < dim(); ++b)
      r = std::max(r, g.bracket(basis_.col(a), basis_.col(b)).cwiseAbs().maxCoeff());
  return r;
}

Subspace orthogonal_complement(const LieAlgebra& g, const Subspace& sub, const Mat& metric) {
  if (metric.rows() != g.dim() || metric.cols() != g.dim()) {
    throw PreconditionError("orthogonal_complement: metric has the wrong size");
  }
  if (g.dim() > 0 && linalg::min_eigenvalue(linalg::symmetrized(metric)) <= 0.0) {
    throw PreconditionError("orthogonal_complement: metric is not positive-definite");
  }
  // Kernel of v -> B^T metric v.
  const Mat constraint = sub.basis().transpose() * metric;
  const Mat ns = constraint.rows() ? linalg::null_space(constraint, 1e-12) : Mat(Mat::Identity(g.dim(), g.dim()));
  return {g, ns, metric};
}

Subspace orthogonal_complement(const LieAlgebra& g, const Subspace& sub) {
  return orthogonal_complement(g, sub, g.q());
}

} // namespace snn
