#include "snn/exterior.hpp"

#include <algorithm>
#include <cmath>

namespace snn {

BivectorFrame::BivectorFrame(int n) : n_(n) {
  if (n < 0) throw PreconditionError("BivectorFrame: negative dimension");
  pair_lookup_.assign(static_cast<std::size_t>(n * n), -1);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pair_lookup_[static_cast<std::size_t>(i * n + j)] = static_cast<int>(pairs_.size());
      pairs_.emplace_back(i, j);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) quads_.push_back({i, j, k, l});
}

int BivectorFrame::index(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i >= j) {
    throw PreconditionError("BivectorFrame::index expects 0 <= i < j < n");
  }
  return pair_lookup_[static_cast<std::size_t>(i * n_ + j)];
}

int BivectorFrame::quad_index(int i, int j, int k, int l) const {
  if (!(0 <= i && i < j && j < k && k < l && l < n_)) {
    throw PreconditionError("BivectorFrame::quad_index expects 0 <= i < j < k < l < n");
  }
  // Quadruples are few; a binary search over the lexicographic list suffices.
  const std::array<int, 4> key{i, j, k, l};
  auto it = std::lower_bound(quads_.begin(), quads_.end(), key);
  return static_cast<int>(it - quads_.begin());
}

// ---------------------------------------------------------------------------

SymmetricBivectorOperator::SymmetricBivectorOperator(BivectorFrame frame, const Mat& m,
                                                     std::string origin)
    : frame_(std::move(frame)), m_(linalg::symmetrized(m)), origin_(std::move(origin)) {
  if (m.rows() != frame_.size() || m.cols() != frame_.size()) {
    throw PreconditionError("SymmetricBivectorOperator: matrix size does not match frame");
  }
}

SymmetricBivectorOperator SymmetricBivectorOperator::zero(const BivectorFrame& frame) {
  return {frame, Mat::Zero(frame.size(), frame.size()), "zero"};
}

SymmetricBivectorOperator SymmetricBivectorOperator::identity(const BivectorFrame& frame) {
  return {frame, Mat::Identity(frame.size(), frame.size()), "identity"};
}

SymmetricBivectorOperator SymmetricBivectorOperator::with_origin(std::string origin) const {
  SymmetricBivectorOperator out = *this;
  out.origin_ = std::move(origin);
  return out;
}

double SymmetricBivectorOperator::form(int i, int j, int k, int l) const {
  if (i == j || k == l) return 0.0;
  double sign = 1.0;
  if (i > j) { std::swap(i, j); sign = -sign; }
  if (k > l) { std::swap(k, l); sign = -sign; }
  return sign * m_(frame_.index(i, j), frame_.index(k, l));
}

double SymmetricBivectorOperator::dot(const SymmetricBivectorOperator& o) const {
  require_same_frame(o);
  return m_.cwiseProduct(o.m_).sum();
}

void SymmetricBivectorOperator::require_same_frame(const SymmetricBivectorOperator& o) const {
  if (!(frame_ == o.frame_)) throw PreconditionError("bivector operators live on different frames");
}

SymmetricBivectorOperator SymmetricBivectorOperator::operator+(const SymmetricBivectorOperator& o) const {
  require_same_frame(o);
  return {frame_, m_ + o.m_, origin_};
}

SymmetricBivectorOperator SymmetricBivectorOperator::operator-(const SymmetricBivectorOperator& o) const {
  require_same_frame(o);
  return {frame_, m_ - o.m_, origin_};
}

SymmetricBivectorOperator SymmetricBivectorOperator::operator*(double s) const {
  return {frame_, s * m_, origin_};
}

// ---------------------------------------------------------------------------

FourForm::FourForm(BivectorFrame frame, Vec coeffs) : frame_(std::move(frame)), c_(std::move(coeffs)) {
  if (c_.size() != frame_.quad_count()) {
    throw PreconditionError("FourForm: coefficient count does not match C(n,4)");
  }
}

FourForm FourForm::zero(const BivectorFrame& frame) { return {frame, Vec::Zero(frame.quad_count())}; }

FourForm FourForm::basis(const BivectorFrame& frame, int q) {
  Vec c = Vec::Zero(frame.quad_count());
  c(q) = 1.0;
  return {frame, c};
}

double FourForm::value(int i, int j, int k, int l) const {
  std::array<int, 4> idx{i, j, k, l};
  double sign = 1.0;
  // Insertion sort tracking the permutation parity.
  for (int a = 1; a < 4; ++a) {
    for (int b = a; b > 0 && idx[b - 1] > idx[b]; --b) {
      std::swap(idx[b - 1], idx[b]);
      sign = -sign;
    }
  }
  for (int a = 1; a < 4; ++a)
    if (idx[a] == idx[a - 1]) return 0.0;
  return sign * c_(frame_.quad_index(idx[0], idx[1], idx[2], idx[3]));
}

double FourForm::evaluate(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const {
  Eigen::Matrix<double, 4, 4> minor;
  double sum = 0.0;
  for (int q = 0; q < frame_.quad_count(); ++q) {
    if (c_(q) == 0.0) continue;
    const auto& r = frame_.quad(q);
    for (int a = 0; a < 4; ++a) {
      minor(a, 0) = x(r[a]);
      minor(a, 1) = y(r[a]);
      minor(a, 2) = z(r[a]);
      minor(a, 3) = w(r[a]);
    }
    sum += c_(q) * minor.determinant();
  }
  return sum;
}

FourForm FourForm::operator+(const FourForm& o) const {
  if (!(frame_ == o.frame_)) throw PreconditionError("4-forms live on different frames");
  return {frame_, c_ + o.c_};
}

FourForm FourForm::operator-(const FourForm& o) const {
  if (!(frame_ == o.frame_)) throw PreconditionError("4-forms live on different frames");
  return {frame_, c_ - o.c_};
}

FourForm FourForm::operator*(double s) const { return {frame_, s * c_}; }

// ---------------------------------------------------------------------------

Vec wedge(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw PreconditionError("wedge: vector sizes differ");
  const int n = static_cast<int>(x.size());
  Vec out(n * (n - 1) / 2);
  int a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out(a++) = x(i) * y(j) - x(j) * y(i);
  return out;
}

Mat wedge_matrix(const Mat& p) {
  const int n = static_cast<int>(p.rows());
  const int m = static_cast<int>(p.cols());
  Mat w(n * (n - 1) / 2, m * (m - 1) / 2);
  int c = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) w.col(c++) = wedge(p.col(a), p.col(b));
  return w;
}

BivectorOp fourform_to_operator(const FourForm& omega) {
  const BivectorFrame& f = omega.frame();
  Mat m = Mat::Zero(f.size(), f.size());
  for (int q = 0; q < f.quad_count(); ++q) {
    const double c = omega.coeffs()(q);
    if (c == 0.0) continue;
    const auto [i, j, k, l] = f.quad(q);
    const int ij = f.index(i, j), kl = f.index(k, l);
    const int ik = f.index(i, k), jl = f.index(j, l);
    const int il = f.index(i, l), jk = f.index(j, k);
    m(ij, kl) = m(kl, ij) = c;
    m(ik, jl) = m(jl, ik) = -c;
    m(il, jk) = m(jk, il) = c;
  }
  return {f, m, "fourform"};
}

BivectorOp fourform_to_operator(const FourForm& omega, const BivectorFrame& target) {
  if (!(omega.frame() == target)) {
    throw PreconditionError("fourform_to_operator: 4-form frame does not match the requested frame");
  }
  return fourform_to_operator(omega);
}

FourForm bianchi(const BivectorOp& s) {
  const BivectorFrame& f = s.frame();
  Vec c(f.quad_count());
  for (int q = 0; q < f.quad_count(); ++q) {
    const auto [i, j, k, l] = f.quad(q);
    c(q) = (s(f.index(i, j), f.index(k, l)) - s(f.index(i, k), f.index(j, l)) +
            s(f.index(i, l), f.index(j, k))) / 3.0;
  }
  return {f, c};
}

BivectorOp bianchi_free_part(const BivectorOp& s) {
  return (s - fourform_to_operator(bianchi(s))).with_origin(s.origin());
}

double sectional_curvature(const BivectorOp& s, const Vec& x, const Vec& y, double tol) {
  if (x.size() != s.dim() || y.size() != s.dim()) {
    throw PreconditionError("sectional_curvature: vector dimension does not match frame");
  }
  const Vec xy = wedge(x, y);
  const double n2 = xy.squaredNorm();
  if (n2 <= tol * std::max(1.0, x.squaredNorm() * y.squaredNorm())) {
    throw PreconditionError("sectional_curvature: degenerate plane (linearly dependent vectors)");
  }
  return s.quadratic(xy) / n2;
}

BivectorOp pull_back(const BivectorOp& s, const Mat& p, std::string origin) {
  if (p.rows() != s.dim()) throw PreconditionError("pull_back: map does not land in the operator's frame");
  const Mat w = wedge_matrix(p);
  return {BivectorFrame(static_cast<int>(p.cols())), w.transpose() * s.matrix() * w, std::move(origin)};
}

FourForm pull_back(const FourForm& omega, const Mat& p) {
  if (p.rows() != omega.dim()) throw PreconditionError("pull_back: map does not land in the form's frame");
  const BivectorFrame f(static_cast<int>(p.cols()));
  Vec c(f.quad_count());
  for (int q = 0; q < f.quad_count(); ++q) {
    const auto [i, j, k, l] = f.quad(q);
    c(q) = omega.evaluate(p.col(i), p.col(j), p.col(k), p.col(l));
  }
  return {f, c};
}

FourForm volume_form4() { return FourForm::basis(BivectorFrame(4), 0); }

BivectorOp hodge_star4() { return fourform_to_operator(volume_form4()).with_origin("hodge_star"); }

} // namespace snn
