#pragma once

// Exterior-algebra substrate: lexicographic bases of the second and fourth
// exterior powers of an n-dimensional inner product space, symmetric
// operators on bivectors, 4-forms and the Bianchi projection.
//
// Convention: for an orthonormal frame e_i, the bivectors e_i^e_j (i<j) are
// orthonormal, i.e. <X^Y, Z^W> = <X,Z><Y,W> - <X,W><Y,Z>.

#include "snn/linalg.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace snn {

/// Index bookkeeping for the bivector basis {e_i ^ e_j : i < j} and the
/// 4-vector basis {e_i ^ e_j ^ e_k ^ e_l : i < j < k < l}, both in
/// lexicographic order.
class BivectorFrame {
public:
  explicit BivectorFrame(int n = 0);

  int dim() const { return n_; }
  /// n(n-1)/2
  int size() const { return static_cast<int>(pairs_.size()); }
  /// C(n,4)
  int quad_count() const { return static_cast<int>(quads_.size()); }

  int index(int i, int j) const;
  std::pair<int, int> pair(int a) const { return pairs_[static_cast<std::size_t>(a)]; }
  int quad_index(int i, int j, int k, int l) const;
  const std::array<int, 4>& quad(int q) const { return quads_[static_cast<std::size_t>(q)]; }

  friend bool operator==(const BivectorFrame& a, const BivectorFrame& b) { return a.n_ == b.n_; }

private:
  int n_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> pair_lookup_;
  std::vector<std::array<int, 4>> quads_;
};

/// Self-adjoint operator on the bivectors of a declared orthonormal frame.
/// Entry (a,b) is <S(e_a), e_b> for basis bivectors e_a, e_b.
class SymmetricBivectorOperator {
public:
  SymmetricBivectorOperator() = default;
  /// Stores (m + m^T)/2, so symmetry is exact.
  SymmetricBivectorOperator(BivectorFrame frame, const Mat& m, std::string origin = "explicit");

  static SymmetricBivectorOperator zero(const BivectorFrame& frame);
  static SymmetricBivectorOperator identity(const BivectorFrame& frame);

  const BivectorFrame& frame() const { return frame_; }
  const Mat& matrix() const { return m_; }
  const std::string& origin() const { return origin_; }
  SymmetricBivectorOperator with_origin(std::string origin) const;

  int dim() const { return frame_.dim(); }
  int size() const { return frame_.size(); }
  double operator()(int a, int b) const { return m_(a, b); }

  /// <S(e_i ^ e_j), e_k ^ e_l> for arbitrary indices, with antisymmetry signs.
  double form(int i, int j, int k, int l) const;

  /// Trace pairing tr(S T).
  double dot(const SymmetricBivectorOperator& other) const;
  double quadratic(const Vec& bivector) const { return bivector.dot(m_ * bivector); }
  double min_eigenvalue() const { return linalg::min_eigenvalue(m_); }

  SymmetricBivectorOperator operator+(const SymmetricBivectorOperator& o) const;
  SymmetricBivectorOperator operator-(const SymmetricBivectorOperator& o) const;
  SymmetricBivectorOperator operator*(double s) const;

private:
  void require_same_frame(const SymmetricBivectorOperator& o) const;

  BivectorFrame frame_;
  Mat m_;
  std::string origin_ = "explicit";
};

using BivectorOp = SymmetricBivectorOperator;

/// Element of the fourth exterior power, stored over the lexicographic basis.
class FourForm {
public:
  FourForm() = default;
  FourForm(BivectorFrame frame, Vec coeffs);

  static FourForm zero(const BivectorFrame& frame);
  static FourForm basis(const BivectorFrame& frame, int q);

  const BivectorFrame& frame() const { return frame_; }
  const Vec& coeffs() const { return c_; }
  int dim() const { return frame_.dim(); }

  /// omega(e_i, e_j, e_k, e_l) for arbitrary indices (alternating).
  double value(int i, int j, int k, int l) const;
  /// omega(X, Y, Z, W) for arbitrary vectors.
  double evaluate(const Vec& x, const Vec& y, const Vec& z, const Vec& w) const;
  double norm() const { return c_.norm(); }

  FourForm operator+(const FourForm& o) const;
  FourForm operator-(const FourForm& o) const;
  FourForm operator*(double s) const;

private:
  BivectorFrame frame_;
  Vec c_;
};

/// Bivector coordinates of x ^ y.
Vec wedge(const Vec& x, const Vec& y);

/// Columns are the bivector coordinates of p_a ^ p_b (a < b, lexicographic)
/// for the columns p_a of `p`. Maps bivectors of the column space into the
/// bivectors of the row space.
Mat wedge_matrix(const Mat& p);

/// Operator embedding O(omega): <O(omega)(e_i^e_j), e_k^e_l> = omega(e_i,e_j,e_k,e_l).
BivectorOp fourform_to_operator(const FourForm& omega);
BivectorOp fourform_to_operator(const FourForm& omega, const BivectorFrame& target);

/// Bianchi map: the cyclic sum (1/3)(S(XY,ZW) + S(YZ,XW) + S(ZX,YW)),
/// which is the orthogonal projection onto the 4-forms.
FourForm bianchi(const BivectorOp& s);

/// S - O(b(S)), the component in ker b.
BivectorOp bianchi_free_part(const BivectorOp& s);

/// <S(X^Y), X^Y> / |X^Y|^2. Throws PreconditionError for a degenerate plane.
double sectional_curvature(const BivectorOp& s, const Vec& x, const Vec& y, double tol = 1e-12);

/// Pull back a bivector operator along a linear map p (columns: images of the
/// new frame vectors in the old frame): entries <S(p_a^p_b), p_c^p_d>.
BivectorOp pull_back(const BivectorOp& s, const Mat& p, std::string origin = "pullback");
FourForm pull_back(const FourForm& omega, const Mat& p);

/// Volume form e1^e2^e3^e4 and its operator, the Hodge star on bivectors of R^4.
FourForm volume_form4();
BivectorOp hodge_star4();

} // namespace snn
