#pragma once

// Lie-algebra data: structure constants in a basis orthonormal for a
// distinguished ad-invariant inner product Q, with optional matrix
// realization for the classical families.

#include "snn/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace snn {

enum class Family { SO, SU, SP, U, Abelian, DirectSum };

Family parse_family(const std::string& name);
std::string to_string(Family f);

class LieAlgebra {
public:
  LieAlgebra() = default;

  /// Build from structure constants c[(i*n + j)*n + k] = c_{ij}^k and the
  /// Gram matrix of Q in that basis. Runs validate() with `tol`.
  static LieAlgebra from_structure_constants(int n, const std::vector<double>& c, const Mat& q,
                                             std::vector<std::string> labels = {},
                                             double tol = 1e-10);

  /// Build from real-linearly independent matrices closed under commutator,
  /// with Q(X,Y) = -(scale/2) Re tr(XY). The basis is Q-orthonormalized.
  static LieAlgebra from_matrices(const std::vector<CMat>& generators, double scale, std::string name);

  int dim() const { return n_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// ad(i) * y = [e_i, y].
  const Mat& ad(int i) const { return ad_[static_cast<std::size_t>(i)]; }
  Mat ad_of(const Vec& x) const;
  double structure(int i, int j, int k) const { return ad_[static_cast<std::size_t>(i)](k, j); }
  Vec bracket(const Vec& x, const Vec& y) const { return ad_of(x) * y; }

  const Mat& q() const { return q_; }
  double q(const Vec& x, const Vec& y) const { return x.dot(q_ * y); }

  double antisymmetry_residual() const;
  double jacobi_residual() const;
  /// Max over basis triples of |Q([X,Y],Z) + Q(Y,[X,Z])| for the given form.
  double ad_invariance_residual(const Mat& form) const;
  double ad_invariance_residual() const { return ad_invariance_residual(q_); }
  /// Residual of Ad_K invariance of `form` for X ranging over the columns of `k`.
  double ad_invariance_residual(const Mat& form, const Mat& k) const;

  /// Throws InvariantError when antisymmetry, Jacobi or ad-invariance fail.
  void validate(double tol = 1e-10) const;

  /// Orthonormal (Q) basis of the center, as columns.
  Mat center(double tol = 1e-9) const;

  bool has_matrices() const { return !matrices_.empty(); }
  const std::vector<CMat>& matrices() const { return matrices_; }
  /// Coordinates of a matrix in the realization (least squares; throws if
  /// the matrix is not in the span).
  Vec coords(const CMat& m, double tol = 1e-10) const;
  CMat to_matrix(const Vec& x) const;

  friend LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts, const std::vector<double>& scales);

private:
  void build_ad(const std::vector<double>& c);

  int n_ = 0;
  std::string name_;
  std::vector<std::string> labels_;
  std::vector<Mat> ad_;
  Mat q_;
  std::vector<CMat> matrices_;
};

/// so(n), su(n), sp(n), u(n) with Q = -(scale/2) Re tr(XY) in their defining
/// complex representation (sp(n) inside u(2n)); abelian R^n with Q = scale*I.
/// For so(3) at scale 1 the basis satisfies [L_i, L_j] = eps_ijk L_k.
LieAlgebra make_algebra(Family family, int n, double scale = 1.0);
LieAlgebra make_algebra(const std::string& family, int n, double scale = 1.0);

/// Direct sum with independently rescaled blocks (Q_i -> scale_i * Q_i).
LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts, const std::vector<double>& scales);

/// A subspace of a Lie algebra, with basis columns orthonormal for `gram`.
class Subspace {
public:
  Subspace() = default;
  /// Orthonormalize `vectors` for `gram` (defaults to the algebra's Q).
  Subspace(const LieAlgebra& parent, const Mat& vectors, std::optional<Mat> gram = std::nullopt);

  static Subspace zero(const LieAlgebra& parent);
  static Subspace full(const LieAlgebra& parent);
  static Subspace from_matrices(const LieAlgebra& parent, const std::vector<CMat>& mats);

  int parent_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  const Mat& gram() const { return gram_; }

  /// gram-orthogonal projector onto the subspace (parent coordinates).
  Mat projector() const;
  Vec project(const Vec& x) const { return projector() * x; }

  double gram_residual() const;
  double closure_residual(const LieAlgebra& g) const;
  double abelian_residual(const LieAlgebra& g) const;
  bool is_subalgebra(const LieAlgebra& g, double tol = 1e-10) const { return closure_residual(g) <= tol; }
  bool is_abelian(const LieAlgebra& g, double tol = 1e-12) const { return abelian_residual(g) <= tol; }

private:
  Mat basis_;
  Mat gram_;
};

/// metric-orthogonal complement of `sub` in its parent, orthonormal for
/// `metric`. Throws PreconditionError if metric is not positive-definite.
Subspace orthogonal_complement(const LieAlgebra& g, const Subspace& sub, const Mat& metric);
Subspace orthogonal_complement(const LieAlgebra& g, const Subspace& sub);

} // namespace snn
