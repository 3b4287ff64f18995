#pragma once

// Curvature operators of the model constructions: bi-invariant metrics,
// scale-ups along subalgebras (via a semi-Riemannian submersion from a
// product), Gray-O'Neill quotients, products, rotationally symmetric slices,
// and the orbit-metric maps used by cohomogeneity-one assemblies.
//
// Every operator is stored in a frame orthonormal for its metric. Operator
// entries are the curvature form evaluated on frame bivectors, so
// <R(X^Y), X^Y> is the sectional curvature of an orthonormal pair.

#include "snn/exterior.hpp"
#include "snn/lie.hpp"
#include "snn/profile.hpp"

#include <optional>
#include <vector>

namespace snn {

/// <R(X^Y), Z^W> = 1/4 Q([X,Y],[Z,W]) in a Q-orthonormal frame.
BivectorOp biinvariant_R(const LieAlgebra& g);

/// Q-orthonormal frame of g adapted to sub: first the Q-complement (taken
/// from projected coordinate vectors, so coordinate-aligned subspaces give
/// coordinate frames), then the basis of sub divided by sqrt(t). The result
/// is orthonormal for Q_t = Q on the complement plus t*Q on sub.
Mat scaled_frame(const LieAlgebra& g, const Subspace& sub, double t);

/// Gram matrix (in g coordinates) of Q_t = Q|complement + t Q|sub.
Mat scaled_metric(const LieAlgebra& g, const Subspace& sub, double t);

/// Values of A(X_a, X_b) for a quotient frame X_1..X_m, as ambient vectors.
class ATensor {
public:
  ATensor() = default;
  ATensor(int m, int ambient_dim);
  int size() const { return m_; }
  int ambient_dim() const { return n_; }
  const Vec& at(int a, int b) const { return v_[static_cast<std::size_t>(a * m_ + b)]; }
  void set(int a, int b, const Vec& value);  // also sets (b,a) to -value
  double antisymmetry_residual() const;

private:
  int m_ = 0;
  int n_ = 0;
  std::vector<Vec> v_;
};

/// Data of a (semi-)Riemannian submersion at a point, in ambient coordinates.
/// `metric` is the (possibly indefinite) Gram matrix of the ambient frame in
/// which `ambient_R` is expressed; `horizontal` holds the horizontal lifts of
/// an orthonormal frame of the quotient.
struct SubmersionSpec {
  std::optional<LieAlgebra> ambient;  ///< when set, vertical must be a subalgebra
  BivectorOp ambient_R;
  Mat metric;
  Mat vertical;
  Mat horizontal;
  ATensor A;
  std::optional<FourForm> ambient_omega;  ///< modifier of ambient_R, pushed to the quotient
};

struct SubmersionResult {
  BivectorOp R;      ///< quotient curvature operator (quotient orthonormal frame)
  BivectorOp alpha;  ///< alpha = A^*A with the signed vertical metric
  FourForm omega;    ///< (ambient_omega restricted to the horizontal frame) + 3 b(alpha)
};

/// Gray-O'Neill: R = ambient_R|horizontal + 3 alpha - 3 O(b(alpha)).
SubmersionResult submersion_R(const SubmersionSpec& spec);

/// A(X_a, X_b) = 1/2 (metric-orthogonal vertical projection of [X_a, X_b]).
ATensor canonical_A(const LieAlgebra& g, const Mat& vertical, const Mat& metric, const Mat& horizontal);
ATensor canonical_A(const LieAlgebra& g, const Subspace& vertical, const Mat& metric, const Mat& horizontal);

/// Submersion G -> G/H for a left-invariant metric on g with orthonormal
/// frame `frame` (g coordinates) and curvature R_G in that frame; the
/// quotient frame `quotient_frame` (g coordinates) must be orthonormal and
/// orthogonal to h. A is the canonical one.
SubmersionSpec homogeneous_submersion(const LieAlgebra& g, const BivectorOp& R_G, const Mat& frame,
                                      const Subspace& h, const Mat& quotient_frame,
                                      std::optional<FourForm> omega_G = std::nullopt);

struct ScaleUpResult {
  BivectorOp R;      ///< curvature of (G, Q_t) in the Q_t-orthonormal frame
  FourForm omega;    ///< 3 b(alpha), the explicit modifier
  BivectorOp alpha;  ///< alpha of the lift, in the same frame
  double t = 1.0;
  Mat frame;         ///< columns: the Q_t-orthonormal frame in g coordinates
};

/// Curvature of Q_t = Q|n + t Q|sub for a subalgebra sub, computed as the
/// quotient of G x S with the product metric Q + t/(1-t) Q|sub (semi-Riemannian
/// for t > 1) under (g, s) -> s^{-1} g, horizontal lift X -> (X_n + t X_s, (t-1) X_s).
/// t = 1 returns the bi-invariant operator.
ScaleUpResult subgroup_scaled_R(const LieAlgebra& g, const Subspace& sub, double t);

/// Scale-up along an abelian subalgebra (the case with an explicit modifier).
/// Throws PreconditionError when `a` is not abelian or t <= 0.
ScaleUpResult scaled_up_R(const LieAlgebra& g, const Subspace& a, double t);

/// R_t + O(omega_t) for an abelian scale-up split into two Gram operators in
/// the frame of scaled_up_R, with X -> X_n + X_a the Q-splitting:
///   abelian_part = (4-3t)/4 Q([X_n,Y_n]_a, [Z_n,W_n]_a),
///   square_part  = 1/4 |[X_n,Y_n]_n + t([X_n,Y_a] + [X_a,Y_n])|^2 (polarized).
/// `displayed` is the three-term expansion with a t^2 mixed term and no
/// cross terms, kept for comparison with the pipeline.
struct ScaleUpDecomposition {
  BivectorOp abelian_part;
  BivectorOp square_part;
  BivectorOp displayed;
};
ScaleUpDecomposition scale_up_decomposition(const LieAlgebra& g, const Subspace& a, double t);

/// The ordinary Cheeger deformation for 0 < t < 1: Riemannian quotient of
/// G x S with metric Q + t/(1-t) Q|sub under (g, s) -> g s, with horizontal
/// lifts obtained by solving the orthogonality conditions. Same frame as
/// subgroup_scaled_R.
BivectorOp cheeger_R(const LieAlgebra& g, const Subspace& sub, double t);

/// Product curvature: R1 and R2 on the pure blocks, zero on mixed bivectors.
BivectorOp product_R(const BivectorOp& r1, const BivectorOp& r2);

/// Rotationally symmetric metric dt^2 + f(t)^2 g_{S^{k-1}} at radius t, in the
/// frame {d/dt, angular unit vectors}: radial planes -f''/f, angular planes
/// (1 - f'^2)/f^2.
BivectorOp rotsym_R(const ProfileFunction& f, double t, int k);
BivectorOp rotsym_R(const ProfileFunction::Values& v, int k);

/// Principal-orbit metric L(., C .) on m + p, C = diag(Id, f^2 B (Id + f^2 B)^{-1}).
/// `L` is the Gram matrix on a basis listing m first (dim_m vectors), then p;
/// `B` is the matrix of the L-symmetric automorphism of p in the p basis.
Mat orbit_metric_C(const Mat& L, int dim_m, const Mat& B, double f);
Mat orbit_metric_C(const Mat& L, int dim_m, const Mat& B, const ProfileFunction& f, double t);

/// Factor f^2 b / (f^2 b - 1) of D on k. Throws unless f(t)^2 > 1/b.
double scale_down_D(double b, double f);
double scale_down_D(double b, const ProfileFunction& f, double t);

/// Middle factor a^2 b / (a^2 b - 1) of E on p. Throws unless a^2 b > 1.
double scale_up_E(double a, double b);

/// diag of scalar factors over consecutive coordinate blocks.
Mat block_automorphism(const std::vector<int>& dims, const std::vector<double>& factors);

} // namespace snn
