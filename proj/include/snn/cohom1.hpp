#pragma once

// Cohomogeneity-one disk bundles G x_K V: group triples H < K < G with a
// slice representation, the vertical/horizontal split at (e, t v0), the
// disk-bundle curvature operator with its explicit modifier, and the two
// half assemblies (Grove-Ziller and Cheeger).
//
// Invariant metrics on g are of the form L = Q|m + s Q|p + Q|h, written
// by their p-scale s; m is the Q-complement of k and p that of h in k.

#include "snn/certifier.hpp"
#include "snn/curvature.hpp"
#include "snn/profile.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace snn {

struct GroupTriple {
  std::string name;
  LieAlgebra g;
  Subspace k, h, p, m;               ///< all Q-orthonormal
  int slice_dim = 0;
  std::vector<Mat> slice_generators;  ///< rho' of the columns of k.basis()
  Vec v0;

  /// rho'(z) for z in k (g coordinates). Throws if z is not in k.
  Mat rho(const Vec& z) const;
};

/// Explicit triple data: k and h as columns in g coordinates, one slice
/// generator per column of k.
struct TripleData {
  std::string name = "explicit";
  LieAlgebra g;
  Mat k;
  Mat h;
  std::vector<Mat> slice_generators;
  Vec v0;
};

/// "CP_n" (U(n) > U(n-1)U(1) > U(n-1), V = R^2), "HP_n" (Sp(n) > Sp(n-1)Sp(1)
/// > Sp(n-1), V = R^4), "toy" (R^2 > R > 0 rotating R^2) and "stiefel"
/// (SO(4) > SO(2)SO(2) > SO(2), V = R^2; its principal orbit is not a sphere).
GroupTriple make_triple(const std::string& name);
GroupTriple make_triple(const TripleData& data);

/// Gram matrix (g coordinates) of L = Q with p scaled by p_scale.
Mat invariant_metric(const GroupTriple& tr, double p_scale);

/// Residual of Ad_K-invariance of a Gram matrix on g.
double adk_residual(const GroupTriple& tr, const Mat& L);

struct SliceMetric {
  Mat B;                   ///< in an L-orthonormal basis of p
  Mat basis;               ///< that basis (g coordinates)
  double b = 0.0;          ///< tr B / dim p
  double schur_residual = 0.0;
  bool scalar = false;     ///< B = b Id within 1e-10
};

/// L(., B .) = pullback of the round metric of S(V) along X -> rho'(X) v0.
SliceMetric compute_slice_b(const GroupTriple& tr, const Mat& L);
SliceMetric compute_slice_b(const GroupTriple& tr, double p_scale = 1.0);

struct VHSplit {
  Mat metric;      ///< Gram of L + dt^2 + f^2 dtheta^2 at (e, t v0), coordinates g + V
  Mat vertical;    ///< (h x 0) and (-X, X*) for X in p
  Mat horizontal;  ///< (m x 0), (f^2 B Y, Y*) for Y in p, d/dt
  double orthogonality_residual = 0.0;
};

VHSplit vh_split(const GroupTriple& tr, const Mat& L, const ProfileFunction& f, double t);

/// Homogeneous data of (G, L) and the quotient G -> G/H for the p-scaled metric.
struct HomogeneousQuotient {
  double p_scale = 1.0;
  Mat group_frame;      ///< L-orthonormal frame of g
  ScaleUpResult group;  ///< curvature of (G, L) and its modifier
  Mat quotient_frame;   ///< L-orthonormal basis of m + p (m first)
  SubmersionResult quotient;
};

HomogeneousQuotient homogeneous_quotient(const GroupTriple& tr, double p_scale);

struct RoundMetric {
  double p_scale = 1.0;
  double mean_sec = 0.0;
  double variance = 0.0;
  double spread = 0.0;  ///< max - min of sampled sec
  int samples = 0;
};

/// Solve for the p-scale making the induced metric on G/H constant-curvature;
/// throws InvariantError when no scale achieves constancy.
RoundMetric make_round_L(const GroupTriple& tr, std::uint64_t seed = 0, int samples = 1000);

struct DiskBundleOptions {
  std::uint64_t seed = 0;
  int chain_samples = 50;
  /// Nonzero: add a seeded random linear field vanishing at the base point
  /// to every horizontal extension (A must not change).
  std::uint64_t extension_perturbation = 0;
};

struct DiskBundleResult {
  double t = 0.0;
  BivectorOp R;
  FourForm omega;
  BivectorOp alpha;
  ATensor A;
  Mat horizontal;  ///< orthonormal horizontal frame, coordinates g + V
  Mat metric;      ///< ambient Gram matrix, coordinates g + V
  Mat P;           ///< g-components of the horizontal frame in the quotient frame
  double margin = 0.0;          ///< lambda_min(R + O(omega))
  double chain_slack = 0.0;     ///< min over samples of lhs - rhs of the estimate chain
  double orthogonality_residual = 0.0;
};

/// Curvature of G x_K V at pi(e, t v0) for L + dt^2 + f^2 dtheta^2, with
/// omega = P^*omega_GH + 3 b(alpha) - 3 P^*b(alpha_GH). omega_GH must make
/// the quotient operator of `boundary` PSD (upstream certificate).
DiskBundleResult disk_bundle_R(const GroupTriple& tr, const HomogeneousQuotient& boundary, const FourForm& omega_GH,
                               const ProfileFunction& f, double t, const DiskBundleOptions& opts = {});

/// Metric induced on the principal orbit through pi(e, t v0), on the basis
/// (m basis, p basis) of the triple, computed by horizontal projection.
Mat principal_orbit_metric(const GroupTriple& tr, double p_scale, const ProfileFunction& f, double t);

struct GZHalfOptions {
  double t0_factor = 1.5;  ///< t0 = t0_factor * a
  double tail = 1.0;       ///< T = t0 + tail
  int plateau_samples = 5;
  CertifyOptions cert;
};

struct GZHalfReport {
  double b = 0.0, a = 0.0, e = 0.0;
  double adk_residual = 0.0;
  Certificate group_cert;
  bool group_cert_valid = false;
  std::vector<double> plateau_ts;
  double boundary_metric_deviation = 0.0;  ///< numeric orbit metric vs Q|m+p
  double boundary_formula_deviation = 0.0; ///< orbit_metric_C vs Q|m+p
  bool passed = false;
  std::vector<std::string> failures;
};

/// Grove-Ziller half for dim p = 1: L' = Q with p scaled by a^2 b/(a^2 b - 1).
GZHalfReport assemble_gz_half(const GroupTriple& tr, double a, const GZHalfOptions& opts = {});

struct LadderRung {
  double a = 0.0, e = 0.0;
  Certificate cert;
  bool valid = false;
  bool strict = false;
};

struct SweepPoint {
  double t = 0.0;
  double margin = 0.0;
  double chain_slack = 0.0;
  double orthogonality_residual = 0.0;
};

struct CheegerHalfOptions {
  std::vector<double> ladder = {2.0, 4.0, 8.0};  ///< rungs a = c / sqrt(b)
  double t0_factor = 1.5;
  double tail = 1.0;
  int geometric_points = 40;
  int plateau_points = 5;
  double t_min_fraction = 1e-2;  ///< smallest sweep point as a fraction of t0
  std::uint64_t seed = 0;
  CertifyOptions cert;
};

struct CheegerHalfReport {
  RoundMetric round;
  double b = 0.0;
  std::vector<LadderRung> ladder;
  double a = 0.0;       ///< chosen rung (0 if none certified)
  double t0 = 0.0;
  std::vector<SweepPoint> sweep;
  double min_margin = 0.0;
  double plateau_deviation = 0.0;      ///< R + O(omega) across plateau points
  double orbit_metric_deviation = 0.0; ///< plateau orbit metric vs L|m+p
  bool passed = false;
  std::vector<std::string> failures;
};

CheegerHalfReport assemble_cheeger_half(const GroupTriple& tr, const CheegerHalfOptions& opts = {});

} // namespace snn
