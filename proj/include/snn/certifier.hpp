#pragma once

// Strong-nonnegativity decision: sup over 4-forms w of lambda_min(R + O(w)),
// with a primal certificate (w, margin) or a dual witness S in ker b.

#include "snn/exterior.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace snn {

enum class Verdict { Feasible, Infeasible, Undecided };
std::string to_string(Verdict v);

struct CertifyOptions {
  double tol = 1e-8;       ///< eps_psd = tol * max(|R|_2, 1)
  int budget = 10000;      ///< iteration cap across all phases
  std::uint64_t seed = 0;  ///< used by randomized sampling only
  std::optional<FourForm> warm_start;
};

struct Certificate {
  Verdict verdict = Verdict::Undecided;
  FourForm omega;        ///< Feasible
  double margin = 0.0;   ///< lambda_min(R + O(omega)), Feasible
  BivectorOp witness;    ///< Infeasible: unit trace, PSD, in ker b
  double bound = 0.0;    ///< <R, S>, Infeasible
  double gap = 0.0;      ///< Undecided: best bound - best margin
  double eps = 0.0;      ///< the PSD tolerance the verdict was decided with
  double tol = 1e-8;
  int iterations = 0;
  double wall_time = 0.0;
  std::string method;
};

/// Maximize lambda_min(R + O(w)) by a primal-dual interior-point method on
/// the pair  max y  s.t. R + O(w) - y Id >= 0  /  min <R,X>  s.t. tr X = 1,
/// X _|_ 4-forms, X >= 0. For n <= 3 this is a single eigenvalue test.
Certificate certify(const BivectorOp& R, const CertifyOptions& opts = {});

/// n = 4 only: golden-section search on x -> lambda_min(R + x * star).
Certificate certify_dim4(const BivectorOp& R, const CertifyOptions& opts = {});

/// Recheck every certificate invariant from scratch. `reason` (optional)
/// receives a description of the first violation.
bool validate_certificate(const BivectorOp& R, const Certificate& cert, std::string* reason = nullptr);

/// PSD tolerance used for R: tol * max(spectral norm, 1).
double psd_epsilon(const BivectorOp& R, double tol);

/// Turn an approximately feasible dual matrix into a witness: project onto
/// ker b, mix in the identity until PSD, normalize the trace.
BivectorOp finalize_witness(const Mat& x, const BivectorFrame& frame);

struct PlaneSample {
  double sec = 0.0;
  Vec x, y;  ///< orthonormal pair realizing sec
};

/// Seeded Grassmannian sampling of sec, followed by alternating
/// minimization from the best few samples.
PlaneSample min_sectional_sample(const BivectorOp& R, int samples, std::uint64_t seed);

struct FamilyPoint {
  BivectorOp R;
  std::optional<FourForm> warm_start;
};

struct ScanPoint {
  double t = 0.0;
  Certificate cert;
};

struct ScanReport {
  std::vector<ScanPoint> grid;
  std::vector<ScanPoint> refinement;
  std::optional<double> threshold;  ///< midpoint of the final bracket
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool monotone = true;
  std::vector<std::string> warnings;
};

/// Certify a one-parameter family on a grid and bisect the boundary between
/// the last Feasible and the first Infeasible point down to `width`.
ScanReport scan_threshold(const std::function<FamilyPoint(double)>& family, double t_lo, double t_hi, double step,
                          const CertifyOptions& opts = {}, double width = 1e-6);

} // namespace snn
