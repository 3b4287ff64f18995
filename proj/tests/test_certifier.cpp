#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "snn/certifier.hpp"
#include "snn/curvature.hpp"

#include <random>

using namespace snn;

namespace {

BivectorOp random_bianchi_free(int n, std::mt19937_64& rng, double shift) {
  const BivectorFrame f(n);
  std::normal_distribution<double> nd;
  Mat m(f.size(), f.size());
  for (int i = 0; i < m.size(); ++i) m(i) = nd(rng);
  return bianchi_free_part(BivectorOp(f, m)) + BivectorOp::identity(f) * shift;
}

BivectorOp so3_scaled(double t) {
  const LieAlgebra so3 = make_algebra("so", 3);
  return scaled_up_R(so3, Subspace(so3, Mat(Vec::Unit(3, 2))), t).R;
}

} // namespace

TEST_CASE("identity is feasible with zero modifier") {
  for (int n = 3; n <= 6; ++n) {
    const BivectorOp id = BivectorOp::identity(BivectorFrame(n));
    const Certificate c = certify(id);
    CHECK(c.verdict == Verdict::Feasible);
    CHECK(c.margin == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.omega.norm() <= 1e-12);
    CHECK(validate_certificate(id, c));
  }
}

TEST_CASE("so(3) past the threshold is refuted by a decomposable projector") {
  const BivectorOp r = so3_scaled(1.4);
  const Certificate c = certify(r);
  REQUIRE(c.verdict == Verdict::Infeasible);
  CHECK(c.bound == doctest::Approx(-0.05).epsilon(1e-10));
  Mat proj = Mat::Zero(3, 3);
  proj(0, 0) = 1.0;
  CHECK(linalg::max_abs(c.witness.matrix() - proj) <= 1e-10);
  std::string why;
  CHECK(validate_certificate(r, c, &why));
  CHECK(why.empty());
}

TEST_CASE("Hodge star shift is removed by the modifier") {
  const BivectorOp r = BivectorOp::identity(BivectorFrame(4)) + hodge_star4() * 2.0;
  CHECK(r.min_eigenvalue() == doctest::Approx(-1.0));
  for (const Certificate& c : {certify(r), certify_dim4(r)}) {
    CAPTURE(c.method);
    REQUIRE(c.verdict == Verdict::Feasible);
    CHECK(c.margin == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(c.omega.coeffs()(0) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(validate_certificate(r, c));
  }
}

TEST_CASE("dimension 4 boundary cases") {
  const BivectorFrame f(4);
  const Certificate neg = certify_dim4(BivectorOp::identity(f) * -1.0);
  CHECK(neg.verdict == Verdict::Infeasible);
  CHECK(neg.bound == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(validate_certificate(BivectorOp::identity(f) * -1.0, neg));
  const Certificate zero = certify_dim4(BivectorOp::zero(f));
  CHECK(zero.verdict == Verdict::Feasible);
  CHECK(std::abs(zero.margin) <= 1e-9);
  CHECK(std::abs(zero.omega.coeffs()(0)) <= 1e-6);
  CHECK_THROWS_AS(certify_dim4(BivectorOp::identity(BivectorFrame(5))), PreconditionError);
}

TEST_CASE("validation rejects inconsistent certificates") {
  const BivectorFrame f(4);
  const BivectorOp id = BivectorOp::identity(f);
  Certificate fake;
  fake.verdict = Verdict::Infeasible;
  fake.eps = psd_epsilon(id, 1e-8);
  fake.tol = 1e-8;
  Mat s = Mat::Zero(6, 6);
  s(0, 0) = 1.0;
  fake.witness = BivectorOp(f, s);
  fake.bound = 1.0;
  std::string why;
  CHECK_FALSE(validate_certificate(id, fake, &why));
  CHECK_FALSE(why.empty());

  Certificate good = certify(id);
  good.margin = 2.0;
  CHECK_FALSE(validate_certificate(id, good));

  // A witness outside ker b is rejected even with a negative bound.
  const BivectorOp r = BivectorOp::identity(f) * -1.0;
  Certificate c = certify(r);
  REQUIRE(c.verdict == Verdict::Infeasible);
  c.witness = BivectorOp(f, c.witness.matrix() + 0.01 * fourform_to_operator(volume_form4()).matrix());
  CHECK_FALSE(validate_certificate(r, c));
}

TEST_CASE("witness finalization lands in the dual feasible set") {
  std::mt19937_64 rng(3);
  const BivectorFrame f(5);
  std::normal_distribution<double> nd;
  Mat g(f.size(), f.size());
  for (int i = 0; i < g.size(); ++i) g(i) = nd(rng);
  const BivectorOp s = finalize_witness(g * g.transpose(), f);
  CHECK(s.min_eigenvalue() >= -1e-10);
  CHECK(s.matrix().trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bianchi(s).coeffs().cwiseAbs().maxCoeff() * 6.0 <= 1e-10);
}

TEST_CASE("low dimensions reduce to an eigenvalue test") {
  const Certificate c = certify(so3_scaled(0.5));
  CHECK(c.verdict == Verdict::Feasible);
  CHECK(c.margin == doctest::Approx(0.125));
  CHECK(c.iterations <= 1);
}

TEST_CASE("budget exhaustion reports undecided with a gap") {
  std::mt19937_64 rng(17);
  const BivectorOp r = random_bianchi_free(6, rng, 0.0);
  CertifyOptions o;
  o.budget = 1;
  const Certificate c = certify(r, o);
  if (c.verdict == Verdict::Undecided) {
    CHECK(std::isfinite(c.gap));
    CHECK(c.gap >= 0.0);
  }
  CHECK(validate_certificate(r, c));
}

TEST_CASE("certify and the golden-section path agree in dimension 4") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> shift(-1.0, 4.0);
  for (int k = 0; k < 25; ++k) {
    const BivectorOp r = random_bianchi_free(4, rng, shift(rng));
    const Certificate a = certify(r), b = certify_dim4(r);
    CHECK(a.verdict == b.verdict);
    const double va = a.verdict == Verdict::Feasible ? a.margin : a.bound;
    const double vb = b.verdict == Verdict::Feasible ? b.margin : b.bound;
    CHECK(std::abs(va - vb) <= 1e-6);
    CHECK(validate_certificate(r, a));
    CHECK(validate_certificate(r, b));
  }
}

TEST_CASE("sectional sampling finds the negative plane") {
  const PlaneSample s = min_sectional_sample(so3_scaled(1.4), 500, 7);
  CHECK(s.sec == doctest::Approx(-0.05).epsilon(1e-8));
  CHECK(std::abs(s.x.dot(s.y)) <= 1e-12);
  CHECK(s.x.norm() == doctest::Approx(1.0));
}

TEST_CASE("threshold scan on so(3)") {
  const auto family = [](double t) { return FamilyPoint{so3_scaled(t), std::nullopt}; };
  const ScanReport rep = scan_threshold(family, 1.0, 1.5, 0.05);
  REQUIRE(rep.threshold.has_value());
  CHECK(std::abs(*rep.threshold - 4.0 / 3.0) <= 1e-6);
  CHECK(rep.bracket_hi - rep.bracket_lo <= 1e-6);
  CHECK(rep.monotone);

  const auto constant = [](double) { return FamilyPoint{BivectorOp::identity(BivectorFrame(4)), std::nullopt}; };
  const ScanReport flat = scan_threshold(constant, 0.0, 1.0, 0.25);
  CHECK_FALSE(flat.threshold.has_value());
  for (const ScanPoint& p : flat.grid) CHECK(p.cert.verdict == Verdict::Feasible);
}

TEST_CASE("non-monotone families raise a warning") {
  const auto family = [](double t) {
    const double s = std::abs(t - 0.5) < 0.2 ? -1.0 : 1.0;
    return FamilyPoint{BivectorOp::identity(BivectorFrame(3)) * s, std::nullopt};
  };
  const ScanReport rep = scan_threshold(family, 0.0, 1.0, 0.1);
  CHECK_FALSE(rep.monotone);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("warm starts do not change the verdict") {
  const LieAlgebra su3 = make_algebra("su", 3);
  CMat d = CMat::Zero(3, 3);
  d(0, 0) = {0.0, 1.0};
  d(1, 1) = {0.0, -1.0};
  const ScaleUpResult r = scaled_up_R(su3, Subspace::from_matrices(su3, {d}), 1.2);
  CertifyOptions warm;
  warm.warm_start = r.omega;
  const Certificate a = certify(r.R), b = certify(r.R, warm);
  CHECK(a.verdict == Verdict::Feasible);
  CHECK(b.verdict == Verdict::Feasible);
  CHECK(std::abs(a.margin - b.margin) <= 1e-7);
}
