#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "snn/cohom1.hpp"

#include <cmath>

using namespace snn;

namespace {

double max_a_difference(const ATensor& x, const ATensor& y) {
  double d = 0.0;
  for (int a = 0; a < x.size(); ++a)
    for (int b = 0; b < x.size(); ++b) d = std::max(d, linalg::max_abs(x.at(a, b) - y.at(a, b)));
  return d;
}

struct Boundary {
  HomogeneousQuotient hq;
  FourForm omega;
};

Boundary certified_boundary(const GroupTriple& tr, double p_scale) {
  Boundary out{homogeneous_quotient(tr, p_scale), {}};
  const Certificate c = certify(out.hq.quotient.R);
  REQUIRE(c.verdict == Verdict::Feasible);
  out.omega = c.omega;
  return out;
}

} // namespace

TEST_CASE("triple dimensions") {
  const GroupTriple cp2 = make_triple("CP_2");
  CHECK(cp2.g.dim() == 4);
  CHECK(cp2.k.dim() == 2);
  CHECK(cp2.h.dim() == 1);
  CHECK(cp2.p.dim() == 1);
  CHECK(cp2.m.dim() == 2);
  CHECK(cp2.slice_dim == 2);

  const GroupTriple hp2 = make_triple("HP_2");
  CHECK(hp2.g.dim() == 10);
  CHECK(hp2.p.dim() == 3);
  CHECK(hp2.slice_dim == 4);
  CHECK(hp2.m.dim() + hp2.p.dim() == 7);

  const GroupTriple toy = make_triple("toy");
  CHECK(toy.g.dim() == 2);
  CHECK(toy.p.dim() == 1);
  CHECK(toy.h.dim() == 0);

  CHECK_THROWS_AS(make_triple("nonsense"), PreconditionError);
}

TEST_CASE("rho rejects vectors outside k") {
  const GroupTriple cp2 = make_triple("CP_2");
  CHECK_NOTHROW(cp2.rho(cp2.k.basis().col(0)));
  CHECK_THROWS(cp2.rho(cp2.m.basis().col(0)));
}

TEST_CASE("slice metric constants") {
  const GroupTriple toy = make_triple("toy");
  CHECK(compute_slice_b(toy).b == doctest::Approx(1.0).epsilon(1e-12));

  const GroupTriple cp2 = make_triple("CP_2");
  const SliceMetric s1 = compute_slice_b(cp2, 1.0);
  CHECK(s1.b == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(s1.scalar);
  CHECK(s1.schur_residual <= 1e-10);
  CHECK(compute_slice_b(cp2, 2.0).b == doctest::Approx(1.0).epsilon(1e-10));

  const SliceMetric hp = compute_slice_b(make_triple("HP_2"));
  CHECK(hp.scalar);
  CHECK(hp.schur_residual <= 1e-10);
}

TEST_CASE("invariant metrics are Ad_K-invariant") {
  const GroupTriple cp2 = make_triple("CP_2");
  for (double s : {0.3, 1.0, 2.5}) CHECK(adk_residual(cp2, invariant_metric(cp2, s)) <= 1e-12);
  const Vec m0 = cp2.m.basis().col(0);
  const Mat bad = invariant_metric(cp2, 1.0) + 0.5 * m0 * m0.transpose();
  CHECK(adk_residual(cp2, bad) > 1e-3);
}

TEST_CASE("plateau profile") {
  const ProfileFunction f = make_profile(2.0, 3.0, 4.0);
  CHECK(f(0.0).f == doctest::Approx(0.0));
  CHECK(f(0.0).df == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f(3.5).f == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(f(3.5).df) <= 1e-12);
  double worst = -1.0;
  for (int i = 0; i <= 1000; ++i) worst = std::max(worst, f(4.0 * i / 1000.0).d2f);
  CHECK(worst <= 1e-12);
  CHECK_THROWS_AS(make_profile(2.0, 1.5, 4.0), PreconditionError);
  CHECK_THROWS_AS(make_profile(2.0, 3.0, 2.5), PreconditionError);
  CHECK_THROWS_AS(f(4.5), PreconditionError);
}

TEST_CASE("vertical and horizontal spaces are orthogonal") {
  const GroupTriple cp2 = make_triple("CP_2");
  const ProfileFunction f = make_profile(2.0, 3.0, 4.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const VHSplit s = vh_split(cp2, invariant_metric(cp2, 1.0), f, t);
    CHECK(s.vertical.cols() == 2);
    CHECK(s.horizontal.cols() == 4);
    CHECK(s.orthogonality_residual <= 1e-10);
    CHECK(linalg::max_abs(s.vertical.transpose() * s.metric * s.horizontal) <= 1e-10);
  }
  const GroupTriple toy = make_triple("toy");
  const VHSplit st = vh_split(toy, invariant_metric(toy, 1.0), ProfileFunction::sine(3.0), 1.0);
  CHECK(st.vertical.cols() == 1);
  CHECK(st.horizontal.cols() == 3);
}

TEST_CASE("Grove-Ziller half for CP_2") {
  const GroupTriple cp2 = make_triple("CP_2");
  const double b = compute_slice_b(cp2).b;

  const GZHalfReport at_boundary = assemble_gz_half(cp2, 2.0 / std::sqrt(b));
  CHECK(at_boundary.passed);
  CHECK(at_boundary.e == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(at_boundary.group_cert_valid);
  CHECK(at_boundary.boundary_metric_deviation <= 1e-9);
  CHECK(at_boundary.boundary_formula_deviation <= 1e-9);

  const GZHalfReport wide = assemble_gz_half(cp2, 10.0 / std::sqrt(b));
  CHECK(wide.passed);
  CHECK(wide.e == doctest::Approx(100.0 / 99.0).epsilon(1e-12));

  CHECK_THROWS_AS(assemble_gz_half(cp2, 1.9 / std::sqrt(b)), PreconditionError);
  CHECK_THROWS_AS(assemble_gz_half(make_triple("HP_2"), 4.0), PreconditionError);
}

TEST_CASE("halves with different plateau heights glue along the same boundary metric") {
  const GroupTriple cp2 = make_triple("CP_2");
  const double b = compute_slice_b(cp2).b;
  const GZHalfReport x = assemble_gz_half(cp2, 2.0 / std::sqrt(b));
  const GZHalfReport y = assemble_gz_half(cp2, 3.5 / std::sqrt(b));
  REQUIRE(x.passed);
  REQUIRE(y.passed);
  // Both boundary orbit metrics equal Q on m + p.
  CHECK(x.boundary_metric_deviation <= 1e-9);
  CHECK(y.boundary_metric_deviation <= 1e-9);
}

TEST_CASE("round metrics on principal orbits") {
  const RoundMetric cp = make_round_L(make_triple("CP_2"), 1);
  CHECK(cp.p_scale == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(cp.mean_sec == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(cp.variance <= 1e-12);

  const RoundMetric hp = make_round_L(make_triple("HP_2"), 1, 200);
  CHECK(hp.mean_sec == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(hp.spread <= 1e-6);

  CHECK_THROWS_AS(make_round_L(make_triple("stiefel"), 1, 200), InvariantError);
}

TEST_CASE("Cheeger halves") {
  CheegerHalfOptions opts;
  opts.geometric_points = 12;
  opts.seed = 5;
  const CheegerHalfReport cp = assemble_cheeger_half(make_triple("CP_2"), opts);
  CHECK(cp.passed);
  CHECK(cp.min_margin >= -1e-8);
  CHECK(cp.plateau_deviation <= 1e-9);
  CHECK(cp.orbit_metric_deviation <= 1e-9);

  opts.geometric_points = 6;
  const CheegerHalfReport hp = assemble_cheeger_half(make_triple("HP_2"), opts);
  CHECK(hp.passed);

  // The toy orbits are flat, so no rung is strictly positive.
  const CheegerHalfReport toy = assemble_cheeger_half(make_triple("toy"), opts);
  CHECK_FALSE(toy.passed);
  CHECK_FALSE(toy.failures.empty());
}

TEST_CASE("A does not depend on how horizontal fields are extended") {
  const GroupTriple cp2 = make_triple("CP_2");
  const Boundary bd = certified_boundary(cp2, 1.0);
  const ProfileFunction f = make_profile(1.0, 1.5, 2.5);
  for (double t : {0.3, 1.0, 2.0}) {
    const DiskBundleResult plain = disk_bundle_R(cp2, bd.hq, bd.omega, f, t);
    DiskBundleOptions o;
    o.extension_perturbation = 17;
    const DiskBundleResult moved = disk_bundle_R(cp2, bd.hq, bd.omega, f, t, o);
    CHECK(max_a_difference(plain.A, moved.A) <= 1e-9);
    CHECK(linalg::max_abs(plain.R.matrix() - moved.R.matrix()) <= 1e-9);
  }
}

TEST_CASE("disk bundle operators are constant on the plateau") {
  const GroupTriple cp2 = make_triple("CP_2");
  const Boundary bd = certified_boundary(cp2, 1.0);
  const ProfileFunction f = make_profile(1.0, 1.5, 3.0);
  const DiskBundleResult x = disk_bundle_R(cp2, bd.hq, bd.omega, f, 1.8);
  const DiskBundleResult y = disk_bundle_R(cp2, bd.hq, bd.omega, f, 2.7);
  CHECK(linalg::max_abs(x.R.matrix() - y.R.matrix()) <= 1e-9);
  CHECK(linalg::max_abs(x.omega.coeffs() - y.omega.coeffs()) <= 1e-9);
  CHECK(x.chain_slack >= -1e-8);
}

TEST_CASE("toy bundle is a warped product") {
  // The p-circle of the orbit has length factor f / sqrt(1 + f^2) for b = 1,
  // so with f(t) = t the radial planes have sec 3 / (1 + t^2)^2.
  const GroupTriple toy = make_triple("toy");
  const Boundary bd = certified_boundary(toy, 1.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const DiskBundleResult d = disk_bundle_R(toy, bd.hq, bd.omega, ProfileFunction::linear(3.0), t);
    CHECK(d.omega.coeffs().size() == 0);
    const Vec ev = linalg::eigenvalues(d.R.matrix());
    CHECK(std::abs(ev(0)) <= 1e-10);
    CHECK(std::abs(ev(1)) <= 1e-10);
    CHECK(ev(2) == doctest::Approx(3.0 / std::pow(1.0 + t * t, 2)).epsilon(1e-9));
    CHECK(d.margin == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("disk bundle preconditions") {
  const GroupTriple cp2 = make_triple("CP_2");
  const Boundary bd = certified_boundary(cp2, 1.0);
  const ProfileFunction f = make_profile(1.0, 1.5, 2.5);
  CHECK_THROWS_AS(disk_bundle_R(cp2, bd.hq, bd.omega, f, 0.0), PreconditionError);
  CHECK_THROWS_AS(disk_bundle_R(cp2, bd.hq, bd.omega, f, 3.0), PreconditionError);
}
