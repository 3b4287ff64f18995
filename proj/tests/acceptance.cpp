// Acceptance run: one line per criterion with its measured quantity and
// wall time. Exit status is nonzero if any criterion fails.

#include "snn/fdoracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace snn;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = "FAILED: " + what;
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_diff(const BivectorOp& a, const BivectorOp& b) { return linalg::max_abs(a.matrix() - b.matrix()); }

Subspace su3_torus_line(const LieAlgebra& su3) {
  CMat d = CMat::Zero(3, 3);
  d(0, 0) = {0.0, 1.0};
  d(1, 1) = {0.0, -1.0};
  return Subspace::from_matrices(su3, {d});
}

BivectorOp random_bianchi_free(int n, std::mt19937_64& rng, double shift) {
  const BivectorFrame f(n);
  std::normal_distribution<double> nd;
  Mat m(f.size(), f.size());
  for (int i = 0; i < m.size(); ++i) m(i) = nd(rng);
  return bianchi_free_part(BivectorOp(f, 0.5 * (m + m.transpose()))) + BivectorOp::identity(f) * shift;
}

BivectorOp bianchi_projection(const BivectorOp& s) { return fourform_to_operator(bianchi(s)); }

// Every Infeasible certificate produced anywhere in the run goes through here.
struct InfeasibleLedger {
  int seen = 0;
  int invalid = 0;
  void record(const BivectorOp& r, const Certificate& c) {
    if (c.verdict != Verdict::Infeasible) return;
    ++seen;
    if (!validate_certificate(r, c)) ++invalid;
  }
};
InfeasibleLedger g_infeasible;

Certificate certify_logged(const BivectorOp& r, const CertifyOptions& o = {}) {
  Certificate c = certify(r, o);
  g_infeasible.record(r, c);
  return c;
}

Outcome biinvariant_psd() {
  Outcome o;
  double worst = 1.0;
  const std::vector<std::pair<std::string, int>> algebras = {{"so", 3}, {"so", 4}, {"su", 2},
                                                             {"su", 3}, {"sp", 2}, {"u", 2}};
  for (const auto& [fam, n] : algebras) worst = std::min(worst, biinvariant_R(make_algebra(fam, n)).min_eigenvalue());
  require(o, worst >= -1e-9, "negative eigenvalue " + fmt("%.3g", worst));
  o.detail = o.pass ? "min lambda_min " + fmt("%.3g", worst) : o.detail;
  return o;
}

Outcome scale_up_threshold() {
  Outcome o;
  const LieAlgebra so3 = make_algebra("so", 3);
  const Subspace a(so3, Mat(Vec::Unit(3, 2)));
  double spectrum = 0.0;
  for (double t : {0.5, 1.0, 4.0 / 3.0, 1.4}) {
    Mat expect = Mat::Zero(3, 3);
    expect.diagonal() << (4.0 - 3.0 * t) / 4.0, t / 4.0, t / 4.0;
    spectrum = std::max(spectrum, linalg::max_abs(scaled_up_R(so3, a, t).R.matrix() - expect));
  }
  const auto family = [&](double t) {
    const ScaleUpResult r = scaled_up_R(so3, a, t);
    return FamilyPoint{r.R, r.omega};
  };
  const ScanReport rep = scan_threshold(family, 0.5, 1.6, 0.1);
  for (const ScanPoint& p : rep.grid) g_infeasible.record(scaled_up_R(so3, a, p.t).R, p.cert);
  require(o, spectrum <= 1e-10, "spectrum off by " + fmt("%.3g", spectrum));
  require(o, rep.threshold.has_value(), "no threshold found");
  const double err = rep.threshold ? std::abs(*rep.threshold - 4.0 / 3.0) : INFINITY;
  require(o, err <= 1e-6, "threshold error " + fmt("%.3g", err));
  if (o.pass) o.detail = "threshold " + fmt("%.10f", *rep.threshold) + ", spectrum error " + fmt("%.2g", spectrum);
  return o;
}

Outcome two_path() {
  Outcome o;
  const LieAlgebra so3 = make_algebra("so", 3), su3 = make_algebra("su", 3);
  const Subspace a3(so3, Mat(Vec::Unit(3, 2)));
  const Subspace a8 = su3_torus_line(su3);
  double worst = 0.0;
  for (double t : {0.3, 0.6, 0.9}) {
    worst = std::max(worst, max_diff(subgroup_scaled_R(so3, a3, t).R, cheeger_R(so3, a3, t)));
    worst = std::max(worst, max_diff(subgroup_scaled_R(su3, a8, t).R, cheeger_R(su3, a8, t)));
  }
  require(o, worst <= 1e-10, "paths differ by " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max entry difference " + fmt("%.2g", worst);
  return o;
}

Outcome explicit_modifier() {
  Outcome o;
  const LieAlgebra su3 = make_algebra("su", 3);
  const Subspace a = su3_torus_line(su3);
  double lmin = INFINITY, decomp = 0.0;
  for (double t : {1.1, 4.0 / 3.0}) {
    const ScaleUpResult r = scaled_up_R(su3, a, t);
    const BivectorOp modified = r.R + fourform_to_operator(r.omega);
    lmin = std::min(lmin, modified.min_eigenvalue());
    const ScaleUpDecomposition d = scale_up_decomposition(su3, a, t);
    decomp = std::max(decomp, max_diff(modified, d.abelian_part + d.square_part));
  }
  require(o, lmin >= -1e-8, "modified lambda_min " + fmt("%.3g", lmin));
  require(o, decomp <= 1e-9, "decomposition off by " + fmt("%.3g", decomp));
  if (o.pass) o.detail = "lambda_min " + fmt("%.3g", lmin) + ", decomposition error " + fmt("%.2g", decomp);
  return o;
}

Outcome submersion_transfer() {
  Outcome o;
  const LieAlgebra so3 = make_algebra("so", 3);
  const Subspace h(so3, Mat(Vec::Unit(3, 2)));
  const SubmersionResult s2 = submersion_R(homogeneous_submersion(so3, biinvariant_R(so3), Mat::Identity(3, 3), h,
                                                                   orthogonal_complement(so3, h).basis()));
  const double sec_err = std::abs(s2.R(0, 0) - 1.0);
  require(o, s2.R.size() == 1 && sec_err <= 1e-10, "S^2 curvature off by " + fmt("%.3g", sec_err));

  // Scale su(3) up along a random line by a random t <= 4/3 and divide by that line.
  const LieAlgebra su3 = make_algebra("su", 3);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ut(0.3, 4.0 / 3.0);
  int certified = 0;
  for (int k = 0; k < 5; ++k) {
    Vec v(8);
    for (int i = 0; i < 8; ++i) v(i) = nd(rng);
    const Subspace line(su3, Mat(v));
    const double t = ut(rng);
    const ScaleUpResult g = subgroup_scaled_R(su3, line, t);
    const SubmersionResult q = submersion_R(homogeneous_submersion(su3, g.R, g.frame, line,
                                                                   orthogonal_complement(su3, line).basis(), g.omega));
    Certificate c;
    c.verdict = Verdict::Feasible;
    c.omega = q.omega;
    c.eps = psd_epsilon(q.R, c.tol);
    c.margin = (q.R + fourform_to_operator(q.omega)).min_eigenvalue();
    if (validate_certificate(q.R, c)) ++certified;
  }
  require(o, certified == 5, std::to_string(certified) + "/5 quotients certified by the pushed modifier");
  if (o.pass) o.detail = "S^2 sec error " + fmt("%.2g", sec_err) + ", 5/5 quotients certified";
  return o;
}

Outcome bianchi_suite() {
  Outcome o;
  double worst = 0.0;
  for (int n = 4; n <= 6; ++n) {
    const BivectorFrame f(n);
    std::mt19937_64 rng(500 + static_cast<std::uint64_t>(n));
    std::normal_distribution<double> nd;
    const int m = f.size();
    for (int k = 0; k < 100; ++k) {
      Mat a(m, m), b(m, m);
      for (int i = 0; i < a.size(); ++i) a(i) = nd(rng);
      for (int i = 0; i < b.size(); ++i) b(i) = nd(rng);
      const BivectorOp s(f, 0.5 * (a + a.transpose())), t(f, 0.5 * (b + b.transpose()));
      const BivectorOp ps = bianchi_projection(s);
      worst = std::max(worst, max_diff(bianchi_projection(ps), ps));
      worst = std::max(worst, std::abs(ps.dot(t) - s.dot(bianchi_projection(t))));
      Vec x(n), y(n);
      for (int i = 0; i < n; ++i) x(i) = nd(rng);
      for (int i = 0; i < n; ++i) y(i) = nd(rng);
      Vec w = wedge(x, y);
      w /= w.norm();
      worst = std::max(worst, bianchi(BivectorOp(f, w * w.transpose())).coeffs().cwiseAbs().maxCoeff());
    }
    Mat image(m * m, m * (m + 1) / 2);
    int col = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) {
        Mat e = Mat::Zero(m, m);
        e(a, b) = e(b, a) = 1.0;
        image.col(col++) = bianchi_projection(BivectorOp(f, e)).matrix().reshaped();
      }
    Eigen::JacobiSVD<Mat> svd(image);
    svd.setThreshold(1e-10);
    const int expected = n * (n - 1) * (n - 2) * (n - 3) / 24;
    require(o, svd.rank() == expected, "rank " + std::to_string(svd.rank()) + " for n = " + std::to_string(n));
  }
  require(o, worst <= 1e-10, "residual " + fmt("%.3g", worst));
  if (o.pass) o.detail = "max residual " + fmt("%.2g", worst) + ", ranks 1/5/15";
  return o;
}

Outcome thorpe() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> shift(-1.0, 4.0);
  int feasible = 0, infeasible = 0;
  double margin_gap = 0.0;
  for (int k = 0; k < 100; ++k) {
    const BivectorOp r = random_bianchi_free(4, rng, shift(rng));
    const Certificate a = certify_logged(r);
    const Certificate b = certify_dim4(r);
    g_infeasible.record(r, b);
    const std::string tag = " (case " + std::to_string(k) + ")";
    require(o, a.verdict == b.verdict, "verdicts differ" + tag);
    if (a.verdict == Verdict::Feasible && b.verdict == Verdict::Feasible) {
      margin_gap = std::max(margin_gap, std::abs(a.margin - b.margin));
    }
    const PlaneSample ps = min_sectional_sample(r, 100000, 1000 + static_cast<std::uint64_t>(k));
    if (a.verdict == Verdict::Infeasible) {
      ++infeasible;
      require(o, ps.sec < 0.0, "no negative plane for an infeasible operator" + tag);
    } else if (a.verdict == Verdict::Feasible) {
      ++feasible;
      require(o, ps.sec >= -1e-6, "negative plane for a feasible operator" + tag);
    } else {
      require(o, false, "undecided" + tag);
    }
  }
  require(o, margin_gap <= 1e-6, "margins differ by " + fmt("%.3g", margin_gap));
  if (o.pass) {
    o.detail = std::to_string(feasible) + " feasible, " + std::to_string(infeasible) + " infeasible, margin gap " +
               fmt("%.2g", margin_gap);
  }
  return o;
}

Outcome grove_ziller() {
  Outcome o;
  const GroupTriple cp2 = make_triple("CP_2");
  const double b = compute_slice_b(cp2).b;
  const GZHalfReport r = assemble_gz_half(cp2, 2.0 / std::sqrt(b));
  require(o, r.adk_residual <= 1e-12, "Ad_K residual " + fmt("%.3g", r.adk_residual));
  require(o, r.group_cert_valid && r.group_cert.verdict == Verdict::Feasible, "(G, L') not certified");
  require(o, r.boundary_metric_deviation <= 1e-10, "boundary metric off by " + fmt("%.3g", r.boundary_metric_deviation));
  require(o, r.passed, r.failures.empty() ? "assembly failed" : r.failures.front());
  if (o.pass) {
    o.detail = "b " + fmt("%.4g", b) + ", margin " + fmt("%.3g", r.group_cert.margin) + ", boundary deviation " +
               fmt("%.2g", r.boundary_metric_deviation);
  }
  return o;
}

Outcome cheeger() {
  Outcome o;
  std::string detail;
  for (const char* name : {"CP_2", "HP_2"}) {
    CheegerHalfOptions opts;
    opts.seed = 9;
    const CheegerHalfReport r = assemble_cheeger_half(make_triple(name), opts);
    const std::string n = name;
    require(o, r.a > 0.0, n + ": no strictly positive rung");
    require(o, r.sweep.size() == 45, n + ": sweep has " + std::to_string(r.sweep.size()) + " points");
    require(o, r.min_margin >= -1e-8, n + ": sweep margin " + fmt("%.3g", r.min_margin));
    require(o, r.plateau_deviation <= 1e-9, n + ": plateau deviation " + fmt("%.3g", r.plateau_deviation));
    require(o, r.passed, n + ": " + (r.failures.empty() ? "assembly failed" : r.failures.front()));
    for (const LadderRung& rung : r.ladder) {
      if (rung.cert.verdict == Verdict::Infeasible) ++g_infeasible.seen;
      if (rung.cert.verdict == Verdict::Infeasible && !rung.valid) ++g_infeasible.invalid;
    }
    detail += n + " min margin " + fmt("%.3g", r.min_margin) + "; ";
  }
  if (o.pass) o.detail = detail.substr(0, detail.size() - 2);
  return o;
}

Outcome fd_oracle() {
  Outcome o;
  const LieAlgebra so3 = make_algebra("so", 3);
  const MetricChart berger = group_chart(so3, scaled_metric(so3, Subspace(so3, Mat(Vec::Unit(3, 2))), 1.2));
  const double sec = fd_sectional(berger, Vec::Zero(3), Vec::Unit(3, 0), Vec::Unit(3, 2));
  require(o, std::abs(sec - 0.3) <= 1e-4, "Berger sec " + fmt("%.8f", sec));

  const GroupTriple cp2 = make_triple("CP_2");
  const double s = 2.0;
  const ProfileFunction f = make_profile(2.0 * std::sqrt(2.0), 3.0 * std::sqrt(2.0), 6.5);
  const HomogeneousQuotient hq = homogeneous_quotient(cp2, s);
  const Certificate cert = certify_logged(hq.quotient.R);
  double worst = 0.0;
  for (double t : {1.0, f.plateau_start() + 1.0}) {
    const DiskBundleResult d = disk_bundle_R(cp2, hq, cert.omega, f, t);
    const HalfChart hc = chart_for_half(cp2, s, f, t);
    const Mat c = d.horizontal.transpose() * hc.metric * hc.lifts;
    const int n = hc.chart.dim;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double fd = fd_sectional(hc.chart, hc.origin, Vec::Unit(n, i), Vec::Unit(n, j));
        worst = std::max(worst, std::abs(fd - sectional_curvature(d.R, c.col(i), c.col(j))));
      }
  }
  require(o, worst <= 1e-3, "CP_2 chart disagreement " + fmt("%.3g", worst));
  if (o.pass) o.detail = "Berger sec " + fmt("%.8f", sec) + ", CP_2 max disagreement " + fmt("%.2g", worst);
  return o;
}

Outcome dual_soundness() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> shift(-1.5, 2.5);
  std::uniform_int_distribution<int> dim(4, 5);
  int contradictions = 0;
  for (int k = 0; k < 1000; ++k) {
    const BivectorOp r = random_bianchi_free(dim(rng), rng, shift(rng));
    CertifyOptions cold, warm;
    cold.seed = static_cast<std::uint64_t>(k);
    warm.seed = static_cast<std::uint64_t>(k) + 1;
    std::normal_distribution<double> nd;
    Vec w(r.frame().quad_count());
    for (int i = 0; i < w.size(); ++i) w(i) = nd(rng);
    warm.warm_start = FourForm(r.frame(), w);
    std::vector<Verdict> verdicts = {certify_logged(r, cold).verdict, certify_logged(r, warm).verdict};
    if (r.dim() == 4) {
      const Certificate c4 = certify_dim4(r);
      g_infeasible.record(r, c4);
      verdicts.push_back(c4.verdict);
    }
    bool f = false, inf = false;
    for (Verdict v : verdicts) {
      f = f || v == Verdict::Feasible;
      inf = inf || v == Verdict::Infeasible;
    }
    if (f && inf) ++contradictions;
  }
  require(o, contradictions == 0, std::to_string(contradictions) + " contradictory verdicts");
  require(o, g_infeasible.invalid == 0,
          std::to_string(g_infeasible.invalid) + " of " + std::to_string(g_infeasible.seen) + " Infeasible invalid");
  if (o.pass) {
    o.detail = "1000 runs, 0 contradictions, " + std::to_string(g_infeasible.seen) + " Infeasible certificates all valid";
  }
  return o;
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"bi-invariant operators are PSD", 1.0, biinvariant_psd},
      {"scale-up threshold at 4/3", 5.0, scale_up_threshold},
      {"semi-Riemannian and Cheeger paths agree", 10.0, two_path},
      {"explicit modifier and two-Gram decomposition", 10.0, explicit_modifier},
      {"submersion transfer", 10.0, submersion_transfer},
      {"Bianchi projector suite", 10.0, bianchi_suite},
      {"dimension-4 consistency with sectional curvature", 60.0, thorpe},
      {"Grove-Ziller half for CP_2", 10.0, grove_ziller},
      {"Cheeger halves for CP_2 and HP_2", 300.0, cheeger},
      {"finite-difference oracle agreement", 60.0, fd_oracle},
      {"dual certificate soundness", 60.0, dual_soundness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > criteria[i].budget) o = {false, "over time budget (" + fmt("%.0f s", criteria[i].budget) + ")"};
    if (!o.pass) ++failures;
    std::printf("[%s] %2zu %-50s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
