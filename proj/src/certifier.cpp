#include "snn/certifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>
#include <thread>

namespace snn {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Undecided: return "undecided";
  }
  return "undecided";
}

double psd_epsilon(const BivectorOp& R, double tol) {
  double norm = 0.0;
  if (R.size() > 0) {
    const Vec ev = linalg::eigenvalues(R.matrix());
    norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  return tol * std::max(norm, 1.0);
}

BivectorOp finalize_witness(const Mat& x, const BivectorFrame& frame) {
  const int n = frame.size();
  const BivectorOp raw(frame, x);
  Mat s = (raw - fourform_to_operator(bianchi(raw))).matrix();
  const double tr = s.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    s = Mat::Identity(n, n);
  } else {
    s /= tr;
  }
  const double low = linalg::min_eigenvalue(s);
  if (low < 0.0) {
    const double theta = -low / (1.0 / n - low);
    s = (1.0 - theta) * s + theta * Mat::Identity(n, n) / n;
  }
  s /= s.trace();
  return {frame, s, "witness"};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Entry {
  int a, b;
  double v;
};

// Constraint matrices: A_0 = Id, A_q = O(tau_q), stored sparsely (both halves).
std::vector<std::vector<Entry>> constraint_matrices(const BivectorFrame& f) {
  std::vector<std::vector<Entry>> out;
  std::vector<Entry> id;
  for (int a = 0; a < f.size(); ++a) id.push_back({a, a, 1.0});
  out.push_back(std::move(id));
  for (int q = 0; q < f.quad_count(); ++q) {
    const auto& [i, j, k, l] = f.quad(q);
    std::vector<Entry> e;
    const auto add = [&](int p1, int p2, double v) {
      e.push_back({p1, p2, v});
      e.push_back({p2, p1, v});
    };
    add(f.index(i, j), f.index(k, l), 1.0);
    add(f.index(i, k), f.index(j, l), -1.0);
    add(f.index(i, l), f.index(j, k), 1.0);
    out.push_back(std::move(e));
  }
  return out;
}

Vec apply_A(const std::vector<std::vector<Entry>>& A, const Mat& w) {
  Vec r(static_cast<Eigen::Index>(A.size()));
  for (std::size_t k = 0; k < A.size(); ++k) {
    double s = 0.0;
    for (const Entry& e : A[k]) s += e.v * w(e.a, e.b);
    r(static_cast<Eigen::Index>(k)) = s;
  }
  return r;
}

Mat apply_At(const std::vector<std::vector<Entry>>& A, const Vec& y, int n) {
  Mat m = Mat::Zero(n, n);
  for (std::size_t k = 0; k < A.size(); ++k)
    for (const Entry& e : A[k]) m(e.a, e.b) += y(static_cast<Eigen::Index>(k)) * e.v;
  return m;
}

// Largest alpha with X + alpha D >= 0 (infinity if D >= 0).
double max_step(const Mat& x, const Mat& d) {
  const Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Mat linv = llt.matrixL().solve(Mat::Identity(x.rows(), x.cols()));
  const double low = linalg::min_eigenvalue(linalg::symmetrized(linv * d * linv.transpose()));
  return low >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / low;
}

struct IpmResult {
  bool ok = false;
  Vec y;  // y(0): margin of the scaled problem, y(1..): minus the 4-form coefficients
  Mat x;
  int iterations = 0;
};

IpmResult interior_point(const Mat& c, const std::vector<std::vector<Entry>>& A, int max_iter) {
  const int n = static_cast<int>(c.rows());
  const int m = static_cast<int>(A.size());
  Vec b = Vec::Zero(m);
  b(0) = 1.0;

  IpmResult res;
  res.x = Mat::Identity(n, n) / n;
  res.y = Vec::Zero(m);
  res.y(0) = linalg::min_eigenvalue(c) - 1.0;
  Mat& x = res.x;
  Vec& y = res.y;
  Mat z = c - apply_At(A, y, n);

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    const double mu = x.cwiseProduct(z).sum() / n;
    const double pobj = c.cwiseProduct(x).sum();
    const double dobj = y(0);
    const Vec rp = b - apply_A(A, x);
    const Mat rd = c - z - apply_At(A, y, n);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (gap < 1e-13 && rp.lpNorm<Eigen::Infinity>() < 1e-13 && linalg::max_abs(rd) < 1e-13) {
      res.ok = true;
      break;
    }
    if (mu < 1e-15) {
      res.ok = true;
      break;
    }

    const Eigen::LLT<Mat> zl(z);
    if (zl.info() != Eigen::Success) break;
    const Mat zinv = zl.solve(Mat::Identity(n, n));

    Mat schur(m, m);
    for (int k = 0; k < m; ++k)
      for (int l = k; l < m; ++l) {
        double s = 0.0;
        for (const Entry& e1 : A[static_cast<std::size_t>(k)])
          for (const Entry& e2 : A[static_cast<std::size_t>(l)]) s += e1.v * e2.v * x(e1.b, e2.a) * zinv(e2.b, e1.a);
        schur(k, l) = s;
        schur(l, k) = s;
      }
    const Eigen::LLT<Mat> ml(schur);
    if (ml.info() != Eigen::Success) break;

    const Mat xrdz = x * rd * zinv;
    const auto direction = [&](const Mat& rc, Vec& dy, Mat& dx, Mat& dz) {
      dy = ml.solve(rp - apply_A(A, rc - xrdz));
      dz = rd - apply_At(A, dy, n);
      dx = linalg::symmetrized(rc - x * dz * zinv);
    };

    Vec dy;
    Mat dx, dz;
    direction(-x, dy, dx, dz);
    const double ap = std::min(1.0, max_step(x, dx));
    const double ad = std::min(1.0, max_step(z, dz));
    const double mu_aff = (x + ap * dx).cwiseProduct(z + ad * dz).sum() / n;
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    const Mat rc = sigma * mu * zinv - x - dx * dz * zinv;
    direction(rc, dy, dx, dz);
    const double sp = std::min(1.0, 0.98 * max_step(x, dx));
    const double sd = std::min(1.0, 0.98 * max_step(z, dz));
    if (!(sp > 0.0) || !(sd > 0.0)) break;
    x = linalg::symmetrized(x + sp * dx);
    y += sd * dy;
    z = linalg::symmetrized(z + sd * dz);
    res.ok = true;
  }
  return res;
}

FourForm omega_from_y(const BivectorFrame& f, const Vec& y, double scale) {
  Vec c(f.quad_count());
  for (int q = 0; q < f.quad_count(); ++q) c(q) = -y(q + 1) * scale;
  return {f, c};
}

double margin_of(const BivectorOp& R, const FourForm& omega) {
  return (R + fourform_to_operator(omega, R.frame())).min_eigenvalue();
}

// Dykstra projections between the PSD cone and R + eps/2 Id + 4-forms.
std::optional<FourForm> dykstra_feasible(const BivectorOp& R, double eps, int iters, int& used) {
  const int n = R.size();
  const Mat shifted = R.matrix() + 0.5 * eps * Mat::Identity(n, n);
  const auto proj_aff = [&](const Mat& w) -> Mat {
    const BivectorOp d(R.frame(), w - shifted);
    return shifted + fourform_to_operator(bianchi(d)).matrix();
  };
  const auto proj_psd = [](const Mat& w) -> Mat {
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::symmetrized(w));
    const Vec ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  };
  Mat x = shifted, p = Mat::Zero(n, n), q = Mat::Zero(n, n);
  for (int it = 0; it < iters; ++it) {
    ++used;
    const Mat y = proj_psd(x + p);
    p = x + p - y;
    const Mat xn = proj_aff(y + q);
    q = y + q - xn;
    x = xn;
    if (linalg::min_eigenvalue(x) >= -0.5 * eps) {
      return bianchi(BivectorOp(R.frame(), x - shifted));
    }
  }
  return std::nullopt;
}

Certificate small_dimension(const BivectorOp& R, const CertifyOptions& opts, Clock::time_point t0) {
  Certificate c;
  c.tol = opts.tol;
  c.eps = psd_epsilon(R, opts.tol);
  c.method = "eigenvalue";
  c.iterations = 1;
  c.omega = FourForm::zero(R.frame());
  if (R.size() == 0) {
    c.verdict = Verdict::Feasible;
    c.wall_time = seconds_since(t0);
    return c;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(R.matrix());
  const double low = es.eigenvalues()(0);
  if (low >= -c.eps) {
    c.verdict = Verdict::Feasible;
    c.margin = low;
  } else {
    const Vec v = es.eigenvectors().col(0);
    c.verdict = Verdict::Infeasible;
    c.witness = finalize_witness(v * v.transpose(), R.frame());
    c.bound = R.dot(c.witness);
  }
  c.wall_time = seconds_since(t0);
  return c;
}

} // namespace

Certificate certify(const BivectorOp& R, const CertifyOptions& opts) {
  const auto t0 = Clock::now();
  if (R.dim() <= 3) return small_dimension(R, opts, t0);

  Certificate cert;
  cert.tol = opts.tol;
  cert.eps = psd_epsilon(R, opts.tol);
  cert.method = "interior-point";
  const BivectorFrame& f = R.frame();
  const double scale = cert.eps / opts.tol;

  const auto A = constraint_matrices(f);
  const IpmResult ipm = interior_point(R.matrix() / scale, A, std::min(opts.budget, 200));
  cert.iterations = ipm.iterations;

  FourForm omega = omega_from_y(f, ipm.y, scale);
  double margin = margin_of(R, omega);
  if (!std::isfinite(margin)) {
    omega = FourForm::zero(f);
    margin = R.min_eigenvalue();
  }
  const double plain = R.min_eigenvalue();
  if (plain >= margin - 1e-12 * scale) {
    omega = FourForm::zero(f);
    margin = plain;
  }
  if (opts.warm_start) {
    const double warm = margin_of(R, *opts.warm_start);
    if (warm > margin) {
      omega = *opts.warm_start;
      margin = warm;
    }
  }

  if (margin >= -cert.eps) {
    cert.verdict = Verdict::Feasible;
    cert.omega = omega;
    cert.margin = margin;
    cert.wall_time = seconds_since(t0);
    return cert;
  }

  const BivectorOp witness = finalize_witness(ipm.x, f);
  const double bound = R.dot(witness);
  if (bound < -cert.eps) {
    cert.verdict = Verdict::Infeasible;
    cert.witness = witness;
    cert.bound = bound;
    cert.wall_time = seconds_since(t0);
    return cert;
  }

  int used = 0;
  const int remaining = std::max(0, opts.budget - cert.iterations);
  if (auto w = dykstra_feasible(R, cert.eps, remaining, used)) {
    const double m = margin_of(R, *w);
    if (m >= -cert.eps) {
      cert.verdict = Verdict::Feasible;
      cert.omega = *w;
      cert.margin = m;
      cert.method = "interior-point+dykstra";
      cert.iterations += used;
      cert.wall_time = seconds_since(t0);
      return cert;
    }
  }
  cert.iterations += used;
  cert.verdict = Verdict::Undecided;
  cert.omega = omega;
  cert.margin = margin;
  cert.witness = witness;
  cert.bound = bound;
  cert.gap = bound - margin;
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate certify_dim4(const BivectorOp& R, const CertifyOptions& opts) {
  if (R.dim() != 4) throw PreconditionError("certify_dim4: needs a 4-dimensional frame");
  const auto t0 = Clock::now();
  Certificate cert;
  cert.tol = opts.tol;
  cert.eps = psd_epsilon(R, opts.tol);
  cert.method = "golden-section";
  const BivectorOp star = hodge_star4();
  const double scale = cert.eps / opts.tol;
  const auto phi = [&](double x) { return (R + star * x).min_eigenvalue(); };

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -2.0 * scale - 1.0, hi = 2.0 * scale + 1.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  int it = 0;
  while (hi - lo > 1e-13 * scale && it < opts.budget) {
    ++it;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = phi(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = phi(x1);
    }
  }
  cert.iterations = it;
  double xbest = 0.5 * (lo + hi);
  double margin = phi(xbest);
  if (phi(0.0) >= margin - 1e-12 * scale) {
    xbest = 0.0;
    margin = phi(0.0);
  }

  if (margin >= -cert.eps) {
    cert.verdict = Verdict::Feasible;
    cert.omega = volume_form4() * xbest;
    cert.margin = margin;
    cert.wall_time = seconds_since(t0);
    return cert;
  }

  // Convex combination of bottom eigenvectors on both sides of the maximizer
  // with zero pairing against the star.
  const auto bottom = [&](double x) -> Vec {
    Eigen::SelfAdjointEigenSolver<Mat> es((R + star * x).matrix());
    return es.eigenvectors().col(0);
  };
  BivectorOp best;
  double best_bound = std::numeric_limits<double>::infinity();
  for (double delta = 1e-4 * scale; delta > 1e-12 * scale; delta *= 0.1) {
    const Vec vp = bottom(xbest + delta), vm = bottom(xbest - delta);
    const double hp = star.quadratic(vp), hm = star.quadratic(vm);
    Mat s;
    if (hp <= 0.0 && hm >= 0.0 && hm - hp > 0.0) {
      const double theta = hm / (hm - hp);
      s = theta * vp * vp.transpose() + (1.0 - theta) * vm * vm.transpose();
    } else {
      const Vec v = bottom(xbest);
      s = v * v.transpose();
    }
    const BivectorOp w = finalize_witness(s, R.frame());
    const double bnd = R.dot(w);
    if (bnd < best_bound) {
      best_bound = bnd;
      best = w;
    }
    if (best_bound < -cert.eps && best_bound - margin < 1e-9 * scale) break;
  }
  if (best_bound < -cert.eps) {
    cert.verdict = Verdict::Infeasible;
    cert.witness = best;
    cert.bound = best_bound;
  } else {
    cert.verdict = Verdict::Undecided;
    cert.omega = volume_form4() * xbest;
    cert.margin = margin;
    cert.witness = best;
    cert.bound = best_bound;
    cert.gap = best_bound - margin;
  }
  cert.wall_time = seconds_since(t0);
  return cert;
}

bool validate_certificate(const BivectorOp& R, const Certificate& cert, std::string* reason) {
  const auto fail = [&](const std::string& why) {
    if (reason) *reason = why;
    return false;
  };
  const double eps = psd_epsilon(R, cert.tol);
  const double scale = eps / cert.tol;
  if (std::abs(eps - cert.eps) > 1e-12 * scale) return fail("psd tolerance does not match the operator");
  switch (cert.verdict) {
    case Verdict::Feasible: {
      if (cert.omega.dim() != R.dim()) return fail("4-form frame does not match the operator");
      if (!cert.omega.coeffs().allFinite()) return fail("4-form has non-finite coefficients");
      const double m = margin_of(R, cert.omega);
      if (std::abs(m - cert.margin) > 1e-9 * scale) return fail("reported margin differs from recomputed margin");
      if (m < -eps) return fail("margin below the PSD tolerance");
      return true;
    }
    case Verdict::Infeasible: {
      const BivectorOp& s = cert.witness;
      if (s.dim() != R.dim()) return fail("witness frame does not match the operator");
      if (!s.matrix().allFinite()) return fail("witness has non-finite entries");
      if (linalg::min_eigenvalue(s.matrix()) < -1e-10) return fail("witness is not PSD");
      if (std::abs(s.matrix().trace() - 1.0) > 1e-12) return fail("witness trace is not 1");
      const FourForm proj = bianchi(s);
      if (proj.coeffs().size() > 0 && 6.0 * proj.coeffs().lpNorm<Eigen::Infinity>() > 1e-10) {
        return fail("witness is not orthogonal to the 4-forms");
      }
      const double bnd = R.dot(s);
      if (std::abs(bnd - cert.bound) > 1e-9 * scale) return fail("reported bound differs from <R,S>");
      if (!(bnd < -eps)) return fail("bound is not below the PSD tolerance");
      return true;
    }
    case Verdict::Undecided:
      if (!std::isfinite(cert.gap) || cert.gap < -1e-9 * scale) return fail("undecided certificate with invalid gap");
      return true;
  }
  return fail("unknown verdict");
}

PlaneSample min_sectional_sample(const BivectorOp& R, int samples, std::uint64_t seed) {
  const int n = R.dim();
  if (n < 2) throw PreconditionError("min_sectional_sample: needs dimension >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const auto gauss = [&] {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
  };
  const auto orthonormal_pair = [](Vec& x, Vec& y) {
    x.normalize();
    y -= y.dot(x) * x;
    y.normalize();
  };

  std::vector<PlaneSample> best;
  const std::size_t keep = 5;
  for (int s = 0; s < samples; ++s) {
    Vec x = gauss(), y = gauss();
    orthonormal_pair(x, y);
    if (!x.allFinite() || !y.allFinite()) continue;
    const double sec = R.quadratic(wedge(x, y));
    if (best.size() < keep || sec < best.back().sec) {
      best.push_back({sec, x, y});
      std::sort(best.begin(), best.end(), [](const PlaneSample& a, const PlaneSample& b) { return a.sec < b.sec; });
      if (best.size() > keep) best.pop_back();
    }
  }

  // Alternating minimization: for fixed x, y -> <R(x^y), x^y> is a quadratic form.
  const auto refine_side = [&](const Vec& x) -> Vec {
    Mat wx(R.size(), n);
    for (int j = 0; j < n; ++j) wx.col(j) = wedge(x, Vec::Unit(n, j));
    const Mat k = wx.transpose() * R.matrix() * wx;
    const Mat perp = linalg::null_space(x.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(linalg::symmetrized(perp.transpose() * k * perp));
    return perp * es.eigenvectors().col(0);
  };
  PlaneSample out = best.empty() ? PlaneSample{0.0, Vec::Unit(n, 0), Vec::Unit(n, 1)} : best.front();
  if (best.empty()) out.sec = R.quadratic(wedge(out.x, out.y));
  for (PlaneSample p : best) {
    for (int it = 0; it < 100; ++it) {
      p.y = refine_side(p.x);
      p.x = refine_side(p.y);
      orthonormal_pair(p.x, p.y);
      const double sec = R.quadratic(wedge(p.x, p.y));
      const bool stalled = p.sec - sec < 1e-15;
      p.sec = std::min(p.sec, sec);
      if (stalled) break;
    }
    p.sec = R.quadratic(wedge(p.x, p.y));
    if (p.sec < out.sec) out = p;
  }
  return out;
}

ScanReport scan_threshold(const std::function<FamilyPoint(double)>& family, double t_lo, double t_hi, double step,
                          const CertifyOptions& opts, double width) {
  if (!(step > 0.0) || !(t_hi >= t_lo)) throw PreconditionError("scan_threshold: needs t_lo <= t_hi and step > 0");
  const auto eval = [&](double t) {
    FamilyPoint p = family(t);
    CertifyOptions o = opts;
    if (p.warm_start) o.warm_start = p.warm_start;
    return ScanPoint{t, certify(p.R, o)};
  };

  std::vector<double> ts;
  const int count = static_cast<int>(std::floor((t_hi - t_lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) ts.push_back(t_lo + i * step);

  ScanReport rep;
  rep.grid.resize(ts.size());
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < ts.size(); start += workers) {
    std::vector<std::future<ScanPoint>> jobs;
    for (std::size_t i = start; i < std::min(ts.size(), start + workers); ++i) {
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, eval, ts[i]));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) rep.grid[start + i] = jobs[i].get();
  }

  // Expected pattern: Feasible ... Feasible Infeasible ... Infeasible.
  std::optional<std::size_t> first_infeasible;
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    const Verdict v = rep.grid[i].cert.verdict;
    if (v == Verdict::Undecided) {
      rep.monotone = false;
      rep.warnings.push_back("undecided verdict at t = " + std::to_string(rep.grid[i].t));
    } else if (v == Verdict::Infeasible && !first_infeasible) {
      first_infeasible = i;
    } else if (v == Verdict::Feasible && first_infeasible) {
      rep.monotone = false;
      rep.warnings.push_back("feasible verdict after an infeasible one at t = " + std::to_string(rep.grid[i].t));
    }
  }
  if (!rep.monotone || !first_infeasible || *first_infeasible == 0) {
    if (first_infeasible && *first_infeasible == 0) rep.warnings.push_back("infeasible at the first grid point");
    return rep;
  }

  double lo = rep.grid[*first_infeasible - 1].t, hi = rep.grid[*first_infeasible].t;
  while (hi - lo > width) {
    const ScanPoint mid = eval(0.5 * (lo + hi));
    rep.refinement.push_back(mid);
    if (mid.cert.verdict == Verdict::Feasible) {
      lo = mid.t;
    } else if (mid.cert.verdict == Verdict::Infeasible) {
      hi = mid.t;
    } else {
      rep.warnings.push_back("undecided verdict during bisection at t = " + std::to_string(mid.t));
      break;
    }
  }
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.threshold = 0.5 * (lo + hi);
  return rep;
}

} // namespace snn
