#include "snn/scenario.hpp"

#include "snn/cohom1.hpp"
#include "snn/fdoracle.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace snn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + escape_token(key); }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void expect_object(const Json& j, const std::string& ptr, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw SchemaError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw SchemaError(child(ptr, key), "unknown key");
  }
}

const Json& require(const Json& j, const std::string& ptr, const std::string& key) {
  if (!j.contains(key)) throw SchemaError(child(ptr, key), "missing required key");
  return j.at(key);
}

double get_number(const Json& j, const std::string& ptr, const std::string& key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(child(ptr, key), "missing required key");
  }
  const Json& v = j.at(key);
  if (!v.is_number()) throw SchemaError(child(ptr, key), "expected a number");
  return v.get<double>();
}

int get_int(const Json& j, const std::string& ptr, const std::string& key, std::optional<int> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(child(ptr, key), "missing required key");
  }
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw SchemaError(child(ptr, key), "expected an integer");
  return v.get<int>();
}

std::string get_string(const Json& j, const std::string& ptr, const std::string& key,
                       std::optional<std::string> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(child(ptr, key), "missing required key");
  }
  const Json& v = j.at(key);
  if (!v.is_string()) throw SchemaError(child(ptr, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const Json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw SchemaError(child(ptr, i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Mat get_matrix(const Json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(get_numbers(v[i], child(ptr, i)));
  const std::size_t c = rows.empty() ? 0 : rows[0].size();
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != c) throw SchemaError(child(ptr, i), "ragged matrix row");
    for (std::size_t k = 0; k < c; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Descriptors

const std::set<std::string> kConstructions = {"biinvariant",    "scaled_up",   "subgroup_scaled", "cheeger",
                                              "homogeneous_quotient", "orbit_quotient", "disk_bundle",
                                              "gz_half",        "cheeger_half", "explicit",        "random"};
const std::set<std::string> kTasks = {"build", "certify", "scan", "verify-lemma"};

LieAlgebra parse_algebra(const Json& j, const std::string& ptr) {
  if (j.contains("structure_constants")) {
    expect_object(j, ptr, {"structure_constants", "q", "labels"});
    const std::string sp = child(ptr, "structure_constants");
    const std::vector<double> c = get_numbers(j.at("structure_constants"), sp);
    const auto n = static_cast<int>(std::lround(std::cbrt(static_cast<double>(c.size()))));
    if (n <= 0 || static_cast<std::size_t>(n * n * n) != c.size()) throw SchemaError(sp, "length must be dim^3");
    const Mat q = j.contains("q") ? get_matrix(j.at("q"), child(ptr, "q")) : Mat(Mat::Identity(n, n));
    if (q.rows() != n || q.cols() != n) throw SchemaError(child(ptr, "q"), "must be dim x dim");
    std::vector<std::string> labels;
    if (j.contains("labels")) {
      const Json& l = j.at("labels");
      if (!l.is_array() || static_cast<int>(l.size()) != n) throw SchemaError(child(ptr, "labels"), "need dim strings");
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_string()) throw SchemaError(child(child(ptr, "labels"), i), "expected a string");
        labels.push_back(l[i].get<std::string>());
      }
    }
    try {
      return LieAlgebra::from_structure_constants(n, c, q, labels);
    } catch (const std::exception& e) {
      throw SchemaError(sp, e.what());
    }
  }
  expect_object(j, ptr, {"family", "n", "scale"});
  const std::string fam = get_string(j, ptr, "family");
  const int n = get_int(j, ptr, "n");
  const double scale = get_number(j, ptr, "scale", 1.0);
  try {
    return make_algebra(fam, n, scale);
  } catch (const std::exception& e) {
    throw SchemaError(child(ptr, "family"), e.what());
  }
}

Subspace parse_subalgebra(const LieAlgebra& g, const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"coordinates", "vectors", "matrices"});
  if (j.size() != 1) throw SchemaError(ptr, "give exactly one of coordinates, vectors, matrices");
  Mat cols;
  if (j.contains("coordinates")) {
    const std::string cp = child(ptr, "coordinates");
    const Json& c = j.at("coordinates");
    if (!c.is_array() || c.empty()) throw SchemaError(cp, "expected a non-empty array of basis indices");
    cols = Mat::Zero(g.dim(), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c[i].is_number_integer() || c[i].get<int>() < 0 || c[i].get<int>() >= g.dim()) {
        throw SchemaError(child(cp, i), "basis index out of range");
      }
      cols(c[i].get<int>(), static_cast<Eigen::Index>(i)) = 1.0;
    }
  } else if (j.contains("vectors")) {
    const Mat rows = get_matrix(j.at("vectors"), child(ptr, "vectors"));
    if (rows.cols() != g.dim()) throw SchemaError(child(ptr, "vectors"), "each vector needs dim entries");
    cols = rows.transpose();
  } else {
    const std::string mp = child(ptr, "matrices");
    const Json& ms = j.at("matrices");
    if (!ms.is_array() || ms.empty()) throw SchemaError(mp, "expected a non-empty array");
    cols = Mat(g.dim(), static_cast<Eigen::Index>(ms.size()));
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string ip = child(mp, i);
      expect_object(ms[i], ip, {"re", "im"});
      const Mat re = get_matrix(require(ms[i], ip, "re"), child(ip, "re"));
      const Mat im = ms[i].contains("im") ? get_matrix(ms[i].at("im"), child(ip, "im")) : Mat(Mat::Zero(re.rows(), re.cols()));
      if (im.rows() != re.rows() || im.cols() != re.cols()) throw SchemaError(child(ip, "im"), "shape differs from re");
      CMat m(re.rows(), re.cols());
      m.real() = re;
      m.imag() = im;
      try {
        cols.col(static_cast<Eigen::Index>(i)) = g.coords(m);
      } catch (const std::exception& e) {
        throw SchemaError(ip, e.what());
      }
    }
  }
  Subspace s(g, cols);
  if (s.dim() != cols.cols()) throw SchemaError(ptr, "vectors are linearly dependent");
  if (!s.is_subalgebra(g, 1e-9)) throw SchemaError(ptr, "span is not a subalgebra");
  return s;
}

GroupTriple parse_triple(const Json& j, const std::string& ptr) {
  if (!j.is_string()) throw SchemaError(ptr, "expected a triple name (CP_n, HP_n, toy, stiefel)");
  try {
    return make_triple(j.get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(ptr, e.what());
  }
}

ProfileFunction parse_profile(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"kind", "a", "t0", "T"});
  const std::string kind = get_string(j, ptr, "kind");
  const double T = get_number(j, ptr, "T");
  if (!(T > 0.0)) throw SchemaError(child(ptr, "T"), "must be positive");
  try {
    if (kind == "plateau") return make_profile(get_number(j, ptr, "a"), get_number(j, ptr, "t0"), T);
    if (kind == "sine") return ProfileFunction::sine(T);
    if (kind == "linear") return ProfileFunction::linear(T);
  } catch (const PreconditionError& e) {
    throw SchemaError(ptr, e.what());
  }
  throw SchemaError(child(ptr, "kind"), "unknown profile kind (plateau, sine, linear)");
}

// ---------------------------------------------------------------------------
// Constructions

struct Built {
  std::optional<BivectorOp> R;
  std::optional<FourForm> modifier;  ///< explicit modifier when the construction has one
  std::string frame = "orthonormal";
  Json info = Json::object();
  Json checks = Json::object();      ///< lemma checks: name -> {value, limit, passed}
  bool checks_passed = true;
};

void add_check(Built& b, const std::string& name, double value, double limit, bool passed) {
  b.checks[name] = {{"value", value}, {"limit", limit}, {"passed", passed}};
  b.checks_passed = b.checks_passed && passed;
}

struct Context {
  double tol = 1e-8;
  int budget = 10000;
  double width = 1e-6;
  std::optional<std::uint64_t> seed;
  bool lemma = false;  ///< compute lemma checks
};

const std::set<std::string>& params_for(const std::string& name) {
  static const std::map<std::string, std::set<std::string>> table = {
      {"biinvariant", {"algebra"}},
      {"scaled_up", {"algebra", "subalgebra", "t"}},
      {"subgroup_scaled", {"algebra", "subalgebra", "t"}},
      {"cheeger", {"algebra", "subalgebra", "t"}},
      {"homogeneous_quotient", {"algebra", "subgroup"}},
      {"orbit_quotient", {"triple", "p_scale"}},
      {"disk_bundle", {"triple", "p_scale", "profile", "t"}},
      {"gz_half", {"triple", "a", "a_times_sqrt_b", "t0_factor", "tail"}},
      {"cheeger_half", {"triple", "ladder", "t0_factor", "tail", "geometric_points", "plateau_points"}},
      {"explicit", {"operator"}},
      {"random", {"dim", "shift"}}};
  return table.at(name);
}

bool is_randomized(const std::string& construction, const std::string& task) {
  return construction == "random" || construction == "disk_bundle" || construction == "cheeger_half" ||
         (task == "verify-lemma" && construction == "explicit");
}

bool has_operator(const std::string& construction) {
  return construction != "gz_half" && construction != "cheeger_half";
}

double p_scale_param(const GroupTriple& tr, const Json& p, const std::string& ptr, std::uint64_t seed) {
  if (!p.contains("p_scale")) return 1.0;
  const Json& v = p.at("p_scale");
  if (v.is_string() && v.get<std::string>() == "round") {
    try {
      return make_round_L(tr, seed).p_scale;
    } catch (const InvariantError& e) {
      throw SchemaError(child(ptr, "p_scale"), e.what());
    }
  }
  if (!v.is_number() || !(v.get<double>() > 0.0)) throw SchemaError(child(ptr, "p_scale"), "expected a positive number or \"round\"");
  return v.get<double>();
}

Built build(const std::string& name, const Json& p, const std::string& ptr, const Context& ctx) {
  Built b;
  const std::uint64_t seed = ctx.seed.value_or(0);
  if (name == "biinvariant") {
    const LieAlgebra g = parse_algebra(require(p, ptr, "algebra"), child(ptr, "algebra"));
    b.R = biinvariant_R(g);
    b.info["algebra_dim"] = g.dim();
    if (ctx.lemma) {
      const double lmin = b.R->min_eigenvalue();
      add_check(b, "lambda_min", lmin, -psd_epsilon(*b.R, ctx.tol), lmin >= -psd_epsilon(*b.R, ctx.tol));
    }
    return b;
  }
  if (name == "scaled_up" || name == "subgroup_scaled" || name == "cheeger") {
    const LieAlgebra g = parse_algebra(require(p, ptr, "algebra"), child(ptr, "algebra"));
    const Subspace s = parse_subalgebra(g, require(p, ptr, "subalgebra"), child(ptr, "subalgebra"));
    const double t = get_number(p, ptr, "t");
    try {
      if (name == "cheeger") {
        b.R = cheeger_R(g, s, t);
        if (ctx.lemma) {
          const double diff = linalg::max_abs(b.R->matrix() - subgroup_scaled_R(g, s, t).R.matrix());
          add_check(b, "two_path_difference", diff, 1e-10, diff <= 1e-10);
        }
      } else {
        const ScaleUpResult r = name == "scaled_up" ? scaled_up_R(g, s, t) : subgroup_scaled_R(g, s, t);
        b.R = r.R;
        b.modifier = r.omega;
        if (ctx.lemma) {
          const double lmin = (r.R + fourform_to_operator(r.omega)).min_eigenvalue();
          const double eps = psd_epsilon(r.R, ctx.tol);
          add_check(b, "modifier_lambda_min", lmin, -eps, lmin >= -eps);
        }
      }
    } catch (const PreconditionError& e) {
      throw SchemaError(ptr, e.what());
    }
    b.frame = "Q_t-orthonormal frame adapted to the subalgebra (complement first)";
    b.info["t"] = t;
    return b;
  }
  if (name == "homogeneous_quotient") {
    const LieAlgebra g = parse_algebra(require(p, ptr, "algebra"), child(ptr, "algebra"));
    const Subspace h = parse_subalgebra(g, require(p, ptr, "subgroup"), child(ptr, "subgroup"));
    const Mat frame = linalg::orthonormalize(Mat::Identity(g.dim(), g.dim()), g.q());
    const Mat qf = orthogonal_complement(g, h).basis();
    const SubmersionResult res = submersion_R(homogeneous_submersion(g, biinvariant_R(g), frame, h, qf));
    b.R = res.R;
    b.modifier = res.omega;
    b.frame = "Q-orthonormal complement of the subgroup";
    if (ctx.lemma) {
      const double lmin = (res.R + fourform_to_operator(res.omega)).min_eigenvalue();
      const double eps = psd_epsilon(res.R, ctx.tol);
      add_check(b, "pushed_modifier_lambda_min", lmin, -eps, lmin >= -eps);
    }
    return b;
  }
  if (name == "orbit_quotient" || name == "disk_bundle") {
    const GroupTriple tr = parse_triple(require(p, ptr, "triple"), child(ptr, "triple"));
    const double ps = p_scale_param(tr, p, ptr, seed);
    const HomogeneousQuotient hq = homogeneous_quotient(tr, ps);
    b.info["p_scale"] = ps;
    if (name == "orbit_quotient") {
      b.R = hq.quotient.R;
      b.modifier = hq.quotient.omega;
      b.frame = "L-orthonormal basis of m + p (m first)";
      if (ctx.lemma) {
        const double lmin = (hq.quotient.R + fourform_to_operator(hq.quotient.omega)).min_eigenvalue();
        const double eps = psd_epsilon(hq.quotient.R, ctx.tol);
        add_check(b, "pushed_modifier_lambda_min", lmin, -eps, lmin >= -eps);
      }
      return b;
    }
    const ProfileFunction f = parse_profile(require(p, ptr, "profile"), child(ptr, "profile"));
    const double t = get_number(p, ptr, "t");
    if (!(t > 0.0 && t <= f.domain_end())) throw SchemaError(child(ptr, "t"), "outside (0, T]");
    DiskBundleOptions o;
    o.seed = seed;
    const DiskBundleResult d = disk_bundle_R(tr, hq, hq.quotient.omega, f, t, o);
    b.R = d.R;
    b.modifier = d.omega;
    b.frame = "orthonormal horizontal frame (m, p, d/dt)";
    b.info["t"] = t;
    b.info["margin"] = d.margin;
    b.info["chain_slack"] = d.chain_slack;
    if (ctx.lemma) {
      const double eps = psd_epsilon(d.R, ctx.tol);
      add_check(b, "modified_lambda_min", d.margin, -eps, d.margin >= -eps);
      add_check(b, "chain_slack", d.chain_slack, -eps, d.chain_slack >= -eps);
      const HalfChart hc = chart_for_half(tr, ps, f, t);
      const Mat c = d.horizontal.transpose() * d.metric * hc.lifts;
      double worst = 0.0;
      const int dim = hc.chart.dim;
      for (int i = 0; i < dim; ++i)
        for (int k = i + 1; k < dim; ++k) {
          const Vec ei = Vec::Unit(dim, i), ek = Vec::Unit(dim, k);
          worst = std::max(worst, std::abs(fd_sectional(hc.chart, hc.origin, ei, ek) -
                                           sectional_curvature(d.R, c.col(i), c.col(k))));
        }
      add_check(b, "fd_chart_agreement", worst, 1e-3, worst <= 1e-3);
    }
    return b;
  }
  if (name == "gz_half") {
    const GroupTriple tr = parse_triple(require(p, ptr, "triple"), child(ptr, "triple"));
    if (p.contains("a") == p.contains("a_times_sqrt_b")) throw SchemaError(ptr, "give exactly one of a, a_times_sqrt_b");
    const double bb = compute_slice_b(tr).b;
    const double a = p.contains("a") ? get_number(p, ptr, "a") : get_number(p, ptr, "a_times_sqrt_b") / std::sqrt(bb);
    GZHalfOptions o;
    o.t0_factor = get_number(p, ptr, "t0_factor", o.t0_factor);
    o.tail = get_number(p, ptr, "tail", o.tail);
    o.cert.tol = ctx.tol;
    o.cert.budget = ctx.budget;
    o.cert.seed = seed;
    GZHalfReport r;
    try {
      r = assemble_gz_half(tr, a, o);
    } catch (const PreconditionError& e) {
      throw SchemaError(ptr, e.what());
    }
    b.info = {{"b", r.b}, {"a", r.a}, {"e", r.e}, {"failures", r.failures},
              {"group_certificate", certificate_to_json(r.group_cert, seed)}};
    add_check(b, "adk_residual", r.adk_residual, 1e-12, r.adk_residual <= 1e-12);
    add_check(b, "group_certificate_valid", r.group_cert_valid ? 1.0 : 0.0, 1.0, r.group_cert_valid);
    add_check(b, "boundary_metric_deviation", r.boundary_metric_deviation, 1e-10, r.boundary_metric_deviation <= 1e-10);
    b.checks_passed = b.checks_passed && r.passed;
    return b;
  }
  if (name == "cheeger_half") {
    const GroupTriple tr = parse_triple(require(p, ptr, "triple"), child(ptr, "triple"));
    CheegerHalfOptions o;
    if (p.contains("ladder")) o.ladder = get_numbers(p.at("ladder"), child(ptr, "ladder"));
    o.t0_factor = get_number(p, ptr, "t0_factor", o.t0_factor);
    o.tail = get_number(p, ptr, "tail", o.tail);
    o.geometric_points = get_int(p, ptr, "geometric_points", o.geometric_points);
    o.plateau_points = get_int(p, ptr, "plateau_points", o.plateau_points);
    o.seed = seed;
    o.cert.tol = ctx.tol;
    o.cert.budget = ctx.budget;
    o.cert.seed = seed;
    CheegerHalfReport r;
    try {
      r = assemble_cheeger_half(tr, o);
    } catch (const PreconditionError& e) {
      throw SchemaError(ptr, e.what());
    }
    Json ladder = Json::array();
    for (const LadderRung& rung : r.ladder) {
      ladder.push_back({{"a", rung.a}, {"e", rung.e}, {"valid", rung.valid}, {"strict", rung.strict},
                        {"certificate", certificate_to_json(rung.cert, seed)}});
    }
    Json sweep = Json::array();
    for (const SweepPoint& s : r.sweep) {
      sweep.push_back({{"t", s.t}, {"margin", s.margin}, {"chain_slack", s.chain_slack},
                       {"orthogonality_residual", s.orthogonality_residual}});
    }
    b.info = {{"round_p_scale", r.round.p_scale}, {"round_sec", r.round.mean_sec}, {"b", r.b}, {"a", r.a},
              {"t0", r.t0}, {"ladder", ladder}, {"sweep", sweep}, {"failures", r.failures}};
    add_check(b, "sweep_min_margin", r.min_margin, -1e-8, r.min_margin >= -1e-8);
    add_check(b, "plateau_deviation", r.plateau_deviation, 1e-9, r.plateau_deviation <= 1e-9);
    add_check(b, "orbit_metric_deviation", r.orbit_metric_deviation, 1e-10, r.orbit_metric_deviation <= 1e-10);
    b.checks_passed = b.checks_passed && r.passed;
    return b;
  }
  if (name == "explicit") {
    try {
      b.R = operator_from_json(require(p, ptr, "operator"));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception& e) {
      throw SchemaError(child(ptr, "operator"), e.what());
    }
  } else {  // random
    const int n = get_int(p, ptr, "dim");
    if (n < 2 || n > 12) throw SchemaError(child(ptr, "dim"), "must be in [2, 12]");
    const double shift = get_number(p, ptr, "shift", 0.0);
    const BivectorFrame frame(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Mat m(frame.size(), frame.size());
    for (int i = 0; i < m.size(); ++i) m(i) = nd(rng);
    b.R = bianchi_free_part(BivectorOp(frame, m)) + BivectorOp::identity(frame) * shift;
  }
  if (ctx.lemma) {
    CertifyOptions co;
    co.tol = ctx.tol;
    co.budget = ctx.budget;
    co.seed = seed;
    const Certificate c = certify(*b.R, co);
    const bool valid = validate_certificate(*b.R, c);
    add_check(b, "certificate_valid", valid ? 1.0 : 0.0, 1.0, valid);
    b.info["verdict"] = to_string(c.verdict);
    if (b.R->dim() == 4) {
      const Certificate c4 = certify_dim4(*b.R, co);
      const bool same = c4.verdict == c.verdict;
      add_check(b, "dim4_verdict_agreement", same ? 1.0 : 0.0, 1.0, same);
    }
    const PlaneSample ps = min_sectional_sample(*b.R, 2000, seed);
    const double eps = psd_epsilon(*b.R, ctx.tol);
    if (c.verdict == Verdict::Feasible) add_check(b, "min_sampled_sec", ps.sec, -eps, ps.sec >= -eps);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Items

struct Item {
  std::string id;
  std::string construction;
  Json params;
  std::string task;
  Json task_params;
  std::string ptr;
};

struct Plan {
  std::vector<Item> items;
  Context ctx;
  std::optional<std::string> out;
};

const std::set<std::string> kItemKeys = {"id", "construction", "task", "task_params"};

Item parse_item(const Json& j, const std::string& ptr, bool top_level) {
  if (!top_level) expect_object(j, ptr, kItemKeys);
  Item it;
  it.ptr = ptr;
  it.id = get_string(j, ptr, "id", std::string());
  const std::string cp = child(ptr, "construction");
  const Json& c = require(j, ptr, "construction");
  expect_object(c, cp, {"name", "params"});
  it.construction = get_string(c, cp, "name");
  if (!kConstructions.count(it.construction)) throw SchemaError(child(cp, "name"), "unknown construction");
  it.params = c.value("params", Json::object());
  expect_object(it.params, child(cp, "params"), params_for(it.construction));
  it.task = get_string(j, ptr, "task");
  if (!kTasks.count(it.task)) throw SchemaError(child(ptr, "task"), "unknown task (build, certify, scan, verify-lemma)");
  if ((it.task == "build" || it.task == "certify" || it.task == "scan") && !has_operator(it.construction)) {
    throw SchemaError(child(ptr, "task"), "construction '" + it.construction + "' only supports verify-lemma");
  }
  it.task_params = j.value("task_params", Json::object());
  const std::string tp = child(ptr, "task_params");
  if (it.task == "scan") {
    expect_object(it.task_params, tp, {"t_lo", "t_hi", "step", "width"});
    if (!it.params.contains("t")) throw SchemaError(child(cp, "params"), "scan needs a construction with a parameter t");
    const double lo = get_number(it.task_params, tp, "t_lo"), hi = get_number(it.task_params, tp, "t_hi");
    const double step = get_number(it.task_params, tp, "step");
    if (!(hi > lo) || !(step > 0.0)) throw SchemaError(tp, "need t_hi > t_lo and step > 0");
    if (it.task_params.contains("width") && !(get_number(it.task_params, tp, "width") > 0.0)) {
      throw SchemaError(child(tp, "width"), "must be positive");
    }
  } else {
    expect_object(it.task_params, tp, {});
  }
  return it;
}

Plan parse_plan(const Json& doc, const ScenarioOverrides& ov) {
  expect_object(doc, "", {"name", "seed", "tolerances", "output", "items", "construction", "task", "task_params", "id"});
  Plan plan;
  if (doc.contains("name") && !doc.at("name").is_string()) throw SchemaError("/name", "expected a string");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw SchemaError("/seed", "expected a non-negative integer");
    plan.ctx.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (ov.seed) plan.ctx.seed = ov.seed;
  if (doc.contains("tolerances")) {
    const Json& t = doc.at("tolerances");
    expect_object(t, "/tolerances", {"tol", "budget", "width"});
    plan.ctx.tol = get_number(t, "/tolerances", "tol", plan.ctx.tol);
    plan.ctx.budget = get_int(t, "/tolerances", "budget", plan.ctx.budget);
    plan.ctx.width = get_number(t, "/tolerances", "width", plan.ctx.width);
  }
  if (ov.tol) plan.ctx.tol = *ov.tol;
  if (ov.budget) plan.ctx.budget = *ov.budget;
  if (!(plan.ctx.tol > 0.0)) throw SchemaError("/tolerances/tol", "must be positive");
  if (plan.ctx.budget <= 0) throw SchemaError("/tolerances/budget", "must be positive");
  if (!(plan.ctx.width > 0.0)) throw SchemaError("/tolerances/width", "must be positive");
  if (doc.contains("output")) plan.out = get_string(doc, "", "output");
  if (ov.out) plan.out = ov.out;

  const bool single = doc.contains("construction") || doc.contains("task") || doc.contains("task_params") || doc.contains("id");
  if (doc.contains("items") == single) throw SchemaError("/items", "give either items or a single construction and task");
  if (single) {
    plan.items.push_back(parse_item(doc, "", true));
  } else {
    const Json& items = doc.at("items");
    if (!items.is_array() || items.empty()) throw SchemaError("/items", "expected a non-empty array");
    for (std::size_t i = 0; i < items.size(); ++i) plan.items.push_back(parse_item(items[i], child("/items", i), false));
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    Item& it = plan.items[i];
    if (it.id.empty()) it.id = "item" + std::to_string(i);
    if (!ids.insert(it.id).second) throw SchemaError(child(it.ptr, "id"), "duplicate id");
    if (is_randomized(it.construction, it.task) && !plan.ctx.seed) {
      throw SchemaError("/seed", "seed is required for item '" + it.id + "' (randomized task)");
    }
  }
  return plan;
}

struct ItemOutcome {
  Json entry;
  std::map<std::string, Json> artifacts;
  int code = kExitOk;
  std::optional<SchemaError> schema_error;
};

ItemOutcome run_item(const Item& it, const Context& base) {
  const auto t0 = Clock::now();
  ItemOutcome out;
  Context ctx = base;
  ctx.lemma = it.task == "verify-lemma";
  const std::uint64_t seed = ctx.seed.value_or(0);
  const std::string pp = child(child(it.ptr, "construction"), "params");
  Json result = Json::object();
  std::string status = "ok";
  try {
    if (it.task == "scan") {
      const double width = it.task_params.contains("width") ? it.task_params.at("width").get<double>() : ctx.width;
      CertifyOptions co;
      co.tol = ctx.tol;
      co.budget = ctx.budget;
      co.seed = seed;
      const auto family = [&](double t) {
        Json p = it.params;
        p["t"] = t;
        const Built b = build(it.construction, p, pp, ctx);
        return FamilyPoint{*b.R, b.modifier};
      };
      const ScanReport rep = scan_threshold(family, it.task_params.at("t_lo").get<double>(),
                                            it.task_params.at("t_hi").get<double>(),
                                            it.task_params.at("step").get<double>(), co, width);
      Json grid = Json::array();
      for (const ScanPoint& p : rep.grid) {
        grid.push_back({{"t", p.t}, {"verdict", to_string(p.cert.verdict)}, {"margin", p.cert.margin},
                        {"bound", p.cert.bound}});
      }
      result = {{"grid", grid}, {"refinement_steps", rep.refinement.size()}, {"monotone", rep.monotone},
                {"warnings", rep.warnings}, {"bracket", {rep.bracket_lo, rep.bracket_hi}}};
      result["threshold"] = rep.threshold ? Json(*rep.threshold) : Json(nullptr);
    } else {
      const Built b = build(it.construction, it.params, pp, ctx);
      result["info"] = b.info;
      if (b.R) {
        result["operator_summary"] = {{"dim", b.R->dim()},
                                      {"size", b.R->size()},
                                      {"lambda_min", b.R->min_eigenvalue()},
                                      {"bianchi_residual", bianchi(*b.R).norm()},
                                      {"frame", b.frame}};
      }
      if (it.task == "build") {
        result["operator"] = operator_to_json(*b.R, b.frame);
        out.artifacts[it.id + ".operator.json"] = result["operator"];
        if (b.modifier) {
          result["modifier"] = fourform_to_json(*b.modifier);
          result["modified_lambda_min"] = (*b.R + fourform_to_operator(*b.modifier)).min_eigenvalue();
        }
      } else if (it.task == "certify") {
        CertifyOptions co;
        co.tol = ctx.tol;
        co.budget = ctx.budget;
        co.seed = seed;
        co.warm_start = b.modifier;
        const Certificate c = certify(*b.R, co);
        std::string why;
        if (!validate_certificate(*b.R, c, &why)) {
          status = "invalid_certificate";
          result["validation_failure"] = why;
          out.code = kExitCheck;
        } else {
          result["certificate"] = certificate_to_json(c, seed);
          out.artifacts[it.id + ".certificate.json"] = result["certificate"];
          if (c.verdict == Verdict::Infeasible) out.code = kExitInfeasible;
          if (c.verdict == Verdict::Undecided) out.code = kExitUndecided;
          status = to_string(c.verdict);
        }
      } else {
        result["checks"] = b.checks;
        if (!b.checks_passed) {
          status = "check_failed";
          out.code = kExitCheck;
        }
      }
    }
  } catch (const SchemaError& e) {
    out.schema_error = e;
    out.code = kExitSchema;
    status = "schema_error";
    result = {{"error", e.what()}};
  } catch (const PreconditionError& e) {
    out.schema_error = SchemaError(pp, e.what());
    out.code = kExitSchema;
    status = "schema_error";
    result = {{"error", std::string(pp) + ": " + e.what()}};
  } catch (const std::exception& e) {
    out.code = kExitCheck;
    status = "internal_error";
    result = {{"error", e.what()}};
  }
  out.entry = {{"id", it.id},
               {"construction", {{"name", it.construction}, {"params", it.params}}},
               {"task", it.task},
               {"status", status},
               {"exit_code", out.code},
               {"wall_time", seconds_since(t0)},
               {"result", result}};
  return out;
}

int severity(int code) {
  switch (code) {
    case kExitCheck: return 4;
    case kExitSchema: return 3;
    case kExitUndecided: return 2;
    case kExitInfeasible: return 1;
    default: return 0;
  }
}

void append_cell(std::ostringstream& os, const std::string& s, std::size_t w) {
  os << std::left << std::setw(static_cast<int>(w)) << s << "  ";
}

} // namespace

void validate_scenario(const Json& doc, const ScenarioOverrides& ov) { parse_plan(doc, ov); }

ScenarioResult run_scenario(const Json& doc, const ScenarioOverrides& ov) {
  ScenarioResult res;
  const auto t0 = Clock::now();
  Plan plan;
  try {
    plan = parse_plan(doc, ov);
  } catch (const SchemaError& e) {
    res.exit_code = kExitSchema;
    res.error = e.what();
    return res;
  }
  res.out_dir = plan.out;

  std::vector<std::future<ItemOutcome>> futures;
  for (const Item& it : plan.items) {
    futures.push_back(std::async(std::launch::async, [&it, &plan] { return run_item(it, plan.ctx); }));
  }
  Json items = Json::array();
  int code = kExitOk;
  for (auto& f : futures) {
    ItemOutcome o = f.get();
    if (o.schema_error && res.error.empty()) res.error = o.schema_error->what();
    if (severity(o.code) > severity(code)) code = o.code;
    items.push_back(std::move(o.entry));
    for (auto& [name, j] : o.artifacts) res.artifacts[name] = std::move(j);
  }
  Json overrides = Json::object();
  if (ov.seed) overrides["seed"] = *ov.seed;
  if (ov.tol) overrides["tol"] = *ov.tol;
  if (ov.budget) overrides["budget"] = *ov.budget;
  if (ov.out) overrides["out"] = *ov.out;
  res.exit_code = code;
  res.report = {{"report_version", 1},
                {"library", {{"name", "snn"}, {"version", kLibraryVersion}}},
                {"inputs", {{"scenario", doc}, {"overrides", overrides}}},
                {"settings", {{"tol", plan.ctx.tol}, {"budget", plan.ctx.budget}, {"width", plan.ctx.width}}},
                {"seed", plan.ctx.seed ? Json(*plan.ctx.seed) : Json(nullptr)},
                {"items", items},
                {"exit_code", code},
                {"wall_time", seconds_since(t0)}};
  return res;
}

ScenarioResult run_scenario_file(const std::string& path, const ScenarioOverrides& ov) {
  std::ifstream in(path);
  if (!in) {
    ScenarioResult r;
    r.exit_code = kExitSchema;
    r.error = "/: cannot read scenario file '" + path + "'";
    return r;
  }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    ScenarioResult r;
    r.exit_code = kExitSchema;
    r.error = std::string("/: JSON parse error: ") + e.what();
    return r;
  }
  return run_scenario(doc, ov);
}

std::string render_table(const Json& report) {
  std::ostringstream os;
  os << "snn " << report.at("library").at("version").get<std::string>() << "  exit " << report.at("exit_code").get<int>()
     << "  wall " << std::setprecision(3) << report.at("wall_time").get<double>() << "s\n";
  const std::size_t w[] = {18, 22, 13, 20};
  append_cell(os, "id", w[0]);
  append_cell(os, "construction", w[1]);
  append_cell(os, "task", w[2]);
  append_cell(os, "status", w[3]);
  os << "detail\n";
  for (const Json& it : report.at("items")) {
    append_cell(os, it.at("id").get<std::string>(), w[0]);
    append_cell(os, it.at("construction").at("name").get<std::string>(), w[1]);
    append_cell(os, it.at("task").get<std::string>(), w[2]);
    append_cell(os, it.at("status").get<std::string>(), w[3]);
    const Json& r = it.at("result");
    std::ostringstream d;
    d << std::setprecision(10);
    if (r.contains("error")) {
      d << r.at("error").get<std::string>();
    } else if (r.contains("certificate")) {
      const Json& c = r.at("certificate");
      for (const char* key : {"margin", "bound", "gap"}) {
        if (c.contains(key)) d << key << " " << c.at(key) << " ";
      }
      d << "iterations " << c.at("iterations");
    } else if (r.contains("threshold")) {
      d << "threshold " << r.at("threshold") << " monotone " << r.at("monotone");
    } else if (r.contains("checks")) {
      for (const auto& [name, c] : r.at("checks").items()) {
        d << name << "=" << c.at("value") << (c.at("passed").get<bool>() ? " " : "(FAIL) ");
      }
    } else if (r.contains("operator_summary")) {
      d << "lambda_min " << r.at("operator_summary").at("lambda_min");
    }
    os << d.str() << "\n";
  }
  return os.str();
}

void write_file_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_outputs(const ScenarioResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  if (!result.report.is_null()) write_file_atomically((d / "report.json").string(), result.report.dump(2) + "\n");
  for (const auto& [name, j] : result.artifacts) write_file_atomically((d / name).string(), j.dump(2) + "\n");
}

} // namespace snn
