#include "snn/json_io.hpp"

#include <cmath>

namespace snn {

namespace {

// Non-finite doubles have no JSON literal.
Json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? Json("nan") : Json(x > 0 ? "inf" : "-inf");
}

} // namespace

Json operator_to_json(const BivectorOp& s, const std::string& frame_description) {
  Json lower = Json::array();
  for (int a = 0; a < s.size(); ++a)
    for (int b = 0; b <= a; ++b) lower.push_back(s(a, b));
  Json pairs = Json::array();
  for (int a = 0; a < s.size(); ++a) pairs.push_back({s.frame().pair(a).first, s.frame().pair(a).second});
  return {{"kind", "symmetric_bivector_operator"},
          {"dim", s.dim()},
          {"size", s.size()},
          {"origin", s.origin()},
          {"frame", {{"description", frame_description}, {"bivector_basis", "lexicographic"}, {"pairs", pairs}}},
          {"lower", lower}};
}

BivectorOp operator_from_json(const Json& j) {
  const int n = j.at("dim").get<int>();
  if (n < 0) throw PreconditionError("operator JSON: negative dim");
  const BivectorFrame frame(n);
  const Json& lower = j.at("lower");
  const int size = frame.size();
  if (!lower.is_array() || static_cast<int>(lower.size()) != size * (size + 1) / 2) {
    throw PreconditionError("operator JSON: 'lower' must hold size*(size+1)/2 entries");
  }
  Mat m(size, size);
  std::size_t k = 0;
  for (int a = 0; a < size; ++a)
    for (int b = 0; b <= a; ++b) {
      const double v = lower[k++].get<double>();
      m(a, b) = v;
      m(b, a) = v;
    }
  return {frame, m, j.value("origin", std::string("explicit"))};
}

Json fourform_to_json(const FourForm& w) {
  Json quads = Json::array();
  for (int q = 0; q < w.frame().quad_count(); ++q) {
    const auto& c = w.frame().quad(q);
    quads.push_back({c[0], c[1], c[2], c[3]});
  }
  return {{"kind", "four_form"},
          {"dim", w.dim()},
          {"basis", quads},
          {"coeffs", std::vector<double>(w.coeffs().data(), w.coeffs().data() + w.coeffs().size())}};
}

FourForm fourform_from_json(const Json& j) {
  const BivectorFrame frame(j.at("dim").get<int>());
  const auto c = j.at("coeffs").get<std::vector<double>>();
  if (static_cast<int>(c.size()) != frame.quad_count()) throw PreconditionError("4-form JSON: wrong coefficient count");
  return {frame, Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()))};
}

Json certificate_to_json(const Certificate& c, std::uint64_t seed) {
  Json j = {{"verdict", to_string(c.verdict)},
            {"method", c.method},
            {"eps", number(c.eps)},
            {"tol", number(c.tol)},
            {"iterations", c.iterations},
            {"wall_time", number(c.wall_time)},
            {"seed", seed}};
  switch (c.verdict) {
    case Verdict::Feasible:
      j["margin"] = number(c.margin);
      j["omega"] = fourform_to_json(c.omega);
      break;
    case Verdict::Infeasible:
      j["bound"] = number(c.bound);
      j["witness"] = operator_to_json(c.witness, "same as operator");
      break;
    case Verdict::Undecided:
      j["gap"] = number(c.gap);
      j["margin"] = number(c.margin);
      j["bound"] = number(c.bound);
      break;
  }
  return j;
}

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array()) throw PreconditionError("matrix JSON: expected an array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  const Eigen::Index c = r == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != c) {
      throw PreconditionError("matrix JSON: ragged rows");
    }
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

} // namespace snn
