#include "snn/linalg.hpp"

#include <cmath>

namespace snn::linalg {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

Vec eigenvalues(const Mat& sym) {
  if (sym.rows() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const Mat& sym) {
  if (sym.rows() == 0) return 0.0;
  return eigenvalues(sym)(0);
}

Mat orthonormalize(const Mat& basis, const Mat& gram, double drop_tol) {
  const auto n = basis.rows();
  Mat out(n, 0);
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Vec v = basis.col(c);
    const double scale = std::sqrt(std::abs(v.dot(gram * v)));
    if (scale == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < out.cols(); ++k) {
        v -= out.col(k).dot(gram * v) * out.col(k);
      }
    }
    const double nrm2 = v.dot(gram * v);
    if (nrm2 <= 0.0 || std::sqrt(nrm2) <= drop_tol * std::max(1.0, scale)) continue;
    out.conservativeResize(n, out.cols() + 1);
    out.col(out.cols() - 1) = v / std::sqrt(nrm2);
  }
  return out;
}

Mat null_space(const Mat& m, double tol) {
  if (m.cols() == 0) return Mat(0, 0);
  if (m.rows() == 0) return Mat::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double ref = std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * ref) ++r;
  }
  return svd.matrixV().rightCols(m.cols() - r);
}

int rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  const double ref = std::max(1.0, s(0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * ref) ++r;
  }
  return r;
}

namespace {

template <class M>
M expm_impl(const M& a) {
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const M scaled = a / std::pow(2.0, squarings);
  M result = M::Identity(a.rows(), a.cols());
  M term = M::Identity(a.rows(), a.cols());
  for (int k = 1; k <= 12; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

} // namespace

Mat expm(const Mat& m) { return expm_impl(m); }
CMat expm(const CMat& m) { return expm_impl(m); }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace snn::linalg
