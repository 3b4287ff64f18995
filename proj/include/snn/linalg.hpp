#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace snn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a structural identity fails its numerical tolerance.
class InvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace linalg {

/// Symmetrize in place: (M + M^T)/2.
Mat symmetrized(const Mat& m);

/// Ascending eigenvalues of a symmetric matrix.
Vec eigenvalues(const Mat& sym);

double min_eigenvalue(const Mat& sym);

/// Orthonormalize the columns of `basis` for the inner product `gram`
/// (modified Gram-Schmidt, run twice). Columns whose residual norm falls
/// below `drop_tol` are discarded, so the result may have fewer columns.
Mat orthonormalize(const Mat& basis, const Mat& gram, double drop_tol = 1e-10);

/// Orthonormal basis (Euclidean) of the null space of m.
Mat null_space(const Mat& m, double tol = 1e-9);

/// Numerical rank via singular values relative to `tol`.
int rank(const Mat& m, double tol = 1e-9);

/// Matrix exponential: degree-12 Taylor series with scaling and squaring.
Mat expm(const Mat& m);
CMat expm(const CMat& m);

/// Max absolute entry.
double max_abs(const Mat& m);

} // namespace linalg
} // namespace snn
