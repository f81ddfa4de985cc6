#pragma once

#include <Eigen/Dense>

namespace rbrm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Relative tolerance for accepting a matrix as symmetric.
inline constexpr double kSymmetryRelTol = 1e-9;

/// Eigenvalues in [-1e-10, 0) are treated as roundoff and clamped to 0;
/// anything more negative is reported as-is.
inline constexpr double kEigenNegativeFloor = -1e-10;

/// Smallest and largest eigenvalue of a symmetric matrix.
struct EigExtremes {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

bool is_symmetric(const Mat& m, double rel_tol = kSymmetryRelTol);

/// (m + m') / 2. EKF updates accumulate asymmetry at roundoff scale; every
/// covariance passes through this before further use.
Mat symmetrized(const Mat& m);

/// Extreme eigenvalues of a symmetric matrix, dims 1..6. Closed form for
/// dims 1-2, cyclic Jacobi sweeps above that; deterministic for fixed input.
/// Throws InvalidInputError on non-symmetric or non-finite input.
EigExtremes eig_extremes(const Mat& m);

/// All eigenvalues, ascending. Same validation and clamping as eig_extremes.
Vec eigenvalues(const Mat& m);

/// Full symmetric eigendecomposition: fills ascending eigenvalues and the
/// matching orthonormal eigenvectors (columns).
void eig_decompose(const Mat& m, Vec& values, Mat& vectors);

/// Inverse of a symmetric positive definite matrix (lambda_min > 1e-12).
/// Throws SingularMatrixError otherwise.
Mat invert_pd(const Mat& m);

/// True iff lambda_min(m) >= -tol.
bool is_psd(const Mat& m, double tol);

/// Reconstructs m with eigenvalues in [-1e-10, 0) clamped to 0. Throws
/// NumericalFailureError if any eigenvalue is below -1e-10.
Mat clamp_psd(const Mat& m);

}  // namespace rbrm
