#include "rbrm/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "rbrm/errors.hpp"

namespace rbrm {

namespace {

void check_square_finite(const Mat& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw InvalidInputError("matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
        throw InvalidInputError("matrix has non-finite entries");
    }
}

double clamp_roundoff(double lambda) {
    if (lambda < 0.0 && lambda >= kEigenNegativeFloor) return 0.0;
    return lambda;
}

// Positive values indistinguishable from 0 at working precision (relative to
// the dominant eigenvalue) are flushed to 0 so rank-deficient Gram matrices
// report an exact zero minimum eigenvalue.
double flush_tiny(double lambda, double scale) {
    if (lambda > 0.0 && lambda < 1e-14 * scale) return 0.0;
    return lambda;
}

bool exactly_diagonal(const Mat& m) {
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (r != c && m(r, c) != 0.0) return false;
        }
    }
    return true;
}

// Cyclic Jacobi rotations. Small fixed-size problems (dim <= 6 in practice)
// converge in a handful of sweeps; the rotation order is fixed so the result
// is deterministic. `vectors`, when non-null, accumulates the eigenvectors.
void jacobi_eigen(Mat a, Vec& values, Mat* vectors) {
    const int n = static_cast<int>(a.rows());
    if (vectors) *vectors = Mat::Identity(n, n);

    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    const double tol = 1e-15 * scale;
    const int max_sweeps = 64;

    double off = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off <= tol) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= tol * 1e-3) continue;
                const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
                const double c = std::cos(theta);
                const double s = std::sin(theta);

                const double app = a(p, p), aqq = a(q, q), apq = a(p, q);
                a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a(p, q) = a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = a(p, r) = c * arp - s * arq;
                    a(r, q) = a(q, r) = s * arp + c * arq;
                }
                if (vectors) {
                    for (int r = 0; r < n; ++r) {
                        const double vrp = (*vectors)(r, p), vrq = (*vectors)(r, q);
                        (*vectors)(r, p) = c * vrp - s * vrq;
                        (*vectors)(r, q) = s * vrp + c * vrq;
                    }
                }
            }
        }
    }

    if (off > 1e-12 * scale) {
        throw NumericalFailureError("Jacobi eigenvalue iteration failed to converge");
    }

    values.resize(n);
    for (int i = 0; i < n; ++i) values[i] = a(i, i);

    // Sort ascending, permuting vectors alongside. Stable order keeps runs
    // reproducible when eigenvalues tie.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return values[i] < values[j]; });
    Vec sorted(n);
    Mat sorted_vecs;
    if (vectors) sorted_vecs.resize(n, n);
    for (int i = 0; i < n; ++i) {
        sorted[i] = values[order[i]];
        if (vectors) sorted_vecs.col(i) = vectors->col(order[i]);
    }
    values = sorted;
    if (vectors) *vectors = sorted_vecs;
}

void validate_symmetric_input(const Mat& m) {
    check_square_finite(m);
    if (!is_symmetric(m)) {
        throw InvalidInputError("matrix is not symmetric within tolerance");
    }
}

}  // namespace

bool is_symmetric(const Mat& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

EigExtremes eig_extremes(const Mat& m) {
    validate_symmetric_input(m);
    const Mat a = symmetrized(m);
    const int n = static_cast<int>(a.rows());

    EigExtremes ext;
    if (exactly_diagonal(a)) {
        ext.lambda_min = a.diagonal().minCoeff();
        ext.lambda_max = a.diagonal().maxCoeff();
    } else if (n == 1) {
        ext.lambda_min = ext.lambda_max = a(0, 0);
    } else if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const double disc =
            std::sqrt(std::pow(a(0, 0) - a(1, 1), 2) + 4.0 * a(0, 1) * a(0, 1));
        ext.lambda_max = 0.5 * (tr + disc);
        // Stable smaller root: avoids the cancellation in (tr - disc) / 2.
        ext.lambda_min = tr + disc != 0.0 ? 2.0 * det / (tr + disc) : 0.5 * (tr - disc);
    } else {
        Vec values;
        jacobi_eigen(a, values, nullptr);
        ext.lambda_min = values[0];
        ext.lambda_max = values[n - 1];
    }
    const double scale = std::max(std::abs(ext.lambda_min), std::abs(ext.lambda_max));
    ext.lambda_min = flush_tiny(clamp_roundoff(ext.lambda_min), scale);
    ext.lambda_max = flush_tiny(clamp_roundoff(ext.lambda_max), scale);
    if (ext.lambda_max < ext.lambda_min) ext.lambda_max = ext.lambda_min;
    return ext;
}

Vec eigenvalues(const Mat& m) {
    validate_symmetric_input(m);
    Vec values;
    jacobi_eigen(symmetrized(m), values, nullptr);
    const double scale = values.cwiseAbs().maxCoeff();
    for (int i = 0; i < values.size(); ++i) {
        values[i] = flush_tiny(clamp_roundoff(values[i]), scale);
    }
    return values;
}

void eig_decompose(const Mat& m, Vec& values, Mat& vectors) {
    validate_symmetric_input(m);
    jacobi_eigen(symmetrized(m), values, &vectors);
    const double scale = values.cwiseAbs().maxCoeff();
    for (int i = 0; i < values.size(); ++i) {
        values[i] = flush_tiny(clamp_roundoff(values[i]), scale);
    }
}

Mat invert_pd(const Mat& m) {
    const EigExtremes ext = eig_extremes(m);
    if (ext.lambda_min <= 1e-12) {
        throw SingularMatrixError("matrix is not positive definite (lambda_min <= 1e-12)");
    }
    const Mat a = symmetrized(m);
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("Cholesky factorization failed");
    }
    Mat inv = llt.solve(Mat::Identity(a.rows(), a.cols()));
    return symmetrized(inv);
}

bool is_psd(const Mat& m, double tol) { return eig_extremes(m).lambda_min >= -tol; }

Mat clamp_psd(const Mat& m) {
    Vec values;
    Mat vectors;
    eig_decompose(m, values, vectors);
    if (values[0] < kEigenNegativeFloor) {
        throw NumericalFailureError("matrix eigenvalue below -1e-10; not a valid covariance");
    }
    for (int i = 0; i < values.size(); ++i) values[i] = std::max(values[i], 0.0);
    return symmetrized(vectors * values.asDiagonal() * vectors.transpose());
}

}  // namespace rbrm
