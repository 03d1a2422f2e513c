#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace splitkit {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoUniqueSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lower-triangular G with G * G^T = S. Throws NotPositiveDefinite on a
// non-positive pivot.
DenseMatrix cholesky_factor(const DenseMatrix& S);

// Extreme eigenvalues of a symmetric matrix via cyclic Jacobi sweeps.
std::pair<double, double> sym_eig_extremes(const DenseMatrix& S);

// lambda_max / lambda_min of a symmetric PD matrix.
double condition_number(const DenseMatrix& S);

// Symmetric P solving P*Mlhs + Mlhs^T*P = -Q, assembled and solved in the
// symmetric-vectorization basis so P = P^T holds exactly. Throws
// NoUniqueSolution when eigenvalues of Mlhs pair to zero.
DenseMatrix solve_lyapunov_like(const DenseMatrix& Mlhs, const DenseMatrix& Q);

// Matrix I/O: dense CSV (one row per line) and JSON {rows, cols, data}.
void save_matrix_csv(const std::string& path, const DenseMatrix& M);
DenseMatrix load_matrix_csv(const std::string& path);
std::string matrix_to_json(const DenseMatrix& M);
DenseMatrix matrix_from_json(const std::string& text);

}  // namespace splitkit
