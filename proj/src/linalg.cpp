#include "splitkit/linalg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace splitkit {

DenseMatrix cholesky_factor(const DenseMatrix& S) {
    if (S.rows() != S.cols())
        throw std::invalid_argument("cholesky_factor: matrix not square");
    const int n = int(S.rows());
    DenseMatrix G = DenseMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = S(j, j);
        for (int k = 0; k < j; ++k) d -= G(j, k) * G(j, k);
        if (d <= 0.0)
            throw NotPositiveDefinite("cholesky_factor: non-positive pivot at column " +
                                      std::to_string(j));
        G(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = S(i, j);
            for (int k = 0; k < j; ++k) s -= G(i, k) * G(j, k);
            G(i, j) = s / G(j, j);
        }
    }
    return G;
}

std::pair<double, double> sym_eig_extremes(const DenseMatrix& S) {
    if (S.rows() != S.cols())
        throw std::invalid_argument("sym_eig_extremes: matrix not square");
    const int n = int(S.rows());
    DenseMatrix A = 0.5 * (S + S.transpose());
    if (n == 1) return {A(0, 0), A(0, 0)};

    const double scale = A.cwiseAbs().maxCoeff();
    const double tol = (scale == 0.0) ? 0.0 : 1e-14 * scale;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(A(p, q)));
        if (off <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                    ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                    : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double lo = A(0, 0), hi = A(0, 0);
    for (int i = 1; i < n; ++i) {
        lo = std::min(lo, A(i, i));
        hi = std::max(hi, A(i, i));
    }
    return {lo, hi};
}

double condition_number(const DenseMatrix& S) {
    auto [lo, hi] = sym_eig_extremes(S);
    if (lo <= 0.0)
        throw NotPositiveDefinite("condition_number: lambda_min <= 0");
    return hi / lo;
}

DenseMatrix solve_lyapunov_like(const DenseMatrix& Mlhs, const DenseMatrix& Q) {
    if (Mlhs.rows() != Mlhs.cols() || Q.rows() != Q.cols() || Mlhs.rows() != Q.rows())
        throw std::invalid_argument("solve_lyapunov_like: dimension mismatch");
    const int n = int(Mlhs.rows());
    const int N = n * (n + 1) / 2;

    auto idx = [n](int i, int j) {  // i <= j
        return i * n - i * (i - 1) / 2 + (j - i);
    };

    // Row (a,b), a<=b: sum_k P_ak M_kb + M_ka P_kb = -Q_ab, with P symmetric.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd rhs(N);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            const int row = idx(a, b);
            rhs(row) = -0.5 * (Q(a, b) + Q(b, a));
            for (int k = 0; k < n; ++k) {
                const int c1 = (a <= k) ? idx(a, k) : idx(k, a);
                K(row, c1) += Mlhs(k, b);
                const int c2 = (k <= b) ? idx(k, b) : idx(b, k);
                K(row, c2) += Mlhs(k, a);
            }
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible())
        throw NoUniqueSolution("solve_lyapunov_like: singular Kronecker system "
                               "(eigenvalue pair of Mlhs sums to zero)");
    Eigen::VectorXd p = lu.solve(rhs);

    DenseMatrix P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            P(i, j) = p(idx(i, j));
            P(j, i) = p(idx(i, j));
        }
    return P;
}

void save_matrix_csv(const std::string& path, const DenseMatrix& M) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_matrix_csv: cannot open " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << M(i, j);
        }
        out << '\n';
    }
}

DenseMatrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_matrix_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("load_matrix_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    DenseMatrix M(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
    return M;
}

std::string matrix_to_json(const DenseMatrix& M) {
    nlohmann::json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    std::vector<double> data;
    data.reserve(std::size_t(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
    j["data"] = data;
    return j.dump();
}

DenseMatrix matrix_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    const Eigen::Index r = j.at("rows"), c = j.at("cols");
    const auto data = j.at("data").get<std::vector<double>>();
    if (Eigen::Index(data.size()) != r * c)
        throw std::runtime_error("matrix_from_json: data length mismatch");
    DenseMatrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) M(i, k) = data[std::size_t(i * c + k)];
    return M;
}

}  // namespace splitkit
