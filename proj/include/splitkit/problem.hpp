#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "splitkit/linalg.hpp"

namespace splitkit {

// Constraint operator; the consensus splitting uses identity / negated
// identity, which the solvers apply without arithmetic.
struct SplitOp {
    enum class Kind { Identity, NegIdentity, Dense };
    Kind kind = Kind::Identity;
    int dim = 0;             // square dimension for (Neg)Identity
    DenseMatrix dense;       // used when kind == Dense

    static SplitOp identity(int n) { return {Kind::Identity, n, {}}; }
    static SplitOp neg_identity(int n) { return {Kind::NegIdentity, n, {}}; }
    static SplitOp from_dense(DenseMatrix M);

    int rows() const { return kind == Kind::Dense ? int(dense.rows()) : dim; }
    int cols() const { return kind == Kind::Dense ? int(dense.cols()) : dim; }
    DenseVector apply(const DenseVector& v) const;
    DenseVector apply_transpose(const DenseVector& v) const;
    DenseMatrix to_dense() const;
};

// Data of the composite problem  minimize g(x) + gamma*||z||_1
// subject to Ax + Bz = c, with quadratic g(x) = q*||Hx - b||^2
// (q = 1/2 when half_quadratic, else 1).
struct CompositeProblem {
    DenseMatrix H;           // m x n
    DenseVector b;           // m
    SplitOp A;               // p x n
    SplitOp B;               // p x n_z
    DenseVector c;           // p
    double gamma = 0.0;      // l1 weight
    double lambda = 1.0;     // dual step weight
    double lambda_x = 0.0;   // > ||H^T H||_2 for DFGPGD; 0 = derive at setup
    double lambda_z = 1.0;
    DenseMatrix L;           // p x p PD weight; empty = identity
    bool half_quadratic = true;

    int n() const { return int(H.cols()); }
    int m() const { return int(H.rows()); }
    int p() const { return A.rows(); }
    int n_z() const { return B.cols(); }
    bool L_is_identity() const { return L.size() == 0; }
    double quad_scale() const { return half_quadratic ? 0.5 : 1.0; }

    void validate() const;
};

struct LassoSpec {
    int n = 700;
    int m = 270;
    int s = 20;
    double gamma = 0.0;        // 0 = use 0.1 * ||H^T b||_inf
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
};

struct GeneratedLasso {
    CompositeProblem problem;
    DenseVector x_true;
    LassoSpec spec;
};

// m > 2 s log(n/s) + (7/5) s + 1, natural log.
bool reconstructibility_check(int n, int m, int s);

// Consensus-form LASSO instance; throws unless the reconstructibility
// inequality holds or `force` is set. Pure function of the spec.
GeneratedLasso generate_lasso(const LassoSpec& spec, bool force = false);

double objective(const CompositeProblem& prob, const DenseVector& x, const DenseVector& z);
double constraint_residual(const CompositeProblem& prob, const DenseVector& x,
                           const DenseVector& z);

// lambda_max(H^T H) via power iteration on H^T (H v); deterministic.
double quadratic_spectral_norm(const DenseMatrix& H);

// Fills gamma / lambda_x defaults that depend on the data.
void apply_defaults(CompositeProblem& prob);

std::string lasso_to_json(const GeneratedLasso& g);
GeneratedLasso lasso_from_json(const std::string& text);
void save_lasso(const std::string& path, const GeneratedLasso& g);
GeneratedLasso load_lasso(const std::string& path);

}  // namespace splitkit
