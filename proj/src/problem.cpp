#include "splitkit/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "splitkit/rng.hpp"

namespace splitkit {

SplitOp SplitOp::from_dense(DenseMatrix M) {
    SplitOp op;
    op.kind = Kind::Dense;
    op.dense = std::move(M);
    return op;
}

DenseVector SplitOp::apply(const DenseVector& v) const {
    switch (kind) {
        case Kind::Identity: return v;
        case Kind::NegIdentity: return -v;
        case Kind::Dense: return dense * v;
    }
    throw std::logic_error("SplitOp::apply");
}

DenseVector SplitOp::apply_transpose(const DenseVector& v) const {
    switch (kind) {
        case Kind::Identity: return v;
        case Kind::NegIdentity: return -v;
        case Kind::Dense: return dense.transpose() * v;
    }
    throw std::logic_error("SplitOp::apply_transpose");
}

DenseMatrix SplitOp::to_dense() const {
    switch (kind) {
        case Kind::Identity: return DenseMatrix::Identity(dim, dim);
        case Kind::NegIdentity: return -DenseMatrix::Identity(dim, dim);
        case Kind::Dense: return dense;
    }
    throw std::logic_error("SplitOp::to_dense");
}

void CompositeProblem::validate() const {
    if (H.rows() != b.size()) throw std::invalid_argument("problem: H/b mismatch");
    if (A.cols() != n()) throw std::invalid_argument("problem: A/H mismatch");
    if (B.rows() != A.rows()) throw std::invalid_argument("problem: A/B row mismatch");
    if (c.size() != p()) throw std::invalid_argument("problem: c dimension mismatch");
    if (gamma < 0.0) throw std::invalid_argument("problem: gamma < 0");
    if (lambda <= 0.0 || lambda_z <= 0.0) throw std::invalid_argument("problem: weights must be > 0");
    if (!L_is_identity() && (L.rows() != p() || L.cols() != p()))
        throw std::invalid_argument("problem: L dimension mismatch");
}

bool reconstructibility_check(int n, int m, int s) {
    if (n <= 0 || m <= 0 || s <= 0 || s > n)
        throw std::invalid_argument("reconstructibility_check: need n, m, s > 0 and s <= n");
    const double bound = 2.0 * s * std::log(double(n) / double(s)) + 1.4 * s + 1.0;
    return double(m) > bound;
}

double quadratic_spectral_norm(const DenseMatrix& H) {
    const int n = int(H.cols());
    DenseVector v = DenseVector::Ones(n) / std::sqrt(double(n));
    double lam = 0.0;
    for (int it = 0; it < 300; ++it) {
        DenseVector w = H.transpose() * (H * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        lam = nw;
    }
    return lam;
}

GeneratedLasso generate_lasso(const LassoSpec& spec, bool force) {
    if (!reconstructibility_check(spec.n, spec.m, spec.s) && !force)
        throw std::invalid_argument(
            "generate_lasso: reconstructibility condition m > 2 s log(n/s) + 7s/5 + 1 "
            "fails for (n=" + std::to_string(spec.n) + ", m=" + std::to_string(spec.m) +
            ", s=" + std::to_string(spec.s) + "); pass force to override");

    Rng rng(spec.seed);
    const int n = spec.n, m = spec.m, s = spec.s;

    DenseMatrix H(m, n);
    const double scale = 1.0 / std::sqrt(double(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = scale * rng.normal();

    // s support positions without replacement, +-1 amplitudes.
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[std::size_t(i)] = i;
    for (int i = 0; i < s; ++i) {
        const int j = i + int(rng.integer(std::uint64_t(n - i)));
        std::swap(perm[std::size_t(i)], perm[std::size_t(j)]);
    }
    DenseVector x_true = DenseVector::Zero(n);
    for (int i = 0; i < s; ++i)
        x_true(perm[std::size_t(i)]) = (rng.uniform() < 0.5) ? -1.0 : 1.0;

    DenseVector b = H * x_true;
    if (spec.noise_sigma > 0.0)
        for (int i = 0; i < m; ++i) b(i) += spec.noise_sigma * rng.normal();

    CompositeProblem prob;
    prob.H = std::move(H);
    prob.b = std::move(b);
    prob.A = SplitOp::identity(n);
    prob.B = SplitOp::neg_identity(n);
    prob.c = DenseVector::Zero(n);
    prob.gamma = spec.gamma;
    apply_defaults(prob);
    prob.validate();

    return {std::move(prob), std::move(x_true), spec};
}

void apply_defaults(CompositeProblem& prob) {
    if (prob.gamma <= 0.0)
        prob.gamma = 0.1 * (prob.H.transpose() * prob.b).cwiseAbs().maxCoeff();
    if (prob.lambda_x <= 0.0)
        prob.lambda_x = 1.05 * (prob.half_quadratic ? 1.0 : 2.0) * quadratic_spectral_norm(prob.H);
}

double objective(const CompositeProblem& prob, const DenseVector& x, const DenseVector& z) {
    if (x.size() != prob.n() || z.size() != prob.n_z())
        throw std::invalid_argument("objective: dimension mismatch");
    return prob.quad_scale() * (prob.H * x - prob.b).squaredNorm() +
           prob.gamma * z.lpNorm<1>();
}

double constraint_residual(const CompositeProblem& prob, const DenseVector& x,
                           const DenseVector& z) {
    if (x.size() != prob.n() || z.size() != prob.n_z())
        throw std::invalid_argument("constraint_residual: dimension mismatch");
    return (prob.A.apply(x) + prob.B.apply(z) - prob.c).norm();
}

namespace {

nlohmann::json vec_to_json(const DenseVector& v) {
    std::vector<double> d(v.data(), v.data() + v.size());
    return nlohmann::json(d);
}

DenseVector vec_from_json(const nlohmann::json& j) {
    const auto d = j.get<std::vector<double>>();
    DenseVector v(Eigen::Index(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) v(Eigen::Index(i)) = d[i];
    return v;
}

nlohmann::json mat_to_json(const DenseMatrix& M) {
    nlohmann::json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    std::vector<double> data;
    data.reserve(std::size_t(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
    j["data"] = data;
    return j;
}

DenseMatrix mat_from_json(const nlohmann::json& j) {
    const Eigen::Index r = j.at("rows"), c = j.at("cols");
    const auto data = j.at("data").get<std::vector<double>>();
    DenseMatrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) M(i, k) = data[std::size_t(i * c + k)];
    return M;
}

nlohmann::json splitop_to_json(const SplitOp& op) {
    nlohmann::json j;
    switch (op.kind) {
        case SplitOp::Kind::Identity: j["kind"] = "identity"; j["dim"] = op.dim; break;
        case SplitOp::Kind::NegIdentity: j["kind"] = "neg_identity"; j["dim"] = op.dim; break;
        case SplitOp::Kind::Dense: j["kind"] = "dense"; j["dense"] = mat_to_json(op.dense); break;
    }
    return j;
}

SplitOp splitop_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    if (kind == "identity") return SplitOp::identity(j.at("dim"));
    if (kind == "neg_identity") return SplitOp::neg_identity(j.at("dim"));
    if (kind == "dense") return SplitOp::from_dense(mat_from_json(j.at("dense")));
    throw std::runtime_error("splitop_from_json: unknown kind " + kind);
}

}  // namespace

std::string lasso_to_json(const GeneratedLasso& g) {
    nlohmann::json j;
    j["schema"] = "splitkit-problem-v1";
    j["spec"] = {{"n", g.spec.n}, {"m", g.spec.m}, {"s", g.spec.s},
                 {"gamma", g.spec.gamma}, {"noise_sigma", g.spec.noise_sigma},
                 {"seed", g.spec.seed}};
    const auto& p = g.problem;
    j["H"] = mat_to_json(p.H);
    j["b"] = vec_to_json(p.b);
    j["A"] = splitop_to_json(p.A);
    j["B"] = splitop_to_json(p.B);
    j["c"] = vec_to_json(p.c);
    j["gamma"] = p.gamma;
    j["lambda"] = p.lambda;
    j["lambda_x"] = p.lambda_x;
    j["lambda_z"] = p.lambda_z;
    j["half_quadratic"] = p.half_quadratic;
    if (!p.L_is_identity()) j["L"] = mat_to_json(p.L);
    j["x_true"] = vec_to_json(g.x_true);
    return j.dump();
}

GeneratedLasso lasso_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.value("schema", "") != "splitkit-problem-v1")
        throw std::runtime_error("lasso_from_json: unknown schema");
    GeneratedLasso g;
    g.spec.n = j.at("spec").at("n");
    g.spec.m = j.at("spec").at("m");
    g.spec.s = j.at("spec").at("s");
    g.spec.gamma = j.at("spec").at("gamma");
    g.spec.noise_sigma = j.at("spec").at("noise_sigma");
    g.spec.seed = j.at("spec").at("seed");
    auto& p = g.problem;
    p.H = mat_from_json(j.at("H"));
    p.b = vec_from_json(j.at("b"));
    p.A = splitop_from_json(j.at("A"));
    p.B = splitop_from_json(j.at("B"));
    p.c = vec_from_json(j.at("c"));
    p.gamma = j.at("gamma");
    p.lambda = j.at("lambda");
    p.lambda_x = j.at("lambda_x");
    p.lambda_z = j.at("lambda_z");
    p.half_quadratic = j.at("half_quadratic");
    if (j.contains("L")) p.L = mat_from_json(j.at("L"));
    g.x_true = vec_from_json(j.at("x_true"));
    p.validate();
    return g;
}

void save_lasso(const std::string& path, const GeneratedLasso& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_lasso: cannot open " + path);
    out << lasso_to_json(g) << '\n';
}

GeneratedLasso load_lasso(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_lasso: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return lasso_from_json(ss.str());
}

}  // namespace splitkit
