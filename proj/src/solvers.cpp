#include "splitkit/solvers.hpp"

#include <cmath>
#include <fstream>
#include <type_traits>

namespace splitkit {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::ClassicalADMM: return "classical-admm";
        case Scheme::WLADMM: return "wl-admm";
        case Scheme::WLMADMM: return "wlm-admm";
        case Scheme::DFGPGD: return "dfgpgd";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "classical-admm") return Scheme::ClassicalADMM;
    if (name == "wl-admm") return Scheme::WLADMM;
    if (name == "wlm-admm") return Scheme::WLMADMM;
    if (name == "dfgpgd") return Scheme::DFGPGD;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::uint64_t flop_model(Scheme scheme, int n) {
    const std::uint64_t un = std::uint64_t(n);
    if (scheme == Scheme::DFGPGD) return 4 * un * un + 6 * un;
    return un * un * un + 4 * un * un + 5 * un;
}

namespace {

// Double-precision setup products shared by both arithmetic backends.
struct Precomp {
    int n = 0, nz = 0, p = 0;
    double quad2 = 1.0;               // 2 * quad_scale
    DenseMatrix G2;                   // quad2 * H^T H
    DenseVector g_b;                  // quad2 * H^T b
    DenseMatrix W0;                   // (1/lambda) A^T L
    DenseMatrix W1;                   // (1/(lambda_x lambda)) A^T L
    DenseMatrix W2;                   // (1/(lambda lambda_z_eff)) B^T L
    DenseMatrix Mx;                   // proximal weight
    bool Mx_zero = true;
    DenseMatrix Lambda1;              // (1/lambda) A^T L A + Mx
    DenseMatrix chol;                 // factor of G2 + Lambda1 (factor schemes)
    bool uses_factor = false;
    double lambda = 1.0, lambda_x = 0.0, lambda_z_eff = 1.0, tau = 0.0;
    bool c_zero = true;
};

DenseMatrix at_l(const SplitOp& A, const DenseMatrix& L, int p) {
    // A^T L with identity shortcuts.
    if (L.size() == 0) {
        if (A.kind == SplitOp::Kind::Identity) return DenseMatrix::Identity(p, p);
        if (A.kind == SplitOp::Kind::NegIdentity) return -DenseMatrix::Identity(p, p);
        return A.dense.transpose();
    }
    if (A.kind == SplitOp::Kind::Identity) return L;
    if (A.kind == SplitOp::Kind::NegIdentity) return -L;
    return A.dense.transpose() * L;
}

Precomp build_precomp(const CompositeProblem& prob, const SolverConfig& cfg) {
    Precomp pc;
    pc.n = prob.n();
    pc.nz = prob.n_z();
    pc.p = prob.p();
    pc.quad2 = 2.0 * prob.quad_scale();
    pc.lambda = prob.lambda;
    pc.lambda_x = prob.lambda_x;
    pc.c_zero = (prob.c.size() == 0) || (prob.c.cwiseAbs().maxCoeff() == 0.0);

    pc.G2 = pc.quad2 * (prob.H.transpose() * prob.H);
    pc.g_b = pc.quad2 * (prob.H.transpose() * prob.b);

    // Classical ADMM fixes L = I regardless of the problem's weight.
    DenseMatrix Lm;
    if (cfg.scheme != Scheme::ClassicalADMM && !prob.L_is_identity()) Lm = prob.L;

    const DenseMatrix AtL = at_l(prob.A, Lm, pc.p);             // n x p
    const DenseMatrix BtL = at_l(prob.B, Lm, pc.p);             // nz x p
    const DenseMatrix AtLA = AtL * prob.A.to_dense();
    const DenseMatrix BtLB = BtL * prob.B.to_dense();

    pc.W0 = (1.0 / pc.lambda) * AtL;

    // z-update closed form needs Lambda_2 = lambda_z_eff * I.
    if (cfg.scheme == Scheme::ClassicalADMM || cfg.scheme == Scheme::WLADMM) {
        const DenseMatrix L2 = (1.0 / pc.lambda) * BtLB;
        const double beta = L2.trace() / double(pc.nz);
        if ((L2 - beta * DenseMatrix::Identity(pc.nz, pc.nz)).cwiseAbs().maxCoeff() >
            1e-10 * std::max(1.0, std::abs(beta)) || beta <= 0.0)
            throw std::invalid_argument(
                "solver: (1/lambda) B^T L B must be a positive multiple of the identity "
                "for the closed-form z-update");
        pc.lambda_z_eff = beta;
    } else {
        pc.lambda_z_eff = prob.lambda_z;
    }
    pc.tau = prob.gamma / pc.lambda_z_eff;
    pc.W2 = (1.0 / (pc.lambda * pc.lambda_z_eff)) * BtL;

    // Proximal weight M_x and Lambda_1.
    const DenseMatrix inverse_cancelling =
        pc.lambda_x * DenseMatrix::Identity(pc.n, pc.n) - pc.G2 - (1.0 / pc.lambda) * AtLA;
    switch (cfg.scheme) {
        case Scheme::ClassicalADMM:
        case Scheme::WLADMM:
            pc.Mx = DenseMatrix::Zero(pc.n, pc.n);
            pc.Mx_zero = true;
            break;
        case Scheme::WLMADMM:
            pc.Mx = cfg.M_x.value_or(inverse_cancelling);
            pc.Mx_zero = false;
            break;
        case Scheme::DFGPGD:
            pc.Mx = inverse_cancelling;
            pc.Mx_zero = true;  // never applied in the iteration
            break;
    }
    pc.Lambda1 = (1.0 / pc.lambda) * AtLA + pc.Mx;

    if (cfg.scheme == Scheme::DFGPGD) {
        const double hnorm = pc.quad2 * quadratic_spectral_norm(prob.H);
        if (pc.lambda_x <= hnorm)
            throw std::invalid_argument("dfgpgd: lambda_x must exceed the quadratic's "
                                        "spectral norm (" + std::to_string(hnorm) + ")");
        pc.W1 = (1.0 / pc.lambda_x) * pc.W0;
    } else {
        pc.uses_factor = true;
        if (cfg.scheme == Scheme::WLMADMM)
            cholesky_factor(pc.Lambda1);  // P.3 assertion
        pc.chol = cholesky_factor(pc.G2 + pc.Lambda1);
    }
    return pc;
}

template <class Ar>
struct StructApply {
    SplitOp::Kind kind = SplitOp::Kind::Identity;
    SMat<typename Ar::S> dense;

    std::vector<typename Ar::S> operator()(const Ar& ar,
                                           const std::vector<typename Ar::S>& v,
                                           FlopCounter& fc) const {
        switch (kind) {
            case SplitOp::Kind::Identity: return v;
            case SplitOp::Kind::NegIdentity: return vneg(ar, v);
            case SplitOp::Kind::Dense: return matvec(ar, dense, v, fc);
        }
        throw std::logic_error("StructApply");
    }
};

template <class Ar>
class Core {
    using S = typename Ar::S;

public:
    Core(const CompositeProblem& prob, const SolverConfig& cfg, Ar ar)
        : prob_(prob), cfg_(cfg), ar_(std::move(ar)), pc_(build_precomp(prob, cfg)) {
        G2_ = enc_mat(pc_.G2);
        g_b_ = enc_vec(pc_.g_b);
        W2_ = enc_mat(pc_.W2);
        tau_ = ar_.encode(pc_.tau);
        if (cfg.scheme == Scheme::DFGPGD) {
            W1_ = enc_mat(pc_.W1);
            inv_lambda_x_ = ar_.encode(1.0 / pc_.lambda_x);
        } else {
            W0_ = enc_mat(pc_.W0);
            if (!pc_.Mx_zero) Mx_ = enc_mat(pc_.Mx);
            chol_ = enc_mat(pc_.chol);
            dinv_.reserve(std::size_t(pc_.n));
            for (int i = 0; i < pc_.n; ++i)
                dinv_.push_back(ar_.encode(1.0 / pc_.chol(i, i)));
        }
        Aop_ = make_struct(prob.A);
        Bop_ = make_struct(prob.B);
        if (!pc_.c_zero) c_ = enc_vec(prob.c);

        const bool errors = cfg.error_model_x.kind != ErrorModel::Kind::None ||
                            cfg.error_model_z.kind != ErrorModel::Kind::None;
        if (errors) {
            if (!std::is_same_v<Ar, F64Arith> )
                throw std::invalid_argument("error injection requires float64 arithmetic");
            err_rng_x_.emplace(cfg.error_model_x.seed);
            err_rng_z_.emplace(cfg.error_model_z.seed ^ 0x9e3779b97f4a7c15ull);
        }
        fc_.solves_allowed = (cfg.scheme != Scheme::DFGPGD);
    }

    SolverTrace solve(const DenseVector& x0, const DenseVector& z0, const DenseVector& v0,
                      double stop_tol) {
        SolverTrace trace;
        trace.scheme = cfg_.scheme;
        trace.x0 = x0;
        trace.z0 = z0;
        trace.v0 = v0;

        std::vector<S> x = enc_vec(x0), z = enc_vec(z0), v = enc_vec(v0);
        // Cached constraint residual A x + B z - c (dual-feedback term).
        std::vector<S> cres = residual_vec(x, z);

        double prev_obj = 0.0;
        for (int k = 1; k <= cfg_.max_iter; ++k) {
            const std::uint64_t mark = fc_.flops;
            std::vector<S> xnew;
            if (cfg_.scheme == Scheme::DFGPGD) {
                const auto u = vadd(ar_, cres, v, fc_);
                auto grad = matvec(ar_, G2_, x, fc_);
                grad = vsub(ar_, grad, g_b_, fc_);
                const auto t1 = vscale(ar_, inv_lambda_x_, grad, fc_);
                const auto t2 = matvec(ar_, W1_, u, fc_);
                xnew = vsub(ar_, vsub(ar_, x, t1, fc_), t2, fc_);
            } else {
                auto t = Bop_(ar_, z, fc_);
                if (!pc_.c_zero) t = vsub(ar_, t, c_, fc_);
                t = vadd(ar_, t, v, fc_);
                auto g1 = matvec(ar_, W0_, t, fc_);
                if (!pc_.Mx_zero) g1 = vsub(ar_, matvec(ar_, Mx_, x, fc_), g1, fc_);
                else g1 = vneg(ar_, g1);
                const auto rhs = vadd(ar_, g_b_, g1, fc_);
                xnew = cached_solve(rhs);
            }
            if (k == 1) x_update_flops_ = fc_.flops - mark;

            double eps_g = 0.0;
            DenseVector r_x;
            if constexpr (std::is_same_v<Ar, F64Arith>) {
                if (cfg_.error_model_x.kind != ErrorModel::Kind::None)
                    inject_x(x, z, cres, v, xnew, k, eps_g, r_x);
            }

            // z-update: z - W2 (A x' + B z - c + v), then soft threshold.
            auto t = vadd(ar_, Aop_(ar_, xnew, fc_), Bop_(ar_, z, fc_), fc_);
            if (!pc_.c_zero) t = vsub(ar_, t, c_, fc_);
            t = vadd(ar_, t, v, fc_);
            const auto z_in = vsub(ar_, z, matvec(ar_, W2_, t, fc_), fc_);
            std::vector<S> znew = threshold(z_in);

            double eps_h = 0.0;
            DenseVector r_z;
            if constexpr (std::is_same_v<Ar, F64Arith>) {
                if (cfg_.error_model_z.kind != ErrorModel::Kind::None)
                    inject_z(z_in, znew, k, eps_h, r_z);
            }

            cres = residual_vec(xnew, znew);
            v = vadd(ar_, v, cres, fc_);
            x = std::move(xnew);
            z = std::move(znew);

            const DenseVector xd = dec_vec(x), zd = dec_vec(z), vd = dec_vec(v);
            const double obj = objective(prob_, xd, zd);

            TraceRow row;
            row.k = k;
            row.objective = obj;
            row.constraint_residual = constraint_residual(prob_, xd, zd);
            row.eps_g = eps_g;
            row.eps_h = eps_h;
            row.flops_cumulative = fc_.flops;
            if (cfg_.record_snapshots) {
                row.x = xd;
                row.z = zd;
                row.v = vd;
                row.r_x = r_x.size() ? r_x : DenseVector::Zero(pc_.n);
                row.r_z = r_z.size() ? r_z : DenseVector::Zero(pc_.nz);
            }
            trace.rows.push_back(std::move(row));

            if (stop_tol > 0.0 && k > 1 &&
                std::abs(obj - prev_obj) <= stop_tol * std::max(1.0, std::abs(obj)))
                break;
            prev_obj = obj;
        }
        trace.final_x = dec_vec(x);
        trace.final_z = dec_vec(z);
        trace.final_v = dec_vec(v);
        trace.total_flops = fc_.flops;
        trace.x_update_flops = x_update_flops_;
        trace.solve_events = fc_.solve_events;
        return trace;
    }

private:
    SMat<S> enc_mat(const DenseMatrix& M) const {
        SMat<S> out(int(M.rows()), int(M.cols()), ar_.zero());
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < out.cols; ++j) out(i, j) = ar_.encode(M(i, j));
        return out;
    }

    std::vector<S> enc_vec(const DenseVector& v) const {
        std::vector<S> out(std::size_t(v.size()), ar_.zero());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[std::size_t(i)] = ar_.encode(v(i));
        return out;
    }

    DenseVector dec_vec(const std::vector<S>& v) const {
        DenseVector out(Eigen::Index(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) out(Eigen::Index(i)) = ar_.decode(v[i]);
        return out;
    }

    StructApply<Ar> make_struct(const SplitOp& op) const {
        StructApply<Ar> s;
        s.kind = op.kind;
        if (op.kind == SplitOp::Kind::Dense) s.dense = enc_mat(op.dense);
        return s;
    }

    std::vector<S> residual_vec(const std::vector<S>& x, const std::vector<S>& z) {
        auto r = vadd(ar_, Aop_(ar_, x, fc_), Bop_(ar_, z, fc_), fc_);
        if (!pc_.c_zero) r = vsub(ar_, r, c_, fc_);
        return r;
    }

    // G G^T x = rhs through the cached factor. The dual-matvec substitution
    // cost is 2n^2; the counter additionally charges n^3 for the solve step,
    // the cost model of recomputing the Cholesky inverse every iteration.
    std::vector<S> cached_solve(const std::vector<S>& rhs) {
        fc_.record_solve();
        const int n = pc_.n;
        std::vector<S> y(std::size_t(n), ar_.zero());
        for (int i = 0; i < n; ++i) {
            auto acc = rhs[std::size_t(i)];
            for (int j = 0; j < i; ++j)
                acc = ar_.sub(acc, ar_.mul(chol_(i, j), y[std::size_t(j)]));
            y[std::size_t(i)] = ar_.mul(acc, dinv_[std::size_t(i)]);
        }
        std::vector<S> xout(std::size_t(n), ar_.zero());
        for (int i = n - 1; i >= 0; --i) {
            auto acc = y[std::size_t(i)];
            for (int j = i + 1; j < n; ++j)
                acc = ar_.sub(acc, ar_.mul(chol_(j, i), xout[std::size_t(j)]));
            xout[std::size_t(i)] = ar_.mul(acc, dinv_[std::size_t(i)]);
        }
        fc_.add(2ull * n * n + 2ull * n);
        fc_.add(std::uint64_t(n) * n * n);
        return xout;
    }

    std::vector<S> threshold(const std::vector<S>& v) {
        std::vector<S> out(v.size(), ar_.zero());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool negative = ar_.decode(v[i]) < 0.0;
            const S mag = negative ? ar_.neg(v[i]) : v[i];
            const S a = ar_.sub(mag, tau_);
            if (ar_.decode(a) > 0.0) out[i] = negative ? ar_.neg(a) : a;
        }
        fc_.add(v.size());
        return out;
    }

    // The claimed subgradient of g at the perturbed point x+ = exact + r is
    // w = gamma_1 - Lambda_1 x+, so w - grad g(x+) = -S r with S = G2 + Lambda_1
    // the full prox Hessian. Choosing r = s * S^-1 G2 rho keeps S r inside
    // range(G2), where the global epsilon-subgradient constant has the closed
    // form eps_g = s^2/2 * rho' G2 rho; s is then solved for exactly. Sampled
    // probe audits lower-bound this value, so M.3 holds a fortiori.
    void inject_x(const std::vector<S>& x_prev, const std::vector<S>& z_prev,
                  const std::vector<S>& cres, const std::vector<S>& v,
                  std::vector<S>& xnew, int k, double& eps_g, DenseVector& r_x) {
        if constexpr (std::is_same_v<Ar, F64Arith>) {
            (void)x_prev;
            (void)z_prev;
            (void)cres;
            (void)v;
            const ErrorModel& model = cfg_.error_model_x;
            const double target = model.target_at(k);
            if (target <= 0.0) return;

            const int n = pc_.n;
            double frac2 = 1.0;  // squared ball-radius fraction (stochastic)
            DenseVector rho(n);
            {
                const auto d = err_rng_x_->unit_direction(n);
                for (int i = 0; i < n; ++i) rho(i) = d[std::size_t(i)];
                if (model.kind == ErrorModel::Kind::Stochastic) {
                    const double u = std::pow(err_rng_x_->uniform(), 1.0 / double(n));
                    frac2 = u * u;
                }
            }
            const DenseVector g_rho = pc_.G2 * rho;
            const double e_unit = 0.5 * rho.dot(g_rho);
            if (e_unit <= 1e-300) return;

            DenseVector dir;  // S^-1 G2 rho
            if (cfg_.scheme == Scheme::DFGPGD) {
                dir = g_rho / pc_.lambda_x;
            } else {
                DenseVector y = pc_.chol.triangularView<Eigen::Lower>().solve(g_rho);
                dir = pc_.chol.transpose().triangularView<Eigen::Upper>().solve(y);
            }
            const double eps = target * frac2;
            const double s = std::sqrt(eps / e_unit);
            r_x = s * dir;
            eps_g = eps;
            xnew = enc_vec(dec_vec(xnew) + r_x);
        }
    }

    // For h = gamma ||.||_1 the epsilon-subgradient constant of the claimed
    // w = lambda_z_eff (z_in - z+) is finite iff ||w||_inf <= gamma and then
    // equals sum_i (gamma |z_i| - w_i z_i); the perturbation is kept inside
    // that box and sized by bisection on the exact expression.
    void inject_z(const std::vector<S>& z_in, std::vector<S>& znew, int k,
                  double& eps_h, DenseVector& r_z) {
        if constexpr (std::is_same_v<Ar, F64Arith>) {
            const ErrorModel& model = cfg_.error_model_z;
            const double target_nominal = model.target_at(k);
            if (target_nominal <= 0.0) return;
            double target = target_nominal;
            if (model.kind == ErrorModel::Kind::Stochastic)
                target *= err_rng_z_->uniform();

            const DenseVector exact = dec_vec(znew);
            const DenseVector zin = dec_vec(z_in);
            const double lz = pc_.lambda_z_eff;
            const double gamma = prob_.gamma;
            const int nz = pc_.nz;
            const DenseVector w_exact = lz * (zin - exact);

            DenseVector rho(nz);
            {
                const auto d = err_rng_z_->unit_direction(nz);
                for (int i = 0; i < nz; ++i) rho(i) = d[std::size_t(i)];
            }
            // Per-component feasible step keeping |w_i - lz r_i| <= gamma.
            double s_max = std::numeric_limits<double>::infinity();
            for (int i = 0; i < nz; ++i) {
                if (rho(i) == 0.0) continue;
                const double room = rho(i) > 0.0 ? (w_exact(i) + gamma) / lz
                                                 : (gamma - w_exact(i)) / lz;
                const double cap = room / std::abs(rho(i));
                if (cap <= 0.0) rho(i) = 0.0;
                else s_max = std::min(s_max, cap);
            }
            if (rho.norm() == 0.0) return;

            auto eps_at = [&](double s) {
                double e = 0.0;
                for (int i = 0; i < nz; ++i) {
                    const double zi = exact(i) + s * rho(i);
                    const double wi = w_exact(i) - lz * s * rho(i);
                    e += gamma * std::abs(zi) - wi * zi;
                }
                return std::max(0.0, e);
            };

            double hi = std::min(s_max, 1.0);
            for (int it = 0; it < 60 && eps_at(hi) < target && hi < s_max; ++it)
                hi = std::min(2.0 * hi, s_max);
            double lo = 0.0;
            if (eps_at(hi) > target) {
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (eps_at(mid) <= target) lo = mid;
                    else hi = mid;
                }
            } else {
                lo = hi;
            }
            double s = lo;
            for (int guard = 0; guard < 8 && eps_at(s) > target; ++guard) s *= 0.5;
            if (eps_at(s) > target) return;
            r_z = s * rho;
            eps_h = eps_at(s);
            znew = enc_vec(exact + r_z);
        }
    }

    const CompositeProblem& prob_;
    SolverConfig cfg_;
    Ar ar_;
    Precomp pc_;
    FlopCounter fc_;
    std::uint64_t x_update_flops_ = 0;

    SMat<S> G2_, W0_, W1_, W2_, Mx_, chol_;
    std::vector<S> g_b_, c_, dinv_;
    S tau_{}, inv_lambda_x_{};
    StructApply<Ar> Aop_, Bop_;
    std::optional<Rng> err_rng_x_, err_rng_z_;
};

}  // namespace

SolverTrace run(const CompositeProblem& prob_in, const SolverConfig& cfg,
                const DenseVector& x0, const DenseVector& z0, const DenseVector& v0) {
    if (cfg.max_iter < 1) throw std::invalid_argument("run: max_iter must be >= 1");
    CompositeProblem prob = prob_in;
    apply_defaults(prob);
    prob.validate();
    if (cfg.fixed_point) {
        if (cfg.error_model_x.kind != ErrorModel::Kind::None ||
            cfg.error_model_z.kind != ErrorModel::Kind::None)
            throw std::invalid_argument("run: error injection is a float64 feature");
        Core<QArith> core(prob, cfg, QArith{cfg.qformat});
        return core.solve(x0, z0, v0, cfg.stop_objective_tol);
    }
    Core<F64Arith> core(prob, cfg, F64Arith{});
    return core.solve(x0, z0, v0, cfg.stop_objective_tol);
}

SolverTrace run(const CompositeProblem& prob, const SolverConfig& cfg) {
    const int n = prob.n(), nz = prob.n_z(), p = prob.p();
    return run(prob, cfg, DenseVector::Zero(n), DenseVector::Zero(nz), DenseVector::Zero(p));
}

void save_trace_csv(const std::string& path, const SolverTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace_csv: cannot open " + path);
    out << "# splitkit-schema v1\n";
    out << "k,objective,constraint_residual,eps_g,eps_h,flops_cumulative\n";
    out.precision(17);
    for (const auto& r : trace.rows)
        out << r.k << ',' << r.objective << ',' << r.constraint_residual << ','
            << r.eps_g << ',' << r.eps_h << ',' << r.flops_cumulative << '\n';
}

}  // namespace splitkit
