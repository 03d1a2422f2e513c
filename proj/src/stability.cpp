#include "splitkit/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "splitkit/prox.hpp"

namespace splitkit {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;

DenseMatrix e_inverse(const DenseMatrix& E) {
    // E is symmetric PD by construction; small dims, dense inverse is fine.
    return E.llt().solve(DenseMatrix::Identity(E.rows(), E.cols()));
}

int svd_rank(const DenseMatrix& M) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<DenseMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double tol = sv(0) * double(std::max(M.rows(), M.cols())) * 0x1.0p-52;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

DenseVector to_vec(const std::vector<double>& v) {
    DenseVector x(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(Eigen::Index(i)) = v[i];
    return x;
}

nlohmann::json matrix_json(const DenseMatrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

LureSystem build_lure(const CompositeProblem& prob_in, double mu) {
    if (mu <= 0.0) throw std::invalid_argument("build_lure: mu must be > 0");
    CompositeProblem prob = prob_in;
    prob.validate();
    apply_defaults(prob);

    const int n = prob.n(), nz = prob.n_z(), p = prob.p();
    const double quad2 = 2.0 * prob.quad_scale();
    const DenseMatrix Hg = quad2 * (prob.H.transpose() * prob.H);
    const DenseVector Hb = quad2 * (prob.H.transpose() * prob.b);
    const DenseMatrix L = prob.L_is_identity()
        ? DenseMatrix::Identity(p, p) : prob.L;
    const DenseMatrix Ad = prob.A.to_dense();
    const DenseMatrix Bd = prob.B.to_dense();

    LureSystem sys;
    sys.n = n;
    sys.n_z = nz;
    sys.p = p;
    const int d = n + nz + p;

    sys.E = DenseMatrix::Zero(d, d);
    sys.E.topLeftCorner(n, n) =
        prob.lambda_x * DenseMatrix::Identity(n, n) - Hg;
    sys.E.block(n, n, nz, nz) = prob.lambda_z * DenseMatrix::Identity(nz, nz);
    sys.E.bottomRightCorner(p, p) = DenseMatrix::Identity(p, p);
    const auto [emin, emax] = sym_eig_extremes(sys.E);
    (void)emax;
    if (emin <= 0.0)
        throw NotPositiveDefinite("build_lure: E not PD (lambda_x too small)");

    sys.Gamma = DenseMatrix::Zero(d, d);
    sys.Gamma.block(0, n + nz, n, p) = -(Ad.transpose() * L);
    sys.Gamma.block(n, n + nz, nz, p) = -(Bd.transpose() * L);
    sys.Gamma.block(n + nz, 0, p, n) = L * Ad;
    sys.Gamma.block(n + nz, n, p, nz) = L * Bd;

    sys.Sigma = DenseMatrix::Identity(d, d);
    sys.c_offset = DenseVector::Zero(d);
    sys.c_offset.tail(p) = prob.c;

    const double gamma = prob.gamma;
    sys.phi = [n, nz, p, Hg, Hb, gamma, mu](const DenseVector& zeta) {
        DenseVector out = DenseVector::Zero(n + nz + p);
        out.head(n) = Hg * zeta.head(n) - Hb;
        const DenseVector z = zeta.segment(n, nz);
        // Moreau gradient of gamma*||.||_1 at smoothing mu.
        out.segment(n, nz) = (z - soft_threshold(z, gamma * mu)) / mu;
        return out;
    };
    return sys;
}

MinimalityResult minimality_check(const LureSystem& sys) {
    const int d = sys.dim();
    const DenseMatrix Einv = e_inverse(sys.E);
    const DenseMatrix Acal = Einv * sys.Gamma;
    const DenseMatrix Bcal = Einv * sys.Sigma;

    DenseMatrix ctrb(d, d * Bcal.cols());
    DenseMatrix block = Bcal;
    for (int k = 0; k < d; ++k) {
        ctrb.middleCols(k * int(Bcal.cols()), int(Bcal.cols())) = block;
        block = Acal * block;
    }

    MinimalityResult res;
    res.rank_controllability = svd_rank(ctrb);
    res.controllable = res.rank_controllability == d;

    if (sys.Omega.size() == 0 || sys.Omega.isZero(0.0)) {
        res.rank_observability = 0;
        res.observable = false;
        return res;
    }
    const int q = int(sys.Omega.rows());
    DenseMatrix obsv(d * q, d);
    DenseMatrix row = sys.Omega;
    for (int k = 0; k < d; ++k) {
        obsv.middleRows(k * q, q) = row;
        row = row * Acal;
    }
    res.rank_observability = svd_rank(obsv);
    res.observable = res.rank_observability == d;
    return res;
}

KypResult kyp_solve(LureSystem& sys, DenseMatrix Q) {
    const int d = sys.dim();
    if (Q.size() == 0) Q = DenseMatrix::Identity(d, d);
    if (Q.rows() != d || Q.cols() != d)
        throw std::invalid_argument("kyp_solve: Q dimension mismatch");

    KypResult res;
    res.Q = Q;
    const DenseMatrix Einv = e_inverse(sys.E);
    const DenseMatrix Acal = Einv * sys.Gamma;
    try {
        res.P = solve_lyapunov_like(Acal, Q);
    } catch (const NoUniqueSolution& e) {
        res.failure_reason = std::string("kyp: ") + e.what() +
            " (eigenvalue pair of E^-1 Gamma sums to zero; lossless descriptor)";
        return res;
    }
    res.solvable = true;
    res.residual = (res.P * Acal + Acal.transpose() * res.P + Q).norm();
    try {
        cholesky_factor(res.P);
        res.p_positive_definite = true;
    } catch (const NotPositiveDefinite&) {
        res.failure_reason = "kyp: Lyapunov solution P is not positive definite";
    }
    res.Omega = sys.Sigma.transpose() * Einv.transpose() * res.P;
    sys.Omega = res.Omega;
    return res;
}

std::vector<double> make_freq_grid(const LureSystem& sys) {
    double lo = 1e-3, hi = 1e3;
    const DenseMatrix Acal = e_inverse(sys.E) * sys.Gamma;
    Eigen::EigenSolver<DenseMatrix> es(Acal, /*computeEigenvectors=*/false);
    double emin = 0.0, emax = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double a = std::abs(es.eigenvalues()(i));
        if (a < 1e-12) continue;
        if (emax == 0.0 || a > emax) emax = a;
        if (emin == 0.0 || a < emin) emin = a;
    }
    if (emax > 0.0) {
        lo = std::min(lo, emin * 1e-2);
        hi = std::max(hi, emax * 1e2);
    }
    std::vector<double> grid;
    grid.push_back(0.0);
    const int count = 200;
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i)
        grid.push_back(std::pow(10.0, llo + (lhi - llo) * double(i) / double(count - 1)));
    return grid;
}

SprResult spr_check(const LureSystem& sys, double k_lower, double k_upper,
                    std::vector<double> freq_grid) {
    if (sys.Omega.size() == 0)
        throw std::invalid_argument("spr_check: Omega not set (run kyp_solve)");
    if (freq_grid.empty()) freq_grid = make_freq_grid(sys);

    const int d = sys.dim();
    const int q = int(sys.Omega.rows());
    const ComplexMatrix Ec = sys.E.cast<std::complex<double>>();
    const ComplexMatrix Gc = sys.Gamma.cast<std::complex<double>>();
    const ComplexMatrix Sc = sys.Sigma.cast<std::complex<double>>();
    const ComplexMatrix Oc = sys.Omega.cast<std::complex<double>>();
    const ComplexMatrix Iq = ComplexMatrix::Identity(q, q);

    SprResult res;
    res.margin = std::numeric_limits<double>::infinity();
    for (double w : freq_grid) {
        const ComplexMatrix pencil = std::complex<double>(0.0, w) * Ec - Gc;
        Eigen::FullPivLU<ComplexMatrix> lu(pencil);
        if (!lu.isInvertible()) {
            res.ok = false;
            res.margin = -std::numeric_limits<double>::infinity();
            res.worst_omega = w;
            std::ostringstream os;
            os << "spr: (jwE - Gamma) singular at w = " << w;
            res.failure_reason = os.str();
            return res;
        }
        const ComplexMatrix G = Oc * lu.solve(Sc);
        Eigen::FullPivLU<ComplexMatrix> lu2(Iq + k_lower * G);
        if (!lu2.isInvertible()) {
            res.ok = false;
            res.margin = -std::numeric_limits<double>::infinity();
            res.worst_omega = w;
            std::ostringstream os;
            os << "spr: (I + K_lower G) singular at w = " << w;
            res.failure_reason = os.str();
            return res;
        }
        const ComplexMatrix T = (Iq + k_upper * G) * lu2.inverse();
        const ComplexMatrix herm = 0.5 * (T + T.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm,
                                                        Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin < res.margin) {
            res.margin = lmin;
            res.worst_omega = w;
        }
    }
    (void)d;
    res.ok = res.margin > 0.0;
    if (!res.ok && res.failure_reason.empty()) {
        std::ostringstream os;
        os << "spr: Hermitian part not PD, min eigenvalue " << res.margin
           << " at w = " << res.worst_omega;
        res.failure_reason = os.str();
    }
    return res;
}

SectorResult sector_estimate(const LureSystem& sys, int samples, double radius,
                             Rng& rng, const DenseVector& center_in) {
    if (samples < 1) throw std::invalid_argument("sector_estimate: samples < 1");
    if (radius <= 0.0) throw std::invalid_argument("sector_estimate: radius <= 0");
    const int d = sys.dim();
    const DenseVector center =
        center_in.size() == 0 ? DenseVector(DenseVector::Zero(d)) : center_in;
    const DenseMatrix Einv = e_inverse(sys.E);
    const DenseVector phi_center = Einv * sys.phi(center);

    constexpr double kUpperCap = 1e6;

    // Decompose E^-1 dphi = lambda * zeta + w with w orthogonal to zeta; the
    // scalar sector condition per sample reads
    // (lambda - kl)(ku - lambda) >= ||w||^2 / ||zeta||^2.
    std::vector<DenseVector> zetas;
    std::vector<double> lam, s;
    zetas.reserve(std::size_t(samples));
    double ku = -std::numeric_limits<double>::infinity();
    bool unbounded = false;
    for (int i = 0; i < samples; ++i) {
        DenseVector zeta = to_vec(rng.ball(d, radius));
        const double nz2 = zeta.squaredNorm();
        if (nz2 == 0.0) continue;
        const DenseVector f = Einv * sys.phi(center + zeta) - phi_center;
        const double li = f.dot(zeta) / nz2;
        const double si = std::sqrt(std::max(0.0, (f - li * zeta).squaredNorm() / nz2));
        if (li + si > kUpperCap) unbounded = true;
        ku = std::max(ku, li + si);
        lam.push_back(li);
        s.push_back(si);
        zetas.push_back(std::move(zeta));
    }

    SectorResult res;
    res.samples = int(zetas.size());
    if (zetas.empty()) return res;
    res.upper_bounded = !unbounded;
    res.k_upper = unbounded ? std::numeric_limits<double>::infinity() : ku;

    // Tightest lower bound compatible with the chosen upper bound.
    double kl = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double gap = res.k_upper - lam[i];
        const double cand = (gap > 1e-300 && std::isfinite(gap))
            ? lam[i] - (s[i] * s[i]) / gap : lam[i] - s[i];
        kl = std::min(kl, cand);
    }
    res.k_lower = kl;

    if (res.upper_bounded) {
        const double tol = 1e-12 * std::max(1.0, std::abs(res.k_upper));
        for (std::size_t i = 0; i < lam.size(); ++i)
            if ((lam[i] - res.k_lower) * (res.k_upper - lam[i]) <
                s[i] * s[i] - tol)
                ++res.violations;
    }
    return res;
}

EnvelopeResult envelope_simulate(const LureSystem& sys, const DenseVector& zeta0,
                                 const DenseVector& zeta_star, const DenseMatrix& P,
                                 const DenseMatrix& Q, double t_end, double dt) {
    if (t_end <= 0.0 || dt <= 0.0)
        throw std::invalid_argument("envelope_simulate: need t_end > 0, dt > 0");
    const DenseMatrix Einv = e_inverse(sys.E);
    auto rhs = [&](const DenseVector& z) -> DenseVector {
        return Einv * (sys.Gamma * z - sys.phi(z) - sys.c_offset);
    };

    const auto [pmin, pmax] = sym_eig_extremes(P);
    const auto [qmin, qmax] = sym_eig_extremes(Q);
    (void)qmax;
    const DenseVector e0 = zeta0 - zeta_star;
    const double v0 = 0.5 * e0.dot(P * e0);
    const double alpha = qmin / pmax;  // provable Lyapunov decay rate

    EnvelopeResult res;
    const double blowup = 1e6 * std::max(1.0, 0.5 * e0.squaredNorm());
    double step = dt;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        res.times.clear();
        res.energies.clear();
        res.envelope.clear();
        res.max_violation = 0.0;
        res.failure_reason.clear();
        bool unstable = false;

        DenseVector z = zeta0;
        const int steps = int(std::ceil(t_end / step));
        for (int k = 0; k <= steps; ++k) {
            const double t = std::min(double(k) * step, t_end);
            const double energy = 0.5 * (z - zeta_star).squaredNorm();
            if (!std::isfinite(energy) || energy > blowup) {
                unstable = true;
                break;
            }
            const double env = (pmin > 0.0)
                ? (v0 / pmin) * std::exp(-alpha * t)
                : std::numeric_limits<double>::infinity();
            res.times.push_back(t);
            res.energies.push_back(energy);
            res.envelope.push_back(env);
            res.max_violation = std::max(res.max_violation, energy - env);
            if (k == steps) break;

            const double h = std::min(step, t_end - t);
            const DenseVector k1 = rhs(z);
            const DenseVector k2 = rhs(z + 0.5 * h * k1);
            const DenseVector k3 = rhs(z + 0.5 * h * k2);
            const DenseVector k4 = rhs(z + h * k3);
            z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!unstable) {
            res.dt_used = step;
            res.halvings = attempt;
            res.ok = res.max_violation <= 1e-6;
            if (!res.ok) {
                std::ostringstream os;
                os << "envelope: violation " << res.max_violation << " above 1e-6";
                res.failure_reason = os.str();
            }
            return res;
        }
        step *= 0.5;
    }
    res.ok = false;
    res.dt_used = step;
    res.halvings = 10;
    res.failure_reason = "envelope: energy blow-up persists after 10 dt halvings";
    return res;
}

DenseVector equilibrium_state(const CompositeProblem& prob, int max_iter, double tol) {
    SolverConfig cfg;
    cfg.scheme = Scheme::ClassicalADMM;
    cfg.max_iter = max_iter;
    cfg.stop_objective_tol = tol;
    cfg.record_snapshots = false;
    const SolverTrace trace = run(prob, cfg);
    DenseVector zeta(trace.final_x.size() + trace.final_z.size() + trace.final_v.size());
    zeta << trace.final_x, trace.final_z, trace.final_v;
    return zeta;
}

StabilityCertificate certify(const CompositeProblem& prob, const CertifyOptions& opts) {
    StabilityCertificate cert;
    LureSystem sys;
    try {
        sys = build_lure(prob, opts.mu);
    } catch (const std::exception& e) {
        cert.failure_reason = std::string("build: ") + e.what();
        return cert;
    }

    const KypResult kyp = kyp_solve(sys);
    cert.kyp_solvable = kyp.solvable;
    cert.p_positive_definite = kyp.p_positive_definite;
    cert.kyp_residual = kyp.residual;
    cert.P = kyp.P;
    cert.Q = kyp.Q;
    cert.Omega = kyp.Omega;
    if (!kyp.solvable || !kyp.p_positive_definite) {
        cert.failure_reason = kyp.failure_reason;
        return cert;
    }

    const auto [pmin, pmax] = sym_eig_extremes(cert.P);
    const auto [qmin, qmax] = sym_eig_extremes(cert.Q);
    (void)qmax;
    cert.rate = 2.0 * qmin / pmin;
    cert.provable_rate = qmin / pmax;

    const MinimalityResult mm = minimality_check(sys);
    cert.controllable = mm.controllable;
    cert.observable = mm.observable;
    cert.minimal = mm.controllable && mm.observable;
    if (!cert.minimal) {
        cert.failure_reason = "minimality: realization not controllable+observable";
        return cert;
    }

    const DenseVector zeta_star = equilibrium_state(prob);
    Rng rng(opts.seed);
    const SectorResult sector =
        sector_estimate(sys, opts.sector_samples, opts.sector_radius, rng, zeta_star);
    cert.sector_k_lower = sector.k_lower;
    cert.sector_k_upper = sector.k_upper;
    cert.sector_upper_bounded = sector.upper_bounded;
    cert.sector_violations = sector.violations;
    if (!sector.upper_bounded || sector.violations > 0) {
        cert.failure_reason = "sector: no finite zero-violation scalar bounds found";
        return cert;
    }

    const SprResult spr = spr_check(sys, sector.k_lower, sector.k_upper);
    cert.spr_ok = spr.ok;
    cert.spr_margin = spr.margin;
    if (!spr.ok) {
        cert.failure_reason = spr.failure_reason;
        return cert;
    }

    Rng dir_rng(opts.seed + 1);
    const DenseVector zeta0 =
        zeta_star + opts.sector_radius * to_vec(dir_rng.unit_direction(sys.dim()));
    const EnvelopeResult env = envelope_simulate(sys, zeta0, zeta_star, cert.P,
                                                 cert.Q, opts.t_end, opts.dt);
    cert.envelope_ok = env.ok;
    cert.envelope_max_violation = env.max_violation;
    if (!env.ok) {
        cert.failure_reason = env.failure_reason;
        return cert;
    }
    cert.absolutely_stable = true;
    return cert;
}

std::string certificate_to_json(const StabilityCertificate& cert) {
    nlohmann::json j;
    j["schema"] = "splitkit-certificate-v1";
    j["minimal"] = cert.minimal;
    j["controllable"] = cert.controllable;
    j["observable"] = cert.observable;
    j["kyp_solvable"] = cert.kyp_solvable;
    j["p_positive_definite"] = cert.p_positive_definite;
    j["kyp_residual"] = cert.kyp_residual;
    j["P"] = matrix_json(cert.P);
    j["Q"] = matrix_json(cert.Q);
    j["Omega"] = matrix_json(cert.Omega);
    j["spr_ok"] = cert.spr_ok;
    j["spr_margin"] = cert.spr_margin;
    j["sector"] = {
        {"k_lower", cert.sector_k_lower},
        {"k_upper", cert.sector_upper_bounded
            ? nlohmann::json(cert.sector_k_upper) : nlohmann::json("unbounded")},
        {"violations", cert.sector_violations},
    };
    j["envelope_ok"] = cert.envelope_ok;
    j["envelope_max_violation"] = cert.envelope_max_violation;
    j["rate"] = cert.rate;
    j["provable_rate"] = cert.provable_rate;
    j["absolutely_stable"] = cert.absolutely_stable;
    j["failure_reason"] = cert.failure_reason;
    return j.dump(2);
}

void save_certificate(const std::string& path, const StabilityCertificate& cert) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_certificate: cannot open " + path);
    out << certificate_to_json(cert) << '\n';
}

}  // namespace splitkit
