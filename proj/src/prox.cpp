#include "splitkit/prox.hpp"

#include <cmath>

namespace splitkit {

DenseVector soft_threshold(const DenseVector& v, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau < 0");
    DenseVector y(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i)) - tau;
        y(i) = (a > 0.0) ? (v(i) > 0.0 ? a : -a) : 0.0;
    }
    return y;
}

DenseVector prox_generalized_quadratic(const DenseMatrix& Lambda,
                                       const DenseVector& gamma_vec,
                                       const DenseMatrix& H, const DenseVector& b,
                                       double quad2) {
    const DenseMatrix S = quad2 * (H.transpose() * H) + Lambda;
    const DenseVector rhs = quad2 * (H.transpose() * b) + gamma_vec;
    const DenseMatrix G = cholesky_factor(S);
    // G G^T x = rhs via two triangular solves.
    DenseVector y = G.triangularView<Eigen::Lower>().solve(rhs);
    return G.transpose().triangularView<Eigen::Upper>().solve(y);
}

double ErrorModel::target_at(int k) const {
    if (kind == Kind::None || k < 1) return 0.0;
    if (kind == Kind::Stochastic) return epsilon0;
    switch (schedule) {
        case Schedule::Constant: return epsilon0;
        case Schedule::OverK: return epsilon0 / double(k);
        case Schedule::OverKSquared: return epsilon0 / (double(k) * double(k));
    }
    return epsilon0;
}

double epsilon_audit(const ScalarFn& fn, const DenseVector& x_perturbed,
                     const DenseVector& w, const std::vector<DenseVector>& probes) {
    const double fx = fn(x_perturbed);
    double bound = 0.0;
    for (const auto& y : probes) {
        const double gap = fx + w.dot(y - x_perturbed) - fn(y);
        bound = std::max(bound, gap);
    }
    return bound;
}

bool prox_subgradient_check(const ScalarFn& q, const DenseVector& x,
                            const DenseVector& x_plus,
                            const std::vector<DenseVector>& probes, double tol) {
    const double qp = q(x_plus);
    const DenseVector w = x - x_plus;
    for (const auto& y : probes)
        if (q(y) < qp + w.dot(y - x_plus) - tol) return false;
    return true;
}

EpsilonAuditContext::EpsilonAuditContext(ScalarFn fn, SubgradFn claimed_w,
                                         std::vector<DenseVector> probes)
    : fn_(std::move(fn)), claimed_w_(std::move(claimed_w)), probes_(std::move(probes)) {
    fn_at_probes_.reserve(probes_.size());
    for (const auto& y : probes_) fn_at_probes_.push_back(fn_(y));
}

double EpsilonAuditContext::slack(const DenseVector& point) const {
    const double fx = fn_(point);
    const DenseVector w = claimed_w_(point);
    double bound = 0.0;
    for (std::size_t i = 0; i < probes_.size(); ++i) {
        const double gap = fx + w.dot(probes_[i] - point) - fn_at_probes_[i];
        bound = std::max(bound, gap);
    }
    return bound;
}

double EpsilonAuditContext::calibrate_radius(const DenseVector& exact,
                                             const DenseVector& direction,
                                             double eps_target) const {
    if (eps_target <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    if (slack(exact + hi * direction) <= eps_target) return hi;
    for (int it = 0; it < 20; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slack(exact + mid * direction) <= eps_target) lo = mid;
        else hi = mid;
    }
    return lo;
}

ProxResult inject_error(const DenseVector& exact, const ErrorModel& model, int k,
                        Rng& rng, const EpsilonAuditContext* audit) {
    ProxResult res;
    res.point = exact;
    res.r = DenseVector::Zero(exact.size());
    if (model.kind == ErrorModel::Kind::None || k < 1) return res;

    const double eps_target = model.target_at(k);
    if (eps_target <= 0.0) return res;
    if (!audit)
        throw std::invalid_argument("inject_error: audit context required for nonzero errors");

    const int n = int(exact.size());
    DenseVector dir(n);
    double frac = 1.0;  // fraction of the calibrated radius actually used
    if (model.kind == ErrorModel::Kind::Stochastic) {
        const auto p = rng.ball(n, 1.0);
        double norm = 0.0;
        for (double v : p) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) return res;
        for (int i = 0; i < n; ++i) dir(i) = p[std::size_t(i)] / norm;
        frac = norm;  // uniform-in-ball magnitude
    } else {
        const auto d = rng.unit_direction(n);
        for (int i = 0; i < n; ++i) dir(i) = d[std::size_t(i)];
    }

    const double radius = audit->calibrate_radius(exact, dir, eps_target);
    res.r = (frac * radius) * dir;
    res.point = exact + res.r;
    // Interior points are not guaranteed monotone in the audited slack; shrink
    // until the budget holds.
    for (int guard = 0; guard < 8 && audit->slack(res.point) > eps_target; ++guard) {
        res.r *= 0.5;
        res.point = exact + res.r;
    }
    if (audit->slack(res.point) > eps_target) {
        res.r.setZero();
        res.point = exact;
    }
    res.epsilon = eps_target;
    return res;
}

std::vector<DenseVector> default_probes(const DenseVector& center, Rng& rng,
                                        int count, double radius) {
    std::vector<DenseVector> probes;
    probes.reserve(std::size_t(count));
    const int n = int(center.size());
    for (int i = 0; i < count; ++i) {
        const auto p = rng.ball(n, radius);
        DenseVector y = center;
        for (int j = 0; j < n; ++j) y(j) += p[std::size_t(j)];
        probes.push_back(std::move(y));
    }
    return probes;
}

}  // namespace splitkit
