#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "splitkit/linalg.hpp"
#include "splitkit/rng.hpp"

namespace splitkit {

DenseVector soft_threshold(const DenseVector& v, double tau);

// x solving (2q H^T H + Lambda) x = 2q H^T b + gamma_vec via Cholesky; no
// explicit inverse is ever formed. quad2 = 2q is 1.0 for g = 0.5||Hx-b||^2.
DenseVector prox_generalized_quadratic(const DenseMatrix& Lambda,
                                       const DenseVector& gamma_vec,
                                       const DenseMatrix& H, const DenseVector& b,
                                       double quad2 = 1.0);

// Additive proximal-error specification. Deterministic schedules: eps0,
// eps0/k, eps0/k^2. Stochastic draws are uniform in a calibrated ball and
// keep the audited slack within eps0 at every iteration.
struct ErrorModel {
    enum class Kind { None, Deterministic, Stochastic };
    enum class Schedule { Constant, OverK, OverKSquared };
    Kind kind = Kind::None;
    double epsilon0 = 0.0;
    Schedule schedule = Schedule::Constant;
    std::uint64_t seed = 0;

    double target_at(int k) const;  // per-iteration epsilon magnitude, k >= 1
};

struct ProxResult {
    DenseVector point;   // exact + r
    DenseVector r;       // injected perturbation
    double epsilon = 0;  // epsilon-subgradient slack budget consumed
};

using ScalarFn = std::function<double(const DenseVector&)>;
using SubgradFn = std::function<DenseVector(const DenseVector&)>;

// Certified lower bound on the epsilon for which w is an epsilon-subgradient
// of fn at x: max over probes y of fn(x) + <w, y-x> - fn(y), clipped at 0.
double epsilon_audit(const ScalarFn& fn, const DenseVector& x_perturbed,
                     const DenseVector& w, const std::vector<DenseVector>& probes);

// Verifies q(y) >= q(x+) + <x - x+, y - x+> on the probe set within 1e-9.
bool prox_subgradient_check(const ScalarFn& q, const DenseVector& x,
                            const DenseVector& x_plus,
                            const std::vector<DenseVector>& probes,
                            double tol = 1e-9);

// Reusable audit state for one solver iteration: fixed probes with cached
// function values, so radius calibration re-evaluates only the moving parts.
class EpsilonAuditContext {
public:
    EpsilonAuditContext(ScalarFn fn, SubgradFn claimed_w,
                        std::vector<DenseVector> probes);

    double slack(const DenseVector& point) const;

    // Largest radius along `direction` (capped at 1) whose audited slack stays
    // within eps_target; 20 bisection steps.
    double calibrate_radius(const DenseVector& exact, const DenseVector& direction,
                            double eps_target) const;

private:
    ScalarFn fn_;
    SubgradFn claimed_w_;
    std::vector<DenseVector> probes_;
    std::vector<double> fn_at_probes_;
};

// Draws r per the model (r = 0 for k = 0 or kind None) and returns the
// perturbed point with its epsilon budget.
ProxResult inject_error(const DenseVector& exact, const ErrorModel& model, int k,
                        Rng& rng, const EpsilonAuditContext* audit);

// 100 probes in the unit ball around `center`.
std::vector<DenseVector> default_probes(const DenseVector& center, Rng& rng,
                                        int count = 100, double radius = 1.0);

}  // namespace splitkit
