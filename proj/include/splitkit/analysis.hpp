#pragma once

#include <string>
#include <vector>

#include "splitkit/problem.hpp"
#include "splitkit/solvers.hpp"

namespace splitkit {

struct ReferenceSolution {
    DenseVector x_star, z_star;
    double f_star = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Long-run float64 classical ADMM; stops when the successive objective change
// drops below tol (relative) or after max_iter steps.
ReferenceSolution reference_solution(const CompositeProblem& prob,
                                     int max_iter = 50000, double tol = 1e-14);

struct BoundRow {
    int k = 0;           // running-average index; uses iterates 1..k+1
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    double init_term = 0.0;
    double coupling_term = 0.0;
    double error_sum_g = 0.0;
    double error_sum_h = 0.0;
    double residual_inner_products = 0.0;  // -<Mx r_x, x-x*> - <r_z, z-z*>
};

struct BoundReport {
    std::vector<BoundRow> rows;
    double min_slack = 0.0;
};

// Running-average suboptimality bound; the trace must carry snapshots.
BoundReport theorem1_bound(const SolverTrace& trace, const CompositeProblem& prob,
                           const DenseVector& x_star, const DenseVector& z_star);

void save_bound_csv(const std::string& path, const BoundReport& report);

// 100 * |f - f*| / f*  (figure-caption metric).
double relative_error_caption(double f, double f_star);
// 100 * (f - f*) / f   (running-text metric; requires f > 0).
double relative_error_text(double f, double f_star);

struct EnergyModel {
    double watts_per_iter_admm = 8.8e-3;
    double watts_per_iter_dfgpgd = 3.8e-3;

    double watts_per_iter(Scheme s) const {
        return s == Scheme::DFGPGD ? watts_per_iter_dfgpgd : watts_per_iter_admm;
    }
};

struct SweepRow {
    Scheme scheme = Scheme::ClassicalADMM;
    std::uint64_t seed = 0;
    int max_iter = 0;
    double rel_err_caption = 0.0;
    double rel_err_text = 0.0;
    double energy_w = 0.0;
    double objective = 0.0;
    double f_star = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

// Runs n_experiments random instances per the spec; each scheme runs once to
// max(max_iters) and the fixed-trip-count results are read off the trace.
// threads = 0 uses SPLITKIT_THREADS or hardware concurrency. Rows come back
// in deterministic (seed, scheme, max_iter) order.
SweepTable power_error_sweep(const LassoSpec& base, const std::vector<Scheme>& schemes,
                             const std::vector<int>& max_iters, const EnergyModel& energy,
                             int n_experiments, int threads = 0);

void save_sweep_csv(const std::string& path, const SweepTable& table);

}  // namespace splitkit
