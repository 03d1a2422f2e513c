#include "splitkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace splitkit {

ReferenceSolution reference_solution(const CompositeProblem& prob, int max_iter, double tol) {
    SolverConfig cfg;
    cfg.scheme = Scheme::ClassicalADMM;
    cfg.max_iter = max_iter;
    cfg.stop_objective_tol = tol;
    cfg.record_snapshots = false;
    const SolverTrace trace = run(prob, cfg);

    ReferenceSolution ref;
    ref.iterations = int(trace.rows.size());
    ref.converged = ref.iterations < max_iter;
    // z is the splitting variable carrying the l1 structure; the consensus
    // point (z, z) is feasible, which the bound evaluation relies on.
    ref.x_star = trace.final_z;
    ref.z_star = trace.final_z;
    ref.f_star = objective(prob, ref.x_star, ref.z_star);
    return ref;
}

BoundReport theorem1_bound(const SolverTrace& trace, const CompositeProblem& prob_in,
                           const DenseVector& x_star, const DenseVector& z_star) {
    CompositeProblem prob = prob_in;
    apply_defaults(prob);
    if (!prob.half_quadratic)
        throw std::invalid_argument("theorem1_bound: requires the half-quadratic objective");
    if (trace.rows.empty() || trace.rows.front().x.size() == 0)
        throw std::invalid_argument("theorem1_bound: trace has no snapshots");

    const int n = prob.n();
    const DenseMatrix HtH = prob.H.transpose() * prob.H;
    const DenseMatrix Ad = prob.A.to_dense();
    DenseMatrix L = prob.L_is_identity()
        ? DenseMatrix::Identity(prob.p(), prob.p()) : prob.L;
    const DenseMatrix AtLA = Ad.transpose() * L * Ad;
    const double lam = prob.lambda, lam_x = prob.lambda_x;
    const DenseMatrix Mx =
        lam_x * DenseMatrix::Identity(n, n) - HtH - (1.0 / lam) * AtLA;

    const double f_star = objective(prob, x_star, z_star);
    const DenseVector ref_residual = prob.A.apply(x_star) + prob.B.apply(z_star);

    const double init_x = lam_x * (trace.x0 - x_star).squaredNorm();
    const double init_z = (trace.z0 - z_star).squaredNorm();

    BoundReport report;
    report.min_slack = std::numeric_limits<double>::infinity();

    double sum_f = 0.0, sum_coupling = 0.0, sum_eps_g = 0.0, sum_eps_h = 0.0;
    const DenseVector* z_prev = &trace.z0;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const TraceRow& row = trace.rows[i];
        sum_f += row.objective;
        sum_eps_g += row.eps_g;
        sum_eps_h += row.eps_h;

        // u2^{i+1} = v^{i+1} + B(z^i - z^{i+1})
        const DenseVector u2 = row.v + prob.B.apply(*z_prev - row.z);
        const DenseVector residual = prob.A.apply(row.x) + prob.B.apply(row.z) - ref_residual;
        sum_coupling += (1.0 / lam) * (L * u2).dot(residual);
        z_prev = &row.z;

        const double kp1 = double(i + 1);
        BoundRow out;
        out.k = int(i);
        out.coupling_term = sum_coupling / kp1;
        out.lhs = sum_f / kp1 - f_star + out.coupling_term;

        const DenseVector dx = row.x - x_star;
        out.init_term = (init_x + dx.dot(HtH * dx) + (1.0 / lam) * dx.dot(AtLA * dx) +
                         init_z) / (2.0 * kp1);
        out.error_sum_g = sum_eps_g / kp1;
        out.error_sum_h = sum_eps_h / kp1;
        out.residual_inner_products =
            (-(Mx * row.r_x).dot(dx) - row.r_z.dot(row.z - z_star)) / kp1;
        out.rhs = out.init_term + out.error_sum_g + out.error_sum_h +
                  out.residual_inner_products;
        out.slack = out.rhs - out.lhs;
        report.min_slack = std::min(report.min_slack, out.slack);
        report.rows.push_back(out);
    }
    return report;
}

void save_bound_csv(const std::string& path, const BoundReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_bound_csv: cannot open " + path);
    out << "# splitkit-schema v1\n";
    out << "k,lhs,rhs,slack,init_term,coupling_term,error_sum_g,error_sum_h,"
           "residual_inner_products\n";
    out.precision(17);
    for (const auto& r : report.rows)
        out << r.k << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ','
            << r.init_term << ',' << r.coupling_term << ',' << r.error_sum_g << ','
            << r.error_sum_h << ',' << r.residual_inner_products << '\n';
}

double relative_error_caption(double f, double f_star) {
    if (f_star <= 0.0)
        throw std::invalid_argument("relative_error_caption: f_star must be > 0");
    return 100.0 * std::abs(f - f_star) / f_star;
}

double relative_error_text(double f, double f_star) {
    if (f <= 0.0)
        throw std::invalid_argument("relative_error_text: f must be > 0");
    return 100.0 * (f - f_star) / f;
}

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPLITKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

}  // namespace

SweepTable power_error_sweep(const LassoSpec& base, const std::vector<Scheme>& schemes,
                             const std::vector<int>& max_iters, const EnergyModel& energy,
                             int n_experiments, int threads) {
    if (n_experiments < 1)
        throw std::invalid_argument("power_error_sweep: n_experiments must be >= 1");
    if (max_iters.empty())
        throw std::invalid_argument("power_error_sweep: empty max_iters");
    if (energy.watts_per_iter_admm <= 0.0 || energy.watts_per_iter_dfgpgd <= 0.0)
        throw std::invalid_argument("power_error_sweep: per-iteration watts must be > 0");

    const int budget = *std::max_element(max_iters.begin(), max_iters.end());
    const int nthreads = std::min(resolve_threads(threads), n_experiments);

    // rows per instance: |schemes| * |max_iters|
    std::vector<std::vector<SweepRow>> per_instance(
        static_cast<std::size_t>(n_experiments));
    std::exception_ptr first_error;
    std::mutex err_mutex;

    auto worker = [&](int tid) {
        try {
            for (int e = tid; e < n_experiments; e += nthreads) {
                LassoSpec spec = base;
                spec.seed = base.seed + std::uint64_t(e);
                GeneratedLasso inst = generate_lasso(spec);
                const ReferenceSolution ref = reference_solution(inst.problem, 20000, 1e-14);

                std::vector<SweepRow>& rows = per_instance[std::size_t(e)];
                for (Scheme scheme : schemes) {
                    SolverConfig cfg;
                    cfg.scheme = scheme;
                    cfg.max_iter = budget;
                    const SolverTrace trace = run(inst.problem, cfg);
                    for (int mi : max_iters) {
                        if (mi < 1 || mi > budget)
                            throw std::invalid_argument("power_error_sweep: bad max_iter");
                        SweepRow row;
                        row.scheme = scheme;
                        row.seed = spec.seed;
                        row.max_iter = mi;
                        row.objective = trace.rows[std::size_t(mi - 1)].objective;
                        row.f_star = ref.f_star;
                        row.rel_err_caption = relative_error_caption(row.objective, ref.f_star);
                        row.rel_err_text = relative_error_text(row.objective, ref.f_star);
                        row.energy_w = double(mi) * energy.watts_per_iter(scheme);
                        rows.push_back(row);
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    SweepTable table;
    for (const auto& rows : per_instance)
        table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    return table;
}

void save_sweep_csv(const std::string& path, const SweepTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_sweep_csv: cannot open " + path);
    out << "# splitkit-schema v1\n";
    out << "scheme,seed,max_iter,rel_err_caption,rel_err_text,energy_w\n";
    out.precision(17);
    for (const auto& r : table.rows)
        out << scheme_name(r.scheme) << ',' << r.seed << ',' << r.max_iter << ','
            << r.rel_err_caption << ',' << r.rel_err_text << ',' << r.energy_w << '\n';
}

}  // namespace splitkit
