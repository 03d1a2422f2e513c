#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitkit/problem.hpp"
#include "splitkit/prox.hpp"
#include "splitkit/smat.hpp"

namespace splitkit {

enum class Scheme { ClassicalADMM, WLADMM, WLMADMM, DFGPGD };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct SolverConfig {
    Scheme scheme = Scheme::DFGPGD;
    int max_iter = 100;
    bool fixed_point = false;
    QFormat qformat;                  // used when fixed_point
    ErrorModel error_model_x;
    ErrorModel error_model_z;
    bool record_trace = true;
    bool record_snapshots = false;
    std::optional<DenseMatrix> M_x;   // WLM-ADMM only; empty = inverse-cancelling choice
    int audit_probes = 100;
    double stop_objective_tol = 0.0;  // 0 = fixed trip count; >0 = oracle stopping rule
};

struct TraceRow {
    int k = 0;
    double objective = 0.0;
    double constraint_residual = 0.0;
    double eps_g = 0.0;
    double eps_h = 0.0;
    std::uint64_t flops_cumulative = 0;
    DenseVector x, z, v, r_x, r_z;    // filled only when record_snapshots
};

struct SolverTrace {
    Scheme scheme = Scheme::DFGPGD;
    DenseVector x0, z0, v0;
    DenseVector final_x, final_z, final_v;
    std::vector<TraceRow> rows;
    std::uint64_t total_flops = 0;
    std::uint64_t x_update_flops = 0;  // per-iteration x-update cost (measured at k=1)
    std::uint64_t solve_events = 0;    // linear solves performed after setup
};

SolverTrace run(const CompositeProblem& prob, const SolverConfig& cfg);
SolverTrace run(const CompositeProblem& prob, const SolverConfig& cfg,
                const DenseVector& x0, const DenseVector& z0, const DenseVector& v0);

// Per-x-update flop cost polynomials.
std::uint64_t flop_model(Scheme scheme, int n);

// Trace CSV with a `# splitkit-schema v1` header line.
void save_trace_csv(const std::string& path, const SolverTrace& trace);

}  // namespace splitkit
