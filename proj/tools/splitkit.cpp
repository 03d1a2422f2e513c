// splitkit: operator-splitting workbench CLI.
// Subcommands: generate | solve | sweep | bound | stability.
// Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitkit/analysis.hpp"
#include "splitkit/problem.hpp"
#include "splitkit/solvers.hpp"
#include "splitkit/stability.hpp"

using nlohmann::json;
using namespace splitkit;

namespace {

struct ProblemFlags {
    int n = 700, m = 270, s = 20;
    std::uint64_t seed = 1;
    double gamma = 0.0, noise_sigma = 0.0;
    bool force = false;
    std::string problem_path;  // load instead of generating when set
};

void add_problem_flags(CLI::App* app, ProblemFlags& pf) {
    app->add_option("--n", pf.n, "signal dimension");
    app->add_option("--m", pf.m, "measurement count");
    app->add_option("--s", pf.s, "support size");
    app->add_option("--seed", pf.seed, "instance seed");
    app->add_option("--gamma", pf.gamma, "l1 weight (0 = data-driven default)");
    app->add_option("--noise-sigma", pf.noise_sigma, "measurement noise sigma");
    app->add_flag("--force", pf.force, "skip the reconstructibility check");
    app->add_option("--problem", pf.problem_path, "load a serialized problem instead");
}

GeneratedLasso resolve_problem(const ProblemFlags& pf) {
    if (!pf.problem_path.empty()) return load_lasso(pf.problem_path);
    LassoSpec spec;
    spec.n = pf.n;
    spec.m = pf.m;
    spec.s = pf.s;
    spec.seed = pf.seed;
    spec.gamma = pf.gamma;
    spec.noise_sigma = pf.noise_sigma;
    return generate_lasso(spec, pf.force);
}

// Config file: flat JSON object of option names (without dashes). Entries
// become extra command-line tokens unless the flag was given explicitly, so
// explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
            continue;
        }
        out.push_back(args[i]);
    }
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json j = json::parse(in);
    for (auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (std::find(out.begin(), out.end(), flag) != out.end()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        if (value.is_string()) out.push_back(value.get<std::string>());
        else out.push_back(json(value).dump());
    }
    return out;
}

QFormat parse_arith(const std::string& arith, const std::string& overflow,
                    const std::string& quantize) {
    Overflow o;
    if (overflow == "wrap") o = Overflow::Wrap;
    else if (overflow == "saturate") o = Overflow::Saturate;
    else throw std::invalid_argument("unknown --overflow: " + overflow);
    Quantize q;
    if (quantize == "truncate") q = Quantize::TruncateTowardNegInfinity;
    else if (quantize == "round-even") q = Quantize::RoundToNearestEven;
    else throw std::invalid_argument("unknown --quantize: " + quantize);
    return QFormat::parse(arith, o, q);
}

std::vector<int> parse_iter_list(const std::string& text) {
    std::vector<int> out;
    // "a:b:c" range or comma list.
    if (text.find(':') != std::string::npos) {
        int lo = 0, hi = 0, step = 0;
        if (std::sscanf(text.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || step <= 0)
            throw std::invalid_argument("bad --max-iters range: " + text);
        for (int v = lo; v <= hi; v += step) out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty --max-iters list");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

int cmd_generate(const ProblemFlags& pf, const std::string& out_path) {
    const GeneratedLasso g = resolve_problem(pf);
    save_lasso(out_path, g);
    std::cout << "wrote " << out_path << " (n=" << g.spec.n << " m=" << g.spec.m
              << " s=" << g.spec.s << " seed=" << g.spec.seed << ")\n";
    return 0;
}

int cmd_solve(const ProblemFlags& pf, const std::string& scheme_name_str,
              int max_iter, const std::string& arith, const std::string& overflow,
              const std::string& quantize, double eps0_x, double eps0_z,
              const std::string& schedule, std::uint64_t error_seed,
              const std::string& trace_path, const std::string& summary_path) {
    const GeneratedLasso g = resolve_problem(pf);

    SolverConfig cfg;
    cfg.scheme = scheme_from_name(scheme_name_str);
    cfg.max_iter = max_iter;
    if (arith != "float64") {
        cfg.fixed_point = true;
        cfg.qformat = parse_arith(arith, overflow, quantize);
    }
    auto fill_model = [&](ErrorModel& m, double eps0, std::uint64_t seed) {
        if (eps0 <= 0.0) return;
        m.kind = ErrorModel::Kind::Deterministic;
        m.epsilon0 = eps0;
        m.seed = seed;
        if (schedule == "const") m.schedule = ErrorModel::Schedule::Constant;
        else if (schedule == "over-k") m.schedule = ErrorModel::Schedule::OverK;
        else if (schedule == "over-k2") m.schedule = ErrorModel::Schedule::OverKSquared;
        else throw std::invalid_argument("unknown --schedule: " + schedule);
    };
    fill_model(cfg.error_model_x, eps0_x, error_seed);
    fill_model(cfg.error_model_z, eps0_z, error_seed + 1);

    const SolverTrace trace = run(g.problem, cfg);
    if (!trace_path.empty()) save_trace_csv(trace_path, trace);

    CompositeProblem resolved = g.problem;
    apply_defaults(resolved);
    const ReferenceSolution ref = reference_solution(resolved, 20000, 1e-14);
    const double f_final = trace.rows.back().objective;
    const EnergyModel energy;

    json summary;
    summary["schema"] = "splitkit-summary-v1";
    summary["scheme"] = scheme_name(cfg.scheme);
    summary["max_iter"] = cfg.max_iter;
    summary["arith"] = cfg.fixed_point ? cfg.qformat.to_string() : "float64";
    summary["problem"] = {{"n", g.spec.n}, {"m", g.spec.m}, {"s", g.spec.s},
                          {"seed", g.spec.seed},
                          {"gamma", resolved.gamma},
                          {"lambda", resolved.lambda},
                          {"lambda_x", resolved.lambda_x},
                          {"lambda_z", resolved.lambda_z}};
    summary["objective"] = f_final;
    summary["f_star"] = ref.f_star;
    summary["rel_err_caption_pct"] = relative_error_caption(f_final, ref.f_star);
    summary["rel_err_text_pct"] = relative_error_text(f_final, ref.f_star);
    summary["total_flops"] = trace.total_flops;
    summary["x_update_flops"] = trace.x_update_flops;
    summary["solve_events"] = trace.solve_events;
    summary["energy_w"] = double(cfg.max_iter) * energy.watts_per_iter(cfg.scheme);
    const std::string text = summary.dump(2) + "\n";
    if (!summary_path.empty()) write_text(summary_path, text);
    std::cout << text;
    return 0;
}

int cmd_sweep(const ProblemFlags& pf, const std::string& iters_text, int experiments,
              int threads, const std::string& out_path, bool emit_gnuplot) {
    LassoSpec spec;
    spec.n = pf.n;
    spec.m = pf.m;
    spec.s = pf.s;
    spec.seed = pf.seed;
    spec.gamma = pf.gamma;
    spec.noise_sigma = pf.noise_sigma;
    if (!reconstructibility_check(spec.n, spec.m, spec.s) && !pf.force)
        throw std::invalid_argument("sweep: reconstructibility check fails; pass --force");

    const std::vector<int> max_iters = parse_iter_list(iters_text);
    const EnergyModel energy;
    const SweepTable table = power_error_sweep(
        spec, {Scheme::ClassicalADMM, Scheme::DFGPGD}, max_iters, energy,
        experiments, threads);
    save_sweep_csv(out_path, table);
    std::cout << "wrote " << out_path << " (" << table.rows.size() << " rows)\n";

    if (emit_gnuplot) {
        const std::string gp_path = out_path + ".gp";
        std::ostringstream gp;
        gp << "# gnuplot script for the power/error sweep\n"
           << "set datafile separator ','\n"
           << "set logscale y\n"
           << "set xlabel 'energy proxy [W x iter]'\n"
           << "set ylabel 'relative error [%]'\n"
           << "plot '" << out_path
           << "' every ::1 using 6:(strcol(1) eq 'classical-admm' ? $4 : 1/0) "
              "title 'ADMM' with points, \\\n     '" << out_path
           << "' every ::1 using 6:(strcol(1) eq 'dfgpgd' ? $4 : 1/0) "
              "title 'DFGPGD' with points\n";
        write_text(gp_path, gp.str());
        std::cout << "wrote " << gp_path << "\n";
    }
    return 0;
}

int cmd_bound(const ProblemFlags& pf, const std::string& scheme_name_str, int max_iter,
              double eps0, const std::string& schedule, std::uint64_t error_seed,
              const std::string& out_path) {
    const GeneratedLasso g = resolve_problem(pf);
    CompositeProblem prob = g.problem;
    apply_defaults(prob);

    SolverConfig cfg;
    cfg.scheme = scheme_from_name(scheme_name_str);
    cfg.max_iter = max_iter;
    cfg.record_snapshots = true;
    if (eps0 > 0.0) {
        auto fill = [&](ErrorModel& m, std::uint64_t seed) {
            m.kind = ErrorModel::Kind::Stochastic;
            m.epsilon0 = eps0;
            m.seed = seed;
            if (schedule == "const") m.schedule = ErrorModel::Schedule::Constant;
            else if (schedule == "over-k") m.schedule = ErrorModel::Schedule::OverK;
            else if (schedule == "over-k2") m.schedule = ErrorModel::Schedule::OverKSquared;
            else throw std::invalid_argument("unknown --schedule: " + schedule);
        };
        fill(cfg.error_model_x, error_seed);
        fill(cfg.error_model_z, error_seed + 1);
    }

    const SolverTrace trace = run(prob, cfg);
    const ReferenceSolution ref = reference_solution(prob, 20000, 1e-14);
    const BoundReport report = theorem1_bound(trace, prob, ref.x_star, ref.z_star);
    if (!out_path.empty()) save_bound_csv(out_path, report);
    std::cout << "min_slack " << report.min_slack << "\n";
    return report.min_slack >= -1e-8 ? 0 : 1;
}

int cmd_stability(const ProblemFlags& pf, double mu, const std::string& out_path) {
    const GeneratedLasso g = resolve_problem(pf);
    CertifyOptions opts;
    opts.mu = mu;
    const StabilityCertificate cert = certify(g.problem, opts);
    const std::string text = certificate_to_json(cert) + "\n";
    if (!out_path.empty()) write_text(out_path, text);
    std::cout << text;
    // An honest precondition-failure verdict is still a successful run; only
    // a violated certificate invariant is an error.
    if (cert.kyp_solvable && cert.kyp_residual > 1e-9) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitkit: operator-splitting solver workbench"};
    app.require_subcommand(1);
    std::string config_path;  // stripped before parse; registered for --help
    app.add_option("--config", config_path, "JSON config file with flag defaults");

    ProblemFlags pf;

    auto* gen = app.add_subcommand("generate", "write a random consensus LASSO instance");
    std::string gen_out = "problem.json";
    add_problem_flags(gen, pf);
    gen->add_option("--out", gen_out, "output problem path");

    auto* solve = app.add_subcommand("solve", "run one scheme on one instance");
    std::string scheme = "dfgpgd", arith = "float64", overflow = "wrap";
    std::string quantize = "truncate", schedule = "const";
    std::string trace_path = "trace.csv", summary_path;
    int max_iter = 100;
    double eps0_x = 0.0, eps0_z = 0.0;
    std::uint64_t error_seed = 7;
    add_problem_flags(solve, pf);
    solve->add_option("--scheme", scheme, "classical-admm|wl-admm|wlm-admm|dfgpgd")
        ->check(CLI::IsMember({"classical-admm", "wl-admm", "wlm-admm", "dfgpgd"}));
    solve->add_option("--max-iter", max_iter, "fixed trip count");
    solve->add_option("--arith", arith, "float64 or Qi.f (e.g. q16.8)");
    solve->add_option("--overflow", overflow, "wrap|saturate");
    solve->add_option("--quantize", quantize, "truncate|round-even");
    solve->add_option("--eps0-x", eps0_x, "x-prox error budget");
    solve->add_option("--eps0-z", eps0_z, "z-prox error budget");
    solve->add_option("--schedule", schedule, "const|over-k|over-k2");
    solve->add_option("--error-seed", error_seed, "error-direction seed");
    solve->add_option("--out-trace", trace_path, "trace CSV path (empty = skip)");
    solve->add_option("--out-summary", summary_path, "summary JSON path");

    auto* sweep = app.add_subcommand("sweep", "power/error trade-off table");
    std::string iters_text = "10:300:10", sweep_out = "sweep.csv";
    int experiments = 151, threads = 0;
    bool emit_gnuplot = false;
    add_problem_flags(sweep, pf);
    sweep->add_option("--max-iters", iters_text, "comma list or lo:hi:step");
    sweep->add_option("--experiments", experiments, "instance count");
    sweep->add_option("--threads", threads, "worker threads (0 = SPLITKIT_THREADS/auto)");
    sweep->add_option("--out", sweep_out, "sweep CSV path");
    sweep->add_flag("--emit-gnuplot", emit_gnuplot, "write a gnuplot script alongside");

    auto* bound = app.add_subcommand("bound", "suboptimality-bound report");
    std::string bound_out = "bound.csv";
    add_problem_flags(bound, pf);
    bound->add_option("--scheme", scheme, "classical-admm|wl-admm|wlm-admm|dfgpgd")
        ->check(CLI::IsMember({"classical-admm", "wl-admm", "wlm-admm", "dfgpgd"}));
    bound->add_option("--max-iter", max_iter, "fixed trip count");
    bound->add_option("--eps0", eps0_x, "stochastic prox error budget");
    bound->add_option("--schedule", schedule, "const|over-k|over-k2");
    bound->add_option("--error-seed", error_seed, "error-direction seed");
    bound->add_option("--out", bound_out, "bound CSV path");

    auto* stab = app.add_subcommand("stability", "absolute-stability certificate");
    std::string cert_out = "certificate.json";
    double mu = 0.1;
    add_problem_flags(stab, pf);
    stab->add_option("--mu", mu, "Moreau smoothing parameter");
    stab->add_option("--out", cert_out, "certificate JSON path");

    try {
        try {
            std::vector<std::string> raw(argv + 1, argv + argc);
            std::vector<std::string> args = expand_config(raw);
            std::reverse(args.begin(), args.end());  // CLI11 consumes reversed
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        if (gen->parsed()) return cmd_generate(pf, gen_out);
        if (solve->parsed())
            return cmd_solve(pf, scheme, max_iter, arith, overflow, quantize, eps0_x,
                             eps0_z, schedule, error_seed, trace_path, summary_path);
        if (sweep->parsed())
            return cmd_sweep(pf, iters_text, experiments, threads, sweep_out,
                             emit_gnuplot);
        if (bound->parsed())
            return cmd_bound(pf, scheme, max_iter, eps0_x, schedule, error_seed,
                             bound_out);
        if (stab->parsed()) return cmd_stability(pf, mu, cert_out);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
