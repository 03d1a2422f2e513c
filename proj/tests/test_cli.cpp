#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string bin() {
    const char* b = std::getenv("SPLITKIT_BIN");
    REQUIRE_MESSAGE(b != nullptr, "SPLITKIT_BIN must point at the CLI binary");
    return std::string(b);
}

int run_cli(const std::string& args) {
    const std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
#if defined(_WIN32)
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("generate writes byte-identical instances per seed") {
    CHECK(run_cli("generate --n 24 --m 18 --s 2 --seed 5 --out cli_gen_a.json") == 0);
    CHECK(run_cli("generate --n 24 --m 18 --s 2 --seed 5 --out cli_gen_b.json") == 0);
    CHECK(run_cli("generate --n 24 --m 18 --s 2 --seed 6 --out cli_gen_c.json") == 0);
    const std::string a = slurp("cli_gen_a.json");
    CHECK(!a.empty());
    CHECK(a == slurp("cli_gen_b.json"));
    CHECK(a != slurp("cli_gen_c.json"));
    std::remove("cli_gen_b.json");
    std::remove("cli_gen_c.json");
}

TEST_CASE("usage errors exit with code 2") {
    // Unreconstructible without --force.
    CHECK(run_cli("generate --n 100 --m 10 --s 50 --out cli_bad.json") == 2);
    // Unknown scheme name.
    CHECK(run_cli("solve --n 10 --m 8 --s 1 --scheme admm") == 2);
    // Missing subcommand.
    CHECK(run_cli("") == 2);
    // max-iter below 1.
    CHECK(run_cli("solve --n 10 --m 8 --s 1 --max-iter 0 --out-trace ''") == 2);
    // Fixed point plus error injection.
    CHECK(run_cli("solve --n 10 --m 8 --s 1 --arith q16.8 --eps0-x 1e-3") == 2);
}

TEST_CASE("solve emits a schema-tagged trace and a summary") {
    const int rc = run_cli(
        "solve --problem cli_gen_a.json --scheme dfgpgd --max-iter 25 "
        "--out-trace cli_trace.csv --out-summary cli_summary.json");
    CHECK(rc == 0);

    std::ifstream in("cli_trace.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "# splitkit-schema v1");
    std::getline(in, line);  // column header
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    in.close();
    CHECK(rows == 25);

    const std::string summary = slurp("cli_summary.json");
    CHECK(summary.find("splitkit-summary-v1") != std::string::npos);
    CHECK(summary.find("\"scheme\"") != std::string::npos);
    CHECK(summary.find("\"total_flops\"") != std::string::npos);
    std::remove("cli_trace.csv");
    std::remove("cli_summary.json");
}

TEST_CASE("config file supplies defaults, explicit flags win") {
    {
        std::ofstream cfg("cli_cfg.json");
        cfg << "{\"n\": 24, \"m\": 18, \"s\": 2, \"seed\": 5, "
               "\"scheme\": \"classical-admm\", \"max-iter\": 7}\n";
    }
    CHECK(run_cli("solve --config cli_cfg.json --problem cli_gen_a.json "
                  "--out-trace cli_cfg_trace.csv --out-summary ''") == 0);
    std::ifstream in("cli_cfg_trace.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line.find("k,") != 0) ++rows;
    in.close();
    CHECK(rows == 7);  // max-iter came from the config

    // Explicit flag overrides the config value.
    CHECK(run_cli("solve --config cli_cfg.json --problem cli_gen_a.json "
                  "--max-iter 3 --out-trace cli_cfg_trace.csv --out-summary ''") == 0);
    std::ifstream in2("cli_cfg_trace.csv");
    rows = 0;
    while (std::getline(in2, line))
        if (!line.empty() && line[0] != '#' && line.find("k,") != 0) ++rows;
    in2.close();
    CHECK(rows == 3);
    std::remove("cli_cfg_trace.csv");
    std::remove("cli_cfg.json");
}

TEST_CASE("bound subcommand verifies the averaged inequality") {
    CHECK(run_cli("bound --n 16 --m 12 --s 1 --seed 2 --scheme dfgpgd "
                  "--max-iter 60 --eps0 1e-4 --out cli_bound.csv") == 0);
    std::ifstream in("cli_bound.csv");
    std::string line;
    std::getline(in, line);
    in.close();
    CHECK(line == "# splitkit-schema v1");
    std::remove("cli_bound.csv");
}

TEST_CASE("sweep writes the table and optional gnuplot script") {
    CHECK(run_cli("sweep --n 24 --m 18 --s 2 --seed 9 --experiments 2 "
                  "--max-iters 10,20 --threads 1 --out cli_sweep.csv "
                  "--emit-gnuplot") == 0);
    std::ifstream in("cli_sweep.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "# splitkit-schema v1");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line.find("scheme,") != 0) ++rows;
    in.close();
    CHECK(rows == 2 * 2 * 2);  // experiments x schemes x trip counts
    CHECK(!slurp("cli_sweep.csv.gp").empty());
    std::remove("cli_sweep.csv");
    std::remove("cli_sweep.csv.gp");
}

TEST_CASE("stability subcommand emits a reasoned certificate") {
    CHECK(run_cli("stability --n 8 --m 7 --s 1 --seed 3 --out cli_cert.json") == 0);
    const std::string cert = slurp("cli_cert.json");
    CHECK(cert.find("splitkit-certificate-v1") != std::string::npos);
    CHECK(cert.find("failure_reason") != std::string::npos);
    std::remove("cli_cert.json");
    std::remove("cli_gen_a.json");
}

TEST_CASE("fixed point solve runs end to end") {
    CHECK(run_cli("solve --n 10 --m 8 --s 1 --arith q16.8 --overflow saturate "
                  "--quantize round-even --max-iter 5 --out-trace '' "
                  "--out-summary cli_q.json") == 0);
    const std::string summary = slurp("cli_q.json");
    CHECK(summary.find("Q16.8") != std::string::npos);
    std::remove("cli_q.json");
}
