#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "rsmerton/config.hpp"
#include "rsmerton/laplace.hpp"
#include "rsmerton/portfolio.hpp"
#include "test_support.hpp"

namespace {

struct CliResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args, const std::string& tag) {
    const std::string capture = "/tmp/rsm_cli_" + tag + ".log";
    const std::string cmd = std::string(RSM_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(capture)};
}

std::string config_path(const char* name) { return std::string(RSM_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("value command prints the reference digits") {
    const auto res = run_cli("value --config " + config_path("two_state.cfg"), "value");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("1.0419994") != std::string::npos);
    CHECK(res.output.find("1.0394098") != std::string::npos);
    CHECK(res.output.find("28.9779109") != std::string::npos);
    CHECK(res.output.find("23.8092044") != std::string::npos);
}

TEST_CASE("value command prints the three-regime table digits") {
    const auto res = run_cli("value --config " + config_path("three_state.cfg"), "value3");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("1.0241558") != std::string::npos);
    CHECK(res.output.find("7.9600128") != std::string::npos);
    CHECK(res.output.find("6.7106026") != std::string::npos);
}

TEST_CASE("value command at tau = 0 prints unit g") {
    const auto res =
        run_cli("value --config " + config_path("two_state.cfg") + " --tau 0 --gamma 0.1", "tau0");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("1.0000000") != std::string::npos);
}

TEST_CASE("value CSV carries full precision") {
    const std::string csv_path = "/tmp/rsm_value.csv";
    const auto res = run_cli("value --config " + config_path("two_state.cfg") +
                                 " --gamma 0.1 --out " + csv_path,
                             "valuecsv");
    REQUIRE(res.exit_code == 0);

    std::ifstream csv(csv_path);
    std::string header, row1;
    std::getline(csv, header);
    std::getline(csv, row1);
    CHECK(header == "gamma,regime,g,V");

    // g column round-trips bit-exactly to the library value
    const rsm::ValueSolution sol = rsm::solve_g(rsm::test::two_state_model(0.1), 0.5);
    std::stringstream ss(row1);
    std::string cell;
    std::getline(ss, cell, ',');  // gamma
    std::getline(ss, cell, ',');  // regime
    std::getline(ss, cell, ',');  // g
    CHECK(std::stod(cell) == sol.g_at(0, 0.5));
}

TEST_CASE("merton-limit command reports the sweep and the baseline factor") {
    const auto res =
        run_cli("merton-limit --config " + config_path("two_state.cfg") + " --gamma 0.1",
                "merton");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("1.0671570") != std::string::npos);  // q1 = 0.001 row
    CHECK(res.output.find("merton factor") != std::string::npos);
    CHECK(res.output.find("1.0671590") != std::string::npos);
}

TEST_CASE("merton-limit accepts an absorbing q1 = 0") {
    const auto res = run_cli(
        "merton-limit --config " + config_path("two_state.cfg") + " --gamma 0.1 --q1 0", "mzero");
    CHECK(res.exit_code == 0);
    // with q1 = 0 the first regime is Merton exactly: the digits appear both
    // in the sweep row and in the factor line
    std::size_t hits = 0;
    for (std::size_t pos = res.output.find("1.0671590"); pos != std::string::npos;
         pos = res.output.find("1.0671590", pos + 1))
        ++hits;
    CHECK(hits >= 2);
}

TEST_CASE("oracle-check passes on the single-regime baseline") {
    const auto res = run_cli(
        "oracle-check --config " + config_path("merton.cfg") + " --paths 2000", "oracle1");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("all tolerances met") != std::string::npos);
}

TEST_CASE("oracle-check passes on the bull/bear model") {
    const auto res = run_cli(
        "oracle-check --config " + config_path("two_state.cfg") + " --paths 200000", "oracle2");
    CHECK(res.exit_code == 0);
}

TEST_CASE("simulate writes per-path rows and a closure summary") {
    const std::string csv_path = "/tmp/rsm_sim.csv";
    const auto res = run_cli("simulate --config " + config_path("two_state.cfg") +
                                 " --paths 2000 --seed 7 --out " + csv_path,
                             "sim");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("z-score") != std::string::npos);

    std::ifstream csv(csv_path);
    std::string line;
    int rows = 0;
    std::getline(csv, line);
    CHECK(line == "path,terminal_wealth,terminal_utility");
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 2000);
}

TEST_CASE("simulate with a single path reports NaN standard error") {
    const auto res = run_cli(
        "simulate --config " + config_path("two_state.cfg") + " --paths 1", "sim1");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("nan") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical CSV output") {
    const std::string a = "/tmp/rsm_det_a.csv";
    const std::string b = "/tmp/rsm_det_b.csv";
    const std::string args = "simulate --config " + config_path("two_state.cfg") +
                             " --paths 500 --seed 99 --out ";
    REQUIRE(run_cli(args + a, "deta").exit_code == 0);
    REQUIRE(run_cli(args + b, "detb").exit_code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());

    const auto other = run_cli("simulate --config " + config_path("two_state.cfg") +
                                   " --paths 500 --seed 100 --out " + a,
                               "detc");
    REQUIRE(other.exit_code == 0);
    CHECK(slurp(a) != slurp(b));
}

TEST_CASE("invalid model parameters exit with the validation code") {
    const std::string bad = "/tmp/rsm_bad.cfg";
    {
        std::ofstream out(bad);
        out << "regimes = 2\nq = [-20, 20, 30, -30]\nmu = [0.5, 0.1]\n"
               "sigma = [0, 0.5]\nr = [0.05, 0.05]\ngamma = 0.1\nhorizon = 0.5\n";
    }
    const auto res = run_cli("value --config " + bad, "bad");
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("NegativeRate") != std::string::npos);
}

TEST_CASE("config syntax errors exit with the validation code and a line number") {
    const std::string bad = "/tmp/rsm_syntax.cfg";
    {
        std::ofstream out(bad);
        out << "regimes = 2\nnot a key value pair\n";
    }
    const auto res = run_cli("value --config " + bad, "syntax");
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("line 2") != std::string::npos);
}

TEST_CASE("missing config exits with the I/O code") {
    const auto res = run_cli("value --config /nonexistent/x.cfg", "missing");
    CHECK(res.exit_code == 3);
}
