#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsmerton/config.hpp"
#include "rsmerton/laplace.hpp"
#include "rsmerton/model.hpp"
#include "rsmerton/oracles.hpp"
#include "rsmerton/portfolio.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

// shortest exact decimal form; used for all CSV payloads
std::string csv_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fixed7(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.7f", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) {
        if (path.empty()) return;
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) throw std::ios_base::failure("cannot open output file: " + path);
        active_ = true;
    }

    bool active() const { return active_; }

    void row(const std::vector<std::string>& cells) {
        if (!active_) return;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) file_ << ',';
            file_ << cells[k];
        }
        file_ << '\n';
        if (!file_) throw std::ios_base::failure("write failure on CSV output");
    }

private:
    std::ofstream file_;
    bool active_ = false;
};

struct CommonOptions {
    std::string config_path;
    std::vector<double> gamma;
    std::optional<double> tau;
    std::optional<double> x0;
    std::optional<long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<std::string> out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "model configuration file")->required();
        cmd->add_option("--gamma", gamma, "risk-aversion sweep, comma separated")
            ->delimiter(',');
        cmd->add_option("--tau", tau, "time to go T - t");
        cmd->add_option("--x0", x0, "initial wealth");
        cmd->add_option("--paths", paths, "Monte Carlo path count");
        cmd->add_option("--seed", seed, "Monte Carlo seed");
        cmd->add_option("--steps", steps, "ODE oracle step count");
        cmd->add_option("--out", out, "CSV output path");
    }

    rsm::RunConfig load() const {
        rsm::RunConfig config = rsm::load_config_file(config_path);
        if (!gamma.empty()) {
            config.gamma_list = gamma;
            config.gamma = gamma.front();
        }
        if (tau) config.horizon = config.t + *tau;
        if (x0) config.x0 = *x0;
        if (paths) config.paths = *paths;
        if (seed) config.seed = *seed;
        if (steps) config.steps = *steps;
        if (out) config.out = *out;

        const auto errors = rsm::check_config(config);
        if (!errors.empty()) {
            std::string joined = "invalid configuration:";
            for (const auto& e : errors) joined += "\n  " + e;
            throw std::runtime_error(joined);
        }
        return config;
    }
};

int cmd_value(const rsm::RunConfig& config) {
    CsvWriter csv(config.out);
    csv.row({"gamma", "regime", "g", "V"});

    const double tau = config.horizon - config.t;
    std::printf("%-8s %-7s %-14s %-14s\n", "gamma", "regime", "g(i,tau)", "V(x0,t,i)");
    for (double gamma : config.gammas()) {
        const rsm::MarketModel model = rsm::validate_model(config.to_model(gamma));
        const rsm::ValueSolution sol = rsm::solve_g(model, config.horizon);
        for (std::size_t i = 0; i < model.regimes(); ++i) {
            const double g = sol.g_at(static_cast<int>(i), tau);
            const double v = rsm::value(sol, config.x0, config.t, static_cast<int>(i));
            std::printf("%-8g %-7zu %-14s %-14s\n", gamma, i + 1, fixed7(g).c_str(),
                        fixed7(v).c_str());
            csv.row({csv_double(gamma), std::to_string(i + 1), csv_double(g), csv_double(v)});
        }
    }
    return kExitOk;
}

int cmd_merton_limit(const rsm::RunConfig& config) {
    if (config.regimes != 2) {
        std::fprintf(stderr, "merton-limit requires a two-regime configuration\n");
        return kExitValidation;
    }
    std::vector<double> q1_list = config.q1_list;
    if (q1_list.empty()) q1_list = {20.0, 10.0, 1.0, 0.1, 0.001};

    CsvWriter csv(config.out);
    csv.row({"q1", "g1", "g2"});

    const double tau = config.horizon - config.t;
    std::printf("%-10s %-14s %-14s\n", "q1", "g(1,tau)", "g(2,tau)");
    double last_g1 = 0.0;
    for (double q1 : q1_list) {
        rsm::RunConfig swept = config;
        swept.q[0] = -q1;
        swept.q[1] = q1;
        const rsm::MarketModel model = rsm::validate_model(swept.to_model());
        const rsm::ValueSolution sol = rsm::solve_g(model, config.horizon);
        const double g1 = sol.g_at(0, tau);
        const double g2 = sol.g_at(1, tau);
        last_g1 = g1;
        std::printf("%-10g %-14s %-14s\n", q1, fixed7(g1).c_str(), fixed7(g2).c_str());
        csv.row({csv_double(q1), csv_double(g1), csv_double(g2)});
    }

    const double factor =
        rsm::merton_factor(config.mu[0], config.sigma[0], config.r[0], config.gamma, tau);
    std::printf("merton factor (regime 1): %s\n", fixed7(factor).c_str());
    std::printf("gap at q1=%g: %.3e\n", q1_list.back(), std::abs(last_g1 - factor));
    return kExitOk;
}

int cmd_oracle_check(const rsm::RunConfig& config) {
    const rsm::MarketModel model = rsm::validate_model(config.to_model());
    const double tau = config.horizon - config.t;

    const rsm::ValueSolution sol = rsm::solve_g(model, config.horizon);
    const std::vector<double> ode = rsm::ode_g(model, tau, config.steps);
    const std::vector<double> mat = rsm::matexp_g(model, tau);

    CsvWriter csv(config.out);
    csv.row({"regime", "laplace", "ode", "matexp", "mc", "mc_se", "rel_ode", "rel_matexp", "z"});

    bool ok = true;
    std::printf("%-7s %-13s %-13s %-13s %-13s %-10s %-9s %-9s %-7s\n", "regime", "laplace", "ode",
                "matexp", "mc", "mc_se", "rel_ode", "rel_mat", "status");
    for (std::size_t i = 0; i < model.regimes(); ++i) {
        const double lap = sol.g_at(static_cast<int>(i), tau);
        const rsm::PathEstimate mc =
            rsm::mc_g(model, static_cast<int>(i), tau, config.paths, config.seed);
        const double rel_ode = std::abs(lap - ode[i]) / std::abs(ode[i]);
        const double rel_mat = std::abs(lap - mat[i]) / std::abs(mat[i]);
        const double band = 3.0 * mc.std_error + 1e-12 * std::abs(lap);
        const double z = mc.std_error > 0.0 ? (mc.mean - lap) / mc.std_error : 0.0;
        const bool pass = rel_ode <= 1e-7 && rel_mat <= 1e-8 && std::abs(mc.mean - lap) <= band;
        ok = ok && pass;
        std::printf("%-7zu %-13.9f %-13.9f %-13.9f %-13.9f %-10.2e %-9.2e %-9.2e %-7s\n", i + 1,
                    lap, ode[i], mat[i], mc.mean, mc.std_error, rel_ode, rel_mat,
                    pass ? "ok" : "FAIL");
        csv.row({std::to_string(i + 1), csv_double(lap), csv_double(ode[i]), csv_double(mat[i]),
                 csv_double(mc.mean), csv_double(mc.std_error), csv_double(rel_ode),
                 csv_double(rel_mat), csv_double(z)});
    }
    std::printf("oracle agreement: %s\n", ok ? "all tolerances met" : "TOLERANCE BREACH");
    return ok ? kExitOk : kExitNumerical;
}

int cmd_simulate(const rsm::RunConfig& config) {
    const rsm::MarketModel model = rsm::validate_model(config.to_model());
    if (!(config.x0 > 0.0)) {
        std::fprintf(stderr, "simulate requires x0 > 0\n");
        return kExitValidation;
    }
    const double tau = config.horizon - config.t;
    const int initial_regime = 0;  // simulation starts in the first regime

    CsvWriter csv(config.out);
    csv.row({"path", "terminal_wealth", "terminal_utility"});

    // same draws as expected_utility_mc: stream k drives path k
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    for (long k = 0; k < config.paths; ++k) {
        rsm::PathRng rng(config.seed, static_cast<std::uint64_t>(k));
        const rsm::WealthPath path =
            rsm::simulate_optimal_wealth(model, config.x0, initial_regime, tau, 1, rng);
        const double wealth = path.wealth.back();
        const double utility = path.terminal_utility;
        csv.row({std::to_string(k), csv_double(wealth), csv_double(utility)});
        ++count;
        const double d = utility - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (utility - mean);
    }

    const double se = config.paths > 1
                          ? std::sqrt(m2 / static_cast<double>(config.paths - 1) /
                                      static_cast<double>(config.paths))
                          : std::numeric_limits<double>::quiet_NaN();
    const rsm::ValueSolution sol = rsm::solve_g(model, config.horizon);
    const double v = rsm::value(sol, config.x0, config.t, initial_regime);
    const double z = (mean - v) / se;
    std::printf("paths:          %ld\n", config.paths);
    std::printf("mc mean U(X_T): %.9f\n", mean);
    std::printf("mc std error:   %.3e\n", se);
    std::printf("laplace value:  %.9f\n", v);
    std::printf("z-score:        %.3f\n", z);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regime-switching Merton portfolio solver"};
    app.require_subcommand(1);

    CommonOptions value_opts, merton_opts, oracle_opts, simulate_opts;
    std::vector<double> q1_list;

    CLI::App* value_cmd = app.add_subcommand("value", "value function and strategy table");
    value_opts.attach(value_cmd);
    CLI::App* merton_cmd =
        app.add_subcommand("merton-limit", "two-regime sweep of q1 toward the Merton baseline");
    merton_opts.attach(merton_cmd);
    merton_cmd->add_option("--q1", q1_list, "q1 sweep values, comma separated")->delimiter(',');
    CLI::App* oracle_cmd =
        app.add_subcommand("oracle-check", "Laplace vs ODE vs matrix-exponential vs Monte Carlo");
    oracle_opts.attach(oracle_cmd);
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "optimal-wealth paths and expected-utility closure");
    simulate_opts.attach(simulate_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (value_cmd->parsed()) return cmd_value(value_opts.load());
        if (merton_cmd->parsed()) {
            rsm::RunConfig config = merton_opts.load();
            if (!q1_list.empty()) config.q1_list = q1_list;
            return cmd_merton_limit(config);
        }
        if (oracle_cmd->parsed()) return cmd_oracle_check(oracle_opts.load());
        if (simulate_cmd->parsed()) return cmd_simulate(simulate_opts.load());
    } catch (const rsm::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const rsm::ConfigParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const rsm::DegenerateSystem& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitNumerical;
    } catch (const rsm::InconsistentPoles& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitNumerical;
    } catch (const rsm::RootFindingFailure& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitNumerical;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
